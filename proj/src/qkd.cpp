#include "rsplab/qkd.h"

#include <cmath>
#include <stdexcept>

namespace rsplab::qkd {

namespace {

using fock::cxd;
using Eigen::Matrix2cd;
using Eigen::Vector4cd;
using Eigen::VectorXcd;

Matrix2cd pauli_x() {
  Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
Matrix2cd pauli_z() {
  Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
Matrix2cd identity2() { return Matrix2cd::Identity(); }

// Teleportation correction on the receiving qubit of a swap.
Matrix2cd swap_correction(Bell b) {
  switch (b) {
    case Bell::PhiPlus: return identity2();
    case Bell::PsiPlus: return pauli_x();
    case Bell::PhiMinus: return pauli_z();
    case Bell::PsiMinus: return pauli_x() * pauli_z();
  }
  throw std::logic_error("unreachable");
}

// Correction on Bob's register after the final projection.
Matrix2cd final_correction(Bell b) {
  switch (b) {
    case Bell::PhiPlus: return identity2();
    case Bell::PsiPlus: return pauli_z();
    case Bell::PhiMinus: return pauli_x();
    case Bell::PsiMinus: return pauli_z() * pauli_x();
  }
  throw std::logic_error("unreachable");
}

std::string correction_name(Bell b, bool final_step) {
  switch (b) {
    case Bell::PhiPlus: return "I";
    case Bell::PsiPlus: return final_step ? "Z" : "X";
    case Bell::PhiMinus: return final_step ? "X" : "Z";
    case Bell::PsiMinus: return final_step ? "ZX" : "XZ";
  }
  throw std::logic_error("unreachable");
}

// First qubit most significant.
int bit_of(int index, int nq, int q) { return (index >> (nq - 1 - q)) & 1; }

void apply_single(VectorXcd& psi, int nq, int q, const Matrix2cd& u) {
  const int stride = 1 << (nq - 1 - q);
  for (int base = 0; base < static_cast<int>(psi.size()); ++base) {
    if ((base & stride) != 0) continue;
    const cxd a = psi[base], b = psi[base + stride];
    psi[base] = u(0, 0) * a + u(0, 1) * b;
    psi[base + stride] = u(1, 0) * a + u(1, 1) * b;
  }
}

// Projects qubits (q1, q2) onto <bell|, removing them from the register.
VectorXcd project_pair(const VectorXcd& psi, int nq, int q1, int q2,
                       const Vector4cd& bell, double* prob) {
  VectorXcd out = VectorXcd::Zero(psi.size() / 4);
  const int lo = std::min(q1, q2), hi = std::max(q1, q2);
  for (int idx = 0; idx < static_cast<int>(psi.size()); ++idx) {
    const int b1 = bit_of(idx, nq, q1);
    const int b2 = bit_of(idx, nq, q2);
    // Remove bits lo and hi from idx (first qubit most significant).
    const int shift_hi = nq - 1 - hi, shift_lo = nq - 1 - lo;
    const int low = idx & ((1 << shift_hi) - 1);
    const int mid = (idx >> (shift_hi + 1)) & ((1 << (shift_lo - shift_hi - 1)) - 1);
    const int high = idx >> (shift_lo + 1);
    const int rest = (((high << (shift_lo - shift_hi - 1)) | mid) << shift_hi) | low;
    out[rest] += std::conj(bell[b1 * 2 + b2]) * psi[idx];
  }
  *prob = out.squaredNorm();
  if (*prob > 1e-300) out /= std::sqrt(*prob);
  return out;
}

}  // namespace

std::string bell_name(Bell b) {
  switch (b) {
    case Bell::PhiPlus: return "phi+";
    case Bell::PsiPlus: return "psi+";
    case Bell::PhiMinus: return "phi-";
    case Bell::PsiMinus: return "psi-";
  }
  throw std::logic_error("unreachable");
}

Vector4cd bell_vector(Bell b) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector4cd v = Vector4cd::Zero();
  switch (b) {
    case Bell::PhiPlus: v[0] = r; v[3] = r; break;
    case Bell::PhiMinus: v[0] = r; v[3] = -r; break;
    case Bell::PsiPlus: v[1] = r; v[2] = r; break;
    case Bell::PsiMinus: v[1] = r; v[2] = -r; break;
  }
  return v;
}

double bell_xi(double alpha) { return alpha / std::sqrt(1.0 + alpha * alpha); }

Vector4cd purified_sc_rsp(double alpha, double xi) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(xi > 0.0 && xi <= 1.0))
    throw std::invalid_argument("xi must be in (0, 1]");
  const double a = alpha * std::sqrt(1.0 - xi * xi);
  const double r = 1.0 / std::sqrt(2.0);
  Vector4cd v;
  // (register, node): |0>(|0>-|1>)/sqrt2 * a + |1>(|0>+|1>)/sqrt2 * xi
  v[0] = a * r;
  v[1] = -a * r;
  v[2] = xi * r;
  v[3] = xi * r;
  return v / v.norm();
}

ChainResult swap_and_project(double alpha, double xi, int swap_count,
                             const std::vector<Bell>& patterns) {
  if (swap_count < 0) throw std::invalid_argument("swap_count must be >= 0");
  if (static_cast<int>(patterns.size()) != swap_count + 1)
    throw std::invalid_argument(
        "need swap_count + 1 Bell patterns (the last is the final "
        "projection)");

  // Build [A_reg, A_node] (x) link pairs (x) [B_reg, B_node].
  const int nq = 4 + 2 * swap_count;
  const Vector4cd edge = purified_sc_rsp(alpha, xi);
  const Vector4cd link = bell_vector(Bell::PhiPlus);
  VectorXcd psi = edge;
  for (int s = 0; s < swap_count; ++s) {
    VectorXcd next(psi.size() * 4);
    for (int i = 0; i < psi.size(); ++i)
      next.segment(i * 4, 4) = psi[i] * link;
    psi = std::move(next);
  }
  {
    VectorXcd next(psi.size() * 4);
    for (int i = 0; i < psi.size(); ++i)
      next.segment(i * 4, 4) = psi[i] * edge;
    psi = std::move(next);
  }

  // Track original qubit ids through removals.
  std::vector<int> ids(nq);
  for (int i = 0; i < nq; ++i) ids[i] = i;
  auto position_of = [&](int id) {
    for (int k = 0; k < static_cast<int>(ids.size()); ++k)
      if (ids[k] == id) return k;
    throw std::logic_error("qubit id lost");
  };

  ChainResult result;
  result.joint_probability = 1.0;
  int partner = 1;  // A_node
  const int b_reg = nq - 2, b_node = nq - 1;
  int cur_nq = nq;
  for (int s = 0; s < swap_count; ++s) {
    const int l1 = 2 + 2 * s, l2 = 3 + 2 * s;
    const int q1 = position_of(partner), q2 = position_of(l1);
    double p = 0.0;
    psi = project_pair(psi, cur_nq, q1, q2, bell_vector(patterns[s]), &p);
    result.joint_probability *= p;
    ids.erase(ids.begin() + std::max(q1, q2));
    ids.erase(ids.begin() + std::min(q1, q2));
    cur_nq -= 2;
    apply_single(psi, cur_nq, position_of(l2), swap_correction(patterns[s]));
    result.corrections.push_back("swap " + std::to_string(s + 1) + ": " +
                                 bell_name(patterns[s]) + " -> " +
                                 correction_name(patterns[s], false));
    partner = l2;
  }
  {
    const Bell last = patterns[swap_count];
    const int q1 = position_of(partner), q2 = position_of(b_node);
    double p = 0.0;
    psi = project_pair(psi, cur_nq, q1, q2, bell_vector(last), &p);
    result.joint_probability *= p;
    ids.erase(ids.begin() + std::max(q1, q2));
    ids.erase(ids.begin() + std::min(q1, q2));
    cur_nq -= 2;
    apply_single(psi, cur_nq, position_of(b_reg), final_correction(last));
    result.corrections.push_back("final: " + bell_name(last) + " -> " +
                                 correction_name(last, true));
  }
  if (ids != std::vector<int>{0, b_reg})
    throw std::logic_error("chain bookkeeping failed");

  result.state = psi;
  result.phi_plus_fidelity =
      std::norm(bell_vector(Bell::PhiPlus).dot(result.state));
  return result;
}

Correlations correlation_check(const Vector4cd& state) {
  Correlations c;
  c.same_key_probability = std::norm(state[0]) + std::norm(state[3]);
  Eigen::Matrix4cd xx = Eigen::Matrix4cd::Zero();
  const Matrix2cd x = pauli_x();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      xx.block(a * 2, b * 2, 2, 2) = x(a, b) * x;
  c.xx_expectation = (state.adjoint() * xx * state)(0).real();
  return c;
}

// ---------------------------------------------------------------------------
// Double-click purified source

fock::QuantumState purified_dc_state(Basis basis, double alpha, int cutoff) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  fock::SubsystemSpec spec{{fock::Subsystem::qubit("reg"),
                            fock::Subsystem::mode("a", cutoff),
                            fock::Subsystem::mode("b", cutoff)}};
  const int d = cutoff + 1;
  fock::Vec psi = fock::Vec::Zero(spec.total_dim());
  const double r = 1.0 / std::sqrt(2.0);
  double deficit = 0.0;
  for (int reg = 0; reg < 2; ++reg) {
    cxd aa, ab;
    if (basis == Basis::Z) {
      aa = reg == 0 ? alpha : 0.0;
      ab = reg == 1 ? alpha : 0.0;
    } else {
      aa = alpha / std::sqrt(2.0);
      ab = (reg == 0 ? 1.0 : -1.0) * alpha / std::sqrt(2.0);
    }
    const fock::Vec ca = fock::coherent_amps(aa, cutoff);
    const fock::Vec cb = fock::coherent_amps(ab, cutoff);
    deficit = std::max(deficit, fock::coherent_tail(std::norm(aa), cutoff) +
                                    fock::coherent_tail(std::norm(ab), cutoff));
    for (int na = 0; na < d; ++na)
      for (int nb = 0; nb < d; ++nb)
        psi[(reg * d + na) * d + nb] += r * ca[na] * cb[nb];
  }
  return fock::QuantumState::pure(std::move(spec), std::move(psi), deficit);
}

std::vector<BsmOutcome> dc_purified_bsm(Basis basis, double alpha,
                                        int cutoff) {
  const int d = cutoff + 1;
  const fock::Mat& V = fock::beamsplitter_matrix(cutoff);
  const Matrix2cd h = [] {
    Matrix2cd m;
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
  }();

  std::vector<BsmOutcome> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (const bool a_plus : {true, false}) {
    for (const bool b_plus : {true, false}) {
      const int ia = a_plus ? 1 * d + 0 : 0 * d + 1;  // rail-a pair outputs
      const int ib = b_plus ? 1 * d + 0 : 0 * d + 1;  // rail-b pair outputs
      Vector4cd amp = Vector4cd::Zero();  // (register, node qubit)
      for (int reg = 0; reg < 2; ++reg) {
        cxd aa, ab;
        if (basis == Basis::Z) {
          aa = reg == 0 ? alpha : 0.0;
          ab = reg == 1 ? alpha : 0.0;
        } else {
          aa = alpha / std::sqrt(2.0);
          ab = (reg == 0 ? 1.0 : -1.0) * alpha / std::sqrt(2.0);
        }
        const fock::Vec ca = fock::coherent_amps(aa, cutoff);
        const fock::Vec cb = fock::coherent_amps(ab, cutoff);
        for (int q = 0; q < 2; ++q) {
          // Node photon in rail a' for q = 0, rail b' for q = 1.
          fock::Vec sa = fock::Vec::Zero(d);
          sa[q == 0 ? 1 : 0] = 1.0;
          fock::Vec sb = fock::Vec::Zero(d);
          sb[q == 1 ? 1 : 0] = 1.0;
          cxd amp_a = 0.0, amp_b = 0.0;
          for (int n1 = 0; n1 < d; ++n1)
            for (int n2 = 0; n2 < d; ++n2) {
              if (V(ia, n1 * d + n2) != 0.0)
                amp_a += V(ia, n1 * d + n2) * sa[n1] * ca[n2];
              if (V(ib, n1 * d + n2) != 0.0)
                amp_b += V(ib, n1 * d + n2) * sb[n1] * cb[n2];
            }
          amp[reg * 2 + q] += r * r * amp_a * amp_b;
        }
      }
      BsmOutcome o;
      o.pattern = std::string("a") + (a_plus ? "+" : "-") + "b" +
                  (b_plus ? "+" : "-");
      o.probability = amp.squaredNorm();
      Vector4cd v = amp / std::sqrt(o.probability);
      o.fidelity = 0.0;
      for (Bell b : kAllBell) {
        const double f = std::norm(bell_vector(b).dot(v));
        if (f > o.fidelity) {
          o.fidelity = f;
          o.closest = b;
          o.hadamard_on_node = false;
        }
        // Node-side Hadamard rotation of the Bell frame.
        Vector4cd hb;
        for (int a = 0; a < 2; ++a)
          for (int c = 0; c < 2; ++c)
            hb[a * 2 + c] = h(c, 0) * bell_vector(b)[a * 2 + 0] +
                            h(c, 1) * bell_vector(b)[a * 2 + 1];
        const double fh = std::norm(hb.dot(v));
        if (fh > o.fidelity) {
          o.fidelity = fh;
          o.closest = b;
          o.hadamard_on_node = true;
        }
      }
      out.push_back(std::move(o));
    }
  }
  return out;
}

}  // namespace rsplab::qkd
