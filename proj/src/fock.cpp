#include "rsplab/fock.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace rsplab::fock {

namespace {

double factorial_d(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171, 1.0);
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(n);
}

double binom_d(int n, int k) {
  return factorial_d(n) / (factorial_d(k) * factorial_d(n - k));
}

}  // namespace

// ---------------------------------------------------------------------------
// Subsystems

Subsystem Subsystem::mode(std::string label, int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("mode cutoff must be >= 1");
  return Subsystem{PhotonicMode, cutoff, std::move(label)};
}

Subsystem Subsystem::qubit(std::string label) {
  return Subsystem{Qubit, 0, std::move(label)};
}

int SubsystemSpec::total_dim() const {
  int d = 1;
  for (const auto& p : parts) d *= p.dim();
  return d;
}

int SubsystemSpec::index_of(const std::string& label) const {
  for (int k = 0; k < static_cast<int>(parts.size()); ++k)
    if (parts[k].label == label) return k;
  throw std::invalid_argument("unknown subsystem label: " + label);
}

int SubsystemSpec::dim_before(int k) const {
  int d = 1;
  for (int i = 0; i < k; ++i) d *= parts[i].dim();
  return d;
}

int SubsystemSpec::dim_after(int k) const {
  int d = 1;
  for (int i = k + 1; i < static_cast<int>(parts.size()); ++i)
    d *= parts[i].dim();
  return d;
}

// ---------------------------------------------------------------------------
// States

double QuantumState::norm2_or_trace() const {
  if (is_pure) return amps.squaredNorm();
  return rho.trace().real();
}

Mat QuantumState::density() const {
  if (is_pure) return amps * amps.adjoint();
  return rho;
}

QuantumState QuantumState::pure(SubsystemSpec spec, Vec amps, double deficit) {
  if (amps.size() != spec.total_dim())
    throw std::invalid_argument("amplitude vector does not match spec dim");
  QuantumState s;
  s.spec = std::move(spec);
  s.is_pure = true;
  s.amps = std::move(amps);
  s.trunc_deficit = deficit;
  return s;
}

QuantumState QuantumState::density_state(SubsystemSpec spec, Mat rho,
                                         double deficit) {
  if (rho.rows() != spec.total_dim() || rho.cols() != spec.total_dim())
    throw std::invalid_argument("density matrix does not match spec dim");
  QuantumState s;
  s.spec = std::move(spec);
  s.is_pure = false;
  s.rho = std::move(rho);
  s.trunc_deficit = deficit;
  return s;
}

// ---------------------------------------------------------------------------
// Measurement operators

MeasurementOperator MeasurementOperator::no_click(std::string label) {
  return {{Factor{std::move(label), NoClick, 0}}};
}
MeasurementOperator MeasurementOperator::click(std::string label) {
  return {{Factor{std::move(label), Click, 0}}};
}
MeasurementOperator MeasurementOperator::pnr(std::string label, int n) {
  if (n < 0) throw std::invalid_argument("photon count must be >= 0");
  return {{Factor{std::move(label), Pnr, n}}};
}
MeasurementOperator MeasurementOperator::qubit_projector(std::string label,
                                                         int outcome) {
  if (outcome != 0 && outcome != 1)
    throw std::invalid_argument("qubit outcome must be 0 or 1");
  return {{Factor{std::move(label), outcome == 0 ? Qubit0 : Qubit1, 0}}};
}
MeasurementOperator& MeasurementOperator::and_also(
    const MeasurementOperator& other) {
  for (const auto& f : other.factors) factors.push_back(f);
  return *this;
}

Eigen::VectorXd MeasurementOperator::diagonal_for(const SubsystemSpec& spec,
                                                  int k) const {
  const Subsystem& part = spec.parts[k];
  Eigen::VectorXd d = Eigen::VectorXd::Ones(part.dim());
  for (const auto& f : factors) {
    if (f.label != part.label) continue;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(part.dim());
    switch (f.kind) {
      case NoClick:
        if (part.kind != Subsystem::PhotonicMode)
          throw std::invalid_argument("no_click requires a photonic mode");
        w[0] = 1.0;
        break;
      case Click:
        if (part.kind != Subsystem::PhotonicMode)
          throw std::invalid_argument("click requires a photonic mode");
        w.setOnes();
        w[0] = 0.0;
        break;
      case Pnr:
        if (part.kind != Subsystem::PhotonicMode)
          throw std::invalid_argument("pnr requires a photonic mode");
        if (f.photon_count > part.cutoff)
          throw std::invalid_argument("pnr photon count exceeds cutoff");
        w[f.photon_count] = 1.0;
        break;
      case Qubit0:
      case Qubit1:
        if (part.kind != Subsystem::Qubit)
          throw std::invalid_argument("qubit projector requires a qubit");
        w[f.kind == Qubit0 ? 0 : 1] = 1.0;
        break;
    }
    d = d.cwiseProduct(w);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Construction

double coherent_tail(double alpha_abs_sq, int cutoff) {
  // 1 - e^{-mu} sum_{n<=cutoff} mu^n/n!  computed from the tail side to avoid
  // catastrophic cancellation for small tails.
  const double mu = alpha_abs_sq;
  double term = std::exp(-mu);
  for (int n = 1; n <= cutoff + 1; ++n) term *= mu / n;
  // term = e^{-mu} mu^{cutoff+1}/(cutoff+1)!
  double tail = 0.0, t = term;
  for (int n = cutoff + 1; n < cutoff + 60; ++n) {
    tail += t;
    t *= mu / (n + 1);
    if (t < tail * 1e-18) break;
  }
  return tail;
}

Vec coherent_amps(cxd amplitude, int cutoff) {
  Vec v(cutoff + 1);
  const double pref = std::exp(-0.5 * std::norm(amplitude));
  cxd an = 1.0;
  for (int n = 0; n <= cutoff; ++n) {
    v[n] = pref * an / std::sqrt(factorial_d(n));
    an *= amplitude;
  }
  return v;
}

QuantumState coherent_state(cxd amplitude, int cutoff, double eps_budget) {
  const double tail = coherent_tail(std::norm(amplitude), cutoff);
  if (tail > eps_budget) {
    std::ostringstream os;
    os << "coherent state truncation deficit " << tail << " exceeds budget "
       << eps_budget << " (|alpha|^2 = " << std::norm(amplitude)
       << ", cutoff = " << cutoff << ")";
    throw UnderTruncation(os.str());
  }
  SubsystemSpec spec{{Subsystem::mode("mode", cutoff)}};
  return QuantumState::pure(std::move(spec), coherent_amps(amplitude, cutoff),
                            tail);
}

QuantumState tensor(const std::vector<QuantumState>& states) {
  if (states.empty()) throw std::invalid_argument("tensor of nothing");
  SubsystemSpec spec;
  bool all_pure = true;
  double deficit = 0.0;
  for (const auto& s : states) {
    for (const auto& p : s.spec.parts) {
      for (const auto& existing : spec.parts)
        if (existing.label == p.label)
          throw std::invalid_argument("duplicate subsystem label in tensor: " +
                                      p.label);
      spec.parts.push_back(p);
    }
    all_pure = all_pure && s.is_pure;
    deficit += s.trunc_deficit;
  }
  if (all_pure) {
    Vec v = states[0].amps;
    for (size_t i = 1; i < states.size(); ++i) {
      Vec w(v.size() * states[i].amps.size());
      for (int a = 0; a < v.size(); ++a)
        w.segment(a * states[i].amps.size(), states[i].amps.size()) =
            v[a] * states[i].amps;
      v = std::move(w);
    }
    return QuantumState::pure(std::move(spec), std::move(v), deficit);
  }
  Mat r = states[0].density();
  for (size_t i = 1; i < states.size(); ++i) {
    Mat s = states[i].density();
    Mat w(r.rows() * s.rows(), r.cols() * s.cols());
    for (int a = 0; a < r.rows(); ++a)
      for (int b = 0; b < r.cols(); ++b)
        w.block(a * s.rows(), b * s.cols(), s.rows(), s.cols()) = r(a, b) * s;
    r = std::move(w);
  }
  return QuantumState::density_state(std::move(spec), std::move(r), deficit);
}

// ---------------------------------------------------------------------------
// Low-level operator application

void apply_one_site(Vec& amps, const SubsystemSpec& spec, int k,
                    const Mat& op) {
  const int dk = spec.parts[k].dim();
  if (op.rows() != dk || op.cols() != dk)
    throw std::invalid_argument("operator does not match subsystem dim");
  const int before = spec.dim_before(k);
  const int after = spec.dim_after(k);
  Vec out = Vec::Zero(amps.size());
  for (int b = 0; b < before; ++b) {
    // Block layout: index = (b*dk + i)*after + a
    Eigen::Map<const Mat> in_blk(amps.data() + b * dk * after, after, dk);
    Eigen::Map<Mat> out_blk(out.data() + b * dk * after, after, dk);
    out_blk = in_blk * op.transpose();
  }
  amps = std::move(out);
}

void apply_two_site(Vec& amps, const SubsystemSpec& spec, int k1, int k2,
                    const Mat& op) {
  if (k1 == k2) throw std::invalid_argument("two-site op needs distinct sites");
  const int d1 = spec.parts[k1].dim();
  const int d2 = spec.parts[k2].dim();
  if (op.rows() != d1 * d2 || op.cols() != d1 * d2)
    throw std::invalid_argument("operator does not match subsystem dims");
  const int n = static_cast<int>(amps.size());
  const int s1 = spec.dim_after(k1);
  const int s2 = spec.dim_after(k2);
  Vec out = Vec::Zero(n);
  std::vector<int> rest_indices;
  rest_indices.reserve(n / (d1 * d2));
  for (int idx = 0; idx < n; ++idx) {
    const int i1 = (idx / s1) % d1;
    const int i2 = (idx / s2) % d2;
    if (i1 == 0 && i2 == 0) rest_indices.push_back(idx);
  }
  Vec local(d1 * d2);
  for (int base : rest_indices) {
    for (int i1 = 0; i1 < d1; ++i1)
      for (int i2 = 0; i2 < d2; ++i2)
        local[i1 * d2 + i2] = amps[base + i1 * s1 + i2 * s2];
    Vec res = op * local;
    for (int i1 = 0; i1 < d1; ++i1)
      for (int i2 = 0; i2 < d2; ++i2)
        out[base + i1 * s1 + i2 * s2] = res[i1 * d2 + i2];
  }
  amps = std::move(out);
}

namespace {

Mat one_site_to_full(const SubsystemSpec& spec, int k, const Mat& op) {
  const int before = spec.dim_before(k);
  const int after = spec.dim_after(k);
  const int dk = spec.parts[k].dim();
  Mat full = Mat::Zero(spec.total_dim(), spec.total_dim());
  for (int b = 0; b < before; ++b)
    for (int i = 0; i < dk; ++i)
      for (int j = 0; j < dk; ++j) {
        if (op(i, j) == cxd(0, 0)) continue;
        for (int a = 0; a < after; ++a)
          full((b * dk + i) * after + a, (b * dk + j) * after + a) = op(i, j);
      }
  return full;
}

}  // namespace

// ---------------------------------------------------------------------------
// Loss channel

std::vector<Eigen::MatrixXd> loss_kraus(int cutoff, double eta) {
  const int d = cutoff + 1;
  std::vector<Eigen::MatrixXd> ks;
  for (int k = 0; k <= cutoff; ++k) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d, d);
    bool nonzero = false;
    for (int n = k; n <= cutoff; ++n) {
      const double c =
          std::sqrt(binom_d(n, k) * std::pow(eta, n - k) * std::pow(1 - eta, k));
      K(n - k, n) = c;
      if (c != 0.0) nonzero = true;
    }
    if (nonzero) ks.push_back(std::move(K));
  }
  return ks;
}

std::vector<Vec> loss_branches_pure(const Vec& amps, const SubsystemSpec& spec,
                                    int k, double eta) {
  if (spec.parts[k].kind != Subsystem::PhotonicMode)
    throw std::invalid_argument("loss acts on photonic modes only");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("loss transmissivity must be in [0, 1]");
  std::vector<Vec> out;
  for (const auto& K : loss_kraus(spec.parts[k].cutoff, eta)) {
    Vec b = amps;
    apply_one_site(b, spec, k, K.cast<cxd>());
    if (b.squaredNorm() > 1e-300) out.push_back(std::move(b));
  }
  return out;
}

QuantumState apply_loss(const QuantumState& state, const std::string& label,
                        double eta) {
  const int k = state.spec.index_of(label);
  if (state.spec.parts[k].kind != Subsystem::PhotonicMode)
    throw std::invalid_argument("loss acts on photonic modes only");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("loss transmissivity must be in [0, 1]");
  if (state.is_pure) {
    auto branches = loss_branches_pure(state.amps, state.spec, k, eta);
    if (branches.size() == 1)
      return QuantumState::pure(state.spec, std::move(branches[0]),
                                state.trunc_deficit);
    Mat r = Mat::Zero(state.spec.total_dim(), state.spec.total_dim());
    for (const auto& b : branches) r += b * b.adjoint();
    return QuantumState::density_state(state.spec, std::move(r),
                                       state.trunc_deficit);
  }
  Mat r = Mat::Zero(state.spec.total_dim(), state.spec.total_dim());
  for (const auto& K : loss_kraus(state.spec.parts[k].cutoff, eta)) {
    Mat full = one_site_to_full(state.spec, k, K.cast<cxd>());
    r += full * state.rho * full.adjoint();
  }
  return QuantumState::density_state(state.spec, std::move(r),
                                     state.trunc_deficit);
}

// ---------------------------------------------------------------------------
// Beamsplitter

const Mat& beamsplitter_matrix(int cutoff) {
  static std::mutex mu;
  static std::map<int, Mat> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(cutoff);
  if (it != cache.end()) return it->second;

  // (a_s^dag)^n1 (a_c^dag)^n2 |0,0> -> 2^{-(n1+n2)/2} (b_+^dag + b_-^dag)^n1
  // (b_+^dag - b_-^dag)^n2 |0,0>, expanded binomially; components with more
  // than `cutoff` photons in one output are dropped (exact for n1+n2 <=
  // cutoff).
  const int d = cutoff + 1;
  Mat V = Mat::Zero(d * d, d * d);
  for (int n1 = 0; n1 < d; ++n1) {
    for (int n2 = 0; n2 < d; ++n2) {
      const double src_norm = std::sqrt(factorial_d(n1) * factorial_d(n2));
      for (int k1 = 0; k1 <= n1; ++k1) {
        for (int k2 = 0; k2 <= n2; ++k2) {
          const int np = k1 + k2;          // photons in b_+
          const int nm = n1 + n2 - k1 - k2;  // photons in b_-
          if (np > cutoff || nm > cutoff) continue;
          const double sign = (n2 - k2) % 2 == 0 ? 1.0 : -1.0;
          const double coeff = sign * binom_d(n1, k1) * binom_d(n2, k2) *
                               std::pow(2.0, -0.5 * (n1 + n2)) *
                               std::sqrt(factorial_d(np) * factorial_d(nm)) /
                               src_norm;
          V(np * d + nm, n1 * d + n2) += coeff;
        }
      }
    }
  }
  return cache.emplace(cutoff, std::move(V)).first->second;
}

QuantumState beamsplitter_5050(const QuantumState& state,
                               const std::string& mode_s,
                               const std::string& mode_c) {
  const int k1 = state.spec.index_of(mode_s);
  const int k2 = state.spec.index_of(mode_c);
  const Subsystem& p1 = state.spec.parts[k1];
  const Subsystem& p2 = state.spec.parts[k2];
  if (p1.kind != Subsystem::PhotonicMode || p2.kind != Subsystem::PhotonicMode)
    throw std::invalid_argument("beamsplitter targets must be photonic modes");
  if (p1.cutoff != p2.cutoff)
    throw std::invalid_argument("beamsplitter modes must share a cutoff");
  const Mat& V = beamsplitter_matrix(p1.cutoff);
  if (state.is_pure) {
    Vec a = state.amps;
    apply_two_site(a, state.spec, k1, k2, V);
    return QuantumState::pure(state.spec, std::move(a), state.trunc_deficit);
  }
  // Dense conjugation via the full-space embedding (test-scale sizes only).
  const int n = state.spec.total_dim();
  Mat full = Mat::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    Vec e = Vec::Zero(n);
    e[col] = 1.0;
    apply_two_site(e, state.spec, k1, k2, V);
    full.col(col) = e;
  }
  Mat r = full * state.rho * full.adjoint();
  return QuantumState::density_state(state.spec, std::move(r),
                                     state.trunc_deficit);
}

// ---------------------------------------------------------------------------
// Gates

Gate Gate::cnot(std::string control, std::string target) {
  Gate g;
  g.kind = CNOT;
  g.control = std::move(control);
  g.target = std::move(target);
  return g;
}

Gate Gate::single_qubit(std::string label, const Eigen::Matrix2cd& u) {
  Gate g;
  g.kind = SingleQubit;
  g.label = std::move(label);
  g.unitary = u;
  return g;
}

QuantumState apply_gate(const QuantumState& state, const Gate& gate) {
  auto require_qubit = [&](int k) {
    if (state.spec.parts[k].kind != Subsystem::Qubit)
      throw std::invalid_argument("gate target must be a qubit");
  };
  if (gate.kind == Gate::SingleQubit) {
    const int k = state.spec.index_of(gate.label);
    require_qubit(k);
    if (state.is_pure) {
      Vec a = state.amps;
      apply_one_site(a, state.spec, k, gate.unitary);
      return QuantumState::pure(state.spec, std::move(a), state.trunc_deficit);
    }
    Mat full = one_site_to_full(state.spec, k, gate.unitary);
    return QuantumState::density_state(state.spec,
                                       full * state.rho * full.adjoint(),
                                       state.trunc_deficit);
  }
  const int kc = state.spec.index_of(gate.control);
  const int kt = state.spec.index_of(gate.target);
  require_qubit(kc);
  require_qubit(kt);
  Mat cnot = Mat::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1.0;
  if (state.is_pure) {
    Vec a = state.amps;
    apply_two_site(a, state.spec, kc, kt, cnot);
    return QuantumState::pure(state.spec, std::move(a), state.trunc_deficit);
  }
  const int n = state.spec.total_dim();
  Mat full = Mat::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    Vec e = Vec::Zero(n);
    e[col] = 1.0;
    apply_two_site(e, state.spec, kc, kt, cnot);
    full.col(col) = e;
  }
  return QuantumState::density_state(state.spec,
                                     full * state.rho * full.adjoint(),
                                     state.trunc_deficit);
}

// ---------------------------------------------------------------------------
// Measurement / traces / fidelity

namespace {

Eigen::VectorXd full_diagonal(const SubsystemSpec& spec,
                              const MeasurementOperator& element) {
  // Validate that every factor label exists.
  for (const auto& f : element.factors) spec.index_of(f.label);
  Eigen::VectorXd d = Eigen::VectorXd::Ones(1);
  for (int k = 0; k < static_cast<int>(spec.parts.size()); ++k) {
    Eigen::VectorXd dk = element.diagonal_for(spec, k);
    Eigen::VectorXd nd(d.size() * dk.size());
    for (int a = 0; a < d.size(); ++a)
      nd.segment(a * dk.size(), dk.size()) = d[a] * dk;
    d = std::move(nd);
  }
  return d;
}

std::vector<int> kept_part_indices(const SubsystemSpec& spec,
                                   const std::vector<std::string>& keep) {
  std::vector<int> kept;
  for (const auto& label : keep) kept.push_back(spec.index_of(label));
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return kept;
}

// Maps a full index to (kept_index, traced_index) pair.
struct TraceIndexer {
  std::vector<int> kept_stride_of_part;    // stride in kept space, 0 if traced
  std::vector<int> traced_stride_of_part;  // stride in traced space, 0 if kept
  std::vector<int> dims;
  int kept_dim = 1, traced_dim = 1;

  TraceIndexer(const SubsystemSpec& spec, const std::vector<int>& kept) {
    const int n = static_cast<int>(spec.parts.size());
    dims.resize(n);
    kept_stride_of_part.assign(n, 0);
    traced_stride_of_part.assign(n, 0);
    for (int k = 0; k < n; ++k) dims[k] = spec.parts[k].dim();
    for (int k = n - 1; k >= 0; --k) {
      const bool is_kept =
          std::find(kept.begin(), kept.end(), k) != kept.end();
      if (is_kept) {
        kept_stride_of_part[k] = kept_dim;
        kept_dim *= dims[k];
      } else {
        traced_stride_of_part[k] = traced_dim;
        traced_dim *= dims[k];
      }
    }
  }

  void split(const SubsystemSpec& spec, int full_index, int* kept_index,
             int* traced_index) const {
    int ki = 0, ti = 0;
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
      const int digit = full_index % dims[k];
      full_index /= dims[k];
      ki += digit * kept_stride_of_part[k];
      ti += digit * traced_stride_of_part[k];
    }
    *kept_index = ki;
    *traced_index = ti;
  }
};

SubsystemSpec kept_spec(const SubsystemSpec& spec,
                        const std::vector<int>& kept) {
  SubsystemSpec out;
  for (int k : kept) out.parts.push_back(spec.parts[k]);
  return out;
}

}  // namespace

double measure_probability(const QuantumState& state,
                           const MeasurementOperator& element) {
  const Eigen::VectorXd d = full_diagonal(state.spec, element);
  if (state.is_pure) {
    double p = 0.0;
    for (int i = 0; i < d.size(); ++i)
      p += d[i] * std::norm(state.amps[i]);
    return p;
  }
  double p = 0.0;
  for (int i = 0; i < d.size(); ++i) p += d[i] * state.rho(i, i).real();
  return p;
}

HeraldedOutcome measure(const QuantumState& state,
                        const MeasurementOperator& element) {
  const Eigen::VectorXd d = full_diagonal(state.spec, element);
  const double p = measure_probability(state, element);
  if (p < kMinConditionProbability) {
    std::ostringstream os;
    os << "conditioning on an event of probability " << p << " (< "
       << kMinConditionProbability << ")";
    throw ImpossibleConditioning(os.str());
  }

  // Keep every subsystem the element does not touch.
  std::vector<std::string> keep;
  for (const auto& part : state.spec.parts) {
    bool touched = false;
    for (const auto& f : element.factors) touched |= (f.label == part.label);
    if (!touched) keep.push_back(part.label);
  }
  const auto kept = kept_part_indices(state.spec, keep);
  TraceIndexer ix(state.spec, kept);

  Mat reduced = Mat::Zero(ix.kept_dim, ix.kept_dim);
  if (state.is_pure) {
    // Group amplitudes by traced index; accumulate masked outer products.
    std::vector<Vec> by_traced(ix.traced_dim, Vec::Zero(ix.kept_dim));
    for (int i = 0; i < state.amps.size(); ++i) {
      if (d[i] == 0.0) continue;
      int ki, ti;
      ix.split(state.spec, i, &ki, &ti);
      by_traced[ti][ki] += d[i] * state.amps[i];
    }
    for (const auto& v : by_traced)
      if (v.squaredNorm() > 0.0) reduced += v * v.adjoint();
  } else {
    // rho' = E rho E (E diagonal projector), then trace out measured parts.
    const int n = state.spec.total_dim();
    std::vector<int> ki_of(n), ti_of(n);
    for (int i = 0; i < n; ++i) ix.split(state.spec, i, &ki_of[i], &ti_of[i]);
    for (int i = 0; i < n; ++i) {
      if (d[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (d[j] == 0.0 || ti_of[i] != ti_of[j]) continue;
        reduced(ki_of[i], ki_of[j]) += d[i] * state.rho(i, j) * d[j];
      }
    }
  }

  HeraldedOutcome out;
  out.probability = p;
  out.state = QuantumState::density_state(kept_spec(state.spec, kept),
                                          reduced / p, state.trunc_deficit);
  return out;
}

QuantumState partial_trace(const QuantumState& state,
                           const std::vector<std::string>& keep) {
  const auto kept = kept_part_indices(state.spec, keep);
  TraceIndexer ix(state.spec, kept);
  Mat reduced = Mat::Zero(ix.kept_dim, ix.kept_dim);
  if (state.is_pure) {
    std::vector<Vec> by_traced(ix.traced_dim, Vec::Zero(ix.kept_dim));
    for (int i = 0; i < state.amps.size(); ++i) {
      int ki, ti;
      ix.split(state.spec, i, &ki, &ti);
      by_traced[ti][ki] += state.amps[i];
    }
    for (const auto& v : by_traced)
      if (v.squaredNorm() > 0.0) reduced += v * v.adjoint();
  } else {
    const int n = state.spec.total_dim();
    std::vector<int> ki_of(n), ti_of(n);
    for (int i = 0; i < n; ++i) ix.split(state.spec, i, &ki_of[i], &ti_of[i]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (ti_of[i] == ti_of[j])
          reduced(ki_of[i], ki_of[j]) += state.rho(i, j);
  }
  return QuantumState::density_state(kept_spec(state.spec, kept),
                                     std::move(reduced), state.trunc_deficit);
}

ConditionedReduced conditioned_reduced(const std::vector<Vec>& branches,
                                       const SubsystemSpec& spec,
                                       const MeasurementOperator& element,
                                       const std::vector<std::string>& keep) {
  const Eigen::VectorXd d = full_diagonal(spec, element);
  const auto kept = kept_part_indices(spec, keep);
  TraceIndexer ix(spec, kept);
  const int n = spec.total_dim();
  std::vector<int> ki_of(n), ti_of(n);
  for (int i = 0; i < n; ++i) ix.split(spec, i, &ki_of[i], &ti_of[i]);

  Mat rho = Mat::Zero(ix.kept_dim, ix.kept_dim);
  double prob = 0.0;
  std::vector<Vec> by_traced(ix.traced_dim);
  for (const auto& b : branches) {
    for (auto& v : by_traced) v = Vec::Zero(ix.kept_dim);
    for (int i = 0; i < n; ++i) {
      if (d[i] == 0.0 || b[i] == cxd(0, 0)) continue;
      by_traced[ti_of[i]][ki_of[i]] += b[i];
    }
    for (const auto& v : by_traced) {
      const double w = v.squaredNorm();
      if (w > 0.0) {
        rho += v * v.adjoint();
        prob += w;
      }
    }
  }
  return ConditionedReduced{std::move(rho), prob};
}

double fidelity_to_pure(const QuantumState& state, const Vec& target) {
  if (target.size() != state.spec.total_dim())
    throw std::invalid_argument("target dim mismatch");
  const double n2 = target.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("target state has zero norm");
  if (state.is_pure) {
    const double s2 = state.amps.squaredNorm();
    if (s2 <= 0.0) throw std::invalid_argument("state has zero norm");
    return std::norm(target.dot(state.amps)) / (n2 * s2);
  }
  const double tr = state.rho.trace().real();
  if (tr <= 0.0) throw std::invalid_argument("state has zero trace");
  return (target.adjoint() * state.rho * target)(0).real() / (n2 * tr);
}

double purity(const QuantumState& state) {
  if (state.is_pure) return 1.0;
  const double tr = state.rho.trace().real();
  return (state.rho * state.rho).trace().real() / (tr * tr);
}

Vec plus_theta(double theta) {
  Vec v(2);
  v[0] = 1.0 / std::sqrt(2.0);
  v[1] = std::exp(cxd(0, theta)) / std::sqrt(2.0);
  return v;
}

}  // namespace rsplab::fock
