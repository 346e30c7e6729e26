#include "rsplab/oracle.h"

#include <cmath>
#include <numbers>
#include <utility>

namespace rsplab::oracle {

namespace {

using fock::cxd;
using fock::Mat;
using fock::MeasurementOperator;
using fock::QuantumState;
using fock::Subsystem;
using fock::SubsystemSpec;
using fock::Vec;

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  return z;
}

double overlap_plus_theta(const Eigen::Matrix2cd& rho, double theta) {
  const Vec t = fock::plus_theta(theta);
  return (t.adjoint() * rho * t)(0).real();
}

MeasurementOperator pattern_element(DetectorModel det, bool plus_pattern,
                                    const std::string& plus_label,
                                    const std::string& minus_label) {
  const std::string& hot = plus_pattern ? plus_label : minus_label;
  const std::string& cold = plus_pattern ? minus_label : plus_label;
  if (det.kind == DetectorModel::NumberResolving)
    return MeasurementOperator::pnr(hot, 1).and_also(
        MeasurementOperator::pnr(cold, 0));
  return MeasurementOperator::click(hot).and_also(
      MeasurementOperator::no_click(cold));
}

// ---------------------------------------------------------------------------
// Single-click pipeline
//
// Subsystems (s, q, c): server emission mode, server memory qubit, client
// pulse mode. The server emits |0,0> sqrt(1-xi^2) + |1,1> xi; the client
// sends a phase-locked coherent pulse. Client-arm loss acts on a coherent
// state, which is exactly an amplitude rescale, so it is folded into the
// pulse amplitude; server-arm loss is expanded into pure Kraus branches.

struct ScSetup {
  SubsystemSpec spec;
  std::vector<Vec> branches;  // after loss and beamsplitter
  double xi_used = 0.0;
  double trunc_deficit = 0.0;
};

ScSetup sc_setup(const ProtocolParams& params, int cutoff, double pulse_phase,
                 double xi) {
  const auto eff = params.effective();
  const double xi_sq = xi * xi;
  const cxd alpha_c = std::sqrt(eff.eta_c * params.alpha_sq) *
                      std::exp(cxd(0.0, pulse_phase));

  ScSetup out;
  out.xi_used = xi;
  out.spec = SubsystemSpec{{Subsystem::mode("s", cutoff),
                            Subsystem::qubit("q"),
                            Subsystem::mode("c", cutoff)}};
  const QuantumState client = fock::coherent_state(alpha_c, cutoff);
  out.trunc_deficit = client.trunc_deficit;

  const int dc = cutoff + 1;
  Vec psi0 = Vec::Zero(out.spec.total_dim());
  for (int n = 0; n < dc; ++n) {
    psi0[(0 * 2 + 0) * dc + n] = std::sqrt(1.0 - xi_sq) * client.amps[n];
    psi0[(1 * 2 + 1) * dc + n] = xi * client.amps[n];
  }
  out.branches = fock::loss_branches_pure(psi0, out.spec, 0, eff.eta_s);
  const Mat& V = fock::beamsplitter_matrix(cutoff);
  for (auto& b : out.branches) fock::apply_two_site(b, out.spec, 0, 2, V);
  return out;
}

double default_xi_for(const ProtocolParams& params, DetectorModel det) {
  if (det.kind == DetectorModel::NumberResolving) {
    const auto eff = params.effective();
    return std::sqrt(
        analytics::pnr_balanced_xi_sq(eff.eta_c * params.alpha_sq,
                                      eff.eta_s));
  }
  return analytics::sc_optimal_xi(params);
}

PreparedState sc_pattern_impl(const ProtocolParams& params, int cutoff,
                              DetectorModel det, bool plus_pattern,
                              double pulse_phase, double reference_theta) {
  params.validate();
  const double xi = params.xi ? *params.xi : default_xi_for(params, det);
  ScSetup s = sc_setup(params, cutoff, pulse_phase, xi);

  const auto element = pattern_element(det, plus_pattern, "s", "c");
  auto cr = fock::conditioned_reduced(s.branches, s.spec, element, {"q"});
  if (cr.probability < fock::kMinConditionProbability)
    throw fock::ImpossibleConditioning(
        "single-click pattern has vanishing probability");

  PreparedState p;
  p.rho = cr.rho / cr.probability;
  p.pattern_probability = cr.probability;
  p.total_probability = cr.probability;
  p.xi_used = xi;
  p.trunc_deficit = s.trunc_deficit;
  p.click_pattern = plus_pattern ? "+" : "-";
  p.fidelity = overlap_plus_theta(p.rho, reference_theta);
  return p;
}

// ---------------------------------------------------------------------------
// Double-click pipeline
//
// Two interference stages (early and late time bin). Stage 1 subsystems
// (Es, Ls, q, Ec): the server's early emission mode, its late emission mode
// (at most one photon, so cutoff 1), the memory qubit, and the client's
// early pulse. The server emits exactly one photon across the two bins,
// entangled with the qubit: (|1,0>|1> + |0,1>|0>)/sqrt(2). After the stage-1
// detection the conditioned (Ls, q) state is decomposed into pure components
// and each is run through stage 2 against the client's late pulse.

PreparedState dc_pattern_impl(const ProtocolParams& params, int cutoff,
                              bool stage1_plus, bool stage2_plus,
                              bool corrected, double common_offset,
                              double reference_theta) {
  params.validate();
  const auto eff = params.effective();
  const double bin_mean = 0.5 * eff.eta_c * params.alpha_sq;
  const double early_phase = -(params.theta + common_offset);
  const double late_phase = -common_offset;
  const cxd a_early =
      std::sqrt(bin_mean) * std::exp(cxd(0.0, early_phase));
  const cxd a_late = std::sqrt(bin_mean) * std::exp(cxd(0.0, late_phase));

  const int dm = cutoff + 1;
  SubsystemSpec spec1{{Subsystem::mode("Es", cutoff), Subsystem::mode("Ls", 1),
                       Subsystem::qubit("q"), Subsystem::mode("Ec", cutoff)}};
  const QuantumState early_pulse = fock::coherent_state(a_early, cutoff);
  const QuantumState late_pulse = fock::coherent_state(a_late, cutoff);

  Vec psi0 = Vec::Zero(spec1.total_dim());
  const double r = 1.0 / std::sqrt(2.0);
  for (int n = 0; n < dm; ++n) {
    // (Es, Ls, q, Ec): index = ((e*2 + l)*2 + qb)*dm + n
    psi0[((1 * 2 + 0) * 2 + 1) * dm + n] = r * early_pulse.amps[n];
    psi0[((0 * 2 + 1) * 2 + 0) * dm + n] = r * early_pulse.amps[n];
  }
  std::vector<Vec> branches;
  for (const Vec& b_es :
       fock::loss_branches_pure(psi0, spec1, 0, eff.eta_s))
    for (Vec& b : fock::loss_branches_pure(b_es, spec1, 1, eff.eta_s))
      branches.push_back(std::move(b));
  const Mat& V = fock::beamsplitter_matrix(cutoff);
  for (auto& b : branches) fock::apply_two_site(b, spec1, 0, 3, V);

  const auto element1 =
      pattern_element(DetectorModel{}, stage1_plus, "Es", "Ec");
  auto cr1 =
      fock::conditioned_reduced(branches, spec1, element1, {"Ls", "q"});
  if (cr1.probability < fock::kMinConditionProbability)
    throw fock::ImpossibleConditioning(
        "double-click stage-1 pattern has vanishing probability");

  // Pure-component decomposition of the conditioned (Ls, q) state.
  Eigen::SelfAdjointEigenSolver<Mat> eig(cr1.rho);
  SubsystemSpec spec2{{Subsystem::mode("Ls", cutoff), Subsystem::qubit("q"),
                       Subsystem::mode("Lc", cutoff)}};
  std::vector<Vec> branches2;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < 1e-18) continue;
    const Vec comp = std::sqrt(lambda) * eig.eigenvectors().col(i);
    Vec b2 = Vec::Zero(spec2.total_dim());
    for (int l = 0; l < 2; ++l)
      for (int qb = 0; qb < 2; ++qb)
        for (int n = 0; n < dm; ++n)
          b2[(l * 2 + qb) * dm + n] = comp[l * 2 + qb] * late_pulse.amps[n];
    branches2.push_back(std::move(b2));
  }
  for (auto& b : branches2) fock::apply_two_site(b, spec2, 0, 2, V);

  const auto element2 =
      pattern_element(DetectorModel{}, stage2_plus, "Ls", "Lc");
  auto cr2 = fock::conditioned_reduced(branches2, spec2, element2, {"q"});
  if (cr2.probability < fock::kMinConditionProbability)
    throw fock::ImpossibleConditioning(
        "double-click stage-2 pattern has vanishing probability");

  PreparedState p;
  p.rho = cr2.rho / cr2.probability;
  const int minus_count = (stage1_plus ? 0 : 1) + (stage2_plus ? 0 : 1);
  if (corrected && minus_count % 2 == 1) {
    const Eigen::Matrix2cd z = pauli_z();
    p.rho = z * p.rho * z;
  }
  p.pattern_probability = cr2.probability;
  p.total_probability = cr2.probability;
  p.xi_used = 1.0 / std::sqrt(2.0);
  p.trunc_deficit = early_pulse.trunc_deficit + late_pulse.trunc_deficit;
  p.click_pattern =
      std::string(stage1_plus ? "+" : "-") + (stage2_plus ? "+" : "-");
  p.fidelity = overlap_plus_theta(p.rho, reference_theta);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points

PreparedState simulate_sc_pattern(const ProtocolParams& params, int cutoff,
                                  DetectorModel detector, bool plus_pattern) {
  return sc_pattern_impl(params, cutoff, detector, plus_pattern,
                         -params.theta, params.theta);
}

PreparedState simulate_sc(const ProtocolParams& params, int cutoff,
                          DetectorModel detector) {
  PreparedState plus = simulate_sc_pattern(params, cutoff, detector, true);
  PreparedState minus = simulate_sc_pattern(params, cutoff, detector, false);
  plus.total_probability =
      plus.pattern_probability + minus.pattern_probability;
  return plus;
}

PreparedState simulate_dc_pattern(const ProtocolParams& params, int cutoff,
                                  bool stage1_plus, bool stage2_plus,
                                  bool corrected) {
  return dc_pattern_impl(params, cutoff, stage1_plus, stage2_plus, corrected,
                         0.0, params.theta);
}

PreparedState simulate_dc(const ProtocolParams& params, int cutoff) {
  // Sum the four accepted click patterns. A pattern with vanishing
  // probability (e.g. a vacuum client can never produce a click in both
  // bins) contributes zero instead of erroring; if no pattern can occur the
  // preparation never heralds and the returned state is the uninformative
  // maximally mixed placeholder with zero probability.
  PreparedState canonical;
  bool have_state = false;
  double total = 0.0;
  for (const auto& [s1, s2] :
       {std::pair{true, true}, std::pair{true, false}, std::pair{false, true},
        std::pair{false, false}}) {
    try {
      PreparedState p = simulate_dc_pattern(params, cutoff, s1, s2, true);
      total += p.pattern_probability;
      if (!have_state) {  // the "++" pattern comes first and is canonical
        canonical = std::move(p);
        have_state = true;
      }
    } catch (const fock::ImpossibleConditioning&) {
    }
  }
  if (!have_state) {
    canonical.rho = 0.5 * Eigen::Matrix2cd::Identity();
    canonical.fidelity = 0.5;
    canonical.xi_used = 1.0 / std::sqrt(2.0);
    canonical.click_pattern = "none";
  }
  canonical.total_probability = total;
  return canonical;
}

DscOutcome simulate_dsc(const ProtocolParams& params, int cutoff) {
  params.validate();
  const auto eff = params.effective();
  const double x = eff.eta_c * params.alpha_sq;
  const double xi =
      params.xi ? *params.xi
                : std::sqrt(analytics::dsc_best_xi_sq(x, eff.eta_s));

  ProtocolParams link1 = params;
  link1.xi = xi;
  ProtocolParams link2 = params;
  link2.xi = xi;
  link2.theta = 0.0;
  const PreparedState s1 = simulate_sc(link1, cutoff);
  const PreparedState s2 = simulate_sc(link2, cutoff);

  SubsystemSpec qq{{Subsystem::qubit("q1"), Subsystem::qubit("q2")}};
  Mat joint = Mat::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      joint.block(a * 2, b * 2, 2, 2) = s1.rho(a, b) * s2.rho;
  QuantumState fused = QuantumState::density_state(qq, std::move(joint));
  fused = fock::apply_gate(fused, fock::Gate::cnot("q1", "q2"));
  auto projected =
      fock::measure(fused, MeasurementOperator::qubit_projector("q2", 1));

  DscOutcome out;
  out.prepared.rho = projected.state.rho;
  out.prepared.pattern_probability = projected.probability;
  out.prepared.total_probability = projected.probability;
  out.prepared.xi_used = xi;
  out.prepared.trunc_deficit = s1.trunc_deficit + s2.trunc_deficit;
  out.prepared.click_pattern = "target=1";
  out.prepared.fidelity = overlap_plus_theta(out.prepared.rho, params.theta);
  out.herald_probability = s1.total_probability;
  out.cnot_probability = projected.probability;
  const double p = out.herald_probability;
  out.assembled_rate = p * (2.0 - p) / (3.0 - p) * out.cnot_probability;
  out.xi_used = xi;
  return out;
}

PreparedState simulate_sc_pnr(const ProtocolParams& params, int cutoff) {
  return simulate_sc(params, cutoff,
                     DetectorModel{DetectorModel::NumberResolving});
}

NoiseAveraged simulate_with_phase_noise(Protocol protocol,
                                        const ProtocolParams& params,
                                        int cutoff, QuadratureConfig quad) {
  params.validate();
  if (quad.node_count < 2)
    throw std::invalid_argument("quadrature needs at least 2 nodes");
  const double sigma =
      protocol == Protocol::DSC ? params.sigma_dsc : params.sigma_sc;
  const Quadrature q = gauss_hermite(quad.node_count);
  const double wnorm = 1.0 / std::sqrt(std::numbers::pi);

  NoiseAveraged out;
  out.node_count = quad.node_count;
  double num = 0.0, den = 0.0, p0 = 0.0, spread = 0.0;
  for (int i = 0; i < quad.node_count; ++i) {
    const double delta = std::sqrt(2.0) * sigma * q.nodes[i];
    const double w = wnorm * q.weights[i];
    double fid = 0.0, prob = 0.0;
    switch (protocol) {
      case Protocol::SC:
      case Protocol::SC_PNR: {
        const DetectorModel det{protocol == Protocol::SC_PNR
                                    ? DetectorModel::NumberResolving
                                    : DetectorModel::Threshold};
        // The offset shifts the pulse phase; fidelity is still measured
        // against the commanded |+_theta>.
        PreparedState plus = sc_pattern_impl(
            params, cutoff, det, true, -(params.theta + delta), params.theta);
        PreparedState minus = sc_pattern_impl(
            params, cutoff, det, false, -(params.theta + delta),
            params.theta);
        fid = plus.fidelity;
        prob = plus.pattern_probability + minus.pattern_probability;
        break;
      }
      case Protocol::DC: {
        // Common offset on both time bins; the relative phase is untouched.
        PreparedState canonical = dc_pattern_impl(params, cutoff, true, true,
                                                  true, delta, params.theta);
        double total = canonical.pattern_probability;
        for (const auto& [s1, s2] : {std::pair{true, false},
                                     std::pair{false, true},
                                     std::pair{false, false}})
          total += dc_pattern_impl(params, cutoff, s1, s2, true, delta,
                                   params.theta)
                       .pattern_probability;
        fid = canonical.fidelity;
        prob = total;
        break;
      }
      case Protocol::DSC: {
        // The noise lives in the phase difference between the two links.
        ProtocolParams shifted = params;
        shifted.theta = params.theta + delta;
        DscOutcome o = simulate_dsc(shifted, cutoff);
        fid = overlap_plus_theta(o.prepared.rho, params.theta);
        prob = o.herald_probability;
        break;
      }
    }
    num += w * prob * fid;
    den += w * prob;
    if (i == 0)
      p0 = prob;
    else
      spread = std::max(spread, std::abs(prob - p0));
  }
  out.fidelity = num / den;
  out.herald_probability = den;
  out.herald_spread = spread;
  return out;
}

Quadrature gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  Quadrature q;
  q.nodes = eig.eigenvalues();
  q.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    q.weights[i] = sqrt_pi * v0 * v0;
  }
  return q;
}

}  // namespace rsplab::oracle
