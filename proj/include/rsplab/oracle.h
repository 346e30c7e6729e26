// Brute-force protocol simulation in truncated Fock space. Every protocol is
// rebuilt from first principles — coherent pulses, emission entanglement,
// loss channels, beamsplitter interference, detection POVMs — with no shared
// algebra with the closed forms in analytics.h, so agreement between the two
// is meaningful evidence.
#pragma once

#include "rsplab/analytics.h"
#include "rsplab/fock.h"

#include <Eigen/Dense>

#include <string>

namespace rsplab::oracle {

using analytics::Protocol;
using analytics::ProtocolParams;

struct DetectorModel {
  enum Kind { Threshold, NumberResolving };
  Kind kind = Threshold;
};

struct QuadratureConfig {
  int node_count = 24;  // Gauss-Hermite nodes; >= 20 keeps sigma <= 1 exact
                        // to well below 1e-8
};

// A heralded single-qubit preparation.
struct PreparedState {
  Eigen::Matrix2cd rho;  // normalized heralded qubit state (|0>,|1> basis)
  double pattern_probability = 0.0;  // the canonical click pattern alone
  double total_probability = 0.0;    // all accepted patterns
  double fidelity = 0.0;             // overlap with |+_theta>
  double xi_used = 0.0;
  double trunc_deficit = 0.0;
  std::string click_pattern;
};

struct DscOutcome {
  PreparedState prepared;            // post-CNOT control qubit
  double herald_probability = 0.0;   // one link, both patterns
  double cnot_probability = 0.0;     // |1> projection on the target
  double assembled_rate = 0.0;       // S(p) * P_cnot scheduling assembly
  double xi_used = 0.0;
};

struct NoiseAveraged {
  double fidelity = 0.0;            // probability-weighted average
  double herald_probability = 0.0;  // phase-independent by construction
  double herald_spread = 0.0;       // max |p_i - p_0| across nodes
  int node_count = 0;
};

// Single-click preparation. Canonical pattern: click in the "+" output, none
// in the "-" output (exactly one photon there for NumberResolving). The
// returned state is the "+"-pattern state; the "-" pattern heralds the
// Z-flipped state with identical probability.
PreparedState simulate_sc(const ProtocolParams& params,
                          int cutoff = fock::kDefaultCutoff,
                          DetectorModel detector = {});

// Per-pattern variant; `plus_pattern = false` returns the raw "-"-pattern
// state (before the Z correction that simulate_sc's symmetry statement
// refers to).
PreparedState simulate_sc_pattern(const ProtocolParams& params, int cutoff,
                                  DetectorModel detector, bool plus_pattern);

// Double-click preparation across two time bins (two interference stages).
// Canonical pattern "++"; the other three patterns herald Z-equivalent
// states, already folded into total_probability.
PreparedState simulate_dc(const ProtocolParams& params,
                          int cutoff = fock::kDefaultCutoff);
// Per-pattern variant; corrected=true applies the parity Z correction.
PreparedState simulate_dc_pattern(const ProtocolParams& params, int cutoff,
                                  bool stage1_plus, bool stage2_plus,
                                  bool corrected);

// Two single-click links fused by CNOT and target-qubit |1> projection.
// Copy 1 carries the target phase, copy 2 phase zero. Default xi maximizes
// the assembled rate at these parameters.
DscOutcome simulate_dsc(const ProtocolParams& params,
                        int cutoff = fock::kDefaultCutoff);

// Single-click with number-resolving detectors (exactly one photon).
PreparedState simulate_sc_pnr(const ProtocolParams& params,
                              int cutoff = fock::kDefaultCutoff);

// Gaussian phase-noise average via Gauss-Hermite quadrature. The noise
// enters as a random offset on the client pulse phase (common to both time
// bins for DC, which is why DC is immune; the phase difference between the
// two preparations for DSC).
NoiseAveraged simulate_with_phase_noise(Protocol protocol,
                                        const ProtocolParams& params,
                                        int cutoff = fock::kDefaultCutoff,
                                        QuadratureConfig quad = {});

// Gauss-Hermite nodes/weights for weight e^{-t^2} (Golub-Welsch on the
// Jacobi matrix; weights sum to sqrt(pi)).
struct Quadrature {
  Eigen::VectorXd nodes, weights;
};
Quadrature gauss_hermite(int n);

}  // namespace rsplab::oracle
