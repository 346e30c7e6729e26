// Closed-form heralded fidelities, success probabilities and repetition
// rates for remote state preparation with weak coherent pulses, in four
// flavors: double-click (DC), single-click (SC), the double-single-click
// CNOT assembly (DSC), and single-click with number-resolving detection
// (SC-PNR). All expressions are exact in the detection model (no small-alpha
// expansion) except where explicitly named asymptotic.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace rsplab::analytics {

enum class Protocol { DC, DSC, SC, SC_PNR };
std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

struct ProtocolParams {
  double eta_c = 1.0;    // client-arm transmissivity
  double eta_s = 1.0;    // server-arm transmissivity
  double eta_d = 1.0;    // detector efficiency
  double alpha_sq = 0.0;  // client pulse mean photon number |alpha|^2
  double theta = 0.0;     // target equatorial phase
  double sigma_sc = 0.0;   // phase-noise std: single-pulse schemes
  double sigma_dsc = 0.0;  // phase-noise std: two-pulse phase difference
  std::optional<double> xi;  // server emission amplitude; protocol default
                             // when absent

  // Detector efficiency folds into the arm transmissivities exactly once,
  // here: eta_c^eff = eta_c * eta_d, eta_s^eff = eta_s * eta_d.
  struct Effective {
    double eta_c, eta_s;
  };
  Effective effective() const;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct ProtocolMetrics {
  double fidelity = 0.0;             // heralded state vs |+_theta>
  double success_probability = 0.0;  // per attempt, all accepted patterns
  double rate_dimensionless = 0.0;   // R*tau: successes per attempt slot
  double xi_used = 0.0;              // emission amplitude actually evaluated
};

struct AsymptoticCoefficients {
  double infidelity_slope = 0.0;  // lim (1-F)/|alpha|^2
  double rate_slope = 0.0;        // lim R*tau/|alpha|^2
};

// --- protocol metrics ------------------------------------------------------

// DC: photon-photon entanglement swap in two time bins; two threshold
// detections herald. Fidelity is phase-noise free and xi-free (xi_used
// reports the balanced emission 1/sqrt(2)).
ProtocolMetrics dc_metrics(const ProtocolParams& p);

// SC: single threshold detection. Default xi maximizes fidelity at fixed
// alpha; an explicit xi evaluates the general interference expressions.
double sc_optimal_xi(const ProtocolParams& p);
ProtocolMetrics sc_metrics(const ProtocolParams& p);

// DSC: two SC preparations fused by CNOT + |1> projection. Fidelity is
// independent of xi. With xi absent, the rate is the printed closed form
// (eq7_dsc_rate); with xi supplied, the rate is assembled from the two-stage
// scheduling model at that xi (see dsc_assembled_rate). These two disagree;
// the discrepancy is characterized in the tests and README.
ProtocolMetrics dsc_metrics(const ProtocolParams& p);

// SC-PNR: single-click heralding on exactly one photon. Default xi balances
// the two single-photon amplitudes (the fidelity-optimal working point).
ProtocolMetrics sc_pnr_metrics(const ProtocolParams& p);

// --- building blocks (exposed for the oracle and for tests) ---------------

// x = eta_c^eff * |alpha|^2 throughout. xi_sq is the emission probability.
double sc_herald_probability(double x, double eta_s_eff, double xi_sq);
double sc_fidelity_general(double x, double eta_s_eff, double xi_sq);
double dsc_cnot_probability(double x, double eta_s_eff, double xi_sq);
// Scheduling: two links must both succeed (retry the failed one, keeping the
// other) before one CNOT attempt; expected slots per CNOT attempt is
// 1/(2p - p^2) + 1/p, so the dimensionless rate is S(p) * P_cnot with
// S(p) = p(2-p)/(3-p).
double dsc_assembled_rate(double x, double eta_s_eff, double xi_sq);
double dsc_best_xi_sq(double x, double eta_s_eff);  // argmax assembled rate
double eq7_dsc_rate(double x, double eta_s_eff);    // printed closed form
double pnr_balanced_xi_sq(double x, double eta_s_eff);

// --- noise and asymptotics -------------------------------------------------

// Gaussian dephasing of an equatorial qubit: F -> (1 + (2F-1)e^{-s^2/2})/2.
double apply_phase_noise(double fidelity, double sigma);

// Phase-difference noise accumulated between the two DSC preparations over a
// scheduling interval T with laser linewidth dnu: sigma = sqrt(2 pi dnu T).
double sigma_dsc_estimate(double linewidth_hz, double interval_s);

// Leading |alpha|^2 -> 0 coefficients (effective efficiencies folded in).
AsymptoticCoefficients asymptotics(Protocol protocol,
                                   const ProtocolParams& p);

}  // namespace rsplab::analytics
