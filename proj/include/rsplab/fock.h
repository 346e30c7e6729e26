// Exact linear algebra over tensor products of truncated photonic modes and
// qubits: state construction, loss channels, beamsplitters, gates, diagonal
// POVM measurements, partial traces and fidelities. This is the foundation of
// the brute-force protocol oracle; everything here is dense Eigen algebra on
// spaces of at most a few hundred dimensions.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsplab::fock {

using cxd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Default truncation policy: cutoff 12 keeps the Poisson tail of a
// |alpha|^2 <= 0.5 coherent state below ~2e-14, comfortably inside the
// 1e-10 budget.
inline constexpr int kDefaultCutoff = 12;
inline constexpr double kEpsTrunc = 1e-10;

// Conditioning on events rarer than this is treated as a modeling error
// rather than silently renormalizing a numerically empty branch.
inline constexpr double kMinConditionProbability = 1e-15;

struct UnderTruncation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ImpossibleConditioning : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Subsystem bookkeeping

struct Subsystem {
  enum Kind { PhotonicMode, Qubit };
  Kind kind;
  int cutoff;  // photonic only; dimension = cutoff + 1
  std::string label;

  int dim() const { return kind == Qubit ? 2 : cutoff + 1; }
  static Subsystem mode(std::string label, int cutoff);
  static Subsystem qubit(std::string label);
};

// Ordered tensor factors; index convention is row-major with the FIRST
// subsystem most significant (matches Eigen's kroneckerProduct order).
struct SubsystemSpec {
  std::vector<Subsystem> parts;

  int total_dim() const;
  int index_of(const std::string& label) const;  // throws on unknown label
  // Product of dimensions strictly before / strictly after part k.
  int dim_before(int k) const;
  int dim_after(int k) const;
};

// ---------------------------------------------------------------------------
// States

// Pure amplitude vector or density operator over the tensor-product space.
// Pure states may carry sub-unit norm: heralding weights live in the norm
// until a pipeline normalizes at the end. `trunc_deficit` accumulates the
// truncation tail weight of every coherent factor that went into the state.
struct QuantumState {
  SubsystemSpec spec;
  bool is_pure = true;
  Vec amps;
  Mat rho;
  double trunc_deficit = 0.0;

  double norm2_or_trace() const;
  Mat density() const;  // |amps><amps| for pure states, rho otherwise
  static QuantumState pure(SubsystemSpec spec, Vec amps, double deficit = 0.0);
  static QuantumState density_state(SubsystemSpec spec, Mat rho,
                                    double deficit = 0.0);
};

// ---------------------------------------------------------------------------
// Measurement elements (all diagonal in the Fock/computational basis)

struct MeasurementOperator {
  enum Kind { NoClick, Click, Pnr, Qubit0, Qubit1 };
  struct Factor {
    std::string label;
    Kind kind;
    int photon_count = 0;  // Pnr only
  };
  std::vector<Factor> factors;

  static MeasurementOperator no_click(std::string label);
  static MeasurementOperator click(std::string label);
  static MeasurementOperator pnr(std::string label, int n);
  static MeasurementOperator qubit_projector(std::string label, int outcome);
  MeasurementOperator& and_also(const MeasurementOperator& other);

  // Diagonal weight vector for subsystem k of `spec` (all ones if untouched).
  Eigen::VectorXd diagonal_for(const SubsystemSpec& spec, int k) const;
};

struct HeraldedOutcome {
  QuantumState state;        // conditional state, measured modes traced out
  double probability = 0.0;  // tr(E rho)
  std::string click_pattern;
};

// ---------------------------------------------------------------------------
// Construction

// Truncated coherent state e^{-|a|^2/2} sum_n a^n/sqrt(n!) |n>. Throws
// UnderTruncation if the discarded tail exceeds `eps_budget`.
QuantumState coherent_state(cxd amplitude, int cutoff,
                            double eps_budget = kEpsTrunc);
Vec coherent_amps(cxd amplitude, int cutoff);
double coherent_tail(double alpha_abs_sq, int cutoff);

QuantumState tensor(const std::vector<QuantumState>& states);

// ---------------------------------------------------------------------------
// Channels and unitaries

// Photon-loss channel with transmissivity eta via number-binomial Kraus
// operators (exactly trace preserving on the truncated space). Always
// returns a density representation.
QuantumState apply_loss(const QuantumState& state, const std::string& label,
                        double eta);
// Same channel, but returning the (unnormalized) pure Kraus branches of a
// pure input; the oracle uses this to keep everything in cheap pure vectors.
std::vector<Vec> loss_branches_pure(const Vec& amps, const SubsystemSpec& spec,
                                    int k, double eta);
std::vector<Eigen::MatrixXd> loss_kraus(int cutoff, double eta);

// 50/50 beamsplitter a_pm = (a_s pm a_c)/sqrt(2); the "plus" output lands in
// mode_s's slot and "minus" in mode_c's slot. Exact on photon-number sectors
// n1+n2 <= cutoff; truncation only affects sectors that already exceeded the
// cutoff. The matrix is involutive (V^2 = I).
QuantumState beamsplitter_5050(const QuantumState& state,
                               const std::string& mode_s,
                               const std::string& mode_c);
const Mat& beamsplitter_matrix(int cutoff);  // cached per cutoff

struct Gate {
  enum Kind { CNOT, SingleQubit };
  Kind kind;
  std::string control, target;  // CNOT
  std::string label;            // single-qubit
  Eigen::Matrix2cd unitary;     // single-qubit
  static Gate cnot(std::string control, std::string target);
  static Gate single_qubit(std::string label, const Eigen::Matrix2cd& u);
};
QuantumState apply_gate(const QuantumState& state, const Gate& gate);

// Low-level: apply an operator to one subsystem / an ordered pair of
// subsystems (need not be adjacent) of a pure amplitude vector, in place.
void apply_one_site(Vec& amps, const SubsystemSpec& spec, int k,
                    const Mat& op);
void apply_two_site(Vec& amps, const SubsystemSpec& spec, int k1, int k2,
                    const Mat& op);

// ---------------------------------------------------------------------------
// Measurement, traces, fidelity

// Probability tr(E rho) and conditional state with every subsystem touched
// by `element` traced out (the POVM elements here are all diagonal
// projectors, so E^{1/2} rho E^{1/2} = E rho E). Throws
// ImpossibleConditioning below kMinConditionProbability.
HeraldedOutcome measure(const QuantumState& state,
                        const MeasurementOperator& element);
// Probability only (no conditioning, no error on zero).
double measure_probability(const QuantumState& state,
                           const MeasurementOperator& element);

QuantumState partial_trace(const QuantumState& state,
                           const std::vector<std::string>& keep);

// Ensemble helper used by the oracle: given unnormalized pure branches over a
// common spec, mask them with the diagonal POVM element and accumulate the
// reduced density matrix over `keep` plus the total probability.
struct ConditionedReduced {
  Mat rho;  // unnormalized; trace = probability
  double probability;
};
ConditionedReduced conditioned_reduced(const std::vector<Vec>& branches,
                                       const SubsystemSpec& spec,
                                       const MeasurementOperator& element,
                                       const std::vector<std::string>& keep);

double fidelity_to_pure(const QuantumState& state, const Vec& target);
double purity(const QuantumState& state);

// |+_theta> = (|0> + e^{i theta}|1>)/sqrt(2)
Vec plus_theta(double theta);

}  // namespace rsplab::fock
