// Purified entanglement-based key distribution built on heralded remote
// state preparation: the source state on (register, node), teleportation
// chains with Bell-pattern-dependent Pauli corrections, and the photonic
// Bell-state measurement that fuses two double-click purified states.
#pragma once

#include "rsplab/fock.h"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rsplab::qkd {

enum class Bell { PhiPlus, PsiPlus, PhiMinus, PsiMinus };
std::string bell_name(Bell b);
Eigen::Vector4cd bell_vector(Bell b);
inline constexpr Bell kAllBell[] = {Bell::PhiPlus, Bell::PsiPlus,
                                    Bell::PhiMinus, Bell::PsiMinus};

// Emission amplitude that turns the purified source state into a maximally
// entangled pair: xi = alpha / sqrt(1 + alpha^2).
double bell_xi(double alpha);

// Source state on (register, node):
// (alpha sqrt(1-xi^2) |0>|-> + xi |1>|+>) / norm.
Eigen::Vector4cd purified_sc_rsp(double alpha, double xi);

// --- teleportation chain ---------------------------------------------------

// Qubit layout: [A_reg, A_node, (link pair) x swap_count, B_reg, B_node].
// Swap k projects (current partner, link k first qubit) onto the observed
// Bell pattern and applies the teleportation correction to the link's second
// qubit; the final pattern projects (partner, B_node) and corrects B_reg.
struct ChainResult {
  Eigen::Vector4cd state;  // final (A_reg, B_reg) pure state, normalized
  double phi_plus_fidelity = 0.0;
  double joint_probability = 0.0;  // product of the pattern probabilities
  std::vector<std::string> corrections;  // one entry per projection
};
// `patterns` has swap_count + 1 entries (the last is the final projection).
ChainResult swap_and_project(double alpha, double xi, int swap_count,
                             const std::vector<Bell>& patterns);

struct Correlations {
  double same_key_probability = 0.0;  // P(both registers agree in Z)
  double xx_expectation = 0.0;        // <X (x) X>
};
Correlations correlation_check(const Eigen::Vector4cd& state);

// --- double-click purified source -----------------------------------------

enum class Basis { Z, X };

// Client-side purified state on (register, pulse mode a, pulse mode b):
// Z: (|0>|alpha>_a|0>_b + |1>|0>_a|alpha>_b)/sqrt(2)
// X: (|0>|+alpha> + |1>|-alpha>)/sqrt(2) with |pm alpha> =
//    |alpha/sqrt2>_a |pm alpha/sqrt2>_b.
fock::QuantumState purified_dc_state(Basis basis, double alpha, int cutoff);

// Interfere the purified pulses with a node that emits one photon into rail
// a' (node qubit 0) or b' (node qubit 1); detect exactly one photon per rail
// pair. Each pattern heralds a maximally entangled (register, node) state:
// a Bell state in the Z basis, a node-Hadamard-rotated Bell state in X.
struct BsmOutcome {
  std::string pattern;  // e.g. "a+b-"
  Bell closest;
  bool hadamard_on_node = false;
  double fidelity = 0.0;
  double probability = 0.0;
};
std::vector<BsmOutcome> dc_purified_bsm(Basis basis, double alpha,
                                        int cutoff = fock::kDefaultCutoff);

}  // namespace rsplab::qkd
