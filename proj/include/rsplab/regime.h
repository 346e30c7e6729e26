// Parameter-space exploration over the closed forms: rate/fidelity trade-off
// curves, pulse-strength optimization against a target, and best-protocol
// maps over efficiency / phase-noise planes.
#pragma once

#include "rsplab/analytics.h"

#include <optional>
#include <string>
#include <vector>

namespace rsplab::regime {

using analytics::Protocol;
using analytics::ProtocolParams;

struct AxisSpec {
  std::string name;  // one of "eta_s", "sigma_sc", "sigma_dsc"
  double min = 0.0, max = 0.0;
  int points = 0;
  bool geometric = false;
  std::vector<double> values() const;  // validates on use
};

struct Target {
  enum Kind { Fidelity, Rate };
  Kind kind = Fidelity;
  double value = 0.0;
};

struct SweepSpec {
  ProtocolParams baseline;
  std::vector<Protocol> protocols;  // evaluation order; ties prefer earlier
  std::vector<double> alpha_grid;   // |alpha|^2 values, ascending
  AxisSpec axis1, axis2;            // maps only
  Target target;                    // maps only
};

// Closed-form point with the protocol's phase-noise channel applied
// (sigma_sc dephases SC and SC-PNR, sigma_dsc dephases DSC, DC is immune).
struct NoisyPoint {
  double fidelity = 0.0;
  double rate = 0.0;
  double xi_used = 0.0;
  double sigma_applied = 0.0;
};
NoisyPoint evaluate(Protocol protocol, const ProtocolParams& params);

struct TradeoffRow {
  Protocol protocol;
  double alpha_sq, fidelity, rate, xi_used, sigma;
};
struct TradeoffTable {
  std::vector<TradeoffRow> rows;  // sorted by (protocol, alpha_sq)
};
TradeoffTable tradeoff_curve(const SweepSpec& spec);

// Smallest grid |alpha|^2 whose noisy point meets the target; nullopt when
// no grid point does.
std::optional<double> min_alpha_for_target(Protocol protocol,
                                           const ProtocolParams& params,
                                           Target target,
                                           const std::vector<double>& grid);

// Winner of a cell: the protocol with the best secondary metric (rate for a
// fidelity target, fidelity for a rate target) at its own minimal feasible
// |alpha|^2. Exact ties go to the protocol listed earlier in
// SweepSpec::protocols.
struct MapCell {
  bool feasible = false;
  Protocol winner = Protocol::DC;
  double alpha_sq_used = 0.0;
  double metric = 0.0;
};
struct RegimeGrid {
  AxisSpec axis1, axis2;
  std::vector<MapCell> cells;  // row-major, axis1 outer
  const MapCell& at(int i1, int i2) const;
};
RegimeGrid best_protocol_map(const SweepSpec& spec);

std::vector<double> linear_grid(double lo, double hi, int n);
std::vector<double> geometric_grid(double lo, double hi, int n);
// 200 geometrically spaced |alpha|^2 values covering [1e-3, 0.5].
std::vector<double> default_alpha_grid();

}  // namespace rsplab::regime
