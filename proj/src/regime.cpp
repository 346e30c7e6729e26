#include "rsplab/regime.h"

#include <cmath>
#include <stdexcept>

namespace rsplab::regime {

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least 1 point");
  if (!(hi >= lo)) throw std::invalid_argument("grid max must be >= min");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least 1 point");
  if (!(lo > 0.0)) throw std::invalid_argument("geometric grid needs min > 0");
  if (!(hi >= lo)) throw std::invalid_argument("grid max must be >= min");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int k = 0; k < n; ++k)
    v[k] = std::exp(llo + (lhi - llo) * k / (n - 1));
  return v;
}

std::vector<double> default_alpha_grid() {
  return geometric_grid(1e-3, 0.5, 200);
}

std::vector<double> AxisSpec::values() const {
  if (name != "eta_s" && name != "sigma_sc" && name != "sigma_dsc")
    throw std::invalid_argument(
        "axis name must be one of eta_s, sigma_sc, sigma_dsc; got \"" + name +
        "\"");
  return geometric ? geometric_grid(min, max, points)
                   : linear_grid(min, max, points);
}

namespace {

void set_axis_value(ProtocolParams* p, const std::string& name, double v) {
  if (name == "eta_s")
    p->eta_s = v;
  else if (name == "sigma_sc")
    p->sigma_sc = v;
  else if (name == "sigma_dsc")
    p->sigma_dsc = v;
  else
    throw std::invalid_argument("unknown axis name: " + name);
}

}  // namespace

NoisyPoint evaluate(Protocol protocol, const ProtocolParams& params) {
  analytics::ProtocolMetrics m;
  double sigma = 0.0;
  switch (protocol) {
    case Protocol::DC:
      m = analytics::dc_metrics(params);
      break;
    case Protocol::SC:
      m = analytics::sc_metrics(params);
      sigma = params.sigma_sc;
      break;
    case Protocol::DSC:
      m = analytics::dsc_metrics(params);
      sigma = params.sigma_dsc;
      break;
    case Protocol::SC_PNR:
      m = analytics::sc_pnr_metrics(params);
      sigma = params.sigma_sc;
      break;
  }
  NoisyPoint out;
  out.fidelity = sigma > 0.0 ? analytics::apply_phase_noise(m.fidelity, sigma)
                             : m.fidelity;
  out.rate = m.rate_dimensionless;
  out.xi_used = m.xi_used;
  out.sigma_applied = sigma;
  return out;
}

TradeoffTable tradeoff_curve(const SweepSpec& spec) {
  if (spec.protocols.empty())
    throw std::invalid_argument("tradeoff curve needs at least one protocol");
  if (spec.alpha_grid.empty())
    throw std::invalid_argument("tradeoff curve needs a non-empty alpha grid");
  TradeoffTable table;
  table.rows.reserve(spec.protocols.size() * spec.alpha_grid.size());
  for (Protocol protocol : spec.protocols) {
    for (double a2 : spec.alpha_grid) {
      ProtocolParams p = spec.baseline;
      p.alpha_sq = a2;
      NoisyPoint pt = evaluate(protocol, p);
      table.rows.push_back(TradeoffRow{protocol, a2, pt.fidelity, pt.rate,
                                       pt.xi_used, pt.sigma_applied});
    }
  }
  return table;
}

std::optional<double> min_alpha_for_target(Protocol protocol,
                                           const ProtocolParams& params,
                                           Target target,
                                           const std::vector<double>& grid) {
  if (grid.empty())
    throw std::invalid_argument("min_alpha_for_target needs a non-empty grid");
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("alpha grid must be strictly ascending");
  for (double a2 : grid) {
    ProtocolParams p = params;
    p.alpha_sq = a2;
    NoisyPoint pt = evaluate(protocol, p);
    const double achieved =
        target.kind == Target::Fidelity ? pt.fidelity : pt.rate;
    if (achieved >= target.value) return a2;
  }
  return std::nullopt;
}

const MapCell& RegimeGrid::at(int i1, int i2) const {
  const int n2 = axis2.points;
  return cells.at(static_cast<size_t>(i1) * n2 + i2);
}

RegimeGrid best_protocol_map(const SweepSpec& spec) {
  if (spec.protocols.empty())
    throw std::invalid_argument("map needs at least one protocol");
  if (spec.axis1.name == spec.axis2.name)
    throw std::invalid_argument("map axes must differ");
  const auto v1 = spec.axis1.values();
  const auto v2 = spec.axis2.values();
  const auto& grid =
      spec.alpha_grid.empty() ? default_alpha_grid() : spec.alpha_grid;

  RegimeGrid out;
  out.axis1 = spec.axis1;
  out.axis2 = spec.axis2;
  out.cells.reserve(v1.size() * v2.size());
  for (double a1 : v1) {
    for (double a2 : v2) {
      ProtocolParams base = spec.baseline;
      set_axis_value(&base, spec.axis1.name, a1);
      set_axis_value(&base, spec.axis2.name, a2);
      MapCell cell;
      for (Protocol protocol : spec.protocols) {
        auto ma = min_alpha_for_target(protocol, base, spec.target, grid);
        if (!ma) continue;
        ProtocolParams p = base;
        p.alpha_sq = *ma;
        NoisyPoint pt = evaluate(protocol, p);
        const double secondary =
            spec.target.kind == Target::Fidelity ? pt.rate : pt.fidelity;
        if (!cell.feasible || secondary > cell.metric) {
          cell.feasible = true;
          cell.winner = protocol;
          cell.alpha_sq_used = *ma;
          cell.metric = secondary;
        }
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

}  // namespace rsplab::regime
