#include "rsplab/analytics.h"

#include <cmath>
#include <numbers>

namespace rsplab::analytics {

namespace {

void check_range(double v, double lo, double hi, const char* field) {
  if (!(v >= lo && v <= hi))
    throw std::invalid_argument(std::string(field) + " must be in [" +
                                std::to_string(lo) + ", " +
                                std::to_string(hi) + "], got " +
                                std::to_string(v));
}

// u = 1 - e^{-x/2}: probability that a coherent pulse of mean photon number
// x/2 (one interferometer arm) yields at least one photon.
double u_of(double x) { return -std::expm1(-0.5 * x); }
// v = eta_s/2 (1 + x/2) + (1 - eta_s) u: server-arm click weight.
double v_of(double x, double es) {
  return 0.5 * es * (1.0 + 0.5 * x) + (1.0 - es) * u_of(x);
}

struct GoldenResult {
  double arg, value;
};

// Golden-section maximization of f on [lo, hi] (unimodal objectives only).
template <typename F>
GoldenResult golden_max(F f, double lo, double hi, double tol = 1e-12) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double arg = 0.5 * (a + b);
  return {arg, f(arg)};
}

}  // namespace

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::DC: return "DC";
    case Protocol::DSC: return "DSC";
    case Protocol::SC: return "SC";
    case Protocol::SC_PNR: return "SC-PNR";
  }
  throw std::logic_error("unreachable");
}

Protocol protocol_from_name(const std::string& name) {
  if (name == "DC") return Protocol::DC;
  if (name == "DSC") return Protocol::DSC;
  if (name == "SC") return Protocol::SC;
  if (name == "SC-PNR" || name == "SC_PNR" || name == "PNR")
    return Protocol::SC_PNR;
  throw std::invalid_argument("unknown protocol name: " + name +
                              " (expected DC, DSC, SC or SC-PNR)");
}

ProtocolParams::Effective ProtocolParams::effective() const {
  return Effective{eta_c * eta_d, eta_s * eta_d};
}

void ProtocolParams::validate() const {
  check_range(eta_c, 0.0, 1.0, "eta_c");
  check_range(eta_s, 0.0, 1.0, "eta_s");
  check_range(eta_d, 0.0, 1.0, "eta_d");
  if (!(alpha_sq >= 0.0))
    throw std::invalid_argument("alpha_sq must be >= 0, got " +
                                std::to_string(alpha_sq));
  if (!(sigma_sc >= 0.0))
    throw std::invalid_argument("sigma_sc must be >= 0, got " +
                                std::to_string(sigma_sc));
  if (!(sigma_dsc >= 0.0))
    throw std::invalid_argument("sigma_dsc must be >= 0, got " +
                                std::to_string(sigma_dsc));
  if (!std::isfinite(theta))
    throw std::invalid_argument("theta must be finite");
  if (xi) check_range(*xi, 0.0, 1.0, "xi");
}

// ---------------------------------------------------------------------------
// DC

ProtocolMetrics dc_metrics(const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double x = eff.eta_c * p.alpha_sq;
  const double es = eff.eta_s;
  const double ut = -std::expm1(-0.25 * x);  // 1 - e^{-x/4}
  const double vt = 0.5 * es * (1.0 + 0.25 * x) + (1.0 - es) * ut;
  ProtocolMetrics m;
  m.xi_used = 1.0 / std::sqrt(2.0);
  m.success_probability = 4.0 * std::exp(-0.5 * x) * ut * vt;
  m.rate_dimensionless = m.success_probability;
  m.fidelity = (ut == 0.0 || vt == 0.0)
                   ? 1.0  // alpha -> 0 limit
                   : 0.5 * (1.0 + (es * x / 8.0) / (ut * vt));
  if (m.fidelity > 1.0) m.fidelity = 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// SC

double sc_herald_probability(double x, double es, double xi_sq) {
  const double u = u_of(x), v = v_of(x, es);
  const double D = (1.0 - xi_sq) * u + xi_sq * v;
  return 2.0 * std::exp(-0.5 * x) * D;
}

double sc_fidelity_general(double x, double es, double xi_sq) {
  // Heralded overlap with |+_theta>: 1/2 (1 + 2C/D), with C the
  // client-server interference amplitude and D the total click weight.
  const double u = u_of(x), v = v_of(x, es);
  const double D = (1.0 - xi_sq) * u + xi_sq * v;
  if (D == 0.0) return 1.0;
  const double C = 0.5 * std::sqrt(es * x * xi_sq * (1.0 - xi_sq));
  return 0.5 * (1.0 + 2.0 * C / D);
}

double sc_optimal_xi(const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double x = eff.eta_c * p.alpha_sq;
  const double es = eff.eta_s;
  if (x == 0.0)
    throw std::invalid_argument(
        "sc_optimal_xi: eta_c * alpha_sq must be positive (no client "
        "photons, so no bright-state balance exists)");
  const double u = u_of(x), v = v_of(x, es);
  // Stationary point of the general overlap: xi^2 = u/(u+v), equivalently
  // 2u / (4u + eta_s(1 + x/2 - 2u)).
  return std::sqrt(u / (u + v));
}

ProtocolMetrics sc_metrics(const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double x = eff.eta_c * p.alpha_sq;
  const double es = eff.eta_s;
  ProtocolMetrics m;
  if (p.xi) {
    const double t = (*p.xi) * (*p.xi);
    m.xi_used = *p.xi;
    m.fidelity = sc_fidelity_general(x, es, t);
    m.success_probability = sc_herald_probability(x, es, t);
  } else if (x == 0.0) {
    m.xi_used = 0.0;  // xi -> 0 limit of the optimum
    m.fidelity = 1.0;
    m.success_probability = 0.0;
  } else {
    // Both quantities at the same operating point: the fidelity-optimal
    // bright-state parameter. At xi^2 = u/(u+v) the fidelity reduces to
    // 1/2 (1 + sqrt(eta_s x / (4uv))) and the success probability to
    // 4 e^{-x/2} uv/(u+v).
    m.xi_used = sc_optimal_xi(p);
    const double t = m.xi_used * m.xi_used;
    m.fidelity = sc_fidelity_general(x, es, t);
    m.success_probability = sc_herald_probability(x, es, t);
  }
  m.rate_dimensionless = m.success_probability;
  return m;
}

// ---------------------------------------------------------------------------
// DSC

double dsc_cnot_probability(double x, double es, double xi_sq) {
  // The CNOT + |1> projection keeps the cross terms of two independent SC
  // states: P = 2AB/D^2 with A the client-photon click weight and B the
  // server-photon click weight.
  const double u = u_of(x), v = v_of(x, es);
  const double A = (1.0 - xi_sq) * u, B = xi_sq * v;
  const double D = A + B;
  if (D == 0.0) return 0.0;
  return 2.0 * A * B / (D * D);
}

double dsc_assembled_rate(double x, double es, double xi_sq) {
  const double p = sc_herald_probability(x, es, xi_sq);
  if (p == 0.0) return 0.0;
  const double slots = p * (2.0 - p) / (3.0 - p);  // 1/(1/(2p-p^2) + 1/p)
  return slots * dsc_cnot_probability(x, es, xi_sq);
}

double dsc_best_xi_sq(double x, double es) {
  if (x == 0.0) return 0.0;
  auto objective = [&](double t) { return dsc_assembled_rate(x, es, t); };
  return golden_max(objective, 1e-9, 1.0 - 1e-9).arg;
}

double eq7_dsc_rate(double x, double es) {
  // Printed closed form for the DSC repetition rate. W collects the server
  // click weight, Q the client one; the sqrt term is the scheduling penalty.
  if (es == 0.0) return 0.0;
  const double u = u_of(x);
  const double ut = -std::expm1(-0.25 * x);  // 1 - e^{-x/4}
  const double W = es * (3.0 + x) + 4.0 * u * (1.0 - es);
  const double Q = 3.0 + x - 4.0 * u;
  if (W == 0.0 || Q == 0.0) return 0.0;
  return (8.0 * u * W) / (3.0 * es * es * std::exp(0.5 * x) * Q * Q) *
         (W + 4.0 * u + es * x - 4.0 * std::sqrt(ut * W));
}

ProtocolMetrics dsc_metrics(const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double x = eff.eta_c * p.alpha_sq;
  const double es = eff.eta_s;
  const double u = u_of(x), v = v_of(x, es);
  ProtocolMetrics m;
  m.fidelity = (u == 0.0 || v == 0.0)
                   ? 1.0
                   : 0.5 * (1.0 + es * x / (4.0 * u * v));
  if (m.fidelity > 1.0) m.fidelity = 1.0;
  if (p.xi) {
    const double t = (*p.xi) * (*p.xi);
    m.xi_used = *p.xi;
    m.success_probability = dsc_cnot_probability(x, es, t);
    m.rate_dimensionless = dsc_assembled_rate(x, es, t);
  } else {
    const double t = dsc_best_xi_sq(x, es);
    m.xi_used = std::sqrt(t);
    m.success_probability = dsc_cnot_probability(x, es, t);
    m.rate_dimensionless = eq7_dsc_rate(x, es);
  }
  return m;
}

// ---------------------------------------------------------------------------
// SC-PNR

double pnr_balanced_xi_sq(double x, double es) {
  if (x == 0.0 && es == 0.0) return 0.0;
  return x / (es + x);
}

ProtocolMetrics sc_pnr_metrics(const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double x = eff.eta_c * p.alpha_sq;
  const double es = eff.eta_s;
  ProtocolMetrics m;
  const double t = p.xi ? (*p.xi) * (*p.xi) : pnr_balanced_xi_sq(x, es);
  m.xi_used = std::sqrt(t);
  // Exactly-one-photon herald: A0 client-photon weight, B0 server-photon
  // weight (coherent), W the lost-server-photon incoherent weight.
  const double A0 = x * (1.0 - t);
  const double B0 = es * t;
  const double W = x * t * (1.0 - es);
  const double total = A0 + B0 + W;
  const double per_pattern = 0.5 * std::exp(-x) * total;
  m.success_probability = 2.0 * per_pattern;  // both detectors accepted
  m.rate_dimensionless = m.success_probability;
  m.fidelity = total == 0.0
                   ? 1.0
                   : (0.5 * (A0 + B0) + std::sqrt(A0 * B0) + 0.5 * W) / total;
  return m;
}

// ---------------------------------------------------------------------------
// Noise and asymptotics

double apply_phase_noise(double fidelity, double sigma) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("sigma must be >= 0, got " +
                                std::to_string(sigma));
  return 0.5 * (1.0 + (2.0 * fidelity - 1.0) * std::exp(-0.5 * sigma * sigma));
}

double sigma_dsc_estimate(double linewidth_hz, double interval_s) {
  if (!(linewidth_hz >= 0.0) || !(interval_s >= 0.0))
    throw std::invalid_argument(
        "linewidth and interval must be >= 0");
  return std::sqrt(2.0 * std::numbers::pi * linewidth_hz * interval_s);
}

AsymptoticCoefficients asymptotics(Protocol protocol,
                                   const ProtocolParams& p) {
  p.validate();
  const auto eff = p.effective();
  const double ec = eff.eta_c, es = eff.eta_s;
  if (es == 0.0)
    throw std::invalid_argument("asymptotics require eta_s^eff > 0");
  AsymptoticCoefficients a;
  const double shared_infidelity = ec * (4.0 - 3.0 * es) / (16.0 * es);
  switch (protocol) {
    case Protocol::SC:
      a.infidelity_slope = shared_infidelity;
      a.rate_slope = 2.0 * ec;
      break;
    case Protocol::DC:
      a.infidelity_slope = shared_infidelity;
      a.rate_slope = 0.5 * ec * es;
      break;
    case Protocol::DSC:
      a.infidelity_slope = 2.0 * shared_infidelity;
      a.rate_slope = 4.0 * ec / 3.0;
      break;
    case Protocol::SC_PNR:
      a.infidelity_slope = ec * (1.0 - es) / (4.0 * es);
      a.rate_slope = 2.0 * ec;
      break;
  }
  return a;
}

}  // namespace rsplab::analytics
