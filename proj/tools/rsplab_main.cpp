// Command-line front end: trade-off curves, best-protocol maps, closed-form
// vs simulation verification campaigns, and purified-QKD chain checks.
#include "rsplab/analytics.h"
#include "rsplab/config.h"
#include "rsplab/oracle.h"
#include "rsplab/qkd.h"
#include "rsplab/regime.h"

#include "CLI11.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using rsplab::analytics::Protocol;
using rsplab::analytics::ProtocolParams;
using rsplab::config::ConfigError;
using rsplab::config::format_double;
using rsplab::config::KeyValues;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitVerificationFailure = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_path;  // empty -> stdout
  int cutoff = rsplab::fock::kDefaultCutoff;
  bool cutoff_given = false;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool config_required) {
  auto* copt = cmd->add_option("--config", o->config_path,
                               "run configuration file (key = value lines)");
  if (config_required) copt->required();
  cmd->add_option("--out", o->out_path,
                  "output path (stdout when omitted)");
  cmd->add_option("--cutoff", o->cutoff, "Fock-space cutoff")
      ->check(CLI::PositiveNumber)
      ->each([o](const std::string&) { o->cutoff_given = true; });
  cmd->add_option("--seed", o->seed, "random seed")
      ->each([o](const std::string&) { o->seed_given = true; });
  cmd->add_option("--jobs", o->jobs, "worker threads")
      ->check(CLI::PositiveNumber);
}

// Runs fn(i) for i in [0, n) on `jobs` threads; each task writes only its
// own result slot, and the slots are serialized in index order afterwards,
// so the output is byte-identical for any job count.
template <typename Fn>
void parallel_for(int n, int jobs, Fn fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct OutputSink {
  std::ofstream file;
  std::ostream* stream = nullptr;
  explicit OutputSink(const std::string& path) {
    if (path.empty()) {
      stream = &std::cout;
      return;
    }
    file.open(path);
    if (!file) throw ConfigError("cannot open output file: " + path);
    stream = &file;
  }
  std::ostream& out() { return *stream; }
};

ProtocolParams baseline_from(const KeyValues& kv) {
  ProtocolParams p;
  p.eta_c = kv.get_double("eta_c", 1.0);
  p.eta_s = kv.get_double("eta_s", 1.0);
  p.eta_d = kv.get_double("eta_d", 1.0);
  p.theta = kv.get_double("theta", 0.0);
  p.sigma_sc = kv.get_double("sigma_sc", 0.0);
  p.sigma_dsc = kv.get_double("sigma_dsc", 0.0);
  if (kv.has("xi")) p.xi = kv.require_double("xi");
  p.validate();
  return p;
}

std::vector<Protocol> protocols_from(const KeyValues& kv,
                                     const std::string& fallback) {
  std::vector<Protocol> out;
  std::vector<std::string> names;
  if (kv.has("protocols")) {
    names = kv.get_list("protocols");  // present but empty is an error below
  } else {
    std::istringstream in(fallback);
    std::string item;
    while (std::getline(in, item, ',')) names.push_back(item);
  }
  for (const auto& name : names)
    out.push_back(rsplab::analytics::protocol_from_name(name));
  if (out.empty()) throw ConfigError("no protocols selected");
  return out;
}

std::vector<double> alpha_grid_from(const KeyValues& kv) {
  const double lo = kv.get_double("alpha_sq_min", 1e-3);
  const double hi = kv.get_double("alpha_sq_max", 0.5);
  const int n = kv.get_int("alpha_points", 200);
  const bool geometric = kv.get_bool("alpha_geometric", true);
  return geometric ? rsplab::regime::geometric_grid(lo, hi, n)
                   : rsplab::regime::linear_grid(lo, hi, n);
}

// ---------------------------------------------------------------------------
// curve

int cmd_curve(const CommonOpts& o) {
  KeyValues kv = KeyValues::parse_file(o.config_path);
  kv.restrict_keys({"eta_c", "eta_s", "eta_d", "theta", "sigma_sc",
                    "sigma_dsc", "xi", "protocols", "alpha_sq_min",
                    "alpha_sq_max", "alpha_points", "alpha_geometric"});
  rsplab::regime::SweepSpec spec;
  spec.baseline = baseline_from(kv);
  spec.protocols = protocols_from(kv, "DC,DSC,SC");
  spec.alpha_grid = alpha_grid_from(kv);

  struct Row {
    Protocol protocol;
    double alpha_sq;
    rsplab::regime::NoisyPoint point;
  };
  std::vector<Row> rows;
  for (Protocol protocol : spec.protocols)
    for (double a2 : spec.alpha_grid)
      rows.push_back(Row{protocol, a2, {}});
  parallel_for(static_cast<int>(rows.size()), o.jobs, [&](int i) {
    ProtocolParams p = spec.baseline;
    p.alpha_sq = rows[i].alpha_sq;
    rows[i].point = rsplab::regime::evaluate(rows[i].protocol, p);
  });

  OutputSink sink(o.out_path);
  sink.out() << "protocol,eta_c,eta_s,eta_d,alpha_sq,sigma,xi_used,fidelity,"
                "rate_per_tau\n";
  for (const Row& r : rows) {
    sink.out() << rsplab::analytics::protocol_name(r.protocol) << ','
               << format_double(spec.baseline.eta_c) << ','
               << format_double(spec.baseline.eta_s) << ','
               << format_double(spec.baseline.eta_d) << ','
               << format_double(r.alpha_sq) << ','
               << format_double(r.point.sigma_applied) << ','
               << format_double(r.point.xi_used) << ','
               << format_double(r.point.fidelity) << ','
               << format_double(r.point.rate) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// map

rsplab::regime::AxisSpec axis_from(const KeyValues& kv,
                                   const std::string& prefix) {
  rsplab::regime::AxisSpec a;
  a.name = kv.require_string(prefix);
  a.min = kv.require_double(prefix + "_min");
  a.max = kv.require_double(prefix + "_max");
  a.points = kv.get_int(prefix + "_points", 21);
  a.geometric = kv.get_bool(prefix + "_geometric", false);
  if (a.points < 1)
    throw ConfigError(prefix + "_points must be >= 1");
  return a;
}

int cmd_map(const CommonOpts& o) {
  KeyValues kv = KeyValues::parse_file(o.config_path);
  kv.restrict_keys({"eta_c", "eta_s", "eta_d", "theta", "sigma_sc",
                    "sigma_dsc", "xi", "protocols", "alpha_sq_min",
                    "alpha_sq_max", "alpha_points", "alpha_geometric",
                    "axis1", "axis1_min", "axis1_max", "axis1_points",
                    "axis1_geometric", "axis2", "axis2_min", "axis2_max",
                    "axis2_points", "axis2_geometric", "target_fidelity",
                    "target_rate"});
  rsplab::regime::SweepSpec spec;
  spec.baseline = baseline_from(kv);
  spec.protocols = protocols_from(kv, "DC,DSC,SC");
  spec.alpha_grid = alpha_grid_from(kv);
  spec.axis1 = axis_from(kv, "axis1");
  spec.axis2 = axis_from(kv, "axis2");
  const bool has_f = kv.has("target_fidelity"), has_r = kv.has("target_rate");
  if (has_f == has_r)
    throw ConfigError(
        "exactly one of target_fidelity / target_rate must be set");
  spec.target.kind = has_f ? rsplab::regime::Target::Fidelity
                           : rsplab::regime::Target::Rate;
  spec.target.value = has_f ? kv.require_double("target_fidelity")
                            : kv.require_double("target_rate");

  const auto v1 = spec.axis1.values();
  const auto v2 = spec.axis2.values();
  std::vector<rsplab::regime::MapCell> cells(v1.size() * v2.size());
  parallel_for(static_cast<int>(cells.size()), o.jobs, [&](int i) {
    const int i1 = i / static_cast<int>(v2.size());
    const int i2 = i % static_cast<int>(v2.size());
    rsplab::regime::SweepSpec one = spec;
    one.axis1.min = one.axis1.max = v1[i1];
    one.axis1.points = 1;
    one.axis2.min = one.axis2.max = v2[i2];
    one.axis2.points = 1;
    cells[i] = rsplab::regime::best_protocol_map(one).cells.at(0);
  });

  OutputSink sink(o.out_path);
  sink.out() << "axis1,axis2,winner,alpha_sq_used,metric\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (size_t i1 = 0; i1 < v1.size(); ++i1) {
    for (size_t i2 = 0; i2 < v2.size(); ++i2) {
      const auto& c = cells[i1 * v2.size() + i2];
      sink.out() << format_double(v1[i1]) << ',' << format_double(v2[i2])
                 << ','
                 << (c.feasible ? rsplab::analytics::protocol_name(c.winner)
                                : "none")
                 << ',' << format_double(c.feasible ? c.alpha_sq_used : nan)
                 << ',' << format_double(c.feasible ? c.metric : nan) << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyRow {
  double eta_c, eta_s, eta_d, alpha_sq, theta;
  double sc_df = 0, sc_dp = 0;
  double dc_df = 0, dc_dp = 0;
  double dsc_df = 0, dsc_dpc = 0, dsc_drate_closed = 0,
         dsc_drate_assembled = 0;
  double pnr_df = 0, pnr_dp = 0;
  std::string error;
};

int cmd_verify(const CommonOpts& o) {
  KeyValues kv = KeyValues::parse_file(o.config_path);
  kv.restrict_keys({"tuples", "seed", "cutoff", "tolerance", "protocols"});
  const int tuples = kv.get_int("tuples", 100);
  if (tuples < 1) throw ConfigError("empty campaign: tuples must be >= 1");
  const std::uint64_t seed =
      o.seed_given ? o.seed
                   : static_cast<std::uint64_t>(kv.get_int("seed", 1));
  const int cutoff = o.cutoff_given ? o.cutoff : kv.get_int("cutoff", 12);
  const double tol = kv.get_double("tolerance", 1e-8);

  // Draw every tuple up front so the realization is independent of --jobs.
  std::mt19937_64 gen(seed);
  auto uniform = [&](double lo, double hi) {
    const double u = (gen() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  std::vector<VerifyRow> rows(tuples);
  for (auto& r : rows) {
    r.eta_c = uniform(0.05, 1.0);
    r.eta_s = uniform(0.05, 1.0);
    r.eta_d = uniform(0.05, 1.0);
    r.alpha_sq = uniform(1e-3, 0.5);
    r.theta = uniform(0.0, 2.0 * 3.14159265358979323846);
  }

  parallel_for(tuples, o.jobs, [&](int i) {
    VerifyRow& r = rows[i];
    ProtocolParams p;
    p.eta_c = r.eta_c;
    p.eta_s = r.eta_s;
    p.eta_d = r.eta_d;
    p.alpha_sq = r.alpha_sq;
    p.theta = r.theta;
    try {
      {
        const auto cf = rsplab::analytics::sc_metrics(p);
        const auto sim = rsplab::oracle::simulate_sc(p, cutoff);
        r.sc_df = std::abs(cf.fidelity - sim.fidelity);
        r.sc_dp = std::abs(cf.success_probability - sim.total_probability);
      }
      {
        const auto cf = rsplab::analytics::dc_metrics(p);
        const auto sim = rsplab::oracle::simulate_dc(p, cutoff);
        r.dc_df = std::abs(cf.fidelity - sim.fidelity);
        r.dc_dp = std::abs(cf.success_probability - sim.total_probability);
      }
      {
        const auto cf = rsplab::analytics::dsc_metrics(p);
        const auto sim = rsplab::oracle::simulate_dsc(p, cutoff);
        const auto eff = p.effective();
        const double x = eff.eta_c * p.alpha_sq;
        r.dsc_df = std::abs(cf.fidelity - sim.prepared.fidelity);
        r.dsc_dpc = std::abs(rsplab::analytics::dsc_cnot_probability(
                                 x, eff.eta_s, sim.xi_used * sim.xi_used) -
                             sim.cnot_probability);
        r.dsc_drate_closed =
            std::abs(cf.rate_dimensionless - sim.assembled_rate);
        r.dsc_drate_assembled =
            std::abs(rsplab::analytics::dsc_assembled_rate(
                         x, eff.eta_s, sim.xi_used * sim.xi_used) -
                     sim.assembled_rate);
      }
      {
        const auto cf = rsplab::analytics::sc_pnr_metrics(p);
        const auto sim = rsplab::oracle::simulate_sc_pnr(p, cutoff);
        r.pnr_df = std::abs(cf.fidelity - sim.fidelity);
        r.pnr_dp = std::abs(cf.success_probability - sim.total_probability);
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  OutputSink sink(o.out_path);
  sink.out() << "tuple,eta_c,eta_s,eta_d,alpha_sq,theta,sc_dF,sc_dP,dc_dF,"
                "dc_dP,dsc_dF,dsc_dPc,dsc_dRate_closed,dsc_dRate_assembled,"
                "pnr_dF,pnr_dP,error\n";
  for (int i = 0; i < tuples; ++i) {
    const VerifyRow& r = rows[i];
    sink.out() << i << ',' << format_double(r.eta_c) << ','
               << format_double(r.eta_s) << ',' << format_double(r.eta_d)
               << ',' << format_double(r.alpha_sq) << ','
               << format_double(r.theta) << ',' << format_double(r.sc_df)
               << ',' << format_double(r.sc_dp) << ','
               << format_double(r.dc_df) << ',' << format_double(r.dc_dp)
               << ',' << format_double(r.dsc_df) << ','
               << format_double(r.dsc_dpc) << ','
               << format_double(r.dsc_drate_closed) << ','
               << format_double(r.dsc_drate_assembled) << ','
               << format_double(r.pnr_df) << ',' << format_double(r.pnr_dp)
               << ',' << (r.error.empty() ? "" : "\"" + r.error + "\"")
               << '\n';
  }

  struct Column {
    const char* name;
    double VerifyRow::*field;
  };
  const Column columns[] = {
      {"sc_dF", &VerifyRow::sc_df},
      {"sc_dP", &VerifyRow::sc_dp},
      {"dc_dF", &VerifyRow::dc_df},
      {"dc_dP", &VerifyRow::dc_dp},
      {"dsc_dF", &VerifyRow::dsc_df},
      {"dsc_dPc", &VerifyRow::dsc_dpc},
      {"dsc_dRate_closed", &VerifyRow::dsc_drate_closed},
      {"dsc_dRate_assembled", &VerifyRow::dsc_drate_assembled},
      {"pnr_dF", &VerifyRow::pnr_df},
      {"pnr_dP", &VerifyRow::pnr_dp},
  };
  bool failed = false;
  int error_count = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) ++error_count;
  std::ostringstream summary;
  summary << "# verification summary (tolerance " << format_double(tol)
          << ", cutoff " << cutoff << ", tuples " << tuples << ")\n";
  for (const auto& col : columns) {
    double worst = 0.0;
    for (const auto& r : rows)
      if (r.error.empty()) worst = std::max(worst, r.*(col.field));
    const bool ok = worst <= tol;
    failed = failed || !ok;
    summary << "# " << col.name << ": max " << format_double(worst) << "  "
            << (ok ? "PASS" : "FAIL") << '\n';
  }
  if (error_count > 0) {
    failed = true;
    summary << "# modeling errors: " << error_count
            << " tuple(s) (see error column)\n";
  }
  if (failed)
    summary << "# NOTE: a dsc_dRate_closed failure with dsc_dRate_assembled "
               "passing reproduces the known closed-form rate discrepancy "
               "(README, \"Known discrepancies\").\n";
  sink.out() << summary.str();
  std::cerr << summary.str();
  return failed ? kExitVerificationFailure : kExitOk;
}

// ---------------------------------------------------------------------------
// qkd

int cmd_qkd(const CommonOpts& o) {
  KeyValues kv = o.config_path.empty() ? KeyValues::parse_text("")
                                       : KeyValues::parse_file(o.config_path);
  kv.restrict_keys(
      {"alphas", "swap_counts", "xi", "dc_alphas", "cutoff", "tolerance"});
  std::vector<double> alphas = kv.get_double_list("alphas");
  if (alphas.empty()) alphas = {0.1, 0.3, 0.7};
  std::vector<double> swap_counts_d = kv.get_double_list("swap_counts");
  std::vector<int> swap_counts;
  for (double s : swap_counts_d) swap_counts.push_back(static_cast<int>(s));
  if (swap_counts.empty()) swap_counts = {0, 1, 2, 3};
  std::vector<double> dc_alphas = kv.get_double_list("dc_alphas");
  if (dc_alphas.empty()) dc_alphas = {0.3, 0.7};
  const int cutoff = o.cutoff_given ? o.cutoff : kv.get_int("cutoff", 12);
  const double tol = kv.get_double("tolerance", 1e-9);

  OutputSink sink(o.out_path);
  bool failed = false;

  // An explicit xi detunes the source from the Bell condition on purpose;
  // the resulting sub-unit fidelity is reported but does not fail the run.
  const bool xi_override = kv.has("xi");
  sink.out() << "== purified chain ("
             << (xi_override ? "explicit xi" : "Bell-condition xi") << ") ==\n";
  for (double alpha : alphas) {
    const double xi =
        xi_override ? kv.require_double("xi") : rsplab::qkd::bell_xi(alpha);
    double worst = 1.0, total_prob_dev = 0.0;
    for (int swaps : swap_counts) {
      const int n_patterns = swaps + 1;
      std::vector<rsplab::qkd::Bell> combo(n_patterns,
                                           rsplab::qkd::Bell::PhiPlus);
      double prob_sum = 0.0;
      // Enumerate all 4^(swaps+1) pattern combinations.
      const int total = 1 << (2 * n_patterns);
      for (int code = 0; code < total; ++code) {
        int c = code;
        for (int k = 0; k < n_patterns; ++k) {
          combo[k] = rsplab::qkd::kAllBell[c & 3];
          c >>= 2;
        }
        const auto res = rsplab::qkd::swap_and_project(alpha, xi, swaps, combo);
        worst = std::min(worst, res.phi_plus_fidelity);
        prob_sum += res.joint_probability;
      }
      total_prob_dev = std::max(total_prob_dev, std::abs(prob_sum - 1.0));
    }
    const auto canonical = rsplab::qkd::swap_and_project(
        alpha, xi, 0, {rsplab::qkd::Bell::PhiPlus});
    const auto corr = rsplab::qkd::correlation_check(canonical.state);
    const bool at_bell = worst >= 1.0 - tol;
    const bool ok = (at_bell || xi_override) && total_prob_dev <= 1e-12;
    failed = failed || !ok;
    sink.out() << "alpha=" << format_double(alpha)
               << " xi=" << format_double(xi)
               << " worst F(phi+)=" << format_double(worst)
               << " sum-of-patterns dev=" << format_double(total_prob_dev)
               << " P(same key)=" << format_double(corr.same_key_probability)
               << " <XX>=" << format_double(corr.xx_expectation) << "  "
               << (!ok ? "FAIL" : at_bell ? "PASS" : "INFO") << '\n';
  }

  sink.out() << "== double-click purified source fused with a node ==\n";
  for (const auto basis : {rsplab::qkd::Basis::Z, rsplab::qkd::Basis::X}) {
    for (double alpha : dc_alphas) {
      const auto outcomes = rsplab::qkd::dc_purified_bsm(basis, alpha, cutoff);
      sink.out() << "basis=" << (basis == rsplab::qkd::Basis::Z ? "Z" : "X")
                 << " alpha=" << format_double(alpha) << ":";
      for (const auto& oc : outcomes) {
        const bool ok = oc.fidelity >= 1.0 - tol;
        failed = failed || !ok;
        sink.out() << "  " << oc.pattern << "->"
                   << (oc.hadamard_on_node ? "H:" : "")
                   << rsplab::qkd::bell_name(oc.closest) << " F="
                   << format_double(oc.fidelity)
                   << " p=" << format_double(oc.probability)
                   << (ok ? "" : " FAIL");
      }
      sink.out() << '\n';
    }
  }
  sink.out() << (failed ? "RESULT: FAIL\n" : "RESULT: PASS\n");
  return failed ? kExitVerificationFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Remote-state-preparation laboratory: closed forms, brute-force "
      "simulation, regime maps, purified-QKD checks"};
  app.require_subcommand(1);

  CommonOpts curve_opts, map_opts, verify_opts, qkd_opts;
  CLI::App* curve = app.add_subcommand(
      "curve", "fidelity/rate trade-off curves over an |alpha|^2 grid");
  add_common(curve, &curve_opts, true);
  CLI::App* map_cmd = app.add_subcommand(
      "map", "best-protocol map over a two-axis parameter plane");
  add_common(map_cmd, &map_opts, true);
  CLI::App* verify = app.add_subcommand(
      "verify", "closed forms vs Fock-space simulation on random tuples");
  add_common(verify, &verify_opts, true);
  CLI::App* qkd = app.add_subcommand(
      "qkd", "purified-chain and double-click fusion verification");
  add_common(qkd, &qkd_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (curve->parsed()) return cmd_curve(curve_opts);
    if (map_cmd->parsed()) return cmd_map(map_opts);
    if (verify->parsed()) return cmd_verify(verify_opts);
    if (qkd->parsed()) return cmd_qkd(qkd_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerificationFailure;
  }
  return kExitConfigError;
}
