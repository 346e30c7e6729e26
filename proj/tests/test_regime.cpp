// Parameter-space exploration checks: noise routing, trade-off tables and
// their ceilings, minimal-pulse target searches, and the best-protocol maps
// with frozen cell counts, anchor cells, and the qualitative regime
// structures (single transitions, corner confinement, diagonal flips,
// directionality). The map counts pin today's behavior so regressions and
// formula changes surface immediately.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rsplab/analytics.h"
#include "rsplab/regime.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

using namespace rsplab;
using analytics::Protocol;
using analytics::ProtocolParams;
using regime::Target;

namespace {

ProtocolParams canonical() {
  ProtocolParams p;
  p.eta_c = 0.32;
  p.eta_s = 0.13;
  p.eta_d = 0.7;
  p.alpha_sq = 0.01;
  return p;
}

struct MapResult {
  regime::RegimeGrid grid;
  std::map<std::string, int> counts;
};

MapResult run_map(const std::string& ax1, double lo1, double hi1, int n1,
                  const std::string& ax2, double lo2, double hi2, int n2,
                  Target target, double sigma_dsc, double eta_s_fixed,
                  std::vector<Protocol> protocols = {Protocol::DC,
                                                     Protocol::DSC,
                                                     Protocol::SC}) {
  regime::SweepSpec spec;
  spec.baseline = canonical();
  spec.baseline.alpha_sq = 0.0;
  spec.baseline.sigma_dsc = sigma_dsc;
  if (eta_s_fixed > 0) spec.baseline.eta_s = eta_s_fixed;
  spec.protocols = std::move(protocols);
  spec.alpha_grid = regime::default_alpha_grid();
  spec.axis1 = {ax1, lo1, hi1, n1, false};
  spec.axis2 = {ax2, lo2, hi2, n2, false};
  spec.target = target;
  MapResult r{regime::best_protocol_map(spec), {}};
  for (const auto& c : r.grid.cells) {
    if (!c.feasible)
      ++r.counts["none"];
    else
      ++r.counts[analytics::protocol_name(c.winner)];
  }
  return r;
}

void check_cell(const regime::RegimeGrid& g, int i1, int i2, Protocol winner,
                double alpha, double metric) {
  const auto& c = g.at(i1, i2);
  CHECK(c.feasible);
  CHECK(c.winner == winner);
  CHECK(c.alpha_sq_used == doctest::Approx(alpha).epsilon(1e-15));
  CHECK(c.metric == doctest::Approx(metric).epsilon(1e-12));
}

}  // namespace

TEST_CASE("grid helpers: endpoints, sizes, rejection") {
  const auto lin = regime::linear_grid(0.0, 1.0, 21);
  REQUIRE(lin.size() == 21);
  CHECK(lin.front() == 0.0);
  CHECK(lin.back() == 1.0);
  CHECK(lin[1] == doctest::Approx(0.05).epsilon(1e-15));

  const auto geo = regime::geometric_grid(1e-3, 0.5, 200);
  REQUIRE(geo.size() == 200);
  CHECK(geo.front() == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(geo.back() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::is_sorted(geo.begin(), geo.end()));

  const auto def = regime::default_alpha_grid();
  CHECK(def.size() == 200);
  CHECK(def == geo);

  CHECK_THROWS_AS(regime::linear_grid(0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(regime::geometric_grid(0.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(regime::geometric_grid(0.5, 0.1, 5), std::invalid_argument);
}

TEST_CASE("axis specifications validate their parameter names") {
  for (const char* name : {"eta_s", "sigma_sc", "sigma_dsc"}) {
    regime::AxisSpec ax{name, 0.1, 0.9, 5, false};
    CHECK(ax.values().size() == 5);
  }
  regime::AxisSpec bad{"eta_q", 0.0, 1.0, 5, false};
  CHECK_THROWS_AS(bad.values(), std::invalid_argument);
}

TEST_CASE("noise routing: each protocol sees only its own dephasing") {
  ProtocolParams p = canonical();
  p.sigma_sc = 0.5;
  p.sigma_dsc = 0.8;

  const auto sc = regime::evaluate(Protocol::SC, p);
  CHECK(sc.sigma_applied == 0.5);
  CHECK(sc.fidelity ==
        doctest::Approx(analytics::apply_phase_noise(
                            analytics::sc_metrics(canonical()).fidelity, 0.5))
            .epsilon(1e-14));
  CHECK(sc.rate ==
        doctest::Approx(analytics::sc_metrics(canonical()).success_probability)
            .epsilon(1e-14));

  const auto dsc = regime::evaluate(Protocol::DSC, p);
  CHECK(dsc.sigma_applied == 0.8);
  CHECK(dsc.fidelity ==
        doctest::Approx(analytics::apply_phase_noise(
                            analytics::dsc_metrics(canonical()).fidelity, 0.8))
            .epsilon(1e-14));

  const auto dc = regime::evaluate(Protocol::DC, p);
  CHECK(dc.sigma_applied == 0.0);
  CHECK(dc.fidelity ==
        doctest::Approx(analytics::dc_metrics(canonical()).fidelity)
            .epsilon(1e-14));

  const auto pnr = regime::evaluate(Protocol::SC_PNR, p);
  CHECK(pnr.sigma_applied == 0.5);
  CHECK(pnr.fidelity ==
        doctest::Approx(analytics::apply_phase_noise(
                            analytics::sc_pnr_metrics(canonical()).fidelity,
                            0.5))
            .epsilon(1e-14));
}

TEST_CASE("trade-off tables: ordering, shape, noiseless limits") {
  regime::SweepSpec spec;
  spec.baseline = canonical();
  spec.protocols = {Protocol::DC, Protocol::DSC, Protocol::SC};
  spec.alpha_grid = regime::default_alpha_grid();
  const auto table = regime::tradeoff_curve(spec);
  REQUIRE(table.rows.size() == 3 * 200);

  SUBCASE("rows come out grouped by protocol, ascending in pulse strength") {
    for (int b = 0; b < 3; ++b) {
      const Protocol expect = spec.protocols[b];
      for (int k = 0; k < 200; ++k) {
        const auto& row = table.rows[b * 200 + k];
        CHECK(row.protocol == expect);
        CHECK(row.alpha_sq == spec.alpha_grid[k]);
        if (k > 0) {
          CHECK(row.fidelity < table.rows[b * 200 + k - 1].fidelity);
          CHECK(row.rate > table.rows[b * 200 + k - 1].rate);
        }
      }
      // every curve climbs toward perfect fidelity at weak pulses
      CHECK(table.rows[b * 200].fidelity > 0.9975);
    }
  }
  SUBCASE("rejects empty inputs") {
    regime::SweepSpec bad = spec;
    bad.protocols = {};
    CHECK_THROWS_AS(regime::tradeoff_curve(bad), std::invalid_argument);
    bad = spec;
    bad.alpha_grid = {};
    CHECK_THROWS_AS(regime::tradeoff_curve(bad), std::invalid_argument);
  }
}

TEST_CASE("noisy trade-off: the dephasing ceiling binds the single-pulse "
          "protocols but not the two-bin herald") {
  const double ceiling = 0.5 * (1.0 + std::exp(-0.125));
  CHECK(ceiling == doctest::Approx(0.94124845129229773).epsilon(1e-15));

  regime::SweepSpec spec;
  spec.baseline = canonical();
  spec.baseline.sigma_sc = 0.5;
  spec.baseline.sigma_dsc = 0.5;
  spec.protocols = {Protocol::DC, Protocol::DSC, Protocol::SC};
  spec.alpha_grid = regime::default_alpha_grid();
  const auto table = regime::tradeoff_curve(spec);

  double best_noisy = 0.0, dc_first = 0.0;
  for (const auto& row : table.rows) {
    if (row.protocol == Protocol::DC) {
      if (row.alpha_sq == spec.alpha_grid.front()) dc_first = row.fidelity;
      continue;
    }
    best_noisy = std::max(best_noisy, row.fidelity);
  }
  CHECK(best_noisy == doctest::Approx(0.94074336591567831).epsilon(1e-12));
  CHECK(best_noisy < ceiling + 1e-6);
  CHECK(dc_first == doctest::Approx(0.99942730394552248).epsilon(1e-12));
  CHECK(dc_first > 0.999);
}

TEST_CASE("minimal pulse strength for a target") {
  const auto grid = regime::default_alpha_grid();
  ProtocolParams base = canonical();
  base.alpha_sq = 0.0;

  SUBCASE("a fidelity above the noise ceiling is infeasible") {
    ProtocolParams p = base;
    p.sigma_sc = 0.5;
    const auto got = regime::min_alpha_for_target(
        Protocol::SC, p, Target{Target::Fidelity, 0.99}, grid);
    CHECK(!got.has_value());
  }
  SUBCASE("a zero rate target is met by the weakest pulse") {
    const auto got = regime::min_alpha_for_target(
        Protocol::DC, base, Target{Target::Rate, 0.0}, grid);
    REQUIRE(got.has_value());
    CHECK(*got == grid.front());
  }
  SUBCASE("a noiseless 0.98 fidelity target is met by the weakest pulse") {
    for (Protocol pr : {Protocol::DC, Protocol::DSC, Protocol::SC}) {
      const auto got = regime::min_alpha_for_target(
          base.eta_s > 0 ? pr : pr, base, Target{Target::Fidelity, 0.98},
          grid);
      REQUIRE(got.has_value());
      CHECK(*got == grid.front());
    }
  }
  SUBCASE("a rate target lands on the first grid point that clears it") {
    const Target tgt{Target::Rate, 0.01};
    const auto got =
        regime::min_alpha_for_target(Protocol::SC, base, tgt, grid);
    REQUIRE(got.has_value());
    const auto idx = std::find(grid.begin(), grid.end(), *got) - grid.begin();
    REQUIRE(idx > 0);
    ProtocolParams at = base;
    at.alpha_sq = grid[idx];
    CHECK(regime::evaluate(Protocol::SC, at).rate >= 0.01);
    at.alpha_sq = grid[idx - 1];
    CHECK(regime::evaluate(Protocol::SC, at).rate < 0.01);
  }
  SUBCASE("degenerate grids are rejected") {
    CHECK_THROWS_AS(regime::min_alpha_for_target(
                        Protocol::SC, base, Target{Target::Fidelity, 0.9}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        regime::min_alpha_for_target(Protocol::SC, base,
                                     Target{Target::Fidelity, 0.9},
                                     {0.1, 0.05}),
        std::invalid_argument);
  }
}

TEST_CASE("best-protocol maps: frozen counts and anchor cells") {
  const Target f98{Target::Fidelity, 0.98};
  const Target f97{Target::Fidelity, 0.97};
  const Target r01{Target::Rate, 0.01};
  const Target r03{Target::Rate, 0.03};

  auto fig3a = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f98, 0.5, 0);
  auto fig3b = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, r01, 0.5, 0);
  auto fig3c = run_map("sigma_dsc", 0, 1, 21, "sigma_sc", 0, 1, 21, r01, 0,
                       0.3);

  SUBCASE("cell counts are exactly reproducible") {
    CHECK(fig3a.counts["DC"] == 300);
    CHECK(fig3a.counts["SC"] == 120);
    CHECK(fig3a.counts["DSC"] == 0);
    CHECK(fig3b.counts["DC"] == 227);
    CHECK(fig3b.counts["DSC"] == 40);
    CHECK(fig3b.counts["SC"] == 153);
    CHECK(fig3c.counts["DC"] == 110);
    CHECK(fig3c.counts["DSC"] == 137);
    CHECK(fig3c.counts["SC"] == 194);
  }

  SUBCASE("anchor cells: winner, pulse strength, metric") {
    const double a0 = regime::default_alpha_grid().front();
    check_cell(fig3a.grid, 2, 5, Protocol::SC, a0, 0.00044744794663143379);
    check_cell(fig3a.grid, 10, 10, Protocol::DC, a0,
               4.3124091274217828e-05);
    check_cell(fig3a.grid, 18, 15, Protocol::DC, a0,
               6.2720250083958515e-05);
    check_cell(fig3b.grid, 2, 5, Protocol::SC, 0.02343305960311046,
               0.99236220730053759);
    check_cell(fig3b.grid, 10, 10, Protocol::DC, 0.22903582624818564,
               0.97764006072407983);
    check_cell(fig3b.grid, 18, 15, Protocol::DC, 0.1624479084753554,
               0.99082784775269772);
    check_cell(fig3c.grid, 2, 5, Protocol::DSC, 0.041110895532474274,
               0.97985762584107383);
    check_cell(fig3c.grid, 10, 10, Protocol::SC, 0.02343305960311046,
               0.93668610392201646);
    check_cell(fig3c.grid, 18, 15, Protocol::DC, 0.3894652354505137,
               0.92687297215939368);
  }

  SUBCASE("fidelity-target columns lose the single-click protocol at most "
          "once as dephasing grows") {
    int multi_transition = 0, sc_low_sigma_miss = 0;
    for (int j = 0; j < 20; ++j) {
      int transitions = 0;
      bool was_sc = true;
      for (int i = 0; i < 21; ++i) {
        const auto& c = fig3a.grid.at(i, j);
        const bool is_sc = c.feasible && c.winner == Protocol::SC;
        if (i == 0) {
          was_sc = is_sc;
          continue;
        }
        if (was_sc && !is_sc) ++transitions;
        if (!was_sc && is_sc) transitions += 100;  // must not reappear
        was_sc = is_sc;
      }
      if (transitions > 1) ++multi_transition;
      const double eta_s = 0.05 + j * 0.05;
      if (eta_s * 0.7 <= 0.2) {
        const auto& c = fig3a.grid.at(1, j);  // sigma_sc = 0.05
        if (!(c.feasible && c.winner == Protocol::SC)) ++sc_low_sigma_miss;
      }
    }
    CHECK(multi_transition == 0);
    CHECK(sc_low_sigma_miss == 0);
  }

  SUBCASE("rate-target two-bin advantage lives in the noisy, efficient "
          "corner") {
    double dc_min_sigma = 1e9, dc_min_eta = 1e9;
    for (int i = 0; i < 21; ++i)
      for (int j = 0; j < 20; ++j) {
        const auto& c = fig3b.grid.at(i, j);
        if (c.feasible && c.winner == Protocol::DC) {
          dc_min_sigma = std::min(dc_min_sigma, i * 0.05);
          dc_min_eta = std::min(dc_min_eta, 0.05 + j * 0.05);
        }
      }
    CHECK(dc_min_sigma == doctest::Approx(0.15).epsilon(1e-9));
    CHECK(dc_min_eta == doctest::Approx(0.30).epsilon(1e-9));
  }

  SUBCASE("the single/fused winner flips across the noise diagonal") {
    int oriented = 0, flipped_pairs = 0;
    for (int i = 0; i < 21; ++i)
      for (int j = i + 1; j < 21; ++j) {
        const auto& below = fig3c.grid.at(j, i);  // sigma_dsc > sigma_sc
        const auto& above = fig3c.grid.at(i, j);  // sigma_sc > sigma_dsc
        const bool b_ok = below.feasible && (below.winner == Protocol::SC ||
                                             below.winner == Protocol::DSC);
        const bool a_ok = above.feasible && (above.winner == Protocol::SC ||
                                             above.winner == Protocol::DSC);
        if (!b_ok || !a_ok || below.winner == above.winner) continue;
        ++flipped_pairs;
        if (below.winner == Protocol::SC && above.winner == Protocol::DSC)
          ++oriented;
      }
    CHECK(flipped_pairs == 137);
    CHECK(oriented == 137);  // lighter relative noise always wins
  }

  SUBCASE("every feasible cell re-achieves its target standalone") {
    int misses = 0;
    auto recheck = [&](const MapResult& r, const Target& tgt, double sdsc) {
      const auto v1 = r.grid.axis1.values();
      const auto v2 = r.grid.axis2.values();
      for (std::size_t i = 0; i < v1.size(); ++i)
        for (std::size_t j = 0; j < v2.size(); ++j) {
          const auto& c = r.grid.at(static_cast<int>(i),
                                    static_cast<int>(j));
          if (!c.feasible) continue;
          ProtocolParams p = canonical();
          p.sigma_dsc = sdsc;
          p.sigma_sc = v1[i];
          p.eta_s = v2[j];
          p.alpha_sq = c.alpha_sq_used;
          const auto pt = regime::evaluate(c.winner, p);
          const double got =
              tgt.kind == Target::Fidelity ? pt.fidelity : pt.rate;
          if (!(got >= tgt.value)) ++misses;
        }
    };
    recheck(fig3a, f98, 0.5);
    recheck(fig3b, r01, 0.5);
    CHECK(misses == 0);
  }

  SUBCASE("listing order does not matter when no cell is an exact tie") {
    auto reordered = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f98,
                             0.5, 0,
                             {Protocol::SC, Protocol::DC, Protocol::DSC});
    REQUIRE(reordered.grid.cells.size() == fig3a.grid.cells.size());
    for (std::size_t k = 0; k < reordered.grid.cells.size(); ++k) {
      CHECK(reordered.grid.cells[k].winner == fig3a.grid.cells[k].winner);
      CHECK(reordered.grid.cells[k].metric == fig3a.grid.cells[k].metric);
    }
  }

  SUBCASE("identical specifications give bitwise-identical grids") {
    auto again = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f98,
                         0.5, 0);
    REQUIRE(again.grid.cells.size() == fig3a.grid.cells.size());
    for (std::size_t k = 0; k < again.grid.cells.size(); ++k) {
      CHECK(again.grid.cells[k].feasible == fig3a.grid.cells[k].feasible);
      CHECK(again.grid.cells[k].winner == fig3a.grid.cells[k].winner);
      CHECK(again.grid.cells[k].alpha_sq_used ==
            fig3a.grid.cells[k].alpha_sq_used);
      CHECK(again.grid.cells[k].metric == fig3a.grid.cells[k].metric);
    }
  }
}

TEST_CASE("alternate-target directionality (frozen counts)") {
  const Target f98{Target::Fidelity, 0.98};
  const Target f97{Target::Fidelity, 0.97};
  const Target r01{Target::Rate, 0.01};
  const Target r03{Target::Rate, 0.03};

  auto fig3a = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f98, 0.5, 0);
  auto fig3b = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, r01, 0.5, 0);
  auto fig5a = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f97, 0.5, 0);
  auto fig5b = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, f98, 0.25,
                       0);
  auto fig6a = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, r03, 0.5, 0);
  auto fig6b = run_map("sigma_sc", 0, 1, 21, "eta_s", 0.05, 1, 20, r01, 0.25,
                       0);

  CHECK(fig5a.counts["DC"] == 264);
  CHECK(fig5a.counts["SC"] == 156);
  CHECK(fig5b.counts["DSC"] == 300);
  CHECK(fig5b.counts["SC"] == 120);
  CHECK(fig6a.counts["DC"] == 76);
  CHECK(fig6a.counts["DSC"] == 118);
  CHECK(fig6a.counts["SC"] == 226);
  CHECK(fig6b.counts["DC"] == 167);
  CHECK(fig6b.counts["DSC"] == 128);
  CHECK(fig6b.counts["SC"] == 125);

  SUBCASE("easing the fidelity target only grows the single-click region") {
    int misses = 0;
    for (std::size_t k = 0; k < fig3a.grid.cells.size(); ++k) {
      const auto& tight = fig3a.grid.cells[k];
      const auto& loose = fig5a.grid.cells[k];
      if (tight.feasible && tight.winner == Protocol::SC &&
          !(loose.feasible && loose.winner == Protocol::SC))
        ++misses;
    }
    CHECK(misses == 0);
  }
  SUBCASE("halving the fused-pair noise only grows its region") {
    CHECK(fig5b.counts["DSC"] >= fig3a.counts["DSC"]);
    CHECK(fig6b.counts["DSC"] >= fig3b.counts["DSC"]);
  }
  SUBCASE("two-bin advantage at rate targets: measured direction") {
    // Characterized discrepancy (README): the two-bin advantage region
    // GROWS as the rate target is relaxed 0.03 -> 0.01; the opposite
    // direction is frozen here so the finding stays visible.
    CHECK(fig6a.counts["DC"] == 76);
    CHECK(fig3b.counts["DC"] == 227);
    CHECK(fig6a.counts["DC"] < fig3b.counts["DC"]);
  }
}

TEST_CASE("map construction rejects bad specifications") {
  regime::SweepSpec spec;
  spec.baseline = canonical();
  spec.protocols = {Protocol::DC};
  spec.alpha_grid = regime::default_alpha_grid();
  spec.axis1 = {"eta_s", 0.1, 0.9, 4, false};
  spec.axis2 = {"eta_s", 0.1, 0.9, 4, false};
  spec.target = {Target::Fidelity, 0.9};
  CHECK_THROWS_AS(regime::best_protocol_map(spec), std::invalid_argument);

  spec.axis2 = {"sigma_sc", 0.0, 1.0, 4, false};
  spec.protocols = {};
  CHECK_THROWS_AS(regime::best_protocol_map(spec), std::invalid_argument);
}
