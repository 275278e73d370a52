#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "spinseq/robustness.hpp"

using namespace spinseq;

namespace {

const DnpParams kBase{24.0, 1.0, 0.0};

SchemeSpec spec(SchemeKind k, double omega) {
  SchemeSpec s;
  s.scheme = k;
  s.omega_rabi = omega;
  return s;
}

}  // namespace

TEST_CASE("grid construction") {
  const ScanGrid g = ScanGrid::default_grid();
  CHECK(g.delta_over_omega.size() == 41);
  CHECK(g.rabi_rel.size() == 41);
  CHECK(g.delta_over_omega.front() == -0.5);
  CHECK(g.delta_over_omega.back() == 0.5);
  CHECK(g.delta_over_omega[20] == 0.0);
  CHECK(g.rabi_rel[20] == 0.0);
  CHECK(g.size() == 1681);

  CHECK_THROWS_AS(ScanGrid::linspace(-1, 1, 0, -1, 1, 3), Error);
  CHECK_THROWS_AS(ScanGrid::linspace(1, -1, 3, -1, 1, 3), Error);
  ScanGrid bad{{0.0, 0.0}, {0.0}};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(ScanGrid::linspace(0.2, 0.2, 1, 0, 0, 1).size() == 1);
}

TEST_CASE("heatmap layout and CSV") {
  const ScanGrid g = ScanGrid::linspace(-0.2, 0.2, 5, -0.1, 0.1, 3);
  const Heatmap h = scan(spec(SchemeKind::SlicNovel, 100.0), kBase, g);
  REQUIRE(h.values.size() == 15);
  CHECK(h.failures() == 0);
  CHECK(h.meta.n_reps == 24);
  CHECK_FALSE(h.meta.timestamp.empty());
  // Row-major, rabi error outer.
  Schedule s = build_slic(kBase, spec(SchemeKind::SlicNovel, 100.0));
  s.n_reps = 24;
  CHECK(h.at(2, 1) == polarization_at(s, kBase, -0.1, 0.1));
  CHECK(h.row(1)[2] == h.at(1, 2));

  std::ostringstream os;
  write_heatmap_csv(os, h);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "delta_over_omega,rabi_error_over_omega,polarization");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 15);

  const nlohmann::json meta = heatmap_metadata(h);
  CHECK(meta.at("n_reps") == 24);
  CHECK(meta.at("scheme") == "SLIC_NOVEL");
  CHECK(meta.at("params").at("omega_I") == 24.0);
  CHECK(meta.contains("timestamp"));
  CHECK(meta.contains("version"));
}

TEST_CASE("ideal pulses cannot be scanned on relative axes") {
  CHECK_THROWS_AS(scan(spec(SchemeKind::PulsePol, INFINITY), kBase, ScanGrid::default_grid()),
                  Error);
}

TEST_CASE("full default grid, parallel and serial agree bit for bit") {
  const SchemeSpec s = spec(SchemeKind::PulsePol, 100.0);
  ScanOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const Heatmap a = scan(s, kBase, ScanGrid::default_grid(), one);
  const Heatmap b = scan(s, kBase, ScanGrid::default_grid(), many);
  REQUIRE(a.values.size() == 1681);
  std::ostringstream oa, ob;
  write_heatmap_csv(oa, a);
  write_heatmap_csv(ob, b);
  CHECK(oa.str() == ob.str());
}

// Exact identity of the model: a pi rotation of S about x together with a
// pi rotation of I about z maps Delta -> -Delta, phase -> -phase and
// Sz -> -Sz, leaving the initial state alone.
TEST_CASE("detuning mirror identity") {
  for (SchemeKind k : {SchemeKind::SlicNovel, SchemeKind::PulsePol, SchemeKind::AdaptTopDnp}) {
    Schedule s = build_schedule(kBase, spec(k, 100.0));
    s.n_reps = select_repetitions(s, kBase);
    Schedule m = s;
    for (auto* sec : {&m.prelude, &m.block, &m.postlude}) {
      for (auto& seg : *sec) seg.phase = normalize_phase(-seg.phase);
    }
    double worst = 0.0;
    for (double d : {-0.4, -0.17, 0.05, 0.3}) {
      for (double r : {-0.3, 0.0, 0.12}) {
        worst = std::max(worst, std::abs(polarization_at(s, kBase, d, r) + polarization_at(m, kBase, -d, r)));
      }
    }
    INFO(to_string(k));
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("SLIC with ideal pulses is symmetric in the detuning") {
  Schedule s = build_slic(kBase, spec(SchemeKind::SlicNovel, INFINITY));
  s.n_reps = 24;
  for (double d = 1.0; d <= 50.0; d += 1.0) {
    CHECK(std::abs(final_polarization(s, kBase, {d, 0.0}) - final_polarization(s, kBase, {-d, 0.0})) <= 1e-10);
  }
}

// Run as its own ctest entry: with finite pulses and Rabi errors the
// closing pi/2 pulse mixes in the Delta-odd <Sz> component.
TEST_CASE("SLIC heatmap is symmetric in the detuning") {
  const Heatmap h = scan(spec(SchemeKind::SlicNovel, 100.0), kBase, ScanGrid::default_grid(), {4, 0});
  double worst = 0.0;
  for (std::size_t i = 0; i < 41; ++i) {
    for (std::size_t j = 0; j < 41; ++j) worst = std::max(worst, std::abs(h.at(i, j) - h.at(i, 40 - j)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("multi-regime panels") {
  const ScanGrid g = ScanGrid::linspace(-0.5, 0.5, 21, -0.3, 0.3, 21);
  const SchemeSpec s = spec(SchemeKind::SlicNovel, 100.0);
  const auto panels = multi_regime_scan(s, kBase, 1, 1, g, {4, 0});
  REQUIRE(panels.size() == 4);
  const Heatmap single = scan(s, kBase, g, {1, 0});
  CHECK(panels[0].a_halvings == 0);
  CHECK(panels[0].omega_halvings == 0);
  CHECK(panels[0].heatmap.values == single.values);

  // Halving A roughly doubles the transfer time relative to the base.
  for (const auto& p : panels) {
    if (p.a_halvings != 1) continue;
    const auto& base = panels[static_cast<std::size_t>(p.omega_halvings)];
    CHECK(p.t_fin_ratio / base.t_fin_ratio == doctest::Approx(2.0).epsilon(0.05));
    CHECK(p.params.a_perp == 0.5);
  }
  CHECK(panels[1].params.omega_I == 12.0);
  const nlohmann::json meta = multi_regime_metadata(panels);
  CHECK(meta.at("panels").size() == 4);
  CHECK(meta.at("panels")[3].contains("t_fin_ratio"));

  CHECK_THROWS_AS(multi_regime_scan(s, kBase, -1, 0, g), Error);
}

TEST_CASE("half-width helper") {
  // Triangle peaked at 0: 1 - |x| / 2 drops below 0.9 at |x| = 0.2.
  const auto tri = [](double x) { return 1.0 - std::abs(x) / 2.0; };
  CHECK(threshold_half_width(tri, 0.9, 1.0) == doctest::Approx(0.2).epsilon(1e-9));
  // Asymmetric: edges at -0.1 and +0.3.
  const auto skew = [](double x) { return x < 0 ? 1.0 + x : 1.0 - x / 3.0; };
  CHECK(threshold_half_width(skew, 0.9, 1.0) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(threshold_half_width(tri, 1.5, 1.0) == 0.0);
  CHECK(threshold_half_width([](double) { return 1.0; }, 0.9, 2.0) == 2.0);
  CHECK_THROWS_AS(threshold_half_width(tri, 0.9, 0.0), Error);
}

TEST_CASE("band counting") {
  const std::vector<double> d{-3, -2, -1, 0, 1, 2, 3};
  CHECK(count_offset_bands(d, {0.9, 0.1, 0.9, 0.9, 0.9, 0.1, 0.9}, 0.8) == 2);
  CHECK(count_offset_bands(d, {0.1, 0.1, 0.9, 0.9, 0.9, 0.1, 0.1}, 0.8) == 0);
  CHECK(count_offset_bands(d, {0.9, 0.9, 0.1, 0.1, 0.1, 0.9, 0.1}, 0.8) == 2);
  CHECK_THROWS_AS(count_offset_bands(d, {0.1}, 0.8), Error);

  Heatmap h;
  h.grid = ScanGrid::linspace(-1, 1, 5, -1, 1, 2);
  h.values = {0.9, 0.1, 0.9, 0.1, 0.1,   // row 0
              0.1, 0.1, 0.9, 0.1, 0.9};  // row 1
  const auto prof = delta_profile(h);
  CHECK(prof == std::vector<double>{0.9, 0.1, 0.9, 0.1, 0.9});
  CHECK(count_sidebands(h, 0.8) == 2);
}
