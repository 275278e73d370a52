#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spinseq/analysis.hpp"
#include "spinseq/robustness.hpp"

using namespace spinseq;
using std::numbers::pi;

namespace {

SchemeSpec spec(SchemeKind k, double omega) {
  SchemeSpec s;
  s.scheme = k;
  s.omega_rabi = omega;
  return s;
}

const SchemeKind kPulsed[] = {SchemeKind::SlicNovel, SchemeKind::S2hmXy8, SchemeKind::PulsePol,
                              SchemeKind::AdaptTopDnp};

}  // namespace

TEST_CASE("closed-form ratios") {
  CHECK(*a_star_theory_ratio(SchemeKind::SlicNovel) == 1.0);
  CHECK(*a_star_theory_ratio(SchemeKind::S2hmPlain) == doctest::Approx(2 / pi));
  CHECK(*a_star_theory_ratio(SchemeKind::PulsePol) == doctest::Approx(0.7245).epsilon(1e-4));
  CHECK_FALSE(a_star_theory_ratio(SchemeKind::AdaptTopDnp).has_value());
}

TEST_CASE("no coupling gives no flip-flop term") {
  for (SchemeKind k : kPulsed) {
    const Schedule s = build_schedule({24.0, 0.0, 0.0}, spec(k, 100.0));
    const CycleHamiltonian c = cycle_effective_hamiltonian(s, {24.0, 0.0, 0.0});
    CHECK(c.flip_flop <= 1e-12);
    CHECK(c.flip_flip <= 1e-12);
  }
}

TEST_CASE("first-maximum estimates near the ideal limit") {
  const DnpParams p{100.0, 1.0, 0.0};
  const EffectiveCouplingReport slic = estimate_a_star(spec(SchemeKind::SlicNovel, 400.0), p);
  CHECK(slic.a_star_measured == doctest::Approx(1.0).epsilon(0.02));
  CHECK(*slic.relative_deviation == doctest::Approx(slic.a_star_measured - 1.0));
  CHECK(slic.method == CouplingMethod::FirstMaximum);
  CHECK(slic.transfer_time == doctest::Approx(2 * pi / slic.a_star_measured));

  // The closed forms hold for ideal pulses.
  const EffectiveCouplingReport plain = estimate_a_star(spec(SchemeKind::S2hmPlain, INFINITY), p);
  CHECK(plain.a_star_measured == doctest::Approx(2 / pi).epsilon(0.02));
  const EffectiveCouplingReport pp = estimate_a_star(spec(SchemeKind::PulsePol, INFINITY), p);
  CHECK(pp.a_star_measured == doctest::Approx(0.7245).epsilon(0.03));
}

TEST_CASE("cycle logarithm") {
  const DnpParams p{24.0, 1.0, 0.0};
  const CycleHamiltonian slic = cycle_effective_hamiltonian(build_slic(p, spec(SchemeKind::SlicNovel, 100.0)), p);
  CHECK(slic.periods == 1);
  CHECK(slic.a_star() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(slic.h_eff.is_hermitian());

  const EffectiveCouplingReport pp = cycle_a_star(spec(SchemeKind::PulsePol, INFINITY), p);
  CHECK(pp.method == CouplingMethod::CycleLog);
  CHECK(pp.a_star_measured == doctest::Approx(0.7245).epsilon(0.03));

  CHECK_THROWS_AS(cycle_a_star(spec(SchemeKind::B1Sweep, 100.0), p), Error);
}

TEST_CASE("cycle logarithm agrees with the first maximum") {
  const DnpParams p{100.0, 1.0, 0.0};
  for (SchemeKind k : kPulsed) {
    const double fm = estimate_a_star(spec(k, 400.0), p).a_star_measured;
    const double cl = cycle_a_star(spec(k, 400.0), p).a_star_measured;
    INFO(to_string(k));
    CHECK(std::abs(cl / fm - 1.0) <= 0.05);
  }
}

TEST_CASE("effective coupling never exceeds the bare coupling") {
  const DnpParams p{24.0, 1.0, 0.0};
  for (SchemeKind k : {SchemeKind::SlicNovel, SchemeKind::S2hmPlain, SchemeKind::S2hmXy8,
                       SchemeKind::PulsePol, SchemeKind::AdaptTopDnp}) {
    INFO(to_string(k));
    CHECK(estimate_a_star(spec(k, 100.0), p).a_star_measured <= 1.02);
  }
}

TEST_CASE("estimates converge as the hierarchy widens") {
  for (SchemeKind k : kPulsed) {
    const double a = estimate_a_star(spec(k, 200.0), {50.0, 1.0, 0.0}).a_star_measured;
    const double b = estimate_a_star(spec(k, 400.0), {100.0, 1.0, 0.0}).a_star_measured;
    INFO(to_string(k));
    CHECK(std::abs(b / a - 1.0) <= 0.01);
  }
}

TEST_CASE("cycle logarithm failure modes") {
  // Uncoupled free evolution for an irrational number of Larmor periods is
  // not periodic in the frame.
  Schedule s;
  s.system = {1.0, 0.1, 0.0};
  s.omega_rabi = 1.0;
  s.block = {{std::sqrt(2.0), 0.0, 0.0, 0.0, "wait"}};
  s.tau = std::sqrt(2.0);
  try {
    cycle_effective_hamiltonian(s, s.system);
    FAIL("non-periodic frame accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPeriodicFrame);
  }

  // Two Larmor periods with coupled eigenfrequencies +-3/4 put the block
  // eigenphases at +-pi, where the principal logarithm is ambiguous.
  s.system = {1.0, std::sqrt(5.0), 0.0};
  s.block = {{4 * pi, 0.0, 0.0, 0.0, "wait"}};
  s.tau = 4 * pi;
  try {
    cycle_effective_hamiltonian(s, s.system);
    FAIL("branch ambiguity not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BranchAmbiguity);
  }

  CHECK_THROWS_AS(estimate_a_star(spec(SchemeKind::B1Sweep, 100.0), {24.0, 1.0, 0.0}), Error);
}

TEST_CASE("ADAPT side-band positions") {
  const DnpParams p{24.0, 1.0, 0.0};
  const SchemeSpec s = spec(SchemeKind::AdaptTopDnp, 400.0);
  const auto pos = adapt_sideband_positions(p, s, 3);
  // tau = pi / (2 wI) gives a spacing of 4 wI.
  REQUIRE(pos.size() == 7);
  for (std::size_t k = 1; k < pos.size(); ++k) CHECK(pos[k] - pos[k - 1] == doctest::Approx(96.0));
  CHECK(pos[3] == 0.0);
  // Restricted to |Delta| <= omega_rabi.
  CHECK(adapt_sideband_positions(p, spec(SchemeKind::AdaptTopDnp, 100.0), 3).size() == 3);

  // Simulated ridge in the near-ideal pulse regime: the transfer maximum
  // beside the central band sits at 2 pi / tau within 5 %, and nothing
  // transfers at the block-rate harmonics +-wI, +-2 wI in between.
  const SchemeSpec fast = spec(SchemeKind::AdaptTopDnp, 1000.0);
  Schedule sch = build_adapt(p, fast);
  sch.n_reps = select_repetitions(sch, p);
  for (int side : {-1, 1}) {
    double best = -1.0, where = 0.0;
    for (int k = 0; k <= 384; ++k) {
      const double d = side * (48.0 + 0.25 * k);
      const double v = final_polarization(sch, p, {d, 0.0});
      if (v > best) {
        best = v;
        where = d;
      }
    }
    CHECK(best >= 0.8);
    CHECK(where == doctest::Approx(side * 96.0).epsilon(0.05));
    for (double harmonic : {24.0, 48.0}) {
      CHECK(final_polarization(sch, p, {side * harmonic, 0.0}) < 0.5);
    }
  }
}

TEST_CASE("report JSON") {
  const auto r = estimate_a_star(spec(SchemeKind::SlicNovel, 100.0), {24.0, 1.0, 0.0});
  const nlohmann::json j = to_json(r);
  CHECK(j.at("scheme") == "SLIC_NOVEL");
  CHECK(j.at("method") == std::string(to_string(CouplingMethod::FirstMaximum)));
  CHECK(j.contains("a_star_measured"));
  CHECK(j.contains("a_star_theory"));
  CHECK(j.contains("relative_deviation"));
  CHECK(j.contains("transfer_time"));
}
