#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mixsim/cubic.hpp"
#include "mixsim/exit_range.hpp"
#include "oracles.hpp"

using namespace mixsim;

namespace {

using oracles::reference_free_cubic;

bool reference_feasible(double v0, double dist, double T, const Bounds& b) {
  return oracles::cubic_within_bounds(reference_free_cubic(v0, dist, T), b,
                                      std::max(T / 400.0, 1e-4), 1e-7);
}

}  // namespace

TEST_CASE("free-speed cubic solve matches the hand-derived closed form") {
  const CubicSegment seg = solve_unconstrained(0.0, 0.0, 0.0, 100.0, 10.0);
  CHECK(seg.a == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(seg.b == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(seg.c == doctest::Approx(0.0));
  CHECK(seg.d == doctest::Approx(0.0));
  CHECK(seg.position(10.0) == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(seg.acceleration(10.0) == doctest::Approx(0.0).epsilon(1e-10));

  auto g = oracles::rng(11);
  for (int k = 0; k < 300; ++k) {
    const double p0 = oracles::uniform(g, -50.0, 250.0);
    const double v0 = oracles::uniform(g, 0.0, 25.0);
    const double t0 = oracles::uniform(g, 0.0, 500.0);
    const double pf = p0 + oracles::uniform(g, 1.0, 300.0);
    const double tf = t0 + oracles::uniform(g, 0.5, 90.0);
    const CubicSegment s = solve_unconstrained(p0, v0, t0, pf, tf);
    CHECK(s.position(t0) == doctest::Approx(p0).epsilon(1e-9));
    CHECK(s.velocity(t0) == doctest::Approx(v0).epsilon(1e-9));
    CHECK(std::abs(s.position(tf) - pf) < 1e-7);
    CHECK(std::abs(s.acceleration(tf)) < 1e-7);
    const CubicSegment ref = reference_free_cubic(v0, pf - p0, tf - t0);
    CHECK(s.a == doctest::Approx(ref.a).epsilon(1e-9));
    CHECK(s.b == doctest::Approx(ref.b).epsilon(1e-9));
  }
}

TEST_CASE("free-speed cubic is anchored in segment-local time") {
  const CubicSegment base = solve_unconstrained(0.0, 5.0, 0.0, 80.0, 8.0);
  const CubicSegment late = solve_unconstrained(40.0, 5.0, 100.0, 120.0, 108.0);
  CHECK(late.a == doctest::Approx(base.a).epsilon(1e-12));
  CHECK(late.b == doctest::Approx(base.b).epsilon(1e-12));
  CHECK(late.c == doctest::Approx(base.c).epsilon(1e-12));
  CHECK(late.d == doctest::Approx(40.0));
  CHECK(late.t_begin == doctest::Approx(100.0));
  CHECK(late.t_end == doctest::Approx(108.0));
}

TEST_CASE("degenerate horizons are rejected by both solvers") {
  CHECK_THROWS_AS(solve_unconstrained(0.0, 5.0, 1.0, 10.0, 1.0), DegenerateError);
  CHECK_THROWS_AS(solve_unconstrained(0.0, 5.0, 1.0, 10.0, 1.0 + 5e-7), DegenerateError);
  CHECK_THROWS_AS(solve_unconstrained(0.0, 5.0, 2.0, 10.0, 1.0), DegenerateError);
  CHECK_THROWS_AS(solve_stop_cubic(0.0, 5.0, 1.0, 10.0, 1.0), DegenerateError);
}

TEST_CASE("stop cubic meets both endpoint states and its hand-derived coefficients") {
  // v0 = 10 m/s over 40 m in 4 s: a = -0.625, b = 2.5, initial push +5,
  // final braking -10.
  const CubicSegment seg = solve_stop_cubic(0.0, 10.0, 0.0, 40.0, 4.0);
  CHECK(seg.a == doctest::Approx(-0.625).epsilon(1e-12));
  CHECK(seg.b == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(seg.velocity(4.0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(seg.acceleration(0.0) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(seg.acceleration(4.0) == doctest::Approx(-10.0).epsilon(1e-10));

  auto g = oracles::rng(23);
  for (int k = 0; k < 300; ++k) {
    const double p0 = oracles::uniform(g, 0.0, 200.0);
    const double v0 = oracles::uniform(g, 0.5, 25.0);
    const double t0 = oracles::uniform(g, 0.0, 100.0);
    const double d = oracles::uniform(g, 2.0, 250.0);
    const double T = oracles::uniform(g, 0.5, 40.0);
    const CubicSegment s = solve_stop_cubic(p0, v0, t0, p0 + d, t0 + T);
    CHECK(s.position(t0) == doctest::Approx(p0).epsilon(1e-9));
    CHECK(s.velocity(t0) == doctest::Approx(v0).epsilon(1e-9));
    CHECK(std::abs(s.position(t0 + T) - (p0 + d)) < 1e-7);
    CHECK(std::abs(s.velocity(t0 + T)) < 1e-7);
    // Hand-derived: a = (v0 T - 2 d) / T^3, b = (3 d - 2 v0 T) / T^2.
    CHECK(s.a == doctest::Approx((v0 * T - 2.0 * d) / (T * T * T)).epsilon(1e-8));
    CHECK(s.b == doctest::Approx((3.0 * d - 2.0 * v0 * T) / (T * T)).epsilon(1e-8));
  }
}

TEST_CASE("stop cubic develops a velocity reversal only past three distances per speed") {
  // With v0 = 10 and d = 40 the reversal threshold sits at T = 12.
  CHECK(solve_stop_cubic(0.0, 10.0, 0.0, 40.0, 12.0).min_velocity() >= -1e-9);
  CHECK(solve_stop_cubic(0.0, 10.0, 0.0, 40.0, 11.5).min_velocity() >= -1e-9);
  CHECK(solve_stop_cubic(0.0, 10.0, 0.0, 40.0, 14.0).min_velocity() < -0.05);
}

TEST_CASE("exact bound check agrees with dense sampling") {
  const Bounds bounds;
  auto g = oracles::rng(31);
  int exact_true = 0, exact_false = 0;
  for (int k = 0; k < 500; ++k) {
    const double T = oracles::uniform(g, 0.5, 25.0);
    const CubicSegment seg =
        reference_free_cubic(oracles::uniform(g, 0.0, 22.0), oracles::uniform(g, 1.0, 350.0), T);
    const bool exact = respects_bounds(seg, bounds);
    // Samples are a subset of the continuum, so an exact pass implies every
    // sample passes with a wider margin, and a sampled violation beyond the
    // exact margin implies an exact failure.
    if (exact) {
      CHECK(oracles::cubic_within_bounds(seg, bounds, 1e-3, 2e-6));
      ++exact_true;
    } else {
      ++exact_false;
    }
    if (!oracles::cubic_within_bounds(seg, bounds, 1e-3, 2e-6)) CHECK_FALSE(exact);
    CHECK(respects_bounds_grid(seg, bounds) == respects_bounds_grid(seg, bounds, 0.01, 1e-6));
  }
  // The draw must exercise both outcomes for the comparison to mean anything.
  CHECK(exact_true > 50);
  CHECK(exact_false > 50);

  // A velocity dip strictly between the endpoints must be caught: stop arcs
  // past the reversal threshold have interior negative speed.
  const CubicSegment dip = solve_stop_cubic(0.0, 10.0, 0.0, 40.0, 16.0);
  CHECK_FALSE(respects_bounds(dip, bounds));
  CHECK_FALSE(respects_bounds_grid(dip, bounds));
}

TEST_CASE("exit horizon window matches endpoint analysis for cruise entries") {
  const Bounds bounds;  // v in [0, 20], u in [-5, 5]
  VehicleState anchor;
  anchor.position = 0.0;
  anchor.velocity = 20.0;
  anchor.time = 0.0;
  const auto range = try_feasible_exit_range(anchor, 300.0, bounds);
  REQUIRE(range.has_value());
  CHECK(range->earliest == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(range->latest == doctest::Approx(45.0).epsilon(1e-9));

  // Boundary arcs hit the corresponding speed limit exactly at the exit.
  const CubicSegment fast = boundary_earliest(*range);
  const CubicSegment slow = boundary_latest(*range);
  CHECK(fast.velocity(fast.t_end) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(slow.velocity(slow.t_end) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(respects_bounds(fast, bounds));
  CHECK(respects_bounds(slow, bounds));

  // Absolute times shift with the anchor clock.
  anchor.time = 100.0;
  const auto shifted = try_feasible_exit_range(anchor, 300.0, bounds);
  REQUIRE(shifted.has_value());
  CHECK(shifted->earliest == doctest::Approx(115.0).epsilon(1e-9));
  CHECK(shifted->latest == doctest::Approx(145.0).epsilon(1e-9));
}

TEST_CASE("exit horizon window handles slow and standing starts") {
  const Bounds bounds;
  VehicleState anchor;
  anchor.position = 0.0;
  anchor.velocity = 10.0;
  const auto mid = try_feasible_exit_range(anchor, 300.0, bounds);
  REQUIRE(mid.has_value());
  CHECK(mid->earliest == doctest::Approx(18.0).epsilon(1e-9));
  CHECK(mid->latest == doctest::Approx(90.0).epsilon(1e-9));

  anchor.velocity = 0.0;
  const auto standing = try_feasible_exit_range(anchor, 300.0, bounds);
  REQUIRE(standing.has_value());
  CHECK(standing->earliest == doctest::Approx(22.5).epsilon(1e-9));
  CHECK(standing->latest == doctest::Approx(120.0));  // capped, v_min = 0
}

TEST_CASE("exit horizon window agrees with a brute-force feasibility sweep") {
  const Bounds bounds;
  auto g = oracles::rng(57);
  for (int k = 0; k < 12; ++k) {
    const double v0 = oracles::uniform(g, 0.0, 20.0);
    const double dist = oracles::uniform(g, 20.0, 320.0);
    VehicleState anchor;
    anchor.velocity = v0;
    const auto range = try_feasible_exit_range(anchor, dist, bounds);
    double sweep_lo = -1.0, sweep_hi = -1.0;
    for (double T = 0.5; T <= 120.0 + 1e-9; T += 0.02) {
      if (reference_feasible(v0, dist, T, bounds)) {
        if (sweep_lo < 0.0) sweep_lo = T;
        sweep_hi = T;
      }
    }
    REQUIRE(range.has_value());
    REQUIRE(sweep_lo > 0.0);
    CHECK(std::abs(range->earliest - sweep_lo) < 0.05);
    CHECK(std::abs(range->latest - sweep_hi) < 0.05);
  }
}

TEST_CASE("exit horizon window reports infeasibility honestly") {
  const Bounds bounds;
  VehicleState anchor;
  anchor.position = 10.0;
  anchor.velocity = 10.0;
  // Already at or past the target.
  CHECK_FALSE(try_feasible_exit_range(anchor, 10.0, bounds).has_value());
  CHECK_FALSE(try_feasible_exit_range(anchor, 5.0, bounds).has_value());
  // Entry speed outside the legal band.
  anchor.velocity = 25.0;
  CHECK_FALSE(try_feasible_exit_range(anchor, 300.0, bounds).has_value());
  CHECK_THROWS_AS(feasible_exit_range(anchor, 300.0, bounds), InfeasibleError);
  // Horizon cap below the earliest legal exit.
  anchor.velocity = 20.0;
  anchor.position = 0.0;
  CHECK_FALSE(try_feasible_exit_range(anchor, 300.0, bounds, 10.0).has_value());
}

TEST_CASE("a braking hole strictly inside the window is left to per-candidate checks") {
  // v0 = 10 toward a target 14.9 m ahead: horizons near T = 3 need initial
  // braking below -5, but both shorter and longer horizons are fine. The
  // window keeps its outer ends and candidate validation rejects the hole.
  const Bounds bounds;
  VehicleState anchor;
  anchor.velocity = 10.0;
  const auto range = try_feasible_exit_range(anchor, 14.9, bounds);
  REQUIRE(range.has_value());
  CHECK(range->earliest < 2.7);
  CHECK(range->latest == doctest::Approx(3.0 * 14.9 / 10.0).epsilon(1e-9));

  const CubicSegment hole = solve_unconstrained(0.0, 10.0, 0.0, 14.9, 3.0);
  CHECK(range->earliest < 3.0);
  CHECK(range->latest > 3.0);
  CHECK_FALSE(respects_bounds(hole, bounds));
  CHECK(respects_bounds(solve_unconstrained(0.0, 10.0, 0.0, 14.9, range->earliest), bounds,
                        1e-5));
  CHECK(respects_bounds(solve_unconstrained(0.0, 10.0, 0.0, 14.9, range->latest), bounds, 1e-5));
}

TEST_CASE("a braking hole that covers an endpoint trims the window") {
  // v0 = 20 toward a target 50 m ahead: every horizon past ~3.55 s up to the
  // slow end needs initial braking below -5, so the feasible window ends
  // where u(0) = u_min.
  const Bounds bounds;
  VehicleState anchor;
  anchor.velocity = 20.0;
  const auto range = try_feasible_exit_range(anchor, 50.0, bounds);
  REQUIRE(range.has_value());
  CHECK(range->earliest == doctest::Approx(2.5).epsilon(1e-9));
  const double sq = std::sqrt(9.0 * 400.0 + 12.0 * (-5.0) * 50.0);
  CHECK(range->latest == doctest::Approx((-60.0 + sq) / (2.0 * -5.0)).epsilon(1e-9));
  const CubicSegment edge = solve_unconstrained(0.0, 20.0, 0.0, 50.0, range->latest);
  CHECK(edge.min_acceleration() == doctest::Approx(-5.0).epsilon(1e-7));
  CHECK(respects_bounds(edge, bounds, 1e-5));
  CHECK_FALSE(respects_bounds(solve_unconstrained(0.0, 20.0, 0.0, 50.0, range->latest + 0.1),
                              bounds));
}
