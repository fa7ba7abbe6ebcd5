#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "mixsim/trajectory.hpp"
#include "oracles.hpp"

using namespace mixsim;

namespace {

Trajectory accel_then_cruise() {
  // 5 m/s^2 for 2 s from rest, then cruise at 10 m/s until t = 10.
  std::vector<Segment> segs;
  segs.push_back(ConstAccelSegment{0.0, 2.0, 0.0, 0.0, 5.0});
  segs.push_back(ConstAccelSegment{2.0, 10.0, 10.0, 10.0, 0.0});
  return Trajectory(std::move(segs));
}

}  // namespace

TEST_CASE("cubic segment evaluates in segment-local time") {
  const CubicSegment cruise{0.0, 5.0, 0.0, 0.0, 10.0, 0.0};
  CHECK(cruise.position(3.0) == doctest::Approx(30.0));
  CHECK(cruise.velocity(3.0) == doctest::Approx(10.0));
  CHECK(cruise.acceleration(3.0) == doctest::Approx(0.0));

  const CubicSegment pure{0.0, 3.0, 1.0, 0.0, 0.0, 0.0};
  CHECK(pure.position(2.0) == doctest::Approx(8.0));
  CHECK(pure.velocity(2.0) == doctest::Approx(12.0));
  CHECK(pure.acceleration(2.0) == doctest::Approx(12.0));

  // Shifting t_begin shifts the whole arc without changing its shape.
  const CubicSegment shifted{5.0, 8.0, 1.0, 0.0, 0.0, 0.0};
  CHECK(shifted.position(7.0) == doctest::Approx(8.0));
  CHECK(shifted.velocity(7.0) == doctest::Approx(12.0));
}

TEST_CASE("cubic segment velocity extrema are exact") {
  // v(s) = 3as^2 + 2bs + c has its vertex at s = -b/(3a); check against a
  // dense scan on random segments.
  auto g = oracles::rng(42);
  for (int k = 0; k < 200; ++k) {
    CubicSegment seg{0.0, oracles::uniform(g, 0.5, 12.0), oracles::uniform(g, -0.3, 0.3),
                     oracles::uniform(g, -2.0, 2.0), oracles::uniform(g, -5.0, 20.0),
                     oracles::uniform(g, -10.0, 10.0)};
    double vmin = 1e300, vmax = -1e300, amin = 1e300, amax = -1e300;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
      const double t = seg.t_begin + seg.duration() * double(i) / double(n);
      vmin = std::min(vmin, seg.velocity(t));
      vmax = std::max(vmax, seg.velocity(t));
      amin = std::min(amin, seg.acceleration(t));
      amax = std::max(amax, seg.acceleration(t));
    }
    CHECK(seg.min_velocity() <= vmin + 1e-9);
    CHECK(seg.max_velocity() >= vmax - 1e-9);
    CHECK(vmin - seg.min_velocity() < 1e-4);
    CHECK(seg.max_velocity() - vmax < 1e-4);
    CHECK(seg.min_acceleration() == doctest::Approx(amin).epsilon(1e-9));
    CHECK(seg.max_acceleration() == doctest::Approx(amax).epsilon(1e-9));
  }
}

TEST_CASE("trajectory eval walks segments and the later one wins at a junction") {
  const Trajectory traj = accel_then_cruise();
  const VehicleState mid = eval(traj, 3.0);
  CHECK(mid.position == doctest::Approx(20.0));
  CHECK(mid.velocity == doctest::Approx(10.0));
  CHECK(mid.acceleration == doctest::Approx(0.0));
  CHECK(mid.time == doctest::Approx(3.0));

  // At t = 2 both segments are defined; the cruise segment's acceleration
  // (zero) must be reported, not the 5 m/s^2 of the first.
  CHECK(eval(traj, 2.0).acceleration == doctest::Approx(0.0));
  CHECK(eval(traj, 2.0).position == doctest::Approx(10.0));

  CHECK_THROWS_AS(eval(traj, -1.0), QueryError);
  CHECK_THROWS_AS(eval(traj, 11.0), QueryError);
}

TEST_CASE("trajectory construction rejects gaps and state jumps") {
  std::vector<Segment> gap;
  gap.push_back(ConstAccelSegment{0.0, 2.0, 0.0, 0.0, 5.0});
  gap.push_back(ConstAccelSegment{2.5, 4.0, 10.0, 10.0, 0.0});
  CHECK_THROWS_AS(Trajectory(std::move(gap)), Error);

  std::vector<Segment> pos_jump;
  pos_jump.push_back(ConstAccelSegment{0.0, 2.0, 0.0, 0.0, 5.0});
  pos_jump.push_back(ConstAccelSegment{2.0, 4.0, 11.0, 10.0, 0.0});
  CHECK_THROWS_AS(Trajectory(std::move(pos_jump)), Error);

  std::vector<Segment> vel_jump;
  vel_jump.push_back(ConstAccelSegment{0.0, 2.0, 0.0, 0.0, 5.0});
  vel_jump.push_back(ConstAccelSegment{2.0, 4.0, 10.0, 12.0, 0.0});
  CHECK_THROWS_AS(Trajectory(std::move(vel_jump)), Error);
}

TEST_CASE("eval_extended holds the entry point before the span and coasts after it") {
  const Trajectory traj = accel_then_cruise();
  const VehicleState before = eval_extended(traj, -5.0);
  CHECK(before.position == doctest::Approx(0.0));
  CHECK(before.velocity == doctest::Approx(0.0));
  CHECK(before.acceleration == doctest::Approx(0.0));

  // Final state is p = 90, v = 10 at t = 10; two seconds later the constant
  // velocity extension puts it at 110.
  const VehicleState after = eval_extended(traj, 12.0);
  CHECK(after.position == doctest::Approx(110.0));
  CHECK(after.velocity == doctest::Approx(10.0));
  CHECK(after.acceleration == doctest::Approx(0.0));
}

TEST_CASE("crossing_time finds first passage to solver accuracy") {
  const Trajectory traj = accel_then_cruise();
  // 2.5 s^2 = 5 inside the acceleration phase.
  const double tc1 = crossing_time(traj, 5.0);
  CHECK(tc1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(eval(traj, tc1).position == doctest::Approx(5.0).epsilon(1e-8));
  // 10 + 10 (t - 2) = 15 in the cruise phase.
  CHECK(crossing_time(traj, 15.0) == doctest::Approx(2.5).epsilon(1e-9));
  // Target already at the start point.
  CHECK(crossing_time(traj, 0.0) == doctest::Approx(0.0));
  // Behind the start or beyond the end: no crossing.
  CHECK_THROWS_AS(crossing_time(traj, -5.0), NoCrossingError);
  CHECK_THROWS_AS(crossing_time(traj, 1000.0), NoCrossingError);
}

TEST_CASE("control_effort matches quadrature on mixed plans") {
  const Trajectory traj = accel_then_cruise();
  // Only the first segment spends effort: 0.5 * 25 * 2.
  CHECK(control_effort(traj) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(control_effort(traj, 1.0, 3.0) == doctest::Approx(12.5).epsilon(1e-12));
  CHECK(control_effort(traj, 4.0, 9.0) == doctest::Approx(0.0));
  // Clipping outside the span contributes nothing.
  CHECK(control_effort(traj, -10.0, 20.0) == doctest::Approx(25.0).epsilon(1e-12));

  // A cubic with a = -0.05, b = 1.5 over 10 s: u(s) = -0.3 s + 3, and
  // integrating 0.5 u^2 by hand gives 15.
  std::vector<Segment> one{CubicSegment{0.0, 10.0, -0.05, 1.5, 0.0, 0.0}};
  const Trajectory cubic(std::move(one));
  CHECK(control_effort(cubic) == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(control_effort(cubic) == doctest::Approx(oracles::simpson_effort(cubic)).epsilon(1e-10));

  auto g = oracles::rng(7);
  for (int k = 0; k < 100; ++k) {
    std::vector<Segment> segs{CubicSegment{0.0, oracles::uniform(g, 0.5, 15.0),
                                           oracles::uniform(g, -0.2, 0.2),
                                           oracles::uniform(g, -2.0, 2.0),
                                           oracles::uniform(g, 0.0, 20.0), 0.0}};
    const Trajectory t(std::move(segs));
    CHECK(control_effort(t) ==
          doctest::Approx(oracles::simpson_effort(t)).epsilon(1e-9));
  }
}

TEST_CASE("sampled profile interpolates and extends sensibly") {
  SampledProfile prof;
  prof.t_begin = 2.0;
  prof.step = 0.5;
  prof.position = {0.0, 1.0, 3.0, 6.0};
  prof.velocity = {1.0, 3.0, 5.0, 7.0};
  CHECK(prof.t_end() == doctest::Approx(3.5));
  CHECK(prof.position_at(2.25) == doctest::Approx(0.5));
  CHECK(prof.velocity_at(2.25) == doctest::Approx(2.0));
  // Before the front: clamp.
  CHECK(prof.position_at(1.0) == doctest::Approx(0.0));
  CHECK(prof.velocity_at(1.0) == doctest::Approx(1.0));
  // Past the back: coast at the final speed.
  CHECK(prof.position_at(4.0) == doctest::Approx(6.0 + 7.0 * 0.5));
  CHECK(prof.velocity_at(4.0) == doctest::Approx(7.0));
}

TEST_CASE("lead profile views trajectories and sampled series uniformly") {
  auto traj = std::make_shared<Trajectory>(accel_then_cruise());
  const LeadProfile from_traj = LeadProfile::from_trajectory(traj);
  CHECK(from_traj.valid());
  CHECK(from_traj.position(3.0) == doctest::Approx(20.0));
  CHECK(from_traj.velocity(3.0) == doctest::Approx(10.0));
  CHECK(from_traj.position(-1.0) == doctest::Approx(0.0));
  CHECK(from_traj.position(12.0) == doctest::Approx(110.0));
  CHECK(from_traj.span_begin() == doctest::Approx(0.0));
  CHECK(from_traj.span_end() == doctest::Approx(10.0));

  auto prof = std::make_shared<SampledProfile>();
  prof->t_begin = 0.0;
  prof->step = 0.5;
  prof->position = {100.0, 105.0, 110.0};
  prof->velocity = {10.0, 10.0, 10.0};
  const LeadProfile from_series = LeadProfile::from_profile(prof);
  CHECK(from_series.position(0.25) == doctest::Approx(102.5));
  CHECK(from_series.position(2.0) == doctest::Approx(120.0));
  CHECK(from_series.velocity(2.0) == doctest::Approx(10.0));

  CHECK_FALSE(LeadProfile{}.valid());
}

TEST_CASE("spacing check enforces speed-scaled gaps including the final instant") {
  // Follower cruises at 10 m/s; required gap with 0.5 s reaction and 2 m
  // clearance is 7 m throughout.
  std::vector<Segment> self_segs{ConstAccelSegment{0.0, 10.0, 0.0, 10.0, 0.0}};
  const Trajectory self(std::move(self_segs));

  auto far = std::make_shared<Trajectory>(
      Trajectory({ConstAccelSegment{0.0, 10.0, 100.0, 10.0, 0.0}}));
  CHECK(spacing_ok(self, LeadProfile::from_trajectory(far), 0.5, 2.0, 0.0, 10.0, 0.1));

  auto close_by = std::make_shared<Trajectory>(
      Trajectory({ConstAccelSegment{0.0, 10.0, 6.0, 10.0, 0.0}}));
  CHECK_FALSE(spacing_ok(self, LeadProfile::from_trajectory(close_by), 0.5, 2.0, 0.0, 10.0, 0.1));

  // Gap shrinks from 9 m and first dips under 7 m at t ~ 9.995, after the
  // last interior grid point when the step is 3 s; only the mandatory
  // endpoint sample can catch it.
  auto creep = std::make_shared<Trajectory>(
      Trajectory({ConstAccelSegment{0.0, 10.0, 9.0, 10.0 - 0.2001, 0.0}}));
  CHECK_FALSE(spacing_ok(self, LeadProfile::from_trajectory(creep), 0.5, 2.0, 0.0, 10.0, 3.0));
}
