#include "mixsim/exit_range.hpp"

#include <algorithm>
#include <cmath>

namespace mixsim {

namespace {

constexpr double kMinHorizon = 1e-6;

}  // namespace

std::optional<ExitTimeRange> try_feasible_exit_range(const VehicleState& anchor,
                                                     double target_position,
                                                     const Bounds& bounds,
                                                     double horizon_cap) {
  const double v0 = anchor.velocity;
  const double dist = target_position - anchor.position;
  if (!bounds.speed_ok(v0, 1e-9)) return std::nullopt;
  if (!(dist > 0.0)) return std::nullopt;

  // Terminal speed within [v_min, v_max].
  double lo = 3.0 * dist / (2.0 * bounds.v_max + v0);
  double hi = horizon_cap;
  const double denom_min = 2.0 * bounds.v_min + v0;
  if (denom_min > 0.0) hi = std::min(hi, 3.0 * dist / denom_min);

  // Initial acceleration u(0) = 3*(dist - v0*T)/T^2 within [u_min, u_max].
  // u(0) <= u_max  <=>  u_max*T^2 + 3*v0*T - 3*dist >= 0.
  {
    const double disc = 9.0 * v0 * v0 + 12.0 * bounds.u_max * dist;
    const double root = (-3.0 * v0 + std::sqrt(disc)) / (2.0 * bounds.u_max);
    lo = std::max(lo, root);
  }
  // u(0) >= u_min can carve a hole (r_small, r_big) out of the interval for
  // decelerating approaches; trim the bounds when an endpoint falls inside.
  {
    const double disc = 9.0 * v0 * v0 + 12.0 * bounds.u_min * dist;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double r_small = (-3.0 * v0 + sq) / (2.0 * bounds.u_min);
      const double r_big = (-3.0 * v0 - sq) / (2.0 * bounds.u_min);
      if (lo > r_small && lo < r_big) lo = r_big;
      if (hi > r_small && hi < r_big) hi = r_small;
    }
  }

  lo = std::max(lo, kMinHorizon);
  if (!(lo <= hi)) return std::nullopt;

  ExitTimeRange range;
  range.earliest = anchor.time + lo;
  range.latest = anchor.time + hi;
  range.anchor = anchor;
  range.target_position = target_position;
  return range;
}

ExitTimeRange feasible_exit_range(const VehicleState& anchor, double target_position,
                                  const Bounds& bounds, double horizon_cap) {
  auto range = try_feasible_exit_range(anchor, target_position, bounds, horizon_cap);
  if (!range) throw InfeasibleError("feasible_exit_range: no feasible exit horizon");
  return *range;
}

CubicSegment boundary_earliest(const ExitTimeRange& range) {
  return solve_unconstrained(range.anchor.position, range.anchor.velocity, range.anchor.time,
                             range.target_position, range.earliest);
}

CubicSegment boundary_latest(const ExitTimeRange& range) {
  return solve_unconstrained(range.anchor.position, range.anchor.velocity, range.anchor.time,
                             range.target_position, range.latest);
}

}  // namespace mixsim
