#include "mixsim/standby.hpp"

#include <algorithm>
#include <cmath>

#include "mixsim/cubic.hpp"

namespace mixsim {

double latest_stop_time(double v0, double distance, double u_min) {
  if (!(distance > 0.0)) throw DegenerateError("latest_stop_time: non-positive distance");
  if (!(v0 > 0.0)) throw DegenerateError("latest_stop_time: not moving");
  if (!(u_min < 0.0)) throw Error("latest_stop_time: u_min must be negative");
  // Even the hardest constant braking cannot rest within `distance`.
  if (v0 * v0 > 2.0 * (-u_min) * distance * (1.0 + 1e-12))
    throw InfeasibleError("latest_stop_time: cannot stop within the distance");

  // Critical arc: rest exactly when the required deceleration would start to
  // exceed -2*v0^2/(3*distance); any later stop would need reversing.
  const double u_crit = -2.0 * v0 * v0 / (3.0 * distance);
  if (u_crit >= u_min) return 3.0 * distance / v0;

  // Brake-limited: the latest arc pins its initial acceleration at u_min.
  // Its terminal braking stays within u_min whenever the stop is possible at
  // all, so no further fallback exists.
  const double disc = 16.0 * v0 * v0 + 24.0 * u_min * distance;
  return (-4.0 * v0 + std::sqrt(disc)) / (2.0 * u_min);
}

Trajectory standby_trajectory(const VehicleState& state, double stop_position,
                              double stop_time, const Bounds& bounds, double hold_until) {
  const double dist = stop_position - state.position;
  if (!(dist > 0.0)) throw DegenerateError("standby_trajectory: stop position not ahead");
  if (!(state.velocity > 0.0)) throw DegenerateError("standby_trajectory: not moving");

  CubicSegment arc = solve_stop_cubic(state.position, state.velocity, state.time,
                                      stop_position, stop_time);
  if (arc.min_velocity() < -1e-6 || arc.min_acceleration() < bounds.u_min - 1e-6 ||
      arc.max_acceleration() > bounds.u_max + 1e-6)
    throw Error("standby_trajectory: stop arc violates bounds (stop time too late?)");

  if (hold_until <= stop_time) hold_until = stop_time + 7200.0;
  ConstAccelSegment hold;
  hold.t_begin = stop_time;
  hold.t_end = hold_until;
  hold.p0 = stop_position;
  hold.v0 = 0.0;
  hold.u = 0.0;
  return Trajectory(std::vector<Segment>{arc, hold});
}

Trajectory advance_trajectory(const VehicleState& state, double stop_position,
                              const Bounds& bounds, double peak_speed, double hold_until) {
  const double dist = stop_position - state.position;
  if (!(dist > 0.0)) throw DegenerateError("advance_trajectory: stop position not ahead");
  if (std::abs(state.velocity) > 1e-9) throw DegenerateError("advance_trajectory: not at rest");

  // Rest-to-rest cubic: |u| peaks at the endpoints (6*dist/T^2) and speed
  // peaks midway (1.5*dist/T).
  const double a_lim = 0.98 * std::min(bounds.u_max, -bounds.u_min);
  const double v_lim = std::min(peak_speed, 0.98 * bounds.v_max);
  if (!(a_lim > 0.0) || !(v_lim > 0.0))
    throw DegenerateError("advance_trajectory: unusable bounds");
  const double T = std::max(std::sqrt(6.0 * dist / a_lim), 1.5 * dist / v_lim);

  CubicSegment arc =
      solve_stop_cubic(state.position, state.velocity, state.time, stop_position,
                       state.time + T);
  if (!respects_bounds(arc, bounds))
    throw Error("advance_trajectory: arc violates bounds");

  const double stop_time = state.time + T;
  if (hold_until <= stop_time) hold_until = stop_time + 7200.0;
  ConstAccelSegment hold;
  hold.t_begin = stop_time;
  hold.t_end = hold_until;
  hold.p0 = stop_position;
  hold.v0 = 0.0;
  hold.u = 0.0;
  return Trajectory(std::vector<Segment>{arc, hold});
}

double spacing_shortfall(const CubicSegment& arc, double reaction_time) {
  // Largest amount by which reaction_time * v(t) exceeds the remaining
  // distance to the arc's rest position. Sampled; the integrand is smooth.
  const double p_end = arc.position(arc.t_end);
  double worst = 0.0;
  const int n = std::max(2, int(std::ceil(arc.duration() / 0.01)));
  for (int i = 0; i <= n; ++i) {
    const double t = arc.t_begin + (arc.duration() * double(i)) / double(n);
    const double lack = reaction_time * arc.velocity(t) - (p_end - arc.position(t));
    worst = std::max(worst, lack);
  }
  return worst;
}

ReplanTrigger replanning_trigger(const PlanMonitor& monitor, const VehicleState& state,
                                 const std::vector<GreenWindow>& windows,
                                 double line_position, double exit_position,
                                 const Bounds& bounds, double horizon_cap) {
  if (monitor.in_standby) {
    const auto range = try_feasible_exit_range(state, exit_position, bounds, horizon_cap);
    if (!range) return ReplanTrigger::None;
    for (const GreenWindow& w : windows) {
      if (w.end < state.time) continue;
      if (!crossing_window(*range, line_position, w).empty()) return ReplanTrigger::ExitStandby;
    }
    return ReplanTrigger::None;
  }
  if (monitor.window_clipped) {
    if (state.position >= line_position - 1e-9) return ReplanTrigger::None;  // already there
    const auto range = try_feasible_exit_range(state, exit_position, bounds, horizon_cap);
    if (!range) return ReplanTrigger::None;
    const CubicSegment fastest = boundary_earliest(*range);
    // Earliest possible stop-line arrival from the current on-plan state.
    double reach = fastest.t_end;
    if (fastest.position(fastest.t_begin) >= line_position - 1e-12) {
      reach = fastest.t_begin;
    } else if (fastest.position(fastest.t_end) >= line_position) {
      double lo = fastest.t_begin, hi = fastest.t_end;
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (fastest.position(mid) >= line_position ? hi : lo) = mid;
      }
      reach = hi;
    }
    if (reach >= monitor.clip_green_begin - 1e-9) return ReplanTrigger::Refine;
  }
  return ReplanTrigger::None;
}

}  // namespace mixsim
