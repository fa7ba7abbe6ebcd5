#include "mixsim/signal_window.hpp"

#include <algorithm>
#include <cmath>

namespace mixsim {

namespace {

// Earliest time a monotone cubic reaches `target` within its span, bisection
// to 1e-9 s. Equality at the start returns the start.
double cubic_crossing(const CubicSegment& seg, double target) {
  if (seg.position(seg.t_begin) >= target - 1e-12) return seg.t_begin;
  if (seg.position(seg.t_end) < target)
    throw NoCrossingError("cubic_crossing: target beyond the arc");
  double lo = seg.t_begin, hi = seg.t_end;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (seg.position(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

CrossingWindow crossing_window(const ExitTimeRange& range, double line_position,
                               const GreenWindow& green) {
  if (!(line_position <= range.target_position + 1e-9))
    throw QueryError("crossing_window: line beyond the family target");
  CrossingWindow cw;
  cw.green = green;
  cw.reach_earliest = cubic_crossing(boundary_earliest(range), line_position);
  cw.reach_latest = cubic_crossing(boundary_latest(range), line_position);
  cw.begin = std::max(cw.reach_earliest, green.begin);
  cw.end = std::min(cw.reach_latest, green.end);
  return cw;
}

double min_arrival_time(double v0, double distance, const Bounds& bounds) {
  if (distance <= 0.0) return 0.0;
  if (!bounds.speed_ok(v0, 1e-9))
    throw QueryError("min_arrival_time: speed outside bounds");
  // Distance consumed accelerating from v0 to the cap.
  const double d_cap = (bounds.v_max * bounds.v_max - v0 * v0) / (2.0 * bounds.u_max);
  if (d_cap >= distance)
    return (std::sqrt(v0 * v0 + 2.0 * bounds.u_max * distance) - v0) / bounds.u_max;
  return (bounds.v_max - v0) / bounds.u_max + (distance - d_cap) / bounds.v_max;
}

Trajectory build_constrained_trajectory(const VehicleState& state, double t_cross,
                                        double line_position, const Bounds& bounds) {
  const double dist = line_position - state.position;
  if (!(dist > 0.0))
    throw QueryError("build_constrained_trajectory: already at or past the line");
  const double T = t_cross - state.time;
  const double t_min = min_arrival_time(state.velocity, dist, bounds);
  if (T < t_min - 1e-9)
    throw InfeasibleError("build_constrained_trajectory: arrival earlier than full effort allows");
  if (state.velocity > 1e-9 && T > dist / state.velocity + 1e-9)
    throw InfeasibleError("build_constrained_trajectory: arrival needs slowing down");

  // Cruise speed from dist = v_c*T - (v_c - v0)^2 / (2 u_max).
  const double u = bounds.u_max;
  const double v0 = state.velocity;
  const double w = v0 + u * T;
  const double disc = std::max(0.0, w * w - v0 * v0 - 2.0 * u * dist);
  const double v_c = std::min(w - std::sqrt(disc), bounds.v_max);
  const double t_acc = (v_c - v0) / u;

  std::vector<Segment> segs;
  double t = state.time;
  double p = state.position;
  if (t_acc > 1e-9) {
    ConstAccelSegment acc;
    acc.t_begin = t;
    acc.t_end = t + t_acc;
    acc.p0 = p;
    acc.v0 = v0;
    acc.u = u;
    segs.push_back(acc);
    p = acc.position(acc.t_end);
    t = acc.t_end;
  }
  if (t_cross - t > 1e-9) {
    ConstAccelSegment cruise;
    cruise.t_begin = t;
    cruise.t_end = t_cross;
    cruise.p0 = p;
    cruise.v0 = v_c;
    cruise.u = 0.0;
    segs.push_back(cruise);
  }
  if (segs.empty())
    throw DegenerateError("build_constrained_trajectory: zero-length plan");
  Trajectory traj(std::move(segs));
  traj.cross_time = t_cross;
  return traj;
}

std::optional<double> find_crossing_time(const ConstrainedQuery& q) {
  const double dist = q.line_position - q.state.position;
  if (!(dist > 0.0)) return std::nullopt;
  const double t0 = q.state.time;
  const double phi = q.bounds.reaction_time;

  double lo = std::max(t0 + min_arrival_time(q.state.velocity, dist, q.bounds), q.green.begin);
  double hi = q.green.end;
  // The family only adds speed, so arrivals past the constant-speed time are
  // out of reach.
  if (q.state.velocity > 1e-9) hi = std::min(hi, t0 + dist / q.state.velocity);
  if (q.leader && q.lead_cross_time) {
    const double gap_time = phi + q.lead_clearance / std::max(q.lead_cross_speed, 0.1);
    if (*q.lead_cross_time + gap_time > lo && *q.lead_cross_time <= hi + 1e-9)
      lo = *q.lead_cross_time + gap_time;
  }
  if (lo > hi + 1e-12) return std::nullopt;

  double t = lo;
  while (true) {
    Trajectory pre = build_constrained_trajectory(q.state, t, q.line_position, q.bounds);
    const double v_c = pre.final_state().velocity;
    bool ok = true;
    if (q.leader) {
      // Cheap reject at the crossing instant before the full grid check.
      if (q.leader->position(t) - q.line_position < phi * v_c + q.lead_clearance - q.margin)
        ok = false;
      if (ok)
        ok = spacing_ok(pre, *q.leader, phi, q.lead_clearance, t0, t, q.grid_step, q.margin);
    }
    if (ok) {
      const VehicleState at_line{q.line_position, v_c, 0.0, t};
      const auto range =
          try_feasible_exit_range(at_line, q.exit_position, q.bounds, q.horizon_cap);
      if (range) {
        if (!q.leader) return t;
        // The slowest exit arc leaves the most room; if it fits, the chosen
        // exit arc can only do better.
        Trajectory slow_exit(std::vector<Segment>{boundary_latest(*range)});
        if (spacing_ok(slow_exit, *q.leader, phi, q.lead_clearance, t, range->latest,
                       q.grid_step, q.margin))
          return t;
      }
    }
    if (t >= hi - 1e-12) break;
    t = std::min(t + q.search_dt, hi);
  }
  return std::nullopt;
}

}  // namespace mixsim
