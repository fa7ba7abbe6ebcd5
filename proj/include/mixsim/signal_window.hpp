#pragma once
// Screening of green windows against the unconstrained family, and
// construction of constrained (full-effort) stop-line crossings for windows
// the family cannot catch.

#include <optional>

#include "mixsim/exit_range.hpp"

namespace mixsim {

// Intersection of the family's achievable stop-line arrival interval with one
// green window. `reach_earliest`/`reach_latest` are the stop-line arrivals of
// the earliest- and latest-exit family members.
struct CrossingWindow {
  double reach_earliest = 0.0;
  double reach_latest = 0.0;
  GreenWindow green;
  double begin = 0.0;  // max(reach_earliest, green.begin)
  double end = 0.0;    // min(reach_latest, green.end)

  bool empty() const { return begin > end; }
};

// Requires anchor.position < line_position < target of the range.
CrossingWindow crossing_window(const ExitTimeRange& range, double line_position,
                               const GreenWindow& green);

// Earliest stop-line arrival (duration from now) using full acceleration and
// the speed cap: accelerate at u_max, hold v_max if it is reached first.
double min_arrival_time(double v0, double distance, const Bounds& bounds);

// Reach the line exactly at t_cross by accelerating at u_max to a cruise
// speed held to the line. Feasible only for arrivals between the full-effort
// minimum and the constant-speed time distance/v0 (the family never slows
// down). Throws InfeasibleError outside that band.
Trajectory build_constrained_trajectory(const VehicleState& state, double t_cross,
                                        double line_position, const Bounds& bounds);

struct ConstrainedQuery {
  VehicleState state;
  GreenWindow green;
  double line_position = 0.0;
  double exit_position = 0.0;
  Bounds bounds;
  double search_dt = 0.1;
  double horizon_cap = 120.0;
  double grid_step = 0.01;
  double margin = 1e-6;
  // Predecessor, when any: committed profile, clearance to keep, and its own
  // stop-line crossing when it crosses inside the candidate interval.
  std::optional<LeadProfile> leader;
  double lead_clearance = 2.0;
  std::optional<double> lead_cross_time;
  double lead_cross_speed = 15.0;  // fallback when the crossing speed is unknown
};

// Earliest time in [max(min-arrival, green.begin), green.end] at which a
// constrained crossing is compatible with the spacing rule before the line
// and leaves a spacing-feasible exit arc after it (checked on the
// latest-exit member; slower exits only increase the gap). The candidate
// interval is tightened to start reaction_time + clearance/lead_speed after
// the leader's own crossing. Returns nullopt when the window yields nothing.
std::optional<double> find_crossing_time(const ConstrainedQuery& query);

}  // namespace mixsim
