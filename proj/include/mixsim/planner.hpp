#pragma once
// Exit-time search over the unconstrained family and the mode cascade that
// decides between an unconstrained crossing, a constrained crossing, and
// standby.

#include <optional>
#include <vector>

#include "mixsim/signal_window.hpp"
#include "mixsim/standby.hpp"

namespace mixsim {

struct PlanningContext {
  Bounds bounds;
  std::vector<GreenWindow> windows;  // known green windows, disjoint, ordered
  double line_position = 280.0;
  double search_dt = 0.1;
  double horizon_cap = 120.0;
  double grid_step = 0.01;
  double margin = 1e-6;
  std::optional<LeadProfile> leader;
  double lead_clearance = 2.0;  // clearance to keep (+ prediction buffer)
  std::optional<double> lead_cross_time;
  double lead_cross_speed = 15.0;

  void validate() const;  // windows must be disjoint and ordered
};

// Scan exit horizons from the earliest feasible one upward in search_dt steps
// and return the first member that (i) stays inside the speed/control bounds,
// (ii) keeps the spacing rule against the leader, and (iii) meets the stop
// line inside one of the known green windows. Anchors at or past the line
// skip (iii). Returns nullopt when the scan is exhausted.
std::optional<Trajectory> algorithm1_search(const PlanningContext& ctx,
                                            const VehicleState& anchor,
                                            double exit_position);

struct CascadeResult {
  Mode mode = Mode::Standby;
  std::optional<Trajectory> trajectory;  // set for crossing plans
  bool window_clipped = false;           // crossing pushed later by a green start
  double clip_green_begin = 0.0;
};

// Windows are taken chronologically: a window the family can reach gets the
// unconstrained search; a window that closes before the family can arrive
// gets a constrained attempt. The first success wins; with nothing left the
// vehicle is told to stand by. A vehicle resting at the stop line under red
// with a known upcoming window commits a hold-then-go plan so followers can
// plan against a real profile.
CascadeResult plan_cascade(const PlanningContext& ctx, const VehicleState& state,
                           double exit_position);

}  // namespace mixsim
