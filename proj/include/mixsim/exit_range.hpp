#pragma once
// Feasible exit-time window of the zero-terminal-acceleration cubic family
// from a given anchor state to a fixed target position.

#include <optional>

#include "mixsim/cubic.hpp"

namespace mixsim {

struct ExitTimeRange {
  double earliest = 0.0;  // absolute time
  double latest = 0.0;    // absolute time (capped when unbounded)
  VehicleState anchor;
  double target_position = 0.0;
};

// Closed-form endpoint analysis. For this family the terminal speed
// vT(T) = (3*D/T - v0)/2 (D = distance to target) is monotone in the horizon
// T and the speed along the arc is monotone between v0 and vT, so the speed
// limits reduce to endpoint conditions; acceleration is linear from u(0) to 0
// so the control limits reduce to conditions on u(0). The u_min condition can
// puncture the interval for short decelerating approaches; the returned range
// keeps the outer bounds and per-candidate checks re-validate each horizon.
//
// Returns nullopt when no horizon is feasible (e.g. the anchor speed exceeds
// v_max or the distance is too short to stay within u_max from this speed).
std::optional<ExitTimeRange> try_feasible_exit_range(const VehicleState& anchor,
                                                     double target_position,
                                                     const Bounds& bounds,
                                                     double horizon_cap = 120.0);

// Throwing variant (InfeasibleError).
ExitTimeRange feasible_exit_range(const VehicleState& anchor, double target_position,
                                  const Bounds& bounds, double horizon_cap = 120.0);

CubicSegment boundary_earliest(const ExitTimeRange& range);
CubicSegment boundary_latest(const ExitTimeRange& range);

}  // namespace mixsim
