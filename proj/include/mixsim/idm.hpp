#pragma once
// Intelligent-driver car following with a stationary virtual vehicle standing
// in for a red light, forward prediction on a fixed grid, and the deviation
// check that triggers follower replans.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "mixsim/trajectory.hpp"
#include "mixsim/types.hpp"

namespace mixsim {

// Speed difference used for the red-light virtual vehicle: a stationary
// leader contributes dv = v; Zero drops the closing-speed term.
enum class RedLightDeltaV { StationaryLeader, Zero };

struct IdmInputs {
  std::optional<std::pair<double, double>> leader;  // position, speed
  std::optional<double> red_wall;                   // stop-line position
};

// Acceleration demand, clamped to [u_min, u_max]. Each interaction
// contributes u_max * (1 - (v/v_des)^delta - (s*/s)^2) and the most
// restrictive one wins. Throws CollisionError on a non-positive leader gap.
double idm_acceleration(const VehicleState& state, const IdmInputs& inputs,
                        const IdmParams& params, const Bounds& bounds,
                        RedLightDeltaV red_mode = RedLightDeltaV::StationaryLeader);

// Green-expiry anticipation for human drivers: with instantaneous switching
// a purely reactive wall cannot avoid dilemma-zone red crossings, so during
// green the wall also activates when the remaining green no longer covers a
// conservative arrival estimate, as long as stopping is still possible.
// start_lag delays the driver's response to a fresh green: the wall holds for
// that long past the onset, so a stopped queue loses its head start while the
// expiry side stays on the true clock (drivers err toward stopping).
struct WallRule {
  bool anticipate = true;
  double margin = 1.0;          // seconds of spare green demanded to commit
  double brake_fraction = 0.9;  // usable share of u_min for the stop decision
  double start_lag = 0.0;       // perception delay after a green onset
};

bool red_wall_active(double position, double velocity, double t,
                     const std::vector<GreenWindow>& windows, double line_position,
                     const IdmParams& params, const Bounds& bounds, const WallRule& rule);

struct HdvPrediction {
  SampledProfile profile;
  bool stops = false;            // comes to rest before the stop line
  double stop_position = 0.0;
  double stop_time = 0.0;        // absolute; meaningful when stops is set
  double deviation_threshold = 2.0;
};

struct PredictionContext {
  std::optional<LeadProfile> leader;
  std::vector<GreenWindow> windows;  // known signal schedule for the path
  double line_position = 280.0;
  double exit_position = 300.0;
  IdmParams idm;
  Bounds bounds;
  WallRule wall;
  RedLightDeltaV red_mode = RedLightDeltaV::StationaryLeader;
  double step = 0.01;
};

// Forward-integrate the car-following dynamics from `state` over `horizon`
// seconds. The same integrator drives the in-simulation plant, so with exact
// inputs the prediction reproduces the plant step for step.
HdvPrediction predict(const VehicleState& state, const PredictionContext& ctx,
                      double horizon);

enum class Deviation { Ok, ReplanFollowers };

// Compares the actual state against the prediction at the same time.
Deviation deviation_check(const HdvPrediction& prediction, const VehicleState& actual);

// One RK4 step of the car-following dynamics. The wall decision is frozen for
// the step; substage speeds are floored at zero so stops do not reverse.
// LeaderFn: std::optional<std::pair<double,double>>(double t).
template <class LeaderFn>
VehicleState idm_rk4_step(const VehicleState& s, double dt, LeaderFn&& leader_at,
                          std::optional<double> wall_position, const IdmParams& idm,
                          const Bounds& bounds,
                          RedLightDeltaV red_mode = RedLightDeltaV::StationaryLeader) {
  auto accel = [&](double p, double v, double t) {
    VehicleState q{p, std::max(v, 0.0), 0.0, t};
    IdmInputs in;
    in.leader = leader_at(t);
    in.red_wall = wall_position;
    double u = idm_acceleration(q, in, idm, bounds, red_mode);
    if (q.velocity <= 0.0 && u < 0.0) u = 0.0;
    return u;
  };
  const double t = s.time;
  const double h = dt;
  const double k1p = std::max(s.velocity, 0.0);
  const double k1v = accel(s.position, s.velocity, t);
  const double k2p = std::max(s.velocity + 0.5 * h * k1v, 0.0);
  const double k2v = accel(s.position + 0.5 * h * k1p, s.velocity + 0.5 * h * k1v, t + 0.5 * h);
  const double k3p = std::max(s.velocity + 0.5 * h * k2v, 0.0);
  const double k3v = accel(s.position + 0.5 * h * k2p, s.velocity + 0.5 * h * k2v, t + 0.5 * h);
  const double k4p = std::max(s.velocity + h * k3v, 0.0);
  const double k4v = accel(s.position + h * k3p, s.velocity + h * k3v, t + h);

  VehicleState out;
  out.time = t + h;
  out.position = s.position + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  out.velocity = std::max(0.0, s.velocity + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v));
  out.acceleration = accel(out.position, out.velocity, out.time);
  return out;
}

}  // namespace mixsim
