#include "mixsim/idm.hpp"

namespace mixsim {

double idm_acceleration(const VehicleState& state, const IdmInputs& inputs,
                        const IdmParams& params, const Bounds& bounds,
                        RedLightDeltaV red_mode) {
  const double v = std::max(state.velocity, 0.0);
  const double free_term = 1.0 - std::pow(v / params.v_des, params.delta);
  const double coupling = 2.0 * std::sqrt(params.u_max * params.b_cmf);
  double u = params.u_max * free_term;

  auto interaction = [&](double gap, double dv) {
    const double s_star = params.standstill + v * params.headway + v * dv / coupling;
    const double ratio = s_star / gap;
    return params.u_max * (free_term - ratio * ratio);
  };

  if (inputs.leader) {
    const double gap = inputs.leader->first - state.position;
    if (gap <= 0.0) throw CollisionError("idm_acceleration: non-positive leader gap");
    u = std::min(u, interaction(gap, v - inputs.leader->second));
  }
  if (inputs.red_wall) {
    const double gap = *inputs.red_wall - state.position;
    if (gap > 1e-9) {
      const double dv = red_mode == RedLightDeltaV::StationaryLeader ? v : 0.0;
      u = std::min(u, interaction(gap, dv));
    }
  }
  return std::clamp(u, bounds.u_min, bounds.u_max);
}

namespace {

// Conservative stop-line arrival estimate: accelerate at half the control
// ceiling toward the desired speed, then cruise.
double eta_to_line(double v, double dist, const IdmParams& params, const Bounds& bounds) {
  const double a = 0.5 * bounds.u_max;
  const double v_top = std::min(params.v_des, bounds.v_max);
  if (v >= v_top) return dist / v;
  const double d_acc = (v_top * v_top - v * v) / (2.0 * a);
  if (d_acc >= dist) return (std::sqrt(v * v + 2.0 * a * dist) - v) / a;
  return (v_top - v) / a + (dist - d_acc) / v_top;
}

bool can_stop_before(double v, double dist, const Bounds& bounds, const WallRule& rule) {
  return dist >= v * v / (2.0 * rule.brake_fraction * (-bounds.u_min));
}

}  // namespace

bool red_wall_active(double position, double velocity, double t,
                     const std::vector<GreenWindow>& windows, double line_position,
                     const IdmParams& params, const Bounds& bounds, const WallRule& rule) {
  if (position >= line_position - 1e-9) return false;  // already through
  const double dist = line_position - position;
  const GreenWindow* current = nullptr;
  for (const GreenWindow& w : windows)
    if (w.contains(t) && t >= w.begin + rule.start_lag) {
      current = &w;
      break;
    }
  if (!current) {
    // Red now. A vehicle that can no longer stop is committed and clears the
    // junction instead of stranding itself on the line.
    return can_stop_before(velocity, dist, bounds, rule);
  }
  if (!rule.anticipate) return false;
  if (t + eta_to_line(velocity, dist, params, bounds) + rule.margin <= current->end)
    return false;  // will make this green
  return can_stop_before(velocity, dist, bounds, rule);
}

HdvPrediction predict(const VehicleState& state, const PredictionContext& ctx,
                      double horizon) {
  HdvPrediction out;
  out.profile.t_begin = state.time;
  out.profile.step = ctx.step;
  const int n = std::max(1, int(std::ceil(horizon / ctx.step)));
  out.profile.position.reserve(size_t(n) + 1);
  out.profile.velocity.reserve(size_t(n) + 1);

  auto leader_at = [&](double t) -> std::optional<std::pair<double, double>> {
    if (!ctx.leader) return std::nullopt;
    return std::make_pair(ctx.leader->position(t), ctx.leader->velocity(t));
  };

  VehicleState s = state;
  out.profile.position.push_back(s.position);
  out.profile.velocity.push_back(s.velocity);
  for (int i = 0; i < n; ++i) {
    std::optional<double> wall;
    if (red_wall_active(s.position, s.velocity, s.time, ctx.windows, ctx.line_position,
                        ctx.idm, ctx.bounds, ctx.wall))
      wall = ctx.line_position;
    s = idm_rk4_step(s, ctx.step, leader_at, wall, ctx.idm, ctx.bounds, ctx.red_mode);
    out.profile.position.push_back(s.position);
    out.profile.velocity.push_back(s.velocity);
    if (!out.stops && s.velocity < 0.1 && s.position < ctx.line_position - 0.1) {
      out.stops = true;
      out.stop_position = s.position;
      out.stop_time = s.time;
    }
  }
  return out;
}

Deviation deviation_check(const HdvPrediction& prediction, const VehicleState& actual) {
  const double predicted = prediction.profile.position_at(actual.time);
  return std::abs(actual.position - predicted) > prediction.deviation_threshold
             ? Deviation::ReplanFollowers
             : Deviation::Ok;
}

}  // namespace mixsim
