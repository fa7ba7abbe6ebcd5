#include "mixsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mixsim {

namespace {

// How far past the measurement instant a predicted stop still counts as queue
// pressure. Kept short so the controller reacts to standing queues rather than
// forecast arrivals.
constexpr double kPressureLookahead = 5.0;

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint32_t tag, std::uint32_t sub = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    tag, sub};
  return std::mt19937_64(seq);
}

double interpolate_time(const VehicleState& a, const VehicleState& b, double p_target) {
  double span = b.position - a.position;
  if (span <= 0.0) return b.time;
  double w = (p_target - a.position) / span;
  w = std::clamp(w, 0.0, 1.0);
  return a.time + w * (b.time - a.time);
}

VehicleState interpolate_state(const VehicleState& a, const VehicleState& b, double p_target) {
  double tc = interpolate_time(a, b, p_target);
  double w = (b.time > a.time) ? (tc - a.time) / (b.time - a.time) : 1.0;
  VehicleState out;
  out.time = tc;
  out.position = p_target;
  out.velocity = a.velocity + w * (b.velocity - a.velocity);
  out.acceleration = a.acceleration + w * (b.acceleration - a.acceleration);
  return out;
}

}  // namespace

Engine::Engine(const ScenarioConfig& cfg, bool record_trace)
    : cfg_(cfg),
      bounds_(cfg.bounds()),
      idm_(cfg.idm(cfg.gamma_hdv)),
      line_(cfg.line_position()),
      record_trace_(record_trace),
      schedule_([&cfg] {
        PhasePlan first;
        first.begin = cfg.cycle_origin;
        first.order = cfg.parsed_first_cycle_order();
        first.durations.fill(cfg.t_cycle / kPhases);
        first.visible_from = 0.0;
        return ScheduleBook(PhaseTopology::standard_cross(), cfg.signal_policy(), cfg.t_cycle,
                            cfg.t_min, cfg.resolved_t_update(), first);
      }()),
      noise_rng_(seeded_rng(cfg.seed, 404)) {
  cfg_.validate();
  // Drivers take a reaction time to move on a fresh green; planned CAV
  // crossings use the true window, so only the human wall gets the lag.
  wall_rule_.start_lag = cfg_.reaction_time;
  const int paths = schedule_.topology().paths;
  pending_.resize(paths);
  zone_.resize(paths);
  window_cache_.resize(paths);
  window_cache_stamp_.assign(paths, -1);
  generate_arrivals();
  last_row_time_.assign(arrivals_.size(), -1.0);
}

void Engine::generate_arrivals() {
  const int paths = schedule_.topology().paths;
  auto scripted = cfg_.parsed_scripted_arrivals();
  if (!scripted.empty()) {
    for (const auto& s : scripted) arrivals_.push_back({s.time, s.path, s.cls, s.speed});
  } else if (cfg_.arrival_rate > 0.0 && cfg_.vehicle_count > 0) {
    for (int p = 0; p < paths; ++p) {
      auto rng = seeded_rng(cfg_.seed, 101, static_cast<std::uint32_t>(p));
      // The left lane feeds its own signal head while through and right share
      // one, so the left stream runs at twice the per-lane base rate and every
      // head carries the same expected flow.
      std::exponential_distribution<double> gap(p % 3 == 0 ? 2.0 * cfg_.arrival_rate
                                                           : cfg_.arrival_rate);
      double t = 0.0;
      while (true) {
        t += gap(rng);
        if (t > cfg_.horizon) break;
        arrivals_.push_back({t, p, VehicleClass::Hdv, 0.0});
      }
    }
    std::sort(arrivals_.begin(), arrivals_.end(), [](const Arrival& a, const Arrival& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.path < b.path;
    });
    if (static_cast<int>(arrivals_.size()) > cfg_.vehicle_count)
      arrivals_.resize(cfg_.vehicle_count);
    // Class and entry-speed draws are keyed to arrival order only, so runs
    // that differ in policy or penetration share the same incoming traffic.
    auto class_rng = seeded_rng(cfg_.seed, 202);
    auto speed_rng = seeded_rng(cfg_.seed, 303);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> spd(cfg_.entry_speed_min, cfg_.entry_speed_max);
    for (auto& a : arrivals_) {
      a.cls = u01(class_rng) < cfg_.penetration ? VehicleClass::Cav : VehicleClass::Hdv;
      a.speed = spd(speed_rng);
    }
  }
  vehicles_.resize(arrivals_.size());
  for (size_t i = 0; i < arrivals_.size(); ++i) {
    VehicleRuntime& v = vehicles_[i];
    v.info.id = static_cast<int>(i);
    v.info.cls = arrivals_[i].cls;
    v.info.path = arrivals_[i].path;
    v.info.standstill = arrivals_[i].cls == VehicleClass::Cav ? cfg_.gamma_cav : cfg_.gamma_hdv;
    v.exit_time = std::numeric_limits<double>::quiet_NaN();
    pending_[arrivals_[i].path].push_back(static_cast<int>(i));
  }
}

const std::vector<GreenWindow>& Engine::known_windows(int path, double t) {
  if (window_cache_stamp_[path] != step_count_) {
    window_cache_[path] = schedule_.green_windows(path, t, cfg_.horizon_cap);
    window_cache_stamp_[path] = step_count_;
  }
  return window_cache_[path];
}

std::optional<LeadProfile> Engine::lead_profile(const VehicleRuntime& veh) const {
  if (veh.info.cls == VehicleClass::Cav) {
    if (veh.plan) return LeadProfile::from_trajectory(veh.plan);
    return std::nullopt;
  }
  if (veh.profile) return LeadProfile::from_profile(veh.profile);
  return std::nullopt;
}

PlanningContext Engine::make_context(const VehicleRuntime& veh, double t) {
  PlanningContext ctx;
  ctx.bounds = bounds_;
  ctx.windows = known_windows(veh.info.path, t);
  ctx.line_position = line_;
  ctx.search_dt = cfg_.search_dt;
  ctx.horizon_cap = cfg_.horizon_cap;
  ctx.grid_step = cfg_.grid_step;
  ctx.lead_clearance = veh.info.standstill;
  if (veh.leader_id >= 0) {
    const VehicleRuntime& lead = vehicles_[veh.leader_id];
    ctx.leader = lead_profile(lead);
    if (lead.info.cls == VehicleClass::Hdv) ctx.lead_clearance += cfg_.deviation_threshold;
    std::optional<double> tc;
    if (lead.crossed) {
      tc = lead.cross_time;
    } else if (lead.info.cls == VehicleClass::Cav) {
      if (lead.plan) tc = lead.plan->cross_time;
    } else {
      const SampledProfile& pr = lead.prediction.profile;
      auto it = std::lower_bound(pr.position.begin(), pr.position.end(), line_);
      if (it != pr.position.end())
        tc = pr.t_begin + pr.step * double(it - pr.position.begin());
    }
    if (tc && ctx.leader) {
      ctx.lead_cross_time = *tc;
      ctx.lead_cross_speed = std::max(0.1, ctx.leader->velocity(*tc));
    }
  }
  return ctx;
}

void Engine::account_energy(VehicleRuntime& veh, double upto) {
  if (veh.info.cls != VehicleClass::Cav || !veh.plan) return;
  if (upto > veh.energy_accounted_until) {
    veh.energy += control_effort(*veh.plan, veh.energy_accounted_until, upto);
    veh.energy_accounted_until = upto;
  }
}

void Engine::commit_plan(VehicleRuntime& veh, Trajectory traj, Mode mode, bool clipped,
                         double clip_begin, double t) {
  account_energy(veh, t);
  veh.plan = std::make_shared<Trajectory>(std::move(traj));
  veh.mode = mode;
  veh.monitor = PlanMonitor{};
  veh.monitor.window_clipped = clipped;
  veh.monitor.clip_green_begin = clip_begin;
  veh.next_standby_attempt = 0.0;
  ++veh.profile_version;
}

void Engine::commit_cascade(VehicleRuntime& veh, CascadeResult&& res, double t) {
  if (res.trajectory)
    commit_plan(veh, std::move(*res.trajectory), res.mode, res.window_clipped,
                res.clip_green_begin, t);
  else
    commit_standby(veh, t);
}

double Engine::queue_stop_target(const VehicleRuntime& veh) const {
  double target = line_;
  if (veh.leader_id < 0) return target;
  const VehicleRuntime& lead = vehicles_[veh.leader_id];
  if (lead.exited) return target;
  std::optional<double> lead_stop;
  if (lead.info.cls == VehicleClass::Cav) {
    if (lead.monitor.in_standby && lead.plan) lead_stop = lead.plan->final_state().position;
  } else if (lead.prediction.stops) {
    lead_stop = lead.prediction.stop_position;
  } else if (lead.state.velocity < 0.1 && lead.state.position < line_) {
    lead_stop = lead.state.position;
  }
  if (lead_stop) {
    double clearance = veh.info.standstill;
    if (lead.info.cls == VehicleClass::Hdv) clearance += cfg_.deviation_threshold;
    target = std::min(target, *lead_stop - clearance);
  }
  return target;
}

void Engine::commit_standby(VehicleRuntime& veh, double t) {
  VehicleState s = veh.plan ? eval_extended(*veh.plan, t) : veh.state;
  s.time = t;
  if (s.velocity < 1e-9) {
    if (veh.monitor.in_standby && veh.plan) return;  // already holding
    Trajectory hold({Segment(ConstAccelSegment{t, t + 7200.0, s.position, 0.0, 0.0})});
    commit_plan(veh, std::move(hold), Mode::Standby, false, 0.0, t);
    veh.monitor.in_standby = true;
    veh.monitor.stop_time = t;
    return;
  }

  const double target0 = queue_stop_target(veh);
  std::optional<LeadProfile> lp;
  double clearance = veh.info.standstill;
  if (veh.leader_id >= 0) {
    lp = lead_profile(vehicles_[veh.leader_id]);
    if (vehicles_[veh.leader_id].info.cls == VehicleClass::Hdv)
      clearance += cfg_.deviation_threshold;
  }

  double offset = 0.0;
  for (int iter = 0; iter < 60; ++iter) {
    double p_stop = target0 - offset;
    double dist = p_stop - s.position;
    if (dist < 1e-3) break;
    double ts;
    try {
      ts = latest_stop_time(s.velocity, dist, bounds_.u_min);
    } catch (const Error&) {
      break;
    }
    double stop_time = t + ts;
    Trajectory traj;
    try {
      traj = standby_trajectory(s, p_stop, stop_time, bounds_);
    } catch (const Error&) {
      break;
    }
    const auto& arc = std::get<CubicSegment>(traj.segments().front());
    // Stopping `offset` short of the nominal slot absorbs the creeping-tail
    // deficit: gap = clearance + offset + remaining, so the follower rule
    // holds once the arc's shortfall no longer exceeds the offset.
    double need = spacing_shortfall(arc, bounds_.reaction_time) - offset;
    if (need > 1e-9) {
      offset += need + 1e-3;
      continue;
    }
    if (lp && !spacing_ok(traj, *lp, bounds_.reaction_time, clearance, t, stop_time,
                          cfg_.grid_step)) {
      offset += 0.25;
      continue;
    }
    commit_plan(veh, std::move(traj), Mode::Standby, false, 0.0, t);
    veh.monitor.in_standby = true;
    veh.monitor.stop_time = stop_time;
    return;
  }

  // No feasible minimum-effort stop arc: brake at the limit, then hold. Rare;
  // shows up when a predecessor's predicted motion collapses abruptly.
  ++replan_failures_;
  double t_brake = s.velocity / -bounds_.u_min;
  double p_rest = s.position + 0.5 * s.velocity * t_brake;
  std::vector<Segment> segs;
  segs.push_back(ConstAccelSegment{t, t + t_brake, s.position, s.velocity, bounds_.u_min});
  segs.push_back(ConstAccelSegment{t + t_brake, t + t_brake + 7200.0, p_rest, 0.0, 0.0});
  Trajectory traj(std::move(segs));
  commit_plan(veh, std::move(traj), Mode::Standby, false, 0.0, t);
  veh.monitor.in_standby = true;
  veh.monitor.stop_time = t + t_brake;
}

void Engine::try_queue_advance(VehicleRuntime& veh, const VehicleState& state, double target,
                               double t) {
  // Same standoff discipline as commit_standby: rest short of the target by
  // the arc's own creeping-tail shortfall, so the stop line is never touched
  // and the spacing rule holds through the tail.
  double offset = 0.0;
  for (int iter = 0; iter < 10; ++iter) {
    const double p_stop = target - offset;
    if (p_stop < state.position + 0.5) return;
    Trajectory traj;
    try {
      traj = advance_trajectory(state, p_stop, bounds_, 0.75 * bounds_.v_max);
    } catch (const Error&) {
      return;
    }
    const auto& arc = std::get<CubicSegment>(traj.segments().front());
    const double need = spacing_shortfall(arc, bounds_.reaction_time) - offset;
    if (need > 1e-9) {
      offset += need + 1e-3;
      continue;
    }
    const double stop_time = arc.t_end;
    if (veh.leader_id >= 0) {
      const VehicleRuntime& lead = vehicles_[veh.leader_id];
      auto lp = lead_profile(lead);
      double clearance = veh.info.standstill;
      if (lead.info.cls == VehicleClass::Hdv) clearance += cfg_.deviation_threshold;
      if (lp && !spacing_ok(traj, *lp, bounds_.reaction_time, clearance, t, stop_time,
                            cfg_.grid_step))
        return;  // queue ahead has not actually cleared this far yet
    }
    commit_plan(veh, std::move(traj), Mode::Standby, false, 0.0, t);
    veh.monitor.in_standby = true;
    veh.monitor.stop_time = stop_time;
    return;
  }
}

void Engine::replan(VehicleRuntime& veh, double t) {
  VehicleState s = veh.plan ? eval_extended(*veh.plan, t) : veh.state;
  s.time = t;
  CascadeResult res = plan_cascade(make_context(veh, t), s, cfg_.zone_length);
  commit_cascade(veh, std::move(res), t);
}

void Engine::update_cav(VehicleRuntime& veh, double t) {
  if (veh.leader_id >= 0) {
    const VehicleRuntime& lead = vehicles_[veh.leader_id];
    if (lead.profile_version != veh.seen_leader_version) {
      veh.seen_leader_version = lead.profile_version;
      veh.next_standby_attempt = 0.0;
      auto lp = lead_profile(lead);
      double clearance = veh.info.standstill;
      if (lead.info.cls == VehicleClass::Hdv) clearance += cfg_.deviation_threshold;
      bool ok = true;
      if (lp && veh.plan) {
        double until = std::min(veh.plan->end_time(), t + cfg_.horizon_cap);
        if (until > t)
          ok = spacing_ok(*veh.plan, *lp, bounds_.reaction_time, clearance, t, until,
                          cfg_.grid_step);
      }
      if (!ok) replan(veh, t);
    }
  }
  if (veh.seen_schedule_version != schedule_.version()) {
    veh.seen_schedule_version = schedule_.version();
    veh.next_standby_attempt = 0.0;
  }

  VehicleState on_plan = eval_extended(*veh.plan, t);
  on_plan.time = t;
  ReplanTrigger trig =
      replanning_trigger(veh.monitor, on_plan, known_windows(veh.info.path, t), line_,
                         cfg_.zone_length, bounds_, cfg_.horizon_cap);
  if (veh.monitor.in_standby && t + 1e-12 >= veh.next_standby_attempt) {
    bool committed_exit = false;
    if (trig == ReplanTrigger::ExitStandby) {
      CascadeResult res = plan_cascade(make_context(veh, t), on_plan, cfg_.zone_length);
      if (res.trajectory) {
        commit_cascade(veh, std::move(res), t);
        committed_exit = true;
      }
    }
    if (!committed_exit) {
      // Still waiting. If the queue ahead discharged, close up on the vacated
      // stop target so the line is reachable once a window appears.
      const double committed_stop = veh.plan->final_state().position;
      const double target = queue_stop_target(veh);
      if (target > committed_stop + 0.5) {
        if (on_plan.velocity < 1e-9)
          try_queue_advance(veh, on_plan, target, t);
        else
          commit_standby(veh, t);  // mid stop arc: re-aim at the farther stop
      }
      veh.next_standby_attempt = t + 0.5;  // autonomous retry; events reset this
    }
  } else if (trig == ReplanTrigger::Refine) {
    CascadeResult res = plan_cascade(make_context(veh, t), on_plan, cfg_.zone_length);
    if (res.trajectory) {
      commit_cascade(veh, std::move(res), t);
    } else {
      veh.monitor.window_clipped = false;  // keep the committed plan
      ++replan_failures_;
    }
  }

  VehicleState before = veh.state;
  veh.state = eval_extended(*veh.plan, t + cfg_.step);
  handle_landmarks(veh, before, t + cfg_.step);
}

void Engine::update_hdv(VehicleRuntime& veh, double t) {
  bool repredict = false;
  if (veh.leader_id >= 0 &&
      vehicles_[veh.leader_id].profile_version != veh.seen_leader_version) {
    veh.seen_leader_version = vehicles_[veh.leader_id].profile_version;
    repredict = true;
  }
  if (veh.seen_schedule_version != schedule_.version()) {
    veh.seen_schedule_version = schedule_.version();
    repredict = true;
  }
  if (!repredict && deviation_check(veh.prediction, veh.state) == Deviation::ReplanFollowers)
    repredict = true;
  if (repredict) {
    PredictionContext pc;
    if (veh.leader_id >= 0) pc.leader = lead_profile(vehicles_[veh.leader_id]);
    pc.windows = known_windows(veh.info.path, t);
    pc.line_position = line_;
    pc.exit_position = cfg_.zone_length;
    pc.idm = idm_;
    pc.bounds = bounds_;
    pc.wall = wall_rule_;
    pc.step = cfg_.step;
    double horizon = std::min(cfg_.horizon_cap, std::max(30.0, 1.5 * cfg_.t_cycle));
    veh.prediction = predict(veh.state, pc, horizon);
    veh.prediction.deviation_threshold = cfg_.deviation_threshold;
    veh.profile = std::make_shared<SampledProfile>(veh.prediction.profile);
    ++veh.profile_version;
  }

  std::optional<LeadProfile> lp;
  if (veh.leader_id >= 0) lp = lead_profile(vehicles_[veh.leader_id]);
  auto leader_at = [&lp](double tt) -> std::optional<std::pair<double, double>> {
    if (!lp) return std::nullopt;
    return std::make_pair(lp->position(tt), lp->velocity(tt));
  };
  bool wall = red_wall_active(veh.state.position, veh.state.velocity, t,
                              known_windows(veh.info.path, t), line_, idm_, bounds_,
                              wall_rule_);
  VehicleState before = veh.state;
  veh.state = idm_rk4_step(before, cfg_.step, leader_at,
                           wall ? std::optional<double>(line_) : std::nullopt, idm_, bounds_);
  if (cfg_.hdv_noise_sigma > 0.0) {
    std::normal_distribution<double> n(0.0, cfg_.hdv_noise_sigma);
    veh.state.velocity = std::max(0.0, veh.state.velocity + n(noise_rng_) * cfg_.step);
  }
  veh.energy += 0.25 * (before.acceleration * before.acceleration +
                        veh.state.acceleration * veh.state.acceleration) *
                cfg_.step;
  handle_landmarks(veh, before, t + cfg_.step);
}

void Engine::handle_landmarks(VehicleRuntime& veh, const VehicleState& before, double t_next) {
  (void)t_next;
  if (!veh.crossed && veh.state.position >= line_ - 1e-9) {
    veh.crossed = true;
    VehicleState at;
    if (veh.info.cls == VehicleClass::Cav && veh.plan && veh.plan->cross_time) {
      double tc = *veh.plan->cross_time;
      at = eval_extended(*veh.plan, tc);
      at.time = tc;
    } else {
      at = interpolate_state(before, veh.state, line_);
    }
    veh.cross_time = at.time;
    int light = schedule_.topology().light_of_path[veh.info.path];
    bool legal = schedule_.is_green(light, at.time) ||
                 schedule_.is_green(light, at.time - 1e-3) ||
                 schedule_.is_green(light, at.time + 1e-3);
    if (!legal) {
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "vehicle %d (%s) crossed the stop line at t=%.4f during red",
                    veh.info.id, to_string(veh.info.cls), at.time);
      throw SafetyBreachError(buf);
    }
    emit_event(veh, at, "cross");
  }
  if (!veh.exited && veh.state.position >= cfg_.zone_length - 1e-9) {
    VehicleState at;
    if (veh.info.cls == VehicleClass::Cav && veh.plan && veh.plan->exit_time) {
      double te = *veh.plan->exit_time;
      at = eval_extended(*veh.plan, te);
      at.time = te;
    } else {
      at = interpolate_state(before, veh.state, cfg_.zone_length);
    }
    veh.exited = true;
    veh.exit_time = at.time;
    account_energy(veh, at.time);
    auto& fifo = zone_[veh.info.path];
    if (fifo.empty() || fifo.front() != veh.info.id)
      throw Error("exit order violated the path FIFO");
    fifo.erase(fifo.begin());
    ++exited_count_;
    emit_event(veh, at, "exit");
  }
}

void Engine::assert_spacing(double t) {
  for (const auto& fifo : zone_) {
    for (size_t k = 0; k < fifo.size(); ++k) {
      const VehicleRuntime& follower = vehicles_[fifo[k]];
      double lead_pos;
      if (k > 0) {
        lead_pos = vehicles_[fifo[k - 1]].state.position;
      } else if (follower.leader_id >= 0 && vehicles_[follower.leader_id].exited) {
        auto lp = lead_profile(vehicles_[follower.leader_id]);
        if (!lp) continue;
        lead_pos = lp->position(t);
      } else {
        continue;
      }
      double gap = lead_pos - follower.state.position;
      if (follower.info.cls == VehicleClass::Cav) {
        double required = bounds_.reaction_time * follower.state.velocity +
                          follower.info.standstill;
        if (gap + 1e-5 < required) {
          char buf[200];
          std::snprintf(buf, sizeof(buf),
                        "spacing violated at t=%.4f: vehicle %d gap %.6f < %.6f",
                        t, follower.info.id, gap, required);
          throw SafetyBreachError(buf);
        }
      } else if (gap < 0.05) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "car-following gap collapsed at t=%.4f: vehicle %d",
                      t, follower.info.id);
        throw SafetyBreachError(buf);
      }
    }
  }
}

void Engine::emit_event(const VehicleRuntime& veh, const VehicleState& at, const char* event) {
  if (!record_trace_) return;
  TraceRecord r;
  r.time = at.time;
  r.vehicle = veh.info.id;
  r.cls = veh.info.cls;
  r.path = veh.info.path;
  r.position = at.position;
  r.velocity = at.velocity;
  r.acceleration = at.acceleration;
  r.mode = veh.mode;
  r.active_phase = schedule_.active_phase(at.time);
  r.own_light_green =
      schedule_.is_green(schedule_.topology().light_of_path[veh.info.path], at.time);
  r.event = event;
  trace_.push_back(std::move(r));
  last_row_time_[veh.info.id] = at.time;
}

void Engine::sample_trace(double t) {
  int phase = schedule_.active_phase(t);
  for (const auto& veh : vehicles_) {
    if (!veh.in_zone || veh.exited) continue;
    if (last_row_time_[veh.info.id] >= t - 1e-12) continue;
    TraceRecord r;
    r.time = t;
    r.vehicle = veh.info.id;
    r.cls = veh.info.cls;
    r.path = veh.info.path;
    r.position = veh.state.position;
    r.velocity = veh.state.velocity;
    r.acceleration = veh.state.acceleration;
    r.mode = veh.mode;
    r.active_phase = phase;
    r.own_light_green =
        schedule_.is_green(schedule_.topology().light_of_path[veh.info.path], t);
    r.event = "";
    trace_.push_back(std::move(r));
    last_row_time_[veh.info.id] = t;
  }
}

std::vector<double> Engine::path_pressure_counts(double stop_cutoff) const {
  std::vector<double> counts(schedule_.topology().paths, 0.0);
  for (const auto& fifo : zone_) {
    for (int id : fifo) {
      const VehicleRuntime& veh = vehicles_[id];
      if (veh.state.position >= line_) continue;
      bool counted = false;
      if (veh.info.cls == VehicleClass::Cav) {
        counted = veh.mode == Mode::Standby;
      } else {
        // Queue-bound during the cycle being planned: already stopped, or
        // predicted to come to rest before that cycle runs out.
        counted = (veh.state.velocity < 0.1 && veh.state.position < line_ - 0.1) ||
                  (veh.prediction.stops && veh.prediction.stop_time <= stop_cutoff);
      }
      if (counted) counts[veh.info.path] += 1.0;
    }
  }
  return counts;
}

void Engine::process_broadcast(double t) {
  schedule_.ensure_coverage(t + cfg_.horizon_cap + cfg_.t_cycle);
  if (schedule_.policy() == SignalPolicy::Adaptive && schedule_.needs_broadcast(t)) {
    // Snapshot semantics: a vehicle adds pressure once it is stopped or about to
    // stop. Arrivals further out are left to the next update, so the allocation
    // works from the queue as it stands, not a forecast of the whole next cycle.
    const double cutoff = t + kPressureLookahead;
    schedule_.broadcast(phase_pressure(path_pressure_counts(cutoff), schedule_.topology()), t);
  }
}

bool Engine::try_spawn(const Arrival& a, int id, double t) {
  VehicleRuntime& veh = vehicles_[id];
  double ve = a.speed;
  int leader = zone_[a.path].empty() ? -1 : zone_[a.path].back();
  if (leader >= 0) {
    const VehicleRuntime& lead = vehicles_[leader];
    double g_eff = lead.state.position - veh.info.standstill - 1.0;
    if (g_eff < 0.25) return false;
    ve = std::min({ve, g_eff / bounds_.reaction_time,
                   std::sqrt(2.0 * 0.9 * -bounds_.u_min * g_eff)});
    if (ve < 0.5) return false;
  }
  veh.in_zone = true;
  veh.leader_id = leader;
  veh.info.entry_time = t;
  veh.info.entry_speed = ve;
  veh.state = VehicleState{0.0, ve, 0.0, t};
  veh.energy_accounted_until = t;
  veh.seen_schedule_version = schedule_.version();
  if (leader >= 0) veh.seen_leader_version = vehicles_[leader].profile_version;
  zone_[a.path].push_back(id);
  ++admitted_;

  if (veh.info.cls == VehicleClass::Cav) {
    replan(veh, t);
    veh.state = eval_extended(*veh.plan, t);
    veh.state.time = t;
  } else {
    veh.mode = Mode::Idm;
    PredictionContext pc;
    if (leader >= 0) pc.leader = lead_profile(vehicles_[leader]);
    pc.windows = known_windows(a.path, t);
    pc.line_position = line_;
    pc.exit_position = cfg_.zone_length;
    pc.idm = idm_;
    pc.bounds = bounds_;
    pc.wall = wall_rule_;
    pc.step = cfg_.step;
    double horizon = std::min(cfg_.horizon_cap, std::max(30.0, 1.5 * cfg_.t_cycle));
    veh.prediction = predict(veh.state, pc, horizon);
    veh.prediction.deviation_threshold = cfg_.deviation_threshold;
    veh.profile = std::make_shared<SampledProfile>(veh.prediction.profile);
    veh.profile_version = 1;
    if (veh.profile->velocity.size() > 1) {
      // initial acceleration for the first trapezoid energy slice
      veh.state.acceleration =
          (veh.profile->velocity[1] - veh.profile->velocity[0]) / veh.profile->step;
    }
  }
  emit_event(veh, veh.state, "entry");
  return true;
}

void Engine::spawn_arrivals(double t) {
  for (size_t p = 0; p < pending_.size(); ++p) {
    auto& queue = pending_[p];
    while (!queue.empty()) {
      int idx = queue.front();
      if (arrivals_[idx].time > t + 1e-12) break;
      if (!try_spawn(arrivals_[idx], idx, t)) break;
      queue.erase(queue.begin());
    }
  }
}

void Engine::step() {
  const double t = time();
  process_broadcast(t);
  spawn_arrivals(t);
  const std::int64_t trace_every =
      std::max<std::int64_t>(1, std::llround(cfg_.trace_step / cfg_.step));
  if (record_trace_ && step_count_ % trace_every == 0) sample_trace(t);

  for (auto& veh : vehicles_) {
    if (!veh.in_zone || veh.exited) continue;
    if (veh.info.cls == VehicleClass::Cav)
      update_cav(veh, t);
    else
      update_hdv(veh, t);
    if (veh.state.velocity < 0.05 && veh.was_moving) {
      ++veh.stops;
      veh.was_moving = false;
    } else if (veh.state.velocity > 0.5) {
      veh.was_moving = true;
    }
  }

  assert_spacing(t + cfg_.step);
  ++step_count_;
  bool all_done = admitted_ == static_cast<int>(arrivals_.size()) &&
                  exited_count_ == admitted_ &&
                  std::all_of(pending_.begin(), pending_.end(),
                              [](const std::vector<int>& q) { return q.empty(); });
  if (all_done || time() >= cfg_.horizon - 1e-9) done_ = true;
}

bool Engine::finished() const { return done_; }

void Engine::run() {
  while (!done_) step();
}

MetricsReport Engine::metrics() const {
  MetricsReport m;
  m.spawned = admitted_;
  for (const auto& veh : vehicles_) {
    if (!veh.in_zone) continue;  // never admitted before the run ended
    VehicleMetrics row;
    row.id = veh.info.id;
    row.cls = veh.info.cls;
    row.path = veh.info.path;
    row.entry_time = veh.info.entry_time;
    row.exit_time = veh.exited ? veh.exit_time : std::numeric_limits<double>::quiet_NaN();
    row.travel_time = veh.exited ? veh.exit_time - veh.info.entry_time
                                 : std::numeric_limits<double>::quiet_NaN();
    row.energy = veh.energy;
    row.stops = veh.stops;
    m.vehicles.push_back(row);
  }
  bool all_admitted = admitted_ == static_cast<int>(arrivals_.size());
  m.complete = all_admitted && exited_count_ == admitted_;
  m.recompute_aggregates();
  return m;
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
  Engine engine(cfg, false);
  engine.run();
  return engine.metrics();
}

MetricsReport run_scenario_dir(const ScenarioConfig& cfg, const std::string& out_dir) {
  Engine engine(cfg, true);
  engine.run();
  MetricsReport m = engine.metrics();
  write_run_outputs(out_dir, cfg, engine.trace(), m, engine.schedule());
  return m;
}

}  // namespace mixsim
