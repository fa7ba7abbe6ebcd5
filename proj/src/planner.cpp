#include "mixsim/planner.hpp"

#include <algorithm>
#include <cmath>

namespace mixsim {

namespace {

// Earliest time a monotone arc reaches `target`, bisection to 1e-9 s.
double arc_crossing(const CubicSegment& seg, double target) {
  if (seg.position(seg.t_begin) >= target - 1e-12) return seg.t_begin;
  double lo = seg.t_begin, hi = seg.t_end;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (seg.position(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

void PlanningContext::validate() const {
  for (size_t i = 0; i < windows.size(); ++i) {
    if (!(windows[i].end > windows[i].begin))
      throw Error("planning context: empty green window");
    if (i > 0 && windows[i].begin < windows[i - 1].end - 1e-9)
      throw Error("planning context: green windows overlap or are unordered");
  }
}

std::optional<Trajectory> algorithm1_search(const PlanningContext& ctx,
                                            const VehicleState& anchor,
                                            double exit_position) {
  ctx.validate();
  const auto range = try_feasible_exit_range(anchor, exit_position, ctx.bounds, ctx.horizon_cap);
  if (!range) return std::nullopt;
  const bool crossed = anchor.position >= ctx.line_position - 1e-9;
  const double phi = ctx.bounds.reaction_time;

  double tf = range->earliest;
  while (true) {
    const CubicSegment seg = solve_unconstrained(anchor.position, anchor.velocity,
                                                 anchor.time, exit_position, tf);
    bool ok = respects_bounds(seg, ctx.bounds, ctx.margin);
    double tc = anchor.time;
    if (ok && !crossed) {
      tc = arc_crossing(seg, ctx.line_position);
      ok = std::any_of(ctx.windows.begin(), ctx.windows.end(),
                       [&](const GreenWindow& w) { return w.contains(tc, 1e-9); });
    }
    if (ok && ctx.leader) {
      // Single-point reject at the stop line before paying for the grid.
      const double probe_t = crossed ? tf : tc;
      const double need = phi * seg.velocity(probe_t) + ctx.lead_clearance;
      if (ctx.leader->position(probe_t) - seg.position(probe_t) < need - ctx.margin)
        ok = false;
      if (ok) {
        Trajectory cand(std::vector<Segment>{seg});
        ok = spacing_ok(cand, *ctx.leader, phi, ctx.lead_clearance, anchor.time, tf,
                        ctx.grid_step, ctx.margin);
      }
    }
    if (ok) {
      Trajectory plan(std::vector<Segment>{seg});
      if (!crossed) plan.cross_time = tc;
      plan.exit_time = tf;
      return plan;
    }
    if (tf >= range->latest - 1e-12) break;
    tf = std::min(tf + ctx.search_dt, range->latest);
  }
  return std::nullopt;
}

namespace {

// A CAV resting at the stop line under red commits a hold-then-go plan as
// soon as a future window is known, giving followers a profile to plan
// against instead of an open-ended hold.
std::optional<CascadeResult> hold_then_go(const PlanningContext& ctx,
                                          const VehicleState& state, double exit_position) {
  if (state.velocity >= 1e-6) return std::nullopt;
  if (state.position < ctx.line_position - 0.5 ||
      state.position > ctx.line_position + 1e-6)
    return std::nullopt;
  const bool green_now = std::any_of(ctx.windows.begin(), ctx.windows.end(),
                                     [&](const GreenWindow& w) { return w.contains(state.time); });
  if (green_now) return std::nullopt;
  const GreenWindow* next_w = nullptr;
  for (const GreenWindow& w : ctx.windows)
    if (w.begin > state.time && (!next_w || w.begin < next_w->begin)) next_w = &w;
  if (!next_w || next_w->begin - state.time <= 1e-9) return std::nullopt;

  VehicleState depart = state;
  depart.time = next_w->begin;
  depart.velocity = 0.0;
  depart.acceleration = 0.0;
  auto go = algorithm1_search(ctx, depart, exit_position);
  if (!go) return std::nullopt;

  ConstAccelSegment hold;
  hold.t_begin = state.time;
  hold.t_end = next_w->begin;
  hold.p0 = state.position;
  hold.v0 = 0.0;
  hold.u = 0.0;
  std::vector<Segment> segs{hold};
  for (const Segment& s : go->segments()) segs.push_back(s);
  Trajectory plan(std::move(segs));
  plan.cross_time = go->cross_time;
  plan.exit_time = go->exit_time;
  CascadeResult res;
  res.mode = Mode::Unconstrained;
  res.trajectory = std::move(plan);
  return res;
}

}  // namespace

CascadeResult plan_cascade(const PlanningContext& ctx, const VehicleState& state,
                           double exit_position) {
  ctx.validate();
  if (auto parked = hold_then_go(ctx, state, exit_position)) return *parked;

  const auto range = try_feasible_exit_range(state, exit_position, ctx.bounds, ctx.horizon_cap);
  if (!range) return CascadeResult{};

  if (state.position >= ctx.line_position - 1e-9) {
    // Past the line: only bounds and spacing constrain the exit arc.
    if (auto traj = algorithm1_search(ctx, state, exit_position)) {
      CascadeResult res;
      res.mode = Mode::Unconstrained;
      res.trajectory = std::move(*traj);
      return res;
    }
    return CascadeResult{};
  }

  for (const GreenWindow& w : ctx.windows) {
    if (w.end < state.time) continue;
    const CrossingWindow cw = crossing_window(*range, ctx.line_position, w);
    if (!cw.empty()) {
      PlanningContext one = ctx;
      one.windows = {w};
      if (auto traj = algorithm1_search(one, state, exit_position)) {
        CascadeResult res;
        res.mode = Mode::Unconstrained;
        res.trajectory = std::move(*traj);
        res.window_clipped = cw.reach_earliest < w.begin - 1e-9;
        res.clip_green_begin = w.begin;
        return res;
      }
    } else if (cw.reach_earliest > w.end) {
      // The family arrives too late even at full stretch; try a full-effort
      // crossing inside this window.
      ConstrainedQuery q;
      q.state = state;
      q.green = w;
      q.line_position = ctx.line_position;
      q.exit_position = exit_position;
      q.bounds = ctx.bounds;
      q.search_dt = ctx.search_dt;
      q.horizon_cap = ctx.horizon_cap;
      q.grid_step = ctx.grid_step;
      q.margin = ctx.margin;
      q.leader = ctx.leader;
      q.lead_clearance = ctx.lead_clearance;
      q.lead_cross_time = ctx.lead_cross_time;
      q.lead_cross_speed = ctx.lead_cross_speed;
      if (auto t_cross = find_crossing_time(q)) {
        Trajectory pre = build_constrained_trajectory(state, *t_cross, ctx.line_position,
                                                      ctx.bounds);
        VehicleState at_line = pre.final_state();
        at_line.time = *t_cross;
        if (auto post = algorithm1_search(ctx, at_line, exit_position)) {
          std::vector<Segment> segs = pre.segments();
          for (const Segment& s : post->segments()) segs.push_back(s);
          Trajectory plan(std::move(segs));
          plan.cross_time = *t_cross;
          plan.exit_time = post->exit_time;
          CascadeResult res;
          res.mode = Mode::Constrained;
          res.trajectory = std::move(plan);
          return res;
        }
      }
    }
    // Windows the family can only reach after they close on the early side
    // offer nothing: the family cannot slow below its latest member.
  }
  return CascadeResult{};
}

}  // namespace mixsim
