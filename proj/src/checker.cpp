#include "mixsim/checker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mixsim/scenario.hpp"
#include "mixsim/signal_control.hpp"
#include "mixsim/trace.hpp"

namespace mixsim {

namespace {

constexpr double kSpacingSlack = 2e-4;   // trace rounding at 1e-6 per field
constexpr double kCrossingTol = 1e-3;
constexpr size_t kMaxDetails = 20;

void note(CheckReport& r, const std::string& line) {
  if (r.details.size() < kMaxDetails) r.details.push_back(line);
}

std::vector<std::vector<GreenWindow>> load_phase_windows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schedule '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "cycle,slot,phase,begin,end,visible_from")
    throw IoError("unexpected schedule header in " + path);
  std::vector<std::vector<GreenWindow>> windows(kPhases);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 6) throw IoError("malformed schedule row in " + path);
    int phase = std::stoi(fields[2]);
    if (phase < 0 || phase >= kPhases) throw IoError("bad phase in " + path);
    windows[phase].push_back({std::stod(fields[3]), std::stod(fields[4])});
  }
  for (auto& w : windows) {
    std::sort(w.begin(), w.end(),
              [](const GreenWindow& a, const GreenWindow& b) { return a.begin < b.begin; });
    std::vector<GreenWindow> merged;
    for (const auto& g : w) {
      if (!merged.empty() && g.begin <= merged.back().end + 1e-9)
        merged.back().end = std::max(merged.back().end, g.end);
      else
        merged.push_back(g);
    }
    w = std::move(merged);
  }
  return windows;
}

bool in_any_window(const std::vector<GreenWindow>& windows, double t, double tol) {
  for (const auto& g : windows)
    if (g.contains(t, tol)) return true;
  return false;
}

}  // namespace

CheckReport check_run_dir(const std::string& dir) {
  CheckReport report;
  ScenarioConfig cfg = load_config(dir + "/config_resolved.cfg");
  auto trace = read_trace(dir + "/traces.csv");
  auto phase_windows = load_phase_windows(dir + "/schedule.csv");
  PhaseTopology topo = PhaseTopology::standard_cross();

  // Group rows taken at the same instant, then scan each path's column of
  // vehicles front to back.
  std::map<double, std::map<int, std::vector<const TraceRecord*>>> by_time;
  for (const auto& r : trace) by_time[r.time][r.path].push_back(&r);

  for (const auto& [t, paths] : by_time) {
    for (const auto& [path, rows] : paths) {
      (void)path;
      std::vector<const TraceRecord*> sorted = rows;
      std::sort(sorted.begin(), sorted.end(), [](const TraceRecord* a, const TraceRecord* b) {
        return a->position > b->position;
      });
      for (size_t k = 0; k + 1 < sorted.size(); ++k) {
        const TraceRecord* lead = sorted[k];
        const TraceRecord* follow = sorted[k + 1];
        if (lead->vehicle == follow->vehicle) continue;
        ++report.rows_checked;
        if (lead->vehicle > follow->vehicle) {
          ++report.order_violations;
          char buf[160];
          std::snprintf(buf, sizeof(buf), "t=%.4f path %d: vehicle %d overtook %d",
                        t, follow->path, follow->vehicle, lead->vehicle);
          note(report, buf);
        }
        double gap = lead->position - follow->position;
        if (follow->cls == VehicleClass::Cav) {
          double required = cfg.reaction_time * follow->velocity + cfg.gamma_cav;
          if (gap + kSpacingSlack < required) {
            ++report.spacing_violations;
            char buf[180];
            std::snprintf(buf, sizeof(buf),
                          "t=%.4f path %d: vehicle %d gap %.6f below required %.6f",
                          t, follow->path, follow->vehicle, gap, required);
            note(report, buf);
          }
        } else if (gap < 0.049) {
          ++report.spacing_violations;
          char buf[160];
          std::snprintf(buf, sizeof(buf), "t=%.4f path %d: vehicle %d gap collapsed (%.6f)",
                        t, follow->path, follow->vehicle, gap);
          note(report, buf);
        }
      }
    }
  }

  // Per-vehicle scans: stop-line legality from cross events, mode sanity.
  std::map<int, bool> has_cross;
  std::map<int, bool> has_exit;
  std::map<int, double> crossed_at;
  for (const auto& r : trace) {
    bool cav = r.cls == VehicleClass::Cav;
    if ((cav && r.mode == Mode::Idm) || (!cav && r.mode != Mode::Idm)) {
      ++report.mode_violations;
      char buf[140];
      std::snprintf(buf, sizeof(buf), "t=%.4f: vehicle %d (%s) reported mode %s", r.time,
                    r.vehicle, to_string(r.cls), to_string(r.mode));
      note(report, buf);
    }
    auto it = crossed_at.find(r.vehicle);
    if (it != crossed_at.end() && r.time > it->second && r.mode == Mode::Standby) {
      ++report.mode_violations;
      char buf[140];
      std::snprintf(buf, sizeof(buf), "t=%.4f: vehicle %d in standby past the stop line",
                    r.time, r.vehicle);
      note(report, buf);
    }
    if (r.event == "cross") {
      has_cross[r.vehicle] = true;
      crossed_at[r.vehicle] = r.time;
      int light = topo.light_of_path[r.path];
      int phase = topo.phase_of_light(light);
      if (!in_any_window(phase_windows[phase], r.time, kCrossingTol)) {
        ++report.red_crossings;
        char buf[140];
        std::snprintf(buf, sizeof(buf), "vehicle %d crossed at t=%.4f outside green",
                      r.vehicle, r.time);
        note(report, buf);
      }
    } else if (r.event == "exit") {
      has_exit[r.vehicle] = true;
    }
  }
  for (const auto& [vehicle, exited] : has_exit) {
    if (exited && !has_cross[vehicle]) {
      ++report.red_crossings;
      char buf[120];
      std::snprintf(buf, sizeof(buf), "vehicle %d exited without a recorded crossing",
                    vehicle);
      note(report, buf);
    }
  }

  // Metrics round trip: aggregates recomputed from the vehicle table must
  // reproduce the summary bit for bit.
  auto rows = read_vehicles(dir + "/vehicles.csv");
  MetricsReport recomputed;
  recomputed.vehicles = rows;
  recomputed.recompute_aggregates();
  MetricsReport stored = read_metrics(dir + "/metrics.json");
  auto same = [](const ClassAggregate& a, const ClassAggregate& b) {
    return a.count == b.count && a.mean_travel_time == b.mean_travel_time &&
           a.mean_energy == b.mean_energy && a.mean_stops == b.mean_stops;
  };
  if (!same(recomputed.aggregate_all, stored.aggregate_all) ||
      !same(recomputed.aggregate_cav, stored.aggregate_cav) ||
      !same(recomputed.aggregate_hdv, stored.aggregate_hdv)) {
    report.metrics_consistent = false;
    note(report, "metrics.json does not match aggregates recomputed from vehicles.csv");
  }

  return report;
}

std::string render_report(const CheckReport& report) {
  std::string out;
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "spacing_violations=%d red_crossings=%d order_violations=%d "
                "mode_violations=%d metrics_consistent=%s rows_checked=%d\n",
                report.spacing_violations, report.red_crossings, report.order_violations,
                report.mode_violations, report.metrics_consistent ? "yes" : "no",
                report.rows_checked);
  out += buf;
  for (const auto& d : report.details) {
    out += "  ";
    out += d;
    out += '\n';
  }
  out += report.ok() ? "OK\n" : "VIOLATIONS FOUND\n";
  return out;
}

}  // namespace mixsim
