#include "mixsim/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mixsim {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double to_double(const std::string& s, const std::string& path) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in " + path);
  }
}

VehicleClass parse_class(const std::string& s, const std::string& path) {
  if (s == "cav") return VehicleClass::Cav;
  if (s == "hdv") return VehicleClass::Hdv;
  throw IoError("bad vehicle class '" + s + "' in " + path);
}

}  // namespace

bool VehicleMetrics::exited() const { return !std::isnan(exit_time); }

void MetricsReport::recompute_aggregates() {
  auto fold = [this](auto pred) {
    ClassAggregate a;
    for (const auto& v : vehicles) {
      if (!v.exited() || !pred(v)) continue;
      ++a.count;
      a.mean_travel_time += v.travel_time;
      a.mean_energy += v.energy;
      a.mean_stops += v.stops;
    }
    if (a.count > 0) {
      a.mean_travel_time /= a.count;
      a.mean_energy /= a.count;
      a.mean_stops /= a.count;
    }
    return a;
  };
  aggregate_all = fold([](const VehicleMetrics&) { return true; });
  aggregate_cav = fold([](const VehicleMetrics& v) { return v.cls == VehicleClass::Cav; });
  aggregate_hdv = fold([](const VehicleMetrics& v) { return v.cls == VehicleClass::Hdv; });
}

std::string render_trace_row(const TraceRecord& r) {
  std::string out;
  out += fmt("%.4f", r.time);
  out += ',';
  out += std::to_string(r.vehicle);
  out += ',';
  out += to_string(r.cls);
  out += ',';
  out += std::to_string(r.path);
  out += ',';
  out += fmt("%.6f", r.position);
  out += ',';
  out += fmt("%.6f", r.velocity);
  out += ',';
  out += fmt("%.6f", r.acceleration);
  out += ',';
  out += to_string(r.mode);
  out += ',';
  out += std::to_string(r.active_phase);
  out += ',';
  out += r.own_light_green ? "green" : "red";
  out += ',';
  out += r.event;
  return out;
}

std::string render_metrics(const MetricsReport& m) {
  using json = nlohmann::ordered_json;
  auto agg = [](const ClassAggregate& a) {
    return json{{"count", a.count},
                {"mean_travel_time", a.mean_travel_time},
                {"mean_energy", a.mean_energy},
                {"mean_stops", a.mean_stops}};
  };
  int exited = 0;
  for (const auto& v : m.vehicles)
    if (v.exited()) ++exited;
  json j{{"spawned", m.spawned},
         {"exited", exited},
         {"complete", m.complete},
         {"all", agg(m.aggregate_all)},
         {"cav", agg(m.aggregate_cav)},
         {"hdv", agg(m.aggregate_hdv)}};
  return j.dump(2) + "\n";
}

void write_run_outputs(const std::string& out_dir, const ScenarioConfig& cfg,
                       const std::vector<TraceRecord>& trace, const MetricsReport& metrics,
                       const ScheduleBook& schedule) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

  std::string traces;
  traces += kTraceHeader;
  traces += '\n';
  for (const auto& r : trace) {
    traces += render_trace_row(r);
    traces += '\n';
  }
  write_file(out_dir + "/traces.csv", traces);

  std::string rows;
  rows += kVehiclesHeader;
  rows += '\n';
  for (const auto& v : metrics.vehicles) {
    rows += std::to_string(v.id);
    rows += ',';
    rows += to_string(v.cls);
    rows += ',';
    rows += std::to_string(v.path);
    rows += ',';
    rows += exact(v.entry_time);
    rows += ',';
    rows += exact(v.exit_time);
    rows += ',';
    rows += exact(v.travel_time);
    rows += ',';
    rows += exact(v.energy);
    rows += ',';
    rows += std::to_string(v.stops);
    rows += '\n';
  }
  write_file(out_dir + "/vehicles.csv", rows);

  write_file(out_dir + "/metrics.json", render_metrics(metrics));

  std::string sched = "cycle,slot,phase,begin,end,visible_from\n";
  int cycle_idx = 0;
  for (const auto& c : schedule.cycles()) {
    double s = c.begin;
    for (int slot = 0; slot < kPhases; ++slot) {
      double e = s + c.durations[slot];
      sched += std::to_string(cycle_idx) + ',' + std::to_string(slot) + ',' +
               std::to_string(c.order[slot]) + ',' + fmt("%.6f", s) + ',' + fmt("%.6f", e) +
               ',' + fmt("%.6f", c.visible_from) + '\n';
      s = e;
    }
    ++cycle_idx;
  }
  write_file(out_dir + "/schedule.csv", sched);

  write_file(out_dir + "/config_resolved.cfg", render_config(cfg));
}

std::vector<TraceRecord> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw IoError("unexpected trace header in " + path);
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 11) throw IoError("malformed trace row in " + path);
    TraceRecord r;
    r.time = to_double(f[0], path);
    r.vehicle = static_cast<int>(to_double(f[1], path));
    r.cls = parse_class(f[2], path);
    r.path = static_cast<int>(to_double(f[3], path));
    r.position = to_double(f[4], path);
    r.velocity = to_double(f[5], path);
    r.acceleration = to_double(f[6], path);
    if (f[7] == "unconstrained")
      r.mode = Mode::Unconstrained;
    else if (f[7] == "constrained")
      r.mode = Mode::Constrained;
    else if (f[7] == "standby")
      r.mode = Mode::Standby;
    else if (f[7] == "idm")
      r.mode = Mode::Idm;
    else
      throw IoError("bad mode '" + f[7] + "' in " + path);
    r.active_phase = static_cast<int>(to_double(f[8], path));
    if (f[9] == "green")
      r.own_light_green = true;
    else if (f[9] == "red")
      r.own_light_green = false;
    else
      throw IoError("bad light state '" + f[9] + "' in " + path);
    r.event = f[10];
    out.push_back(r);
  }
  return out;
}

std::vector<VehicleMetrics> read_vehicles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vehicle table '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kVehiclesHeader)
    throw IoError("unexpected vehicle-table header in " + path);
  std::vector<VehicleMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 8) throw IoError("malformed vehicle row in " + path);
    VehicleMetrics v;
    v.id = static_cast<int>(to_double(f[0], path));
    v.cls = parse_class(f[1], path);
    v.path = static_cast<int>(to_double(f[2], path));
    v.entry_time = to_double(f[3], path);
    v.exit_time = to_double(f[4], path);
    v.travel_time = to_double(f[5], path);
    v.energy = to_double(f[6], path);
    v.stops = static_cast<int>(to_double(f[7], path));
    out.push_back(v);
  }
  return out;
}

MetricsReport read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("bad metrics json in " + path + ": " + e.what());
  }
  MetricsReport m;
  m.spawned = j.at("spawned").get<int>();
  m.complete = j.at("complete").get<bool>();
  auto agg = [&j](const char* key) {
    ClassAggregate a;
    const auto& s = j.at(key);
    a.count = s.at("count").get<int>();
    a.mean_travel_time = s.at("mean_travel_time").get<double>();
    a.mean_energy = s.at("mean_energy").get<double>();
    a.mean_stops = s.at("mean_stops").get<double>();
    return a;
  };
  m.aggregate_all = agg("all");
  m.aggregate_cav = agg("cav");
  m.aggregate_hdv = agg("hdv");
  return m;
}

}  // namespace mixsim
