#include "mixsim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace mixsim {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    if (!std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  if (v != std::floor(v)) throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
  }
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

SignalPolicy ScenarioConfig::signal_policy() const {
  if (policy == "fixed") return SignalPolicy::Fixed;
  if (policy == "adaptive") return SignalPolicy::Adaptive;
  throw ConfigError("policy: must be 'fixed' or 'adaptive', got '" + policy + "'");
}

std::array<int, kPhases> ScenarioConfig::parsed_first_cycle_order() const {
  auto parts = split(first_cycle_order, ',');
  if (parts.size() != kPhases)
    throw ConfigError("first_cycle_order: expected four comma-separated phases");
  std::array<int, kPhases> order{};
  std::array<int, kPhases> seen{};
  for (int i = 0; i < kPhases; ++i) {
    order[i] = parse_int("first_cycle_order", trim(parts[i]));
    if (order[i] < 0 || order[i] >= kPhases)
      throw ConfigError("first_cycle_order: phase index out of range");
    ++seen[order[i]];
  }
  for (int c : seen)
    if (c != 1) throw ConfigError("first_cycle_order: must be a permutation of 0..3");
  return order;
}

std::vector<ScriptedArrival> ScenarioConfig::parsed_scripted_arrivals() const {
  std::vector<ScriptedArrival> out;
  if (scripted_arrivals.empty()) return out;
  for (const auto& entry : split(scripted_arrivals, ';')) {
    auto fields = split(trim(entry), ':');
    if (fields.size() != 4)
      throw ConfigError("scripted_arrivals: entry '" + entry + "' needs time:path:class:speed");
    ScriptedArrival a;
    a.time = parse_double("scripted_arrivals", trim(fields[0]));
    a.path = parse_int("scripted_arrivals", trim(fields[1]));
    std::string cls = trim(fields[2]);
    if (cls == "cav")
      a.cls = VehicleClass::Cav;
    else if (cls == "hdv")
      a.cls = VehicleClass::Hdv;
    else
      throw ConfigError("scripted_arrivals: class must be cav or hdv, got '" + cls + "'");
    a.speed = parse_double("scripted_arrivals", trim(fields[3]));
    out.push_back(a);
  }
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i].time < out[i - 1].time)
      throw ConfigError("scripted_arrivals: entries must be time-ordered");
  return out;
}

void ScenarioConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string(key) + ": must be positive");
  };
  positive("zone_length", zone_length);
  if (light_offset < 0.0 || light_offset >= zone_length)
    throw ConfigError("light_offset: must lie within [0, zone_length)");
  if (!(v_max > v_min)) throw ConfigError("v_max: must exceed v_min");
  if (v_min < 0.0) throw ConfigError("v_min: must be nonnegative");
  positive("u_max", u_max);
  if (!(u_min < 0.0)) throw ConfigError("u_min: must be negative");
  positive("reaction_time", reaction_time);
  positive("gamma_cav", gamma_cav);
  positive("gamma_hdv", gamma_hdv);
  positive("idm_v_des", idm_v_des);
  if (idm_delta < 1.0) throw ConfigError("idm_delta: must be at least 1");
  positive("idm_headway", idm_headway);
  positive("idm_b_cmf", idm_b_cmf);
  signal_policy();
  positive("t_cycle", t_cycle);
  positive("t_min", t_min);
  if (!(t_cycle > 4.0 * t_min)) throw ConfigError("t_cycle: must exceed 4 * t_min");
  double tu = resolved_t_update();
  if (tu <= 0.0 || tu >= t_cycle) throw ConfigError("t_update: must lie inside (0, t_cycle)");
  if (cycle_origin < 0.0 || cycle_origin >= t_cycle)
    throw ConfigError("cycle_origin: must lie within [0, t_cycle)");
  parsed_first_cycle_order();
  if (vehicle_count < 0) throw ConfigError("vehicle_count: must be nonnegative");
  if (penetration < 0.0 || penetration > 1.0)
    throw ConfigError("penetration: must lie within [0, 1]");
  if (arrival_rate < 0.0) throw ConfigError("arrival_rate: must be nonnegative");
  if (entry_speed_min < v_min) throw ConfigError("entry_speed_min: below v_min");
  if (entry_speed_max > v_max) throw ConfigError("entry_speed_max: above v_max");
  if (entry_speed_min > entry_speed_max)
    throw ConfigError("entry_speed_min: exceeds entry_speed_max");
  for (const auto& a : parsed_scripted_arrivals()) {
    if (a.path < 0 || a.path >= 12) throw ConfigError("scripted_arrivals: path out of range");
    if (a.speed < v_min || a.speed > v_max)
      throw ConfigError("scripted_arrivals: speed outside bounds");
    if (a.time < 0.0) throw ConfigError("scripted_arrivals: negative time");
  }
  positive("step", step);
  positive("trace_step", trace_step);
  positive("horizon", horizon);
  positive("search_dt", search_dt);
  positive("horizon_cap", horizon_cap);
  positive("grid_step", grid_step);
  positive("deviation_threshold", deviation_threshold);
  if (hdv_noise_sigma < 0.0) throw ConfigError("hdv_noise_sigma: must be nonnegative");
  bounds().validate();
  idm(gamma_hdv).validate();
}

namespace {

struct KeyBinding {
  const char* key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = [] {
    std::vector<KeyBinding> t;
    auto add_double = [&t](const char* key, double ScenarioConfig::* field) {
      t.push_back({key,
                   [key, field](ScenarioConfig& c, const std::string& v) {
                     c.*field = parse_double(key, v);
                   },
                   [field](const ScenarioConfig& c) { return fmt_double(c.*field); }});
    };
    auto add_string = [&t](const char* key, std::string ScenarioConfig::* field) {
      t.push_back({key,
                   [field](ScenarioConfig& c, const std::string& v) { c.*field = v; },
                   [field](const ScenarioConfig& c) { return c.*field; }});
    };
    add_double("zone_length", &ScenarioConfig::zone_length);
    add_double("light_offset", &ScenarioConfig::light_offset);
    add_double("v_max", &ScenarioConfig::v_max);
    add_double("v_min", &ScenarioConfig::v_min);
    add_double("u_max", &ScenarioConfig::u_max);
    add_double("u_min", &ScenarioConfig::u_min);
    add_double("reaction_time", &ScenarioConfig::reaction_time);
    add_double("gamma_cav", &ScenarioConfig::gamma_cav);
    add_double("gamma_hdv", &ScenarioConfig::gamma_hdv);
    add_double("idm_v_des", &ScenarioConfig::idm_v_des);
    add_double("idm_delta", &ScenarioConfig::idm_delta);
    add_double("idm_headway", &ScenarioConfig::idm_headway);
    add_double("idm_b_cmf", &ScenarioConfig::idm_b_cmf);
    add_string("policy", &ScenarioConfig::policy);
    add_double("t_cycle", &ScenarioConfig::t_cycle);
    add_double("t_min", &ScenarioConfig::t_min);
    add_double("t_update", &ScenarioConfig::t_update);
    add_double("cycle_origin", &ScenarioConfig::cycle_origin);
    add_string("first_cycle_order", &ScenarioConfig::first_cycle_order);
    t.push_back({"vehicle_count",
                 [](ScenarioConfig& c, const std::string& v) {
                   c.vehicle_count = parse_int("vehicle_count", v);
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.vehicle_count); }});
    add_double("penetration", &ScenarioConfig::penetration);
    add_double("arrival_rate", &ScenarioConfig::arrival_rate);
    add_double("entry_speed_min", &ScenarioConfig::entry_speed_min);
    add_double("entry_speed_max", &ScenarioConfig::entry_speed_max);
    t.push_back({"seed",
                 [](ScenarioConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
    add_string("scripted_arrivals", &ScenarioConfig::scripted_arrivals);
    add_double("step", &ScenarioConfig::step);
    add_double("trace_step", &ScenarioConfig::trace_step);
    add_double("horizon", &ScenarioConfig::horizon);
    add_double("search_dt", &ScenarioConfig::search_dt);
    add_double("horizon_cap", &ScenarioConfig::horizon_cap);
    add_double("grid_step", &ScenarioConfig::grid_step);
    add_double("deviation_threshold", &ScenarioConfig::deviation_threshold);
    add_double("hdv_noise_sigma", &ScenarioConfig::hdv_noise_sigma);
    return t;
  }();
  return table;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    bool matched = false;
    for (const auto& b : bindings()) {
      if (key == b.key) {
        b.set(cfg, value);
        matched = true;
        break;
      }
    }
    if (!matched) throw ConfigError("unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& b : bindings()) {
    out += b.key;
    out += " = ";
    out += b.get(cfg);
    out += '\n';
  }
  return out;
}

}  // namespace mixsim
