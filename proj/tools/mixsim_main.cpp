#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "mixsim/checker.hpp"
#include "mixsim/engine.hpp"
#include "mixsim/scenario.hpp"

namespace {

using namespace mixsim;

struct SweepCell {
  const char* tag;
  const char* policy;
  double t_cycle;
};

constexpr SweepCell kCells[] = {
    {"fc40", "fixed", 40.0},
    {"ac20", "adaptive", 20.0},
    {"ac30", "adaptive", 30.0},
    {"ac40", "adaptive", 40.0},
};
constexpr double kPenetrations[] = {0.0, 0.5, 0.7};

std::string cell_dir_name(const SweepCell& cell, double penetration) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_p%03d", cell.tag,
                static_cast<int>(penetration * 100.0 + 0.5));
  return buf;
}

void print_summary(const MetricsReport& m, const std::string& out_dir) {
  std::printf("spawned=%d exited=%d complete=%s mean_travel_time=%.3f mean_energy=%.3f "
              "mean_stops=%.3f out=%s\n",
              m.spawned, m.aggregate_all.count, m.complete ? "yes" : "no",
              m.aggregate_all.mean_travel_time, m.aggregate_all.mean_energy,
              m.aggregate_all.mean_stops, out_dir.c_str());
}

int run_one(const std::string& config_path, const std::string& out_dir, bool have_seed,
            std::uint64_t seed, bool have_pen, double penetration, const std::string& policy,
            bool have_cycle, double cycle, bool have_count, int count) {
  ScenarioConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  if (have_seed) cfg.seed = seed;
  if (have_pen) cfg.penetration = penetration;
  if (!policy.empty()) cfg.policy = policy;
  if (have_cycle) cfg.t_cycle = cycle;
  if (have_count) cfg.vehicle_count = count;
  cfg.validate();
  MetricsReport m = run_scenario_dir(cfg, out_dir);
  print_summary(m, out_dir);
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& out_dir, bool have_seed,
              std::uint64_t seed, bool have_count, int count) {
  ScenarioConfig base;
  if (!config_path.empty()) base = load_config(config_path);
  if (have_seed) base.seed = seed;
  if (have_count) base.vehicle_count = count;

  std::string summary = "cell,policy,t_cycle,penetration,seed,vehicles,exited,complete,"
                        "mean_travel_time,mean_energy,mean_stops\n";
  for (const auto& cell : kCells) {
    for (double pen : kPenetrations) {
      ScenarioConfig cfg = base;
      cfg.policy = cell.policy;
      cfg.t_cycle = cell.t_cycle;
      cfg.t_update = -1.0;  // keep the broadcast at mid-cycle for every cell
      cfg.penetration = pen;
      cfg.validate();
      std::string name = cell_dir_name(cell, pen);
      std::string dir = out_dir + "/" + name;
      MetricsReport m = run_scenario_dir(cfg, dir);
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%s,%.0f,%.2f,%llu,%d,%d,%s,%.6f,%.6f,%.6f\n",
                    name.c_str(), cell.policy, cell.t_cycle, pen,
                    static_cast<unsigned long long>(cfg.seed), m.spawned,
                    m.aggregate_all.count, m.complete ? "yes" : "no",
                    m.aggregate_all.mean_travel_time, m.aggregate_all.mean_energy,
                    m.aggregate_all.mean_stops);
      summary += row;
      std::printf("%s", row);
    }
  }
  std::ofstream out(out_dir + "/summary.csv", std::ios::binary);
  if (!out) throw IoError("cannot write sweep summary");
  out << summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic microsimulator for a signalized intersection in mixed traffic"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  double penetration = 0.0;
  std::string policy;
  double cycle = 0.0;
  int count = 0;
  std::string check_dir;

  CLI::App* run = app.add_subcommand("run", "run one scenario and write its outputs");
  auto* run_seed = run->add_option("--seed", seed, "RNG seed override");
  auto* run_pen = run->add_option("--penetration", penetration, "CAV share override")
                      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--config", config_path, "scenario config file (defaults when omitted)");
  run->add_option("--policy", policy, "signal policy override: fixed | adaptive");
  auto* run_cycle = run->add_option("--cycle", cycle, "signal cycle length override, seconds");
  auto* run_count = run->add_option("--vehicles", count, "vehicle count override");
  run->add_option("--out", out_dir, "output directory (default ./out)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "run the 12-cell policy/penetration grid and write summary.csv");
  sweep->add_option("--config", config_path, "base scenario config");
  auto* sweep_seed = sweep->add_option("--seed", seed, "RNG seed override");
  auto* sweep_count = sweep->add_option("--vehicles", count, "vehicle count override");
  sweep->add_option("--out", out_dir, "output directory (default ./out)");

  CLI::App* check = app.add_subcommand("check", "verify invariants on an emitted run");
  check->add_option("--dir", check_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_one(config_path, out_dir, run_seed->count() > 0, seed,
                     run_pen->count() > 0, penetration, policy, run_cycle->count() > 0,
                     cycle, run_count->count() > 0, count);
    }
    if (sweep->parsed()) {
      return run_sweep(config_path, out_dir, sweep_seed->count() > 0, seed,
                       sweep_count->count() > 0, count);
    }
    if (check->parsed()) {
      CheckReport report = check_run_dir(check_dir);
      std::printf("%s", render_report(report).c_str());
      return report.ok() ? 0 : 3;
    }
  } catch (const mixsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mixsim::SafetyBreachError& e) {
    std::fprintf(stderr, "invariant breach: %s\n", e.what());
    return 3;
  } catch (const mixsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
