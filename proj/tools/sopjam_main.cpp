// Command-line front end: scenario simulation, log replay, metrics,
// jamming-response calibration, and seed batches behind one binary.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sopjam/controller.hpp"
#include "sopjam/csv.hpp"
#include "sopjam/scenario.hpp"
#include "sopjam/sim.hpp"
#include "sopjam/sweep.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void emit_error(const std::string& type, const std::string& message) {
  json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::string classify(const std::exception& e) {
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
  if (dynamic_cast<const std::runtime_error*>(&e)) return "runtime_error";
  return "error";
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(
    const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos || pos == 0 || pos + 2 >= text.size()) {
    throw std::invalid_argument("expected --seeds k1..k2, got '" + text + "'");
  }
  std::uint64_t lo = 0, hi = 0;
  try {
    std::size_t used = 0;
    lo = std::stoull(text.substr(0, pos), &used);
    if (used != pos) throw std::invalid_argument("");
    const std::string rest = text.substr(pos + 2);
    hi = std::stoull(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("expected --seeds k1..k2, got '" + text + "'");
  }
  if (lo > hi) {
    throw std::invalid_argument("seed range must have k1 <= k2, got '" + text +
                                "'");
  }
  return {lo, hi};
}

std::vector<sopjam::Vec2> track_of(const std::vector<sopjam::TrajectoryRow>& rows) {
  std::vector<sopjam::Vec2> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.x_m, r.y_m);
  return out;
}

json quantile_summary(std::vector<double> values) {
  json j;
  j["min"] = sopjam::percentile_linear(values, 0.0);
  j["p25"] = sopjam::percentile_linear(values, 25.0);
  j["median"] = sopjam::percentile_linear(values, 50.0);
  j["p75"] = sopjam::percentile_linear(values, 75.0);
  j["max"] = sopjam::percentile_linear(values, 100.0);
  return j;
}

void cmd_simulate(const std::string& scenario_path, bool seed_set,
                  std::uint64_t seed, const std::string& out_dir) {
  sopjam::Scenario sc = sopjam::load_scenario(scenario_path);
  if (seed_set) sc.seed = seed;
  sopjam::SimLog log = sopjam::run_scenario(sc);
  sopjam::write_simulation_outputs(log, out_dir);
  std::cout << "simulate: " << log.records.size() << " steps, "
            << log.switch_count << " mode switches -> " << out_dir << "\n";
}

void cmd_replay(const std::string& sweeps_path, const std::string& imu_path,
                const std::string& scenario_path, const std::string& out_dir) {
  sopjam::Scenario sc = sopjam::load_scenario(scenario_path);
  auto sweeps = sopjam::load_sweep_log(sweeps_path);
  auto imu = sopjam::load_imu_csv(imu_path);
  auto rows = sopjam::replay_from_logs(sweeps, imu, sc);
  fs::create_directories(out_dir);
  const std::string out = (fs::path(out_dir) / "trajectories.csv").string();
  sopjam::write_trajectory_csv(out, rows);
  std::cout << "replay: " << rows.size() << " estimates -> " << out << "\n";
}

void cmd_metrics(const std::string& truth_path, const std::string& est_path,
                 const std::string& segments_path) {
  auto truth = track_of(sopjam::load_trajectory_csv(truth_path));
  auto est = track_of(sopjam::load_trajectory_csv(est_path));
  std::vector<sopjam::SegmentSpec> segs;
  if (!segments_path.empty()) {
    segs = sopjam::load_segments_csv(segments_path);
  }
  auto rep = sopjam::compute_metrics_tracks(truth, est, {}, {}, segs);
  std::cout << sopjam::metrics_to_json_string(rep);
}

void cmd_calibrate_jam(const std::string& pattern_path,
                       const std::string& out_path) {
  auto pattern = sopjam::load_fix_pattern(pattern_path);
  sopjam::JamParams base;  // defaults for everything not being searched
  sopjam::JamParams fit = sopjam::calibrate_jamming(pattern, base);
  sopjam::write_text_file(out_path, sopjam::jam_params_to_json_string(fit));
  std::cout << "calibrate-jam: js_threshold_db="
            << sopjam::format_double(fit.js_threshold_db)
            << " sat_loss_slope_sats_per_db="
            << sopjam::format_double(fit.sat_loss_slope_sats_per_db) << " -> "
            << out_path << "\n";
}

void cmd_batch(const std::string& scenario_path, const std::string& seeds,
               const std::string& out_dir) {
  const auto [lo, hi] = parse_seed_range(seeds);
  sopjam::Scenario base = sopjam::load_scenario(scenario_path);
  std::vector<sopjam::Scenario> configs;
  std::vector<std::uint64_t> seed_of;
  for (std::uint64_t s = lo;; ++s) {
    sopjam::Scenario sc = base;
    sc.seed = s;
    configs.push_back(std::move(sc));
    seed_of.push_back(s);
    if (s == hi) break;
  }
  auto items = sopjam::batch_run(configs);

  fs::create_directories(out_dir);
  json summary;
  summary["runs"] = items.size();
  summary["seed_lo"] = lo;
  summary["seed_hi"] = hi;
  summary["failed"] = json::array();
  std::vector<double> mae, rmse, frac, gps_mae, gps_gt6, switches, duty_jam;
  int ok_count = 0;
  for (const auto& item : items) {
    const std::uint64_t seed = seed_of[static_cast<std::size_t>(item.index)];
    if (!item.ok) {
      summary["failed"].push_back({{"seed", seed}, {"error", item.error}});
      continue;
    }
    ++ok_count;
    const auto& r = item.report;
    mae.push_back(r.rps_mae_m);
    rmse.push_back(r.rps_rmse_m);
    frac.push_back(r.rps_frac_le_6m);
    gps_mae.push_back(r.gps_mae_m);
    gps_gt6.push_back(r.gps_frac_gt_6m);
    switches.push_back(static_cast<double>(r.switch_count));
    duty_jam.push_back(r.duty_jam);
    const std::string path =
        (fs::path(out_dir) / ("metrics_" + std::to_string(seed) + ".json"))
            .string();
    sopjam::write_metrics_json(path, r);
  }
  summary["ok"] = ok_count;
  if (ok_count > 0) {
    summary["metrics"] = {{"rps_mae_m", quantile_summary(mae)},
                          {"rps_rmse_m", quantile_summary(rmse)},
                          {"rps_frac_le_6m", quantile_summary(frac)},
                          {"gps_mae_m", quantile_summary(gps_mae)},
                          {"gps_frac_gt_6m", quantile_summary(gps_gt6)},
                          {"switch_count", quantile_summary(switches)},
                          {"duty_jam", quantile_summary(duty_jam)}};
  }
  sopjam::write_text_file((fs::path(out_dir) / "summary.json").string(),
                          summary.dump(2) + "\n");
  std::cout << "batch: " << ok_count << "/" << items.size()
            << " runs ok -> " << out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrated counter-drone localization / jamming simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, sweeps_path, imu_path, truth_path,
      est_path, segments_path, pattern_path, seeds;
  std::uint64_t seed = 0;

  auto* sim = app.add_subcommand("simulate", "run a scenario end to end");
  sim->add_option("--scenario", scenario_path, "scenario JSON")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "override the scenario seed");
  sim->add_option("--out", out_path, "output directory")->required();

  auto* rep = app.add_subcommand("replay",
                                 "re-estimate a trajectory from recorded logs");
  rep->add_option("--sweeps", sweeps_path, "sweep log CSV")->required();
  rep->add_option("--imu", imu_path, "velocity log CSV")->required();
  rep->add_option("--transmitters", scenario_path,
                  "scenario JSON holding the transmitter map")
      ->required();
  rep->add_option("--out", out_path, "output directory")->required();

  auto* met = app.add_subcommand("metrics",
                                 "compare trajectories, print metrics JSON");
  met->add_option("--truth", truth_path, "ground-truth trajectory CSV")
      ->required();
  met->add_option("--est", est_path, "estimated trajectory CSV")->required();
  met->add_option("--segments", segments_path, "optional segment table CSV");

  auto* cal = app.add_subcommand(
      "calibrate-jam", "fit the jamming response to a fix/no-fix pattern");
  cal->add_option("--pattern", pattern_path, "fix pattern CSV")->required();
  cal->add_option("--out", out_path, "output JSON")->required();

  auto* bat = app.add_subcommand("batch", "run a scenario over a seed range");
  bat->add_option("--scenario", scenario_path, "scenario JSON")->required();
  bat->add_option("--seeds", seeds, "seed range k1..k2")->required();
  bat->add_option("--out", out_path, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (sim->parsed()) {
      cmd_simulate(scenario_path, seed_opt->count() > 0, seed, out_path);
    } else if (rep->parsed()) {
      cmd_replay(sweeps_path, imu_path, scenario_path, out_path);
    } else if (met->parsed()) {
      cmd_metrics(truth_path, est_path, segments_path);
    } else if (cal->parsed()) {
      cmd_calibrate_jam(pattern_path, out_path);
    } else if (bat->parsed()) {
      cmd_batch(scenario_path, seeds, out_path);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(classify(e), e.what());
    return 1;
  }
  return 0;
}
