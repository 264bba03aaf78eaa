#include "sopjam/scenario.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "sopjam/csv.hpp"

namespace sopjam {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(std::string("missing field '") + where + "." +
                                key + "'");
  }
  return *it;
}

double num(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) {
    throw std::invalid_argument(std::string("field '") + where + "." + key +
                                "' must be a number");
  }
  return v.get<double>();
}

int integer(const json& j, const char* key, const char* where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string("field '") + where + "." + key +
                                "' must be an integer");
  }
  return v.get<int>();
}

void check(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("field '") + field + "' " + what);
  }
}

JamParams parse_jam_params(const json& g) {
  JamParams p;
  p.transmit_power_mw = num(g, "transmit_power_mw", "jam_params");
  p.gain_tx = num(g, "gain_tx", "jam_params");
  p.gain_rx = num(g, "gain_rx", "jam_params");
  p.antenna_height_tx_m = num(g, "antenna_height_tx_m", "jam_params");
  p.antenna_height_rx_m = num(g, "antenna_height_rx_m", "jam_params");
  p.elevation_rolloff_exp = num(g, "elevation_rolloff_exp", "jam_params");
  p.js_threshold_db = num(g, "js_threshold_db", "jam_params");
  p.sat_loss_slope_sats_per_db =
      num(g, "sat_loss_slope_sats_per_db", "jam_params");
  p.n_nominal = integer(g, "n_nominal", "jam_params");
  p.fix_min_sats = integer(g, "fix_min_sats", "jam_params");
  p.gps_signal_power_dbm = num(g, "gps_signal_power_dbm", "jam_params");
  p.noise_floor_dbm = num(g, "noise_floor_dbm", "jam_params");
  p.self_link_distance_m = num(g, "self_link_distance_m", "jam_params");
  p.reacquisition_steps_per_sat =
      integer(g, "reacquisition_steps_per_sat", "jam_params");
  return p;
}

json jam_params_to_json(const JamParams& p) {
  return {{"transmit_power_mw", p.transmit_power_mw},
          {"gain_tx", p.gain_tx},
          {"gain_rx", p.gain_rx},
          {"antenna_height_tx_m", p.antenna_height_tx_m},
          {"antenna_height_rx_m", p.antenna_height_rx_m},
          {"elevation_rolloff_exp", p.elevation_rolloff_exp},
          {"js_threshold_db", p.js_threshold_db},
          {"sat_loss_slope_sats_per_db", p.sat_loss_slope_sats_per_db},
          {"n_nominal", p.n_nominal},
          {"fix_min_sats", p.fix_min_sats},
          {"gps_signal_power_dbm", p.gps_signal_power_dbm},
          {"noise_floor_dbm", p.noise_floor_dbm},
          {"self_link_distance_m", p.self_link_distance_m},
          {"reacquisition_steps_per_sat", p.reacquisition_steps_per_sat}};
}

}  // namespace

Scenario scenario_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario JSON parse error: ") +
                                e.what());
  }
  Scenario sc;
  sc.duration_steps = integer(j, "duration_steps", "scenario");
  sc.dt_s = num(j, "dt_s", "scenario");
  {
    const json& v = require(j, "seed", "scenario");
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
      throw std::invalid_argument("field 'scenario.seed' must be an integer");
    }
    sc.seed = v.get<std::uint64_t>();
  }
  {
    const json& p = require(j, "pursuer_init_m", "scenario");
    sc.pursuer_init_m = Vec2(num(p, "x_m", "pursuer_init_m"),
                             num(p, "y_m", "pursuer_init_m"));
  }
  {
    const json& route = require(j, "rogue_route", "scenario");
    if (!route.is_array()) {
      throw std::invalid_argument("field 'scenario.rogue_route' must be an array");
    }
    for (const auto& w : route) {
      Waypoint wp;
      wp.x_m = num(w, "x_m", "rogue_route[]");
      wp.y_m = num(w, "y_m", "rogue_route[]");
      wp.altitude_m = num(w, "altitude_m", "rogue_route[]");
      wp.hold_steps = integer(w, "hold_steps", "rogue_route[]");
      sc.rogue_route.push_back(wp);
    }
  }
  sc.rogue_speed_m_s = num(j, "rogue_speed_m_s", "scenario");
  {
    const json& txs = require(j, "transmitters", "scenario");
    if (!txs.is_array()) {
      throw std::invalid_argument("field 'scenario.transmitters' must be an array");
    }
    for (const auto& t : txs) {
      Transmitter tx;
      tx.id = integer(t, "id", "transmitters[]");
      tx.x_m = num(t, "x_m", "transmitters[]");
      tx.y_m = num(t, "y_m", "transmitters[]");
      tx.ref_rss_p0_dbm = num(t, "ref_rss_p0_dbm", "transmitters[]");
      tx.d0_m = num(t, "d0_m", "transmitters[]");
      sc.transmitters.push_back(tx);
    }
  }
  sc.shadowing_sigma_db = num(j, "shadowing_sigma_db", "scenario");
  sc.sweep_samples_per_band = integer(j, "sweep_samples_per_band", "scenario");
  if (j.contains("transmitter_position_offset_m")) {
    sc.transmitter_position_offset_m =
        num(j, "transmitter_position_offset_m", "scenario");
  }
  sc.imu_velocity_noise_sigma_m_s =
      num(j, "imu_velocity_noise_sigma_m_s", "scenario");
  sc.gps_noise_sigma_m = num(j, "gps_noise_sigma_m", "scenario");

  sc.jam = parse_jam_params(require(j, "jam_params", "scenario"));
  {
    const json& g = require(j, "ctrl_params", "scenario");
    ControllerParams& p = sc.ctrl;
    p.t_i = integer(g, "t_i", "ctrl_params");
    p.n_pl = num(g, "n_pl", "ctrl_params");
    p.a_percentile = num(g, "a_percentile", "ctrl_params");
    p.d_jam_m = num(g, "d_jam_m", "ctrl_params");
    p.calib_window_steps = integer(g, "calib_window_steps", "ctrl_params");
  }
  {
    const json& g = require(j, "vision_params", "scenario");
    VisionParams& p = sc.vision;
    p.ref_width_px = num(g, "ref_width_px", "vision_params");
    p.ref_distance_m = num(g, "ref_distance_m", "vision_params");
    p.ref_width_m = num(g, "ref_width_m", "vision_params");
    p.target_width_m = num(g, "target_width_m", "vision_params");
    p.pixel_noise_sigma_px = num(g, "pixel_noise_sigma_px", "vision_params");
    p.smoothing_window = integer(g, "smoothing_window", "vision_params");
    p.min_detect_px = num(g, "min_detect_px", "vision_params");
  }
  {
    const json& g = require(j, "ekf_params", "scenario");
    EkfConfig& p = sc.ekf;
    p.p0_sigma_m = num(g, "p0_sigma_m", "ekf_params");
    p.q_velocity_sigma_m_s = num(g, "q_velocity_sigma_m_s", "ekf_params");
    p.range_noise_floor_m = num(g, "range_noise_floor_m", "ekf_params");
    p.fixed_range_noise_sigma_m =
        num(g, "fixed_range_noise_sigma_m", "ekf_params");
  }
  {
    const json& g = require(j, "pursuit_params", "scenario");
    PursuitParams& p = sc.pursuit;
    p.max_speed_m_s = num(g, "max_speed_m_s", "pursuit_params");
    p.standoff_m = num(g, "standoff_m", "pursuit_params");
    p.altitude_m = num(g, "altitude_m", "pursuit_params");
  }

  validate_scenario(sc);
  return sc;
}

void validate_scenario(const Scenario& sc) {
  check(sc.duration_steps >= 1, "duration_steps", "must be >= 1");
  check(sc.dt_s > 0.0 && std::isfinite(sc.dt_s), "dt_s", "must be > 0");
  check(!sc.rogue_route.empty(), "rogue_route", "must not be empty");
  for (const auto& w : sc.rogue_route) {
    check(w.altitude_m > 0.0, "rogue_route[].altitude_m", "must be > 0");
    check(w.hold_steps >= 0, "rogue_route[].hold_steps", "must be >= 0");
    check(std::isfinite(w.x_m) && std::isfinite(w.y_m),
          "rogue_route[].x_m/y_m", "must be finite");
  }
  check(sc.rogue_speed_m_s >= 0.0, "rogue_speed_m_s", "must be >= 0");
  check(!sc.transmitters.empty(), "transmitters", "must not be empty");
  {
    std::set<int> ids;
    for (const auto& t : sc.transmitters) {
      check(t.id >= 0, "transmitters[].id", "must be >= 0");
      check(ids.insert(t.id).second, "transmitters[].id", "must be unique");
      check(t.d0_m > 0.0, "transmitters[].d0_m", "must be > 0");
      check(std::isfinite(t.ref_rss_p0_dbm), "transmitters[].ref_rss_p0_dbm",
            "must be finite");
    }
  }
  check(sc.shadowing_sigma_db >= 0.0, "shadowing_sigma_db", "must be >= 0");
  check(sc.sweep_samples_per_band >= 1, "sweep_samples_per_band", "must be >= 1");
  check(sc.transmitter_position_offset_m >= 0.0,
        "transmitter_position_offset_m", "must be >= 0");
  check(sc.imu_velocity_noise_sigma_m_s >= 0.0, "imu_velocity_noise_sigma_m_s",
        "must be >= 0");
  check(sc.gps_noise_sigma_m >= 0.0, "gps_noise_sigma_m", "must be >= 0");

  const JamParams& jp = sc.jam;
  check(jp.transmit_power_mw > 0.0, "jam_params.transmit_power_mw", "must be > 0");
  check(jp.gain_tx > 0.0, "jam_params.gain_tx", "must be > 0");
  check(jp.gain_rx > 0.0, "jam_params.gain_rx", "must be > 0");
  check(jp.antenna_height_tx_m > 0.0, "jam_params.antenna_height_tx_m",
        "must be > 0");
  check(jp.antenna_height_rx_m > 0.0, "jam_params.antenna_height_rx_m",
        "must be > 0");
  check(jp.elevation_rolloff_exp >= 0.0, "jam_params.elevation_rolloff_exp",
        "must be >= 0");
  check(jp.sat_loss_slope_sats_per_db >= 0.0,
        "jam_params.sat_loss_slope_sats_per_db", "must be >= 0");
  check(jp.n_nominal >= 1, "jam_params.n_nominal", "must be >= 1");
  check(jp.fix_min_sats >= 1 && jp.fix_min_sats <= jp.n_nominal,
        "jam_params.fix_min_sats", "must be in [1, n_nominal]");
  check(jp.self_link_distance_m > 0.0, "jam_params.self_link_distance_m",
        "must be > 0");
  check(jp.reacquisition_steps_per_sat >= 1,
        "jam_params.reacquisition_steps_per_sat", "must be >= 1");

  const ControllerParams& cp = sc.ctrl;
  check(cp.t_i >= 4, "ctrl_params.t_i", "must be >= 4");
  check(cp.t_i <= static_cast<int>(sc.transmitters.size()), "ctrl_params.t_i",
        "must be <= number of transmitters");
  check(cp.n_pl > 0.0, "ctrl_params.n_pl", "must be > 0");
  check(cp.a_percentile >= 0.0 && cp.a_percentile <= 100.0,
        "ctrl_params.a_percentile", "must be in [0, 100]");
  check(cp.d_jam_m > 0.0, "ctrl_params.d_jam_m", "must be > 0");
  check(cp.calib_window_steps >= 1, "ctrl_params.calib_window_steps",
        "must be >= 1");

  const VisionParams& vp = sc.vision;
  check(vp.ref_width_px > 0.0, "vision_params.ref_width_px", "must be > 0");
  check(vp.ref_distance_m > 0.0, "vision_params.ref_distance_m", "must be > 0");
  check(vp.ref_width_m > 0.0, "vision_params.ref_width_m", "must be > 0");
  check(vp.target_width_m > 0.0, "vision_params.target_width_m", "must be > 0");
  check(vp.pixel_noise_sigma_px >= 0.0, "vision_params.pixel_noise_sigma_px",
        "must be >= 0");
  check(vp.smoothing_window >= 1, "vision_params.smoothing_window",
        "must be >= 1");
  check(vp.min_detect_px >= 0.0, "vision_params.min_detect_px", "must be >= 0");

  const EkfConfig& ep = sc.ekf;
  check(ep.p0_sigma_m > 0.0, "ekf_params.p0_sigma_m", "must be > 0");
  check(ep.q_velocity_sigma_m_s >= 0.0, "ekf_params.q_velocity_sigma_m_s",
        "must be >= 0");
  check(ep.range_noise_floor_m > 0.0, "ekf_params.range_noise_floor_m",
        "must be > 0");
  check(ep.fixed_range_noise_sigma_m >= 0.0,
        "ekf_params.fixed_range_noise_sigma_m", "must be >= 0");

  check(sc.pursuit.max_speed_m_s > 0.0, "pursuit_params.max_speed_m_s",
        "must be > 0");
  check(sc.pursuit.standoff_m >= 0.0, "pursuit_params.standoff_m",
        "must be >= 0");
  check(sc.pursuit.altitude_m > 0.0, "pursuit_params.altitude_m",
        "must be > 0");
}

std::string scenario_to_json_string(const Scenario& sc) {
  json j;
  j["duration_steps"] = sc.duration_steps;
  j["dt_s"] = sc.dt_s;
  j["seed"] = sc.seed;
  j["pursuer_init_m"] = {{"x_m", sc.pursuer_init_m.x()},
                         {"y_m", sc.pursuer_init_m.y()}};
  j["rogue_route"] = json::array();
  for (const auto& w : sc.rogue_route) {
    j["rogue_route"].push_back({{"x_m", w.x_m},
                                {"y_m", w.y_m},
                                {"altitude_m", w.altitude_m},
                                {"hold_steps", w.hold_steps}});
  }
  j["rogue_speed_m_s"] = sc.rogue_speed_m_s;
  j["transmitters"] = json::array();
  for (const auto& t : sc.transmitters) {
    j["transmitters"].push_back({{"id", t.id},
                                 {"x_m", t.x_m},
                                 {"y_m", t.y_m},
                                 {"ref_rss_p0_dbm", t.ref_rss_p0_dbm},
                                 {"d0_m", t.d0_m}});
  }
  j["shadowing_sigma_db"] = sc.shadowing_sigma_db;
  j["sweep_samples_per_band"] = sc.sweep_samples_per_band;
  j["transmitter_position_offset_m"] = sc.transmitter_position_offset_m;
  j["imu_velocity_noise_sigma_m_s"] = sc.imu_velocity_noise_sigma_m_s;
  j["gps_noise_sigma_m"] = sc.gps_noise_sigma_m;
  j["jam_params"] = jam_params_to_json(sc.jam);
  j["ctrl_params"] = {{"t_i", sc.ctrl.t_i},
                      {"n_pl", sc.ctrl.n_pl},
                      {"a_percentile", sc.ctrl.a_percentile},
                      {"d_jam_m", sc.ctrl.d_jam_m},
                      {"calib_window_steps", sc.ctrl.calib_window_steps}};
  j["vision_params"] = {{"ref_width_px", sc.vision.ref_width_px},
                        {"ref_distance_m", sc.vision.ref_distance_m},
                        {"ref_width_m", sc.vision.ref_width_m},
                        {"target_width_m", sc.vision.target_width_m},
                        {"pixel_noise_sigma_px", sc.vision.pixel_noise_sigma_px},
                        {"smoothing_window", sc.vision.smoothing_window},
                        {"min_detect_px", sc.vision.min_detect_px}};
  j["ekf_params"] = {
      {"p0_sigma_m", sc.ekf.p0_sigma_m},
      {"q_velocity_sigma_m_s", sc.ekf.q_velocity_sigma_m_s},
      {"range_noise_floor_m", sc.ekf.range_noise_floor_m},
      {"fixed_range_noise_sigma_m", sc.ekf.fixed_range_noise_sigma_m}};
  j["pursuit_params"] = {{"max_speed_m_s", sc.pursuit.max_speed_m_s},
                         {"standoff_m", sc.pursuit.standoff_m},
                         {"altitude_m", sc.pursuit.altitude_m}};
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  return scenario_from_json_string(read_text_file(path));
}

void save_scenario(const Scenario& sc, const std::string& path) {
  write_text_file(path, scenario_to_json_string(sc));
}

std::string jam_params_to_json_string(const JamParams& p) {
  return jam_params_to_json(p).dump(2) + "\n";
}

JamParams jam_params_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("jam params JSON parse error: ") +
                                e.what());
  }
  return parse_jam_params(j);
}

RandomStream make_stream(const Scenario& sc, std::string_view label) {
  return RandomStream(sc.seed, label);
}

RandomStream make_stream_seeded(std::uint64_t seed, std::string_view label) {
  return RandomStream(seed, label);
}

double route_length_m(const std::vector<Waypoint>& route) {
  double len = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) {
    len += std::hypot(route[i].x_m - route[i - 1].x_m,
                      route[i].y_m - route[i - 1].y_m);
  }
  return len;
}

}  // namespace sopjam
