// scenario.hpp - engagement configuration: types, JSON (de)serialization,
// validation, and the per-run labeled random stream factory.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "sopjam/rng.hpp"

namespace sopjam {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// One ambient radio transmitter used as a ranging anchor.  `id` doubles as
// the band index in sweep logs.
struct Transmitter {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double ref_rss_p0_dbm = -35.0;  // received power at reference distance d0
  double d0_m = 1.0;
};

// Rogue-drone route waypoint.  The rogue flies waypoint to waypoint at
// constant speed and hovers `hold_steps` steps after arriving.
struct Waypoint {
  double x_m = 0.0;
  double y_m = 0.0;
  double altitude_m = 25.0;
  int hold_steps = 0;
};

// Jammer emission + GPS receiver degradation model parameters.
struct JamParams {
  double transmit_power_mw = 1000.0;
  double gain_tx = 1.0;
  double gain_rx = 1.0;
  double antenna_height_tx_m = 1.0;
  double antenna_height_rx_m = 1.0;
  double elevation_rolloff_exp = 2.0;   // cos^k roll-off of effective jam power
  double js_threshold_db = 88.0;        // J/S above which satellites drop
  double sat_loss_slope_sats_per_db = 1.0;
  int n_nominal = 12;                   // satellites tracked when unjammed
  int fix_min_sats = 4;                 // minimum satellites for a position fix
  double gps_signal_power_dbm = -127.5; // nominal GPS power at the receiver
  double noise_floor_dbm = -111.0;      // receiver noise floor (no jamming)
  double self_link_distance_m = 0.3;    // jammer->own-receiver leakage path
  int reacquisition_steps_per_sat = 8;  // recovery rate after jamming stops
};

// Mode-switching controller parameters.
struct ControllerParams {
  int t_i = 13;               // number of ranging bands kept after selection
  double n_pl = 2.8;          // path-loss exponent of the ambient bands
  double a_percentile = 95.0; // percentile used in the drift threshold
  double d_jam_m = 15.0;      // camera distance at which jamming may start
  int calib_window_steps = 50;// innovation window feeding the threshold
};

// Monocular vision ranging parameters.
struct VisionParams {
  double ref_width_px = 100.0;   // calibration box width in pixels
  double ref_distance_m = 10.0;  // calibration distance
  double ref_width_m = 1.0;      // calibration object physical width
  double target_width_m = 0.4;   // rogue drone physical width
  double pixel_noise_sigma_px = 2.0;
  int smoothing_window = 5;      // frames averaged for the reported distance
  double min_detect_px = 2.0;    // boxes narrower than this are dropped
};

// Self-localization filter configuration.
struct EkfConfig {
  double p0_sigma_m = 2.0;            // initial position std after the LSQ fix
  double q_velocity_sigma_m_s = 0.112;// process noise as velocity-domain std
  double range_noise_floor_m = 0.05;  // lower bound on per-band range std
  double fixed_range_noise_sigma_m = 0.0;  // >0 overrides the derived R
};

struct PursuitParams {
  double max_speed_m_s = 3.0;
  double standoff_m = 0.0;   // pursuer stops this far short of the rogue
  double altitude_m = 25.0;  // fixed pursuit altitude (vision/jam geometry)
};

struct Scenario {
  int duration_steps = 2600;
  double dt_s = 0.2;
  std::uint64_t seed = 1;

  Vec2 pursuer_init_m = Vec2(0.0, 0.0);
  std::vector<Waypoint> rogue_route;
  double rogue_speed_m_s = 0.625;

  std::vector<Transmitter> transmitters;
  double shadowing_sigma_db = 0.18;
  int sweep_samples_per_band = 64;
  double transmitter_position_offset_m = 0.0;  // map error applied to anchors

  double imu_velocity_noise_sigma_m_s = 0.112;
  double gps_noise_sigma_m = 1.5;

  JamParams jam;
  ControllerParams ctrl;
  VisionParams vision;
  EkfConfig ekf;
  PursuitParams pursuit;
};

// JSON round trip.  scenario_from_json / load_scenario validate and throw
// std::invalid_argument naming the offending field.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);
std::string scenario_to_json_string(const Scenario& sc);
Scenario scenario_from_json_string(const std::string& text);

// Stand-alone round trip for the jamming parameter block, using the same
// keys as the scenario's "jam_params" section.
std::string jam_params_to_json_string(const JamParams& p);
JamParams jam_params_from_json_string(const std::string& text);

// Throws std::invalid_argument naming the first invalid field.
void validate_scenario(const Scenario& sc);

// Labeled stream factory: derives a stream from (seed, label) so draw order
// elsewhere cannot perturb this stream.
RandomStream make_stream(const Scenario& sc, std::string_view label);
RandomStream make_stream_seeded(std::uint64_t seed, std::string_view label);

// Total polyline length of the rogue route in meters.
double route_length_m(const std::vector<Waypoint>& route);

}  // namespace sopjam
