// Shared scenario builders for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sopjam/scenario.hpp"

namespace sopjam::testing {

inline std::string scenario_dir() { return SOPJAM_SCENARIO_DIR; }

inline std::vector<Transmitter> ring_transmitters(int count, double radius_m,
                                                  double p0_dbm = -35.0) {
  std::vector<Transmitter> txs;
  for (int k = 0; k < count; ++k) {
    const double ang = 2.0 * M_PI * static_cast<double>(k) /
                       static_cast<double>(count);
    Transmitter t;
    t.id = k + 1;
    t.x_m = radius_m * std::cos(ang);
    t.y_m = radius_m * std::sin(ang);
    t.ref_rss_p0_dbm = p0_dbm;
    t.d0_m = 1.0;
    txs.push_back(t);
  }
  return txs;
}

// Small closed-loop scenario: 8 towers on a 150 m ring, short two-leg route,
// jamming reachable within the run.  Cheap enough for per-test execution.
inline Scenario small_scenario(std::uint64_t seed = 7) {
  Scenario sc;
  sc.duration_steps = 260;
  sc.dt_s = 0.2;
  sc.seed = seed;
  sc.pursuer_init_m = Vec2(-60.0, 0.0);
  sc.rogue_route = {{-30.0, 0.0, 20.0, 10},
                    {0.0, 10.0, 20.0, 10},
                    {20.0, -5.0, 20.0, 0}};
  sc.rogue_speed_m_s = 0.8;
  sc.transmitters = ring_transmitters(8, 150.0);
  sc.shadowing_sigma_db = 0.16;
  sc.sweep_samples_per_band = 32;
  sc.transmitter_position_offset_m = 0.0;
  sc.imu_velocity_noise_sigma_m_s = 0.06;
  sc.gps_noise_sigma_m = 1.5;
  sc.jam.js_threshold_db = 79.5;
  sc.jam.sat_loss_slope_sats_per_db = 1.0;
  sc.ctrl.t_i = 8;
  sc.ctrl.n_pl = 2.8;
  sc.ctrl.a_percentile = 95.0;
  sc.ctrl.d_jam_m = 15.0;
  sc.ctrl.calib_window_steps = 20;
  sc.vision.ref_width_px = 100.0;
  sc.vision.ref_distance_m = 10.0;
  sc.vision.ref_width_m = 0.5;
  sc.vision.target_width_m = 0.5;
  sc.vision.pixel_noise_sigma_px = 0.5;
  sc.vision.smoothing_window = 5;
  sc.vision.min_detect_px = 6.0;
  sc.ekf.p0_sigma_m = 2.0;
  sc.ekf.q_velocity_sigma_m_s = 0.112;
  sc.ekf.range_noise_floor_m = 0.05;
  sc.ekf.fixed_range_noise_sigma_m = 0.0;
  sc.pursuit.max_speed_m_s = 3.0;
  sc.pursuit.standoff_m = 7.5;
  sc.pursuit.altitude_m = 20.0;
  return sc;
}

}  // namespace sopjam::testing
