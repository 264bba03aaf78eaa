// jamming.hpp - GPS link under jamming: two-ray propagation, J/S ratio with
// antenna-pattern elevation roll-off, satellite visibility, slow post-jam
// satellite re-acquisition, and the degraded GPS position fix.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sopjam/scenario.hpp"

namespace sopjam {

// Jammer-to-victim link geometry.  `elevation_deg` is the jam antenna's
// off-boresight elevation toward the victim.  make_jam_geometry derives it
// from the horizontal/vertical split; the aggregate can also be filled
// directly when elevation is an experimental label rather than geometry.
struct JamGeometry {
  double d_rt_m = 1.0;            // absolute (slant) jammer-victim distance
  double altitude_diff_m = 0.0;   // vertical separation
  double elevation_deg = 0.0;     // antenna-pattern angle used for roll-off
};

JamGeometry make_jam_geometry(double horizontal_m, double altitude_diff_m);

// Link-budget state of one GPS receiver at one step.
struct GpsLinkState {
  double signal_power_dbm = 0.0;
  double jam_power_dbm = 0.0;  // -inf when the jammer is off
  double js_db = 0.0;          // jam-to-signal ratio; -inf when jammer off
  int n_s = 0;                 // satellites currently tracked
  bool fix_available = false;
};

// Two-ray ground-reflection received power in linear mW:
// RSS = P_t G_t G_r h_t^2 h_r^2 / d^4.  Throws for d <= 0.
double two_ray_rss_mw(const JamParams& params, double d_rt_m);
double two_ray_rss_dbm(const JamParams& params, double d_rt_m);

// J/S in dB: jam power from the two-ray model, reduced by the antenna
// pattern factor cos(elevation)^k (in dB), against the nominal GPS signal
// power.  Elevation >= 90 deg suppresses the jammer entirely (-inf).
double jam_to_signal_db(const JamParams& params, const JamGeometry& geometry);

// Deterministic satellite count under a given J/S:
// N_s = clamp(N_nominal - floor(max(0, js - threshold) * slope) - jitter,
//             0, N_nominal).
int satellites_visible_core(double js_db, const JamParams& params, int jitter);

// Stochastic wrapper: jitter drawn uniformly from {0, 1}.
int satellites_visible(double js_db, const JamParams& params, RandomStream& rng);

bool gps_fix_available(int n_s, const JamParams& params);

// Receiver tracking dynamics: losing satellites is instant, re-acquiring
// them takes `reacquisition_steps_per_sat` consecutive steps per satellite.
struct GpsReceiverState {
  int tracked_sats = 0;
  int reacq_progress = 0;  // consecutive steps toward the next re-acquisition
};

GpsReceiverState gps_receiver_step(const GpsReceiverState& state,
                                   int visible_sats, const JamParams& params);

// Degraded GPS fix: truth plus Gaussian noise with
// sigma_eff = gps_noise_sigma * N_nominal / max(N_s, fix_min_sats);
// nullopt when no fix is available.  Draws two samples (x then y) even
// though sigma may be zero, so stream alignment is fix-dependent only.
std::optional<Vec2> gps_position_fix(const Vec2& truth, int n_s,
                                     const JamParams& params,
                                     double gps_noise_sigma_m,
                                     RandomStream& rng);

// ---- Calibration against a documented on/off fix pattern -------------------

// One cell of the emission-pattern experiment: a labeled geometry and the
// required fix outcome under jamming.
struct FixPatternCell {
  double altitude_m = 0.0;   // victim altitude above the jammer
  double distance_m = 0.0;   // tabled standoff distance
  double elevation_deg = 0.0;// tabled antenna elevation label
  bool fix_expected = false; // true = GPS fix survives the jamming
};

// Geometry used for a pattern cell: slant range from (altitude, distance),
// elevation taken from the label (the tabled angles are test-condition
// labels, not derivable from the distances).
JamGeometry pattern_cell_geometry(const FixPatternCell& cell);

// Fix pattern CSV ("altitude_m,distance_m,elevation_deg,fix_expected",
// fix_expected in {0,1}).
std::vector<FixPatternCell> load_fix_pattern(const std::string& path);
void write_fix_pattern(const std::string& path,
                       const std::vector<FixPatternCell>& cells);

}  // namespace sopjam
