// sim.hpp - closed-loop engagement simulator and evaluation harness: truth
// kinematics, pursuit guidance, synthetic sensing, the jam link for both
// agents, the mode-switching controller, metrics, jam-model calibration,
// batch execution, and all file outputs.

#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sopjam/controller.hpp"
#include "sopjam/jamming.hpp"
#include "sopjam/positioning.hpp"
#include "sopjam/scenario.hpp"
#include "sopjam/sweep.hpp"
#include "sopjam/vision.hpp"

namespace sopjam {

// ---- Truth kinematics -------------------------------------------------------

struct RoguePose {
  Vec2 position_m = Vec2::Zero();
  double altitude_m = 0.0;
};

// Waypoint-to-waypoint constant-speed schedule with per-waypoint hovers.
// Positions (and altitude) interpolate linearly along each leg; the rogue
// parks at the final waypoint once the route is exhausted.
class RogueSchedule {
 public:
  RogueSchedule(const std::vector<Waypoint>& route, double speed_m_s,
                double dt_s);

  RoguePose at_step(int step) const;

  // Step at which each waypoint is first occupied (index 0 -> step 0).
  const std::vector<int>& arrival_steps() const { return arrivals_; }

 private:
  std::vector<Waypoint> route_;
  double step_len_m_ = 0.0;
  std::vector<int> arrivals_;  // arrival step per waypoint
  std::vector<int> departs_;   // departure step per waypoint (arrival + hold)
};

// Move the pursuer toward the estimated rogue position, capped at
// max_speed*dt, stopping at the standoff radius.  A target at or inside the
// standoff radius (including a coincident target) produces no motion.
Vec2 pursuit_step(const Vec2& pursuer_m, const Vec2& rogue_estimate_m,
                  double max_speed_m_s, double dt_s, double standoff_m);

// ---- Run log ----------------------------------------------------------------

struct StepRecord {
  int step = 0;
  Vec2 rogue_truth_m = Vec2::Zero();
  double rogue_altitude_m = 0.0;
  Vec2 pursuer_truth_m = Vec2::Zero();
  Vec2 estimate_m = Vec2::Zero();
  Mat2 covariance = Mat2::Zero();
  std::optional<Vec2> gps_fix_m;        // raw pursuer fix this step
  Vec2 gps_track_m = Vec2::Zero();      // held GPS trajectory
  bool gps_held = false;
  RadioMode mode = RadioMode::RPS_ACTIVE;  // radio function during this step
  double js_rogue_db = 0.0;
  double js_pursuer_db = 0.0;
  int n_s_rogue = 0;
  int n_s_pursuer = 0;
  bool fix_rogue = false;
  bool fix_pursuer = false;
  double d_c_m = 0.0;  // smoothed camera distance (infinity when undetected)
  double e_m_m = 0.0;
  double t_d_m = 0.0;
};

// One row of the measured-velocity log.
struct ImuRow {
  int step = 0;
  Vec2 velocity_m_s = Vec2::Zero();
};

struct SimLog {
  Scenario scenario;
  std::vector<StepRecord> records;
  std::vector<SwitchEvent> events;
  std::vector<int> waypoint_arrival_steps;
  std::vector<int> selected_bands;
  int switch_count = 0;
  // Raw sensor logs, sufficient to re-estimate the trajectory offline:
  // sweep samples are only produced on survey ticks, velocity every tick.
  std::vector<SweepSample> sweep_samples;
  std::vector<ImuRow> imu_log;
};

// Run the full engagement.  Deterministic per (scenario, scenario.seed).
// Component errors are rethrown with the failing step prepended.
SimLog run_scenario(const Scenario& sc);

// ---- Metrics ----------------------------------------------------------------

struct SegmentSpec {
  std::string label;
  int start_step = 0;
  int end_step = 0;  // inclusive
};

struct SegmentRow {
  std::string label;
  double gt_m = 0.0;
  double relative_m = 0.0;
  double relative_diff_pct = 0.0;
  double gps_m = 0.0;
  double gps_diff_pct = 0.0;
};

struct JamEpisode {
  int start_step = 0;
  int end_step = 0;  // inclusive
  int duration_steps = 0;
};

struct MetricsReport {
  int steps = 0;

  // Estimated (radio-positioning) trajectory vs truth.
  double rps_mae_m = 0.0;
  double rps_rmse_m = 0.0;
  std::vector<std::pair<double, double>> rps_cdf;  // (error m, cum. fraction)
  double rps_frac_le_6m = 0.0;

  // Held GPS trajectory vs truth (fix held while unavailable).
  double gps_mae_m = 0.0;
  std::vector<std::pair<double, double>> gps_cdf;
  double gps_frac_gt_6m = 0.0;

  // Raw-fix population (unavailable steps excluded, counted separately).
  double gps_fix_mae_m = 0.0;
  int gps_available_steps = 0;
  int gps_unavailable_steps = 0;
  int gps_hold_steps = 0;

  std::vector<SegmentRow> segments;

  int switch_count = 0;
  std::vector<JamEpisode> jam_episodes;

  // Simulated duty cycles (fraction of steps each function was active).
  double duty_sweep = 0.0;
  double duty_jam = 0.0;
  double duty_vision = 0.0;      // steps with a camera estimate available
  double duty_gps_rogue = 0.0;   // steps the rogue still had a GPS fix

  double t_d_final_m = 0.0;
  double t_d_at_first_jam_m = 0.0;
};

// CDF bin width for error distributions.
inline constexpr double kCdfResolutionM = 0.1;

// Trajectory-level metrics: per-step error stats for `est` (and optionally a
// held GPS track with availability flags) against `truth`, plus per-segment
// path-length comparisons.  Sizes of est/truth must match and be nonzero.
MetricsReport compute_metrics_tracks(
    const std::vector<Vec2>& truth, const std::vector<Vec2>& est,
    const std::vector<Vec2>& gps_track,
    const std::vector<bool>& gps_fix_available,
    const std::vector<SegmentSpec>& segments);

// Full-log metrics: trajectory metrics plus switching statistics, duty
// cycles, and threshold values.  When `segments` is empty, consecutive
// waypoint arrivals define the segments (labels "A-B", "B-C", ...).
MetricsReport compute_metrics(const SimLog& log,
                              const std::vector<SegmentSpec>& segments = {});

// Segment boundaries derived from a log's waypoint arrival steps.
std::vector<SegmentSpec> default_segments(const SimLog& log);

// ---- Jam-model calibration --------------------------------------------------

// Grid-search (js_threshold_db, sat_loss_slope_sats_per_db) so that the
// jitter-free satellite model reproduces every pattern cell, returning the
// feasible point nearest the feasible-region centroid.  All other fields are
// taken from `base`.  Throws std::runtime_error naming the nearest-miss
// parameters when the feasible region is empty.
JamParams calibrate_jamming(const std::vector<FixPatternCell>& pattern,
                            const JamParams& base);

// ---- Batch execution --------------------------------------------------------

struct BatchItem {
  int index = 0;
  bool ok = false;
  std::string error;  // set when !ok
  MetricsReport report;
};

// Run every scenario and report per-index results; a failing run records its
// error without aborting the others.  batch_run parallelizes across runs
// with OpenMP; batch_run_serial is the single-thread reference and produces
// identical results.
std::vector<BatchItem> batch_run(const std::vector<Scenario>& configs);
std::vector<BatchItem> batch_run_serial(const std::vector<Scenario>& configs);

// ---- File formats -----------------------------------------------------------

struct TrajectoryRow {
  int step = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double p11 = 0.0;
  double p12 = 0.0;
  double p22 = 0.0;
  std::string mode;
};

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows);
std::vector<TrajectoryRow> load_trajectory_csv(const std::string& path);

void write_events_csv(const std::string& path,
                      const std::vector<SwitchEvent>& events);
void write_jamlink_csv(const std::string& path,
                       const std::vector<StepRecord>& records);

std::string metrics_to_json_string(const MetricsReport& report);
void write_metrics_json(const std::string& path, const MetricsReport& report);

// Segment file CSV ("label,start_step,end_step").
std::vector<SegmentSpec> load_segments_csv(const std::string& path);

// IMU log CSV ("step,ux_m_s,uy_m_s").
std::vector<ImuRow> load_imu_csv(const std::string& path);
void write_imu_csv(const std::string& path, const std::vector<ImuRow>& rows);

// Write the full output set of one run into `out_dir`:
// trajectories.csv (estimate), truth.csv (pursuer truth), rogue.csv,
// gps.csv (held GPS track), events.csv, jamlink.csv, sweeps.csv, imu.csv,
// metrics.json.
void write_simulation_outputs(const SimLog& log, const std::string& out_dir);

// Offline estimation from recorded logs: re-runs band selection and the
// positioning pipeline over the sweep log, using inertial rows where present
// (zero velocity otherwise) and scenario `sc` for transmitters and tuning.
std::vector<TrajectoryRow> replay_from_logs(
    const std::vector<SweepSample>& sweeps, const std::vector<ImuRow>& imu,
    const Scenario& sc);

}  // namespace sopjam
