#include "sopjam/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "sopjam/csv.hpp"

namespace sopjam {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNeverStep = std::numeric_limits<int>::max();
constexpr const char* kTrajectoryHeader = "step,x_m,y_m,p11,p12,p22,mode";
constexpr const char* kEventsHeader =
    "step,from_mode,to_mode,cause,d_c_m,e_m_m,t_d_m";
constexpr const char* kJamlinkHeader = "step,js_db,n_s,fix_available,target";
constexpr const char* kSegmentsHeader = "label,start_step,end_step";
constexpr const char* kImuHeader = "step,ux_m_s,uy_m_s";
}  // namespace

// ---- RogueSchedule ----------------------------------------------------------

RogueSchedule::RogueSchedule(const std::vector<Waypoint>& route,
                             double speed_m_s, double dt_s)
    : route_(route), step_len_m_(speed_m_s * dt_s) {
  if (route_.empty()) {
    throw std::invalid_argument("RogueSchedule: empty route");
  }
  arrivals_.resize(route_.size(), kNeverStep);
  departs_.resize(route_.size(), kNeverStep);
  arrivals_[0] = 0;
  departs_[0] = route_[0].hold_steps;
  for (std::size_t i = 1; i < route_.size(); ++i) {
    if (departs_[i - 1] == kNeverStep) break;
    const double leg = std::hypot(route_[i].x_m - route_[i - 1].x_m,
                                  route_[i].y_m - route_[i - 1].y_m);
    if (leg <= 0.0) {
      arrivals_[i] = departs_[i - 1];
    } else if (step_len_m_ <= 0.0) {
      break;  // parked forever; later waypoints never reached
    } else {
      const double steps = std::ceil(leg / step_len_m_);
      if (steps >= static_cast<double>(kNeverStep - departs_[i - 1])) break;
      arrivals_[i] = departs_[i - 1] + static_cast<int>(steps);
    }
    departs_[i] = (route_[i].hold_steps >= kNeverStep - arrivals_[i])
                      ? kNeverStep
                      : arrivals_[i] + route_[i].hold_steps;
  }
}

RoguePose RogueSchedule::at_step(int step) const {
  if (step < 0) step = 0;
  // Last waypoint already reached at or before `step`.
  std::size_t i = 0;
  for (std::size_t k = 0; k < route_.size(); ++k) {
    if (arrivals_[k] != kNeverStep && arrivals_[k] <= step) i = k;
  }
  RoguePose pose;
  if (i + 1 >= route_.size() || step <= departs_[i] ||
      departs_[i] == kNeverStep || arrivals_[i + 1] == kNeverStep) {
    pose.position_m = Vec2(route_[i].x_m, route_[i].y_m);
    pose.altitude_m = route_[i].altitude_m;
    return pose;
  }
  // Traveling along leg i -> i+1.
  const Waypoint& a = route_[i];
  const Waypoint& b = route_[i + 1];
  const double leg = std::hypot(b.x_m - a.x_m, b.y_m - a.y_m);
  double frac = 1.0;
  if (leg > 0.0) {
    const double traveled =
        static_cast<double>(step - departs_[i]) * step_len_m_;
    frac = std::min(traveled / leg, 1.0);
  }
  pose.position_m = Vec2(a.x_m + frac * (b.x_m - a.x_m),
                         a.y_m + frac * (b.y_m - a.y_m));
  pose.altitude_m = a.altitude_m + frac * (b.altitude_m - a.altitude_m);
  return pose;
}

// ---- Pursuit ----------------------------------------------------------------

Vec2 pursuit_step(const Vec2& pursuer_m, const Vec2& rogue_estimate_m,
                  double max_speed_m_s, double dt_s, double standoff_m) {
  if (max_speed_m_s <= 0.0) {
    throw std::invalid_argument("pursuit_step: max_speed must be > 0");
  }
  const Vec2 diff = rogue_estimate_m - pursuer_m;
  const double dist = diff.norm();
  if (dist <= standoff_m || dist < 1e-12) {
    return pursuer_m;
  }
  const double advance = std::min(max_speed_m_s * dt_s, dist - standoff_m);
  return pursuer_m + diff * (advance / dist);
}

// ---- run_scenario -----------------------------------------------------------

SimLog run_scenario(const Scenario& sc) {
  validate_scenario(sc);

  SimLog log;
  log.scenario = sc;
  log.records.reserve(static_cast<std::size_t>(sc.duration_steps));

  RandomStream rng_sweep = make_stream(sc, "sweep");
  RandomStream rng_imu = make_stream(sc, "imu");
  RandomStream rng_vision = make_stream(sc, "vision");
  RandomStream rng_gps_pursuer = make_stream(sc, "gps_pursuer");
  RandomStream rng_jitter_rogue = make_stream(sc, "sat_jitter_rogue");
  RandomStream rng_jitter_pursuer = make_stream(sc, "sat_jitter_pursuer");
  RandomStream rng_txpos = make_stream(sc, "tx_position_offset");

  // World truth may differ from the map the estimator holds: the emitting
  // positions get a configurable perturbation, the estimator keeps the
  // nominal coordinates.
  std::vector<Transmitter> emitters = sc.transmitters;
  if (sc.transmitter_position_offset_m > 0.0) {
    for (auto& t : emitters) {
      t.x_m += rng_txpos.gaussian(0.0, sc.transmitter_position_offset_m);
      t.y_m += rng_txpos.gaussian(0.0, sc.transmitter_position_offset_m);
    }
  }

  RogueSchedule schedule(sc.rogue_route, sc.rogue_speed_m_s, sc.dt_s);
  log.waypoint_arrival_steps = schedule.arrival_steps();

  VisionTracker tracker(sc.vision);

  SwitchingState ctrl_state;
  NavState nav;
  ControllerConfigs configs;
  configs.transmitters = &sc.transmitters;
  configs.ekf = sc.ekf;
  configs.params = sc.ctrl;

  Vec2 pursuer = sc.pursuer_init_m;
  Vec2 gps_track = pursuer;
  GpsReceiverState recv_rogue{sc.jam.n_nominal, 0};
  GpsReceiverState recv_pursuer{sc.jam.n_nominal, 0};

  for (int n = 0; n < sc.duration_steps; ++n) {
    try {
      const RoguePose rogue = schedule.at_step(n);
      const double alt_diff = rogue.altitude_m - sc.pursuit.altitude_m;

      // Camera frame (independent of the radio mode).
      const double d_true =
          std::sqrt((rogue.position_m - pursuer).squaredNorm() +
                    alt_diff * alt_diff);
      Detection det = generate_detection(n, std::max(d_true, 1e-3), 0.0,
                                         sc.vision, rng_vision);
      auto vis = tracker.update(det);
      const double d_c = vis ? vis->distance_m : kInf;

      // Pursuit guidance from the camera estimate.
      const Vec2 prev_pursuer = pursuer;
      if (vis) {
        const Vec2 bearing_diff = rogue.position_m - pursuer;
        const double bearing_norm = bearing_diff.norm();
        const double planar_est = std::sqrt(std::max(
            vis->distance_m * vis->distance_m - alt_diff * alt_diff, 0.0));
        if (bearing_norm > 1e-12) {
          const Vec2 target = pursuer + bearing_diff * (planar_est / bearing_norm);
          pursuer = pursuit_step(pursuer, target, sc.pursuit.max_speed_m_s,
                                 sc.dt_s, sc.pursuit.standoff_m);
        }
      }
      const Vec2 u_true = (pursuer - prev_pursuer) / sc.dt_s;
      const Vec2 u_meas(
          u_true.x() + rng_imu.gaussian(0.0, sc.imu_velocity_noise_sigma_m_s),
          u_true.y() + rng_imu.gaussian(0.0, sc.imu_velocity_noise_sigma_m_s));
      log.imu_log.push_back({n, u_meas});

      // Radio function for this tick follows the mode entering the tick.
      std::vector<BandMoments> moments;
      ControllerInputs inputs;
      inputs.d_c_m = d_c;
      inputs.velocity_m_s = u_meas;
      inputs.dt_s = sc.dt_s;
      inputs.step = n;
      if (ctrl_state.mode == RadioMode::RPS_ACTIVE) {
        auto sweep = simulate_sweep(pursuer, emitters, sc.ctrl.n_pl,
                                    sc.shadowing_sigma_db,
                                    sc.sweep_samples_per_band, n, rng_sweep);
        log.sweep_samples.insert(log.sweep_samples.end(), sweep.begin(),
                                 sweep.end());
        moments = extract_moments(sweep);
        if (configs.selected_bands.empty()) {
          configs.selected_bands = select_transmitters(moments, sc.ctrl.t_i);
          log.selected_bands = configs.selected_bands;
        }
        inputs.moments = &moments;
      }

      ControllerTickResult res = controller_tick(ctrl_state, nav, inputs, configs);
      ctrl_state = std::move(res.state);
      nav = res.nav;
      const bool jamming = res.action == RadioAction::JAM;

      // GPS link for both agents.
      double js_rogue = -kInf;
      double js_pursuer = -kInf;
      if (jamming) {
        JamGeometry to_rogue;
        to_rogue.d_rt_m = std::max(d_true, 1e-3);
        to_rogue.altitude_diff_m = alt_diff;
        to_rogue.elevation_deg = 0.0;  // jam antenna tracks the target
        js_rogue = jam_to_signal_db(sc.jam, to_rogue);

        JamGeometry self;
        self.d_rt_m = sc.jam.self_link_distance_m;
        js_pursuer = jam_to_signal_db(sc.jam, self);
      }
      const int vis_rogue =
          satellites_visible(js_rogue, sc.jam, rng_jitter_rogue);
      const int vis_pursuer =
          satellites_visible(js_pursuer, sc.jam, rng_jitter_pursuer);
      recv_rogue = gps_receiver_step(recv_rogue, vis_rogue, sc.jam);
      recv_pursuer = gps_receiver_step(recv_pursuer, vis_pursuer, sc.jam);
      const bool fix_rogue = gps_fix_available(recv_rogue.tracked_sats, sc.jam);

      std::optional<Vec2> fix =
          gps_position_fix(pursuer, recv_pursuer.tracked_sats, sc.jam,
                           sc.gps_noise_sigma_m, rng_gps_pursuer);
      bool held = !fix.has_value();
      if (fix) gps_track = *fix;

      StepRecord rec;
      rec.step = n;
      rec.rogue_truth_m = rogue.position_m;
      rec.rogue_altitude_m = rogue.altitude_m;
      rec.pursuer_truth_m = pursuer;
      rec.estimate_m = nav.position_m;
      rec.covariance = nav.covariance;
      rec.gps_fix_m = fix;
      rec.gps_track_m = gps_track;
      rec.gps_held = held;
      rec.mode = jamming ? RadioMode::JAMMING : RadioMode::RPS_ACTIVE;
      rec.js_rogue_db = js_rogue;
      rec.js_pursuer_db = js_pursuer;
      rec.n_s_rogue = recv_rogue.tracked_sats;
      rec.n_s_pursuer = recv_pursuer.tracked_sats;
      rec.fix_rogue = fix_rogue;
      rec.fix_pursuer = fix.has_value();
      rec.d_c_m = d_c;
      rec.e_m_m = ctrl_state.e_m_m;
      rec.t_d_m = ctrl_state.t_d_m;
      log.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error("run_scenario: step " + std::to_string(n) +
                               ": " + e.what());
    }
  }

  log.events = ctrl_state.events;
  log.switch_count = ctrl_state.switch_count;
  return log;
}

// ---- Metrics ----------------------------------------------------------------

namespace {

std::vector<std::pair<double, double>> error_cdf(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  const double max_err = errors.empty() ? 0.0 : errors.back();
  const int bins = static_cast<int>(std::ceil(max_err / kCdfResolutionM));
  std::vector<std::pair<double, double>> cdf;
  cdf.reserve(static_cast<std::size_t>(bins) + 1);
  std::size_t idx = 0;
  for (int k = 0; k <= bins; ++k) {
    const double x = static_cast<double>(k) * kCdfResolutionM;
    while (idx < errors.size() && errors[idx] <= x + 1e-12) ++idx;
    cdf.emplace_back(x, static_cast<double>(idx) / n);
  }
  if (!cdf.empty()) cdf.back().second = 1.0;
  return cdf;
}

double path_length(const std::vector<Vec2>& track, int start, int end) {
  double len = 0.0;
  for (int i = start; i < end; ++i) {
    len += (track[static_cast<std::size_t>(i) + 1] -
            track[static_cast<std::size_t>(i)])
               .norm();
  }
  return len;
}

double diff_pct(double est, double gt) {
  if (gt <= 0.0) return 0.0;
  return std::abs(est - gt) / gt * 100.0;
}

}  // namespace

MetricsReport compute_metrics_tracks(
    const std::vector<Vec2>& truth, const std::vector<Vec2>& est,
    const std::vector<Vec2>& gps_track,
    const std::vector<bool>& gps_fix_available,
    const std::vector<SegmentSpec>& segments) {
  if (truth.empty() || est.size() != truth.size()) {
    throw std::invalid_argument(
        "compute_metrics_tracks: truth/estimate size mismatch or empty");
  }
  const bool have_gps = !gps_track.empty();
  if (have_gps && (gps_track.size() != truth.size() ||
                   gps_fix_available.size() != truth.size())) {
    throw std::invalid_argument(
        "compute_metrics_tracks: GPS track size mismatch");
  }

  MetricsReport rep;
  rep.steps = static_cast<int>(truth.size());

  std::vector<double> err_est(truth.size());
  double sum = 0.0, sumsq = 0.0;
  int le6 = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err_est[i] = (est[i] - truth[i]).norm();
    sum += err_est[i];
    sumsq += err_est[i] * err_est[i];
    if (err_est[i] <= 6.0) ++le6;
  }
  const double n = static_cast<double>(truth.size());
  rep.rps_mae_m = sum / n;
  rep.rps_rmse_m = std::sqrt(sumsq / n);
  rep.rps_frac_le_6m = static_cast<double>(le6) / n;
  rep.rps_cdf = error_cdf(err_est);

  if (have_gps) {
    std::vector<double> err_gps(truth.size());
    double gsum = 0.0;
    int gt6 = 0;
    double fix_sum = 0.0;
    int fix_count = 0;
    int holds = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      err_gps[i] = (gps_track[i] - truth[i]).norm();
      gsum += err_gps[i];
      if (err_gps[i] > 6.0) ++gt6;
      if (gps_fix_available[i]) {
        fix_sum += err_gps[i];
        ++fix_count;
      } else {
        ++holds;
      }
    }
    rep.gps_mae_m = gsum / n;
    rep.gps_frac_gt_6m = static_cast<double>(gt6) / n;
    rep.gps_cdf = error_cdf(err_gps);
    rep.gps_available_steps = fix_count;
    rep.gps_unavailable_steps = static_cast<int>(truth.size()) - fix_count;
    rep.gps_hold_steps = holds;
    rep.gps_fix_mae_m =
        fix_count > 0 ? fix_sum / static_cast<double>(fix_count) : 0.0;
  }

  for (const auto& seg : segments) {
    if (seg.start_step < 0 || seg.end_step >= rep.steps ||
        seg.start_step >= seg.end_step) {
      throw std::invalid_argument("compute_metrics_tracks: bad segment '" +
                                  seg.label + "' [" +
                                  std::to_string(seg.start_step) + ", " +
                                  std::to_string(seg.end_step) + "]");
    }
    SegmentRow row;
    row.label = seg.label;
    row.gt_m = path_length(truth, seg.start_step, seg.end_step);
    row.relative_m = path_length(est, seg.start_step, seg.end_step);
    row.relative_diff_pct = diff_pct(row.relative_m, row.gt_m);
    if (have_gps) {
      row.gps_m = path_length(gps_track, seg.start_step, seg.end_step);
      row.gps_diff_pct = diff_pct(row.gps_m, row.gt_m);
    }
    rep.segments.push_back(std::move(row));
  }
  return rep;
}

std::vector<SegmentSpec> default_segments(const SimLog& log) {
  std::vector<SegmentSpec> out;
  const auto& arr = log.waypoint_arrival_steps;
  const int last = static_cast<int>(log.records.size()) - 1;
  for (std::size_t i = 0; i + 1 < arr.size(); ++i) {
    if (arr[i] == kNeverStep || arr[i + 1] == kNeverStep) break;
    const int a = std::min(arr[i], last);
    const int b = std::min(arr[i + 1], last);
    if (a >= b) continue;
    auto letter = [](std::size_t k) {
      return k < 26 ? std::string(1, static_cast<char>('A' + k))
                    : "W" + std::to_string(k);
    };
    out.push_back({letter(i) + "-" + letter(i + 1), a, b});
  }
  return out;
}

MetricsReport compute_metrics(const SimLog& log,
                              const std::vector<SegmentSpec>& segments) {
  if (log.records.empty()) {
    throw std::invalid_argument("compute_metrics: empty log");
  }
  std::vector<Vec2> truth, est, gps;
  std::vector<bool> fix;
  truth.reserve(log.records.size());
  est.reserve(log.records.size());
  gps.reserve(log.records.size());
  fix.reserve(log.records.size());
  for (const auto& r : log.records) {
    truth.push_back(r.pursuer_truth_m);
    est.push_back(r.estimate_m);
    gps.push_back(r.gps_track_m);
    fix.push_back(r.fix_pursuer);
  }
  const std::vector<SegmentSpec> segs =
      segments.empty() ? default_segments(log) : segments;
  MetricsReport rep = compute_metrics_tracks(truth, est, gps, fix, segs);

  rep.switch_count = log.switch_count;
  int sweep_steps = 0, vision_steps = 0, rogue_fix_steps = 0;
  int episode_start = -1;
  for (const auto& r : log.records) {
    if (r.mode == RadioMode::RPS_ACTIVE) {
      ++sweep_steps;
      if (episode_start >= 0) {
        rep.jam_episodes.push_back(
            {episode_start, r.step - 1, r.step - episode_start});
        episode_start = -1;
      }
    } else if (episode_start < 0) {
      episode_start = r.step;
    }
    if (std::isfinite(r.d_c_m)) ++vision_steps;
    if (r.fix_rogue) ++rogue_fix_steps;
  }
  if (episode_start >= 0) {
    const int last = log.records.back().step;
    rep.jam_episodes.push_back(
        {episode_start, last, last - episode_start + 1});
  }
  const double n = static_cast<double>(log.records.size());
  rep.duty_sweep = static_cast<double>(sweep_steps) / n;
  rep.duty_jam = 1.0 - rep.duty_sweep;
  rep.duty_vision = static_cast<double>(vision_steps) / n;
  rep.duty_gps_rogue = static_cast<double>(rogue_fix_steps) / n;
  rep.t_d_final_m = log.records.back().t_d_m;
  for (const auto& ev : log.events) {
    if (ev.to == RadioMode::JAMMING) {
      rep.t_d_at_first_jam_m = ev.t_d_m;
      break;
    }
  }
  return rep;
}

// ---- calibrate_jamming ------------------------------------------------------

JamParams calibrate_jamming(const std::vector<FixPatternCell>& pattern,
                            const JamParams& base) {
  if (pattern.empty()) {
    throw std::invalid_argument("calibrate_jamming: empty pattern");
  }
  // J/S per cell depends only on the emission model, not on the two
  // searched parameters; precompute it once.
  std::vector<double> js(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    js[i] = jam_to_signal_db(base, pattern_cell_geometry(pattern[i]));
  }

  constexpr double kThrLo = 40.0, kThrHi = 140.0, kThrStep = 0.25;
  constexpr double kSlopeLo = 0.25, kSlopeHi = 4.0, kSlopeStep = 0.25;

  struct Candidate {
    double thr, slope;
  };
  std::vector<Candidate> feasible;
  int best_miss = std::numeric_limits<int>::max();
  Candidate best_miss_cand{kThrLo, kSlopeLo};

  for (double slope = kSlopeLo; slope <= kSlopeHi + 1e-9; slope += kSlopeStep) {
    for (double thr = kThrLo; thr <= kThrHi + 1e-9; thr += kThrStep) {
      JamParams cand = base;
      cand.js_threshold_db = thr;
      cand.sat_loss_slope_sats_per_db = slope;
      int miss = 0;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        const int n_s = satellites_visible_core(js[i], cand, /*jitter=*/0);
        if (gps_fix_available(n_s, cand) != pattern[i].fix_expected) ++miss;
      }
      if (miss == 0) {
        feasible.push_back({thr, slope});
      } else if (miss < best_miss) {
        best_miss = miss;
        best_miss_cand = {thr, slope};
      }
    }
  }

  if (feasible.empty()) {
    throw std::runtime_error(
        "calibrate_jamming: empty feasible region; nearest miss at "
        "js_threshold_db=" +
        format_double(best_miss_cand.thr) + " sat_loss_slope_sats_per_db=" +
        format_double(best_miss_cand.slope) + " with " +
        std::to_string(best_miss) + " mismatched cell(s)");
  }

  // Center of the feasible region in grid units, snapped to the nearest
  // feasible point (ties toward lower threshold, then lower slope).
  double ct = 0.0, cs = 0.0;
  for (const auto& f : feasible) {
    ct += f.thr / kThrStep;
    cs += f.slope / kSlopeStep;
  }
  ct /= static_cast<double>(feasible.size());
  cs /= static_cast<double>(feasible.size());
  const Candidate* best = &feasible.front();
  double best_d = kInf;
  for (const auto& f : feasible) {
    const double dt = f.thr / kThrStep - ct;
    const double ds = f.slope / kSlopeStep - cs;
    const double d = dt * dt + ds * ds;
    if (d < best_d - 1e-12) {
      best_d = d;
      best = &f;
    }
  }

  JamParams out = base;
  out.js_threshold_db = best->thr;
  out.sat_loss_slope_sats_per_db = best->slope;
  return out;
}

// ---- batch ------------------------------------------------------------------

namespace {

BatchItem run_one(int index, const Scenario& sc) {
  BatchItem item;
  item.index = index;
  try {
    SimLog log = run_scenario(sc);
    item.report = compute_metrics(log);
    item.ok = true;
  } catch (const std::exception& e) {
    item.ok = false;
    item.error = e.what();
  }
  return item;
}

}  // namespace

std::vector<BatchItem> batch_run_serial(const std::vector<Scenario>& configs) {
  if (configs.empty()) {
    throw std::invalid_argument("batch_run: empty config list");
  }
  std::vector<BatchItem> out(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out[i] = run_one(static_cast<int>(i), configs[i]);
  }
  return out;
}

std::vector<BatchItem> batch_run(const std::vector<Scenario>& configs) {
  if (configs.empty()) {
    throw std::invalid_argument("batch_run: empty config list");
  }
  std::vector<BatchItem> out(configs.size());
  const auto count = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        run_one(static_cast<int>(i), configs[static_cast<std::size_t>(i)]);
  }
  return out;
}

// ---- File formats -----------------------------------------------------------

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.x_m);
    out += ',';
    out += format_double(r.y_m);
    out += ',';
    out += format_double(r.p11);
    out += ',';
    out += format_double(r.p12);
    out += ',';
    out += format_double(r.p22);
    out += ',';
    out += r.mode;
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<TrajectoryRow> load_trajectory_csv(const std::string& path) {
  auto rows = read_csv_rows(path, kTrajectoryHeader);
  std::vector<TrajectoryRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 7) {
      throw std::runtime_error("trajectory row must have 7 fields at " + where);
    }
    TrajectoryRow t;
    t.step = static_cast<int>(parse_int(r.fields[0], "'step' at " + where));
    t.x_m = parse_double(r.fields[1], "'x_m' at " + where);
    t.y_m = parse_double(r.fields[2], "'y_m' at " + where);
    t.p11 = parse_double(r.fields[3], "'p11' at " + where);
    t.p12 = parse_double(r.fields[4], "'p12' at " + where);
    t.p22 = parse_double(r.fields[5], "'p22' at " + where);
    t.mode = r.fields[6];
    out.push_back(std::move(t));
  }
  return out;
}

void write_events_csv(const std::string& path,
                      const std::vector<SwitchEvent>& events) {
  std::string out(kEventsHeader);
  out += '\n';
  for (const auto& e : events) {
    out += std::to_string(e.step);
    out += ',';
    out += to_string(e.from);
    out += ',';
    out += to_string(e.to);
    out += ',';
    out += e.cause;
    out += ',';
    out += format_double(e.d_c_m);
    out += ',';
    out += format_double(e.e_m_m);
    out += ',';
    out += format_double(e.t_d_m);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_jamlink_csv(const std::string& path,
                       const std::vector<StepRecord>& records) {
  std::string out(kJamlinkHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.js_rogue_db);
    out += ',';
    out += std::to_string(r.n_s_rogue);
    out += ',';
    out += r.fix_rogue ? '1' : '0';
    out += ",rogue\n";
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.js_pursuer_db);
    out += ',';
    out += std::to_string(r.n_s_pursuer);
    out += ',';
    out += r.fix_pursuer ? '1' : '0';
    out += ",pursuer\n";
  }
  write_text_file(path, out);
}

std::string metrics_to_json_string(const MetricsReport& rep) {
  json j;
  j["steps"] = rep.steps;
  j["rps"] = {{"mae_m", rep.rps_mae_m},
              {"rmse_m", rep.rps_rmse_m},
              {"frac_le_6m", rep.rps_frac_le_6m}};
  j["rps"]["cdf"] = json::array();
  for (const auto& [x, f] : rep.rps_cdf) j["rps"]["cdf"].push_back({x, f});
  j["gps"] = {{"mae_m", rep.gps_mae_m},
              {"frac_gt_6m", rep.gps_frac_gt_6m},
              {"fix_mae_m", rep.gps_fix_mae_m},
              {"available_steps", rep.gps_available_steps},
              {"unavailable_steps", rep.gps_unavailable_steps},
              {"hold_steps", rep.gps_hold_steps}};
  j["gps"]["cdf"] = json::array();
  for (const auto& [x, f] : rep.gps_cdf) j["gps"]["cdf"].push_back({x, f});
  j["segments"] = json::array();
  for (const auto& s : rep.segments) {
    j["segments"].push_back({{"label", s.label},
                             {"gt_m", s.gt_m},
                             {"relative_m", s.relative_m},
                             {"relative_diff_pct", s.relative_diff_pct},
                             {"gps_m", s.gps_m},
                             {"gps_diff_pct", s.gps_diff_pct}});
  }
  j["switching"] = {{"switch_count", rep.switch_count},
                    {"t_d_final_m", rep.t_d_final_m},
                    {"t_d_at_first_jam_m", rep.t_d_at_first_jam_m}};
  j["switching"]["jam_episodes"] = json::array();
  for (const auto& ep : rep.jam_episodes) {
    j["switching"]["jam_episodes"].push_back(
        {{"start_step", ep.start_step},
         {"end_step", ep.end_step},
         {"duration_steps", ep.duration_steps}});
  }
  j["duty_cycle"] = {{"sweep", rep.duty_sweep},
                     {"jam", rep.duty_jam},
                     {"vision", rep.duty_vision},
                     {"gps_rogue", rep.duty_gps_rogue}};
  return j.dump(2) + "\n";
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
  write_text_file(path, metrics_to_json_string(report));
}

std::vector<SegmentSpec> load_segments_csv(const std::string& path) {
  auto rows = read_csv_rows(path, kSegmentsHeader);
  std::vector<SegmentSpec> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 3) {
      throw std::runtime_error("segment row must have 3 fields at " + where);
    }
    SegmentSpec s;
    s.label = r.fields[0];
    s.start_step =
        static_cast<int>(parse_int(r.fields[1], "'start_step' at " + where));
    s.end_step =
        static_cast<int>(parse_int(r.fields[2], "'end_step' at " + where));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ImuRow> load_imu_csv(const std::string& path) {
  auto rows = read_csv_rows(path, kImuHeader, /*allow_empty=*/true);
  std::vector<ImuRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 3) {
      throw std::runtime_error("imu row must have 3 fields at " + where);
    }
    ImuRow row;
    row.step = static_cast<int>(parse_int(r.fields[0], "'step' at " + where));
    row.velocity_m_s.x() = parse_double(r.fields[1], "'ux_m_s' at " + where);
    row.velocity_m_s.y() = parse_double(r.fields[2], "'uy_m_s' at " + where);
    out.push_back(row);
  }
  return out;
}

void write_imu_csv(const std::string& path, const std::vector<ImuRow>& rows) {
  std::string out(kImuHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    out += format_double(r.velocity_m_s.x());
    out += ',';
    out += format_double(r.velocity_m_s.y());
    out += '\n';
  }
  write_text_file(path, out);
}

void write_simulation_outputs(const SimLog& log, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto join = [&out_dir](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  std::vector<TrajectoryRow> est, truth, rogue, gps;
  est.reserve(log.records.size());
  truth.reserve(log.records.size());
  rogue.reserve(log.records.size());
  gps.reserve(log.records.size());
  for (const auto& r : log.records) {
    const std::string mode = to_string(r.mode);
    est.push_back({r.step, r.estimate_m.x(), r.estimate_m.y(),
                   r.covariance(0, 0), r.covariance(0, 1), r.covariance(1, 1),
                   mode});
    truth.push_back(
        {r.step, r.pursuer_truth_m.x(), r.pursuer_truth_m.y(), 0, 0, 0, mode});
    rogue.push_back(
        {r.step, r.rogue_truth_m.x(), r.rogue_truth_m.y(), 0, 0, 0, mode});
    gps.push_back(
        {r.step, r.gps_track_m.x(), r.gps_track_m.y(), 0, 0, 0, mode});
  }
  write_trajectory_csv(join("trajectories.csv"), est);
  write_trajectory_csv(join("truth.csv"), truth);
  write_trajectory_csv(join("rogue.csv"), rogue);
  write_trajectory_csv(join("gps.csv"), gps);
  write_events_csv(join("events.csv"), log.events);
  write_jamlink_csv(join("jamlink.csv"), log.records);
  write_sweep_log(join("sweeps.csv"), log.sweep_samples);
  write_imu_csv(join("imu.csv"), log.imu_log);
  write_metrics_json(join("metrics.json"), compute_metrics(log));
}

std::vector<TrajectoryRow> replay_from_logs(
    const std::vector<SweepSample>& sweeps, const std::vector<ImuRow>& imu,
    const Scenario& sc) {
  auto frames = group_sweep_by_step(sweeps);
  if (frames.empty()) {
    throw std::invalid_argument("replay_from_logs: sweep log has no frames");
  }
  std::map<int, Vec2> imu_by_step;
  for (const auto& r : imu) imu_by_step[r.step] = r.velocity_m_s;

  std::vector<int> selected;
  NavState nav;
  std::vector<TrajectoryRow> out;
  out.reserve(frames.size());
  for (const auto& [step, samples] : frames) {
    auto moments = extract_moments(samples);
    if (selected.empty()) {
      selected = select_transmitters(moments, sc.ctrl.t_i);
    }
    Vec2 u = Vec2::Zero();
    if (auto it = imu_by_step.find(step); it != imu_by_step.end()) {
      u = it->second;
    }
    nav = estimate_position(moments, selected, sc.transmitters, nav, u,
                            sc.dt_s, sc.ekf, sc.ctrl.n_pl);
    out.push_back({step, nav.position_m.x(), nav.position_m.y(),
                   nav.covariance(0, 0), nav.covariance(0, 1),
                   nav.covariance(1, 1), to_string(RadioMode::RPS_ACTIVE)});
  }
  return out;
}

}  // namespace sopjam
