#include "sopjam/jamming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sopjam/csv.hpp"

namespace sopjam {

JamGeometry make_jam_geometry(double horizontal_m, double altitude_diff_m) {
  JamGeometry g;
  g.altitude_diff_m = altitude_diff_m;
  g.d_rt_m = std::max(std::hypot(horizontal_m, altitude_diff_m), 1e-3);
  g.elevation_deg =
      std::atan2(std::abs(altitude_diff_m), std::abs(horizontal_m)) * 180.0 /
      M_PI;
  return g;
}

double two_ray_rss_mw(const JamParams& params, double d_rt_m) {
  if (d_rt_m <= 0.0) {
    throw std::invalid_argument("two_ray_rss_mw: distance must be > 0");
  }
  const double h2 = params.antenna_height_tx_m * params.antenna_height_tx_m *
                    params.antenna_height_rx_m * params.antenna_height_rx_m;
  const double d2 = d_rt_m * d_rt_m;
  return params.transmit_power_mw * params.gain_tx * params.gain_rx * h2 /
         (d2 * d2);
}

double two_ray_rss_dbm(const JamParams& params, double d_rt_m) {
  return 10.0 * std::log10(two_ray_rss_mw(params, d_rt_m));
}

double jam_to_signal_db(const JamParams& params, const JamGeometry& geometry) {
  // cos(90 deg) is ~6e-17 in floating point, so gate on the angle itself to
  // honor the documented hard cutoff at 90 degrees.
  if (geometry.elevation_deg >= 90.0) {
    return -std::numeric_limits<double>::infinity();
  }
  const double c = std::cos(geometry.elevation_deg * M_PI / 180.0);
  if (c <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  const double pattern_db = 10.0 * params.elevation_rolloff_exp * std::log10(c);
  return two_ray_rss_dbm(params, geometry.d_rt_m) + pattern_db -
         params.gps_signal_power_dbm;
}

int satellites_visible_core(double js_db, const JamParams& params, int jitter) {
  double excess = std::max(0.0, js_db - params.js_threshold_db);
  double lost_f = std::floor(excess * params.sat_loss_slope_sats_per_db);
  // Large J/S values can overflow int through the floor; saturate first.
  int lost = lost_f >= static_cast<double>(params.n_nominal)
                 ? params.n_nominal
                 : static_cast<int>(lost_f);
  int n = params.n_nominal - lost - jitter;
  return std::clamp(n, 0, params.n_nominal);
}

int satellites_visible(double js_db, const JamParams& params,
                       RandomStream& rng) {
  int jitter = static_cast<int>(rng.uniform_index(2));
  return satellites_visible_core(js_db, params, jitter);
}

bool gps_fix_available(int n_s, const JamParams& params) {
  return n_s >= params.fix_min_sats;
}

GpsReceiverState gps_receiver_step(const GpsReceiverState& state,
                                   int visible_sats, const JamParams& params) {
  GpsReceiverState out = state;
  if (visible_sats < state.tracked_sats) {
    out.tracked_sats = visible_sats;  // loss is immediate
    out.reacq_progress = 0;
  } else if (visible_sats > state.tracked_sats) {
    ++out.reacq_progress;
    if (out.reacq_progress >= params.reacquisition_steps_per_sat) {
      ++out.tracked_sats;
      out.reacq_progress = 0;
    }
  } else {
    out.reacq_progress = 0;
  }
  return out;
}

std::optional<Vec2> gps_position_fix(const Vec2& truth, int n_s,
                                     const JamParams& params,
                                     double gps_noise_sigma_m,
                                     RandomStream& rng) {
  if (!gps_fix_available(n_s, params)) {
    return std::nullopt;
  }
  const double sigma_eff =
      gps_noise_sigma_m * static_cast<double>(params.n_nominal) /
      static_cast<double>(std::max(n_s, params.fix_min_sats));
  Vec2 fix = truth;
  fix.x() += rng.gaussian(0.0, sigma_eff);
  fix.y() += rng.gaussian(0.0, sigma_eff);
  return fix;
}

JamGeometry pattern_cell_geometry(const FixPatternCell& cell) {
  JamGeometry g;
  g.altitude_diff_m = cell.altitude_m;
  g.d_rt_m = std::max(std::hypot(cell.altitude_m, cell.distance_m), 1e-3);
  g.elevation_deg = cell.elevation_deg;
  return g;
}

namespace {
constexpr const char* kPatternHeader =
    "altitude_m,distance_m,elevation_deg,fix_expected";
}

std::vector<FixPatternCell> load_fix_pattern(const std::string& path) {
  auto rows = read_csv_rows(path, kPatternHeader);
  std::vector<FixPatternCell> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 4) {
      throw std::runtime_error("fix pattern row must have 4 fields at " + where);
    }
    FixPatternCell c;
    c.altitude_m = parse_double(r.fields[0], "'altitude_m' at " + where);
    c.distance_m = parse_double(r.fields[1], "'distance_m' at " + where);
    c.elevation_deg = parse_double(r.fields[2], "'elevation_deg' at " + where);
    std::int64_t flag = parse_int(r.fields[3], "'fix_expected' at " + where);
    if (flag != 0 && flag != 1) {
      throw std::runtime_error("'fix_expected' must be 0 or 1 at " + where);
    }
    c.fix_expected = flag == 1;
    out.push_back(c);
  }
  return out;
}

void write_fix_pattern(const std::string& path,
                       const std::vector<FixPatternCell>& cells) {
  std::string out(kPatternHeader);
  out += '\n';
  for (const auto& c : cells) {
    out += format_double(c.altitude_m);
    out += ',';
    out += format_double(c.distance_m);
    out += ',';
    out += format_double(c.elevation_deg);
    out += ',';
    out += c.fix_expected ? '1' : '0';
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace sopjam
