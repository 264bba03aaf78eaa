#include "sopjam/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sopjam/csv.hpp"

namespace sopjam {

namespace {
constexpr const char* kSweepHeader = "step,band,rss_dbm";
}

double pathloss_rss_dbm(const Vec2& receiver, const Transmitter& tx,
                        double n_pl) {
  double d = std::hypot(receiver.x() - tx.x_m, receiver.y() - tx.y_m);
  d = std::max(d, 1e-3);
  return tx.ref_rss_p0_dbm - 10.0 * n_pl * std::log10(d / tx.d0_m);
}

std::vector<SweepSample> simulate_sweep(const Vec2& receiver,
                                        const std::vector<Transmitter>& txs,
                                        double n_pl, double shadowing_sigma_db,
                                        int samples_per_band, int step,
                                        RandomStream& rng) {
  if (samples_per_band < 1) {
    throw std::invalid_argument("simulate_sweep: samples_per_band must be >= 1");
  }
  std::vector<const Transmitter*> order;
  order.reserve(txs.size());
  for (const auto& t : txs) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const Transmitter* a, const Transmitter* b) { return a->id < b->id; });

  std::vector<SweepSample> out;
  out.reserve(order.size() * static_cast<std::size_t>(samples_per_band));
  for (const Transmitter* t : order) {
    double mean = pathloss_rss_dbm(receiver, *t, n_pl);
    for (int s = 0; s < samples_per_band; ++s) {
      out.push_back({step, t->id, mean + rng.gaussian(0.0, shadowing_sigma_db)});
    }
  }
  return out;
}

std::vector<BandMoments> extract_moments(const std::vector<SweepSample>& samples) {
  std::map<int, std::vector<double>> by_band;
  for (const auto& s : samples) by_band[s.band].push_back(s.rss_dbm);
  std::vector<BandMoments> out;
  out.reserve(by_band.size());
  for (const auto& [band, vals] : by_band) {
    BandMoments m;
    m.band = band;
    m.n_samples = static_cast<int>(vals.size());
    double sum = 0.0;
    for (double v : vals) sum += v;
    m.mean_dbm = sum / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) {
      double d = v - m.mean_dbm;
      ss += d * d;
    }
    m.variance_db2 = ss / static_cast<double>(vals.size());
    out.push_back(m);
  }
  return out;
}

std::vector<int> select_transmitters(
    const std::vector<std::vector<BandMoments>>& calibration_frames, int t_i) {
  if (t_i < 1) throw std::invalid_argument("select_transmitters: t_i must be >= 1");
  if (calibration_frames.empty()) {
    throw std::invalid_argument(
        "select_transmitters: need at least one calibration frame");
  }
  // Per-band mean RSS averaged over the frames in which the band appears.
  std::map<int, std::pair<double, int>> acc;  // band -> (sum of means, count)
  for (const auto& frame : calibration_frames) {
    for (const auto& m : frame) {
      auto& [sum, count] = acc[m.band];
      sum += m.mean_dbm;
      ++count;
    }
  }
  if (static_cast<int>(acc.size()) < t_i) {
    throw std::invalid_argument(
        "insufficient transmitters: need " + std::to_string(t_i) +
        " distinct bands, got " + std::to_string(acc.size()));
  }
  struct Ranked {
    int band;
    double mean;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(acc.size());
  for (const auto& [band, sc] : acc) {
    ranked.push_back({band, sc.first / static_cast<double>(sc.second)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.band < b.band;
  });
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(t_i));
  for (int i = 0; i < t_i; ++i) ids.push_back(ranked[static_cast<std::size_t>(i)].band);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> select_transmitters(const std::vector<BandMoments>& moments,
                                     int t_i) {
  return select_transmitters(std::vector<std::vector<BandMoments>>{moments}, t_i);
}

void write_sweep_log(const std::string& path,
                     const std::vector<SweepSample>& samples) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& s : samples) {
    out += std::to_string(s.step);
    out += ',';
    out += std::to_string(s.band);
    out += ',';
    out += format_double(s.rss_dbm);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<SweepSample> load_sweep_log(const std::string& path) {
  auto rows = read_csv_rows(path, kSweepHeader, /*allow_empty=*/true);
  std::vector<SweepSample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 3) {
      throw std::runtime_error("sweep log row must have 3 fields at " + where);
    }
    SweepSample s;
    s.step = static_cast<int>(parse_int(r.fields[0], "'step' at " + where));
    s.band = static_cast<int>(parse_int(r.fields[1], "'band' at " + where));
    s.rss_dbm = parse_double(r.fields[2], "'rss_dbm' at " + where);
    out.push_back(s);
  }
  return out;
}

std::map<int, std::vector<SweepSample>> group_sweep_by_step(
    const std::vector<SweepSample>& samples) {
  std::map<int, std::vector<SweepSample>> out;
  for (const auto& s : samples) out[s.step].push_back(s);
  return out;
}

}  // namespace sopjam
