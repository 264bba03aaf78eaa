// sweep.hpp - ambient-band RSS survey: synthetic sweep generation, sweep log
// I/O, per-band moment extraction, and ranging-band selection.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "sopjam/scenario.hpp"

namespace sopjam {

// One raw sweep sample (one band, one dwell).
struct SweepSample {
  int step = 0;
  int band = 0;
  double rss_dbm = 0.0;
};

// Per-band statistics over the samples of one sweep.
struct BandMoments {
  int band = 0;
  double mean_dbm = 0.0;
  double variance_db2 = 0.0;  // population variance (n denominator)
  int n_samples = 0;
};

// Mean RSS at `receiver` from `tx` under log-distance path loss with
// exponent `n_pl`.  Distance is floored at 1 mm to keep the log finite.
double pathloss_rss_dbm(const Vec2& receiver, const Transmitter& tx,
                        double n_pl);

// Generate `samples_per_band` dwells per transmitter band at one receiver
// position.  Shadowing is i.i.d. zero-mean Gaussian in dB per dwell.  Bands
// appear in ascending transmitter id order; draw order matches row order.
std::vector<SweepSample> simulate_sweep(const Vec2& receiver,
                                        const std::vector<Transmitter>& txs,
                                        double n_pl, double shadowing_sigma_db,
                                        int samples_per_band, int step,
                                        RandomStream& rng);

// Moments per band, ascending band id.  Input order does not matter.
std::vector<BandMoments> extract_moments(const std::vector<SweepSample>& samples);

// Ids of the `t_i` bands with the highest mean RSS averaged over the given
// calibration frames (bands missing from a frame are averaged over the
// frames where they appear).  Returned in ascending band id order; ties
// break toward the lower band id.  Throws std::invalid_argument
// ("insufficient transmitters") if fewer than `t_i` distinct bands appear.
std::vector<int> select_transmitters(
    const std::vector<std::vector<BandMoments>>& calibration_frames, int t_i);

// Single-frame convenience overload.
std::vector<int> select_transmitters(const std::vector<BandMoments>& moments,
                                     int t_i);

// Sweep log CSV ("step,band,rss_dbm").
void write_sweep_log(const std::string& path,
                     const std::vector<SweepSample>& samples);
std::vector<SweepSample> load_sweep_log(const std::string& path);

// Group samples by step (ascending).
std::map<int, std::vector<SweepSample>> group_sweep_by_step(
    const std::vector<SweepSample>& samples);

}  // namespace sopjam
