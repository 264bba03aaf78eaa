#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sopjam/positioning.hpp"
#include "sopjam/rng.hpp"
#include "sopjam/sweep.hpp"
#include "support/fixtures.hpp"
#include "support/grid_oracle.hpp"

using namespace sopjam;
using sopjam::testing::GridSpec;
using sopjam::testing::grid_search_serial;
using sopjam::testing::ring_transmitters;

namespace {

std::vector<Vec2> ring_anchors(int count, double radius) {
  std::vector<Vec2> anchors;
  for (const auto& tx : ring_transmitters(count, radius)) {
    anchors.emplace_back(tx.x_m, tx.y_m);
  }
  return anchors;
}

std::vector<double> exact_ranges(const Vec2& p,
                                 const std::vector<Vec2>& anchors) {
  std::vector<double> d;
  d.reserve(anchors.size());
  for (const auto& a : anchors) d.push_back((p - a).norm());
  return d;
}

}  // namespace

// ---- path-loss inversion ----------------------------------------------------

TEST_CASE("rss equal to the reference power inverts to d0") {
  CHECK(invert_pathloss(-35.0, -35.0, 1.0, 2.8) == doctest::Approx(1.0));
  CHECK(invert_pathloss(-20.0, -20.0, 7.5, 2.0) == doctest::Approx(7.5));
}

TEST_CASE("28 dB below reference at n_PL=2.8 is one decade of range") {
  CHECK(invert_pathloss(-68.0, -40.0, 1.0, 2.8) ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("implausibly strong or weak readings clamp and set the flag") {
  bool clamped = false;
  CHECK(invert_pathloss(-35.0 + 60.0, -35.0, 1.0, 2.8, &clamped) ==
        kMinRangeM);
  CHECK(clamped);
  clamped = false;
  CHECK(invert_pathloss(-35.0 - 400.0, -35.0, 1.0, 2.8, &clamped) ==
        kMaxRangeM);
  CHECK(clamped);
  clamped = true;
  invert_pathloss(-60.0, -35.0, 1.0, 2.8, &clamped);
  CHECK_FALSE(clamped);
}

TEST_CASE("model and inversion round-trip over four decades") {
  Transmitter tx;
  tx.ref_rss_p0_dbm = -35.0;
  tx.d0_m = 1.0;
  for (double d : {0.5, 1.0, 10.0, 100.0, 1000.0}) {
    tx.x_m = 0.0;
    tx.y_m = 0.0;
    const double rss = pathloss_rss_dbm(Vec2(d, 0.0), tx, 2.8);
    const double back = invert_pathloss(rss, tx.ref_rss_p0_dbm, tx.d0_m, 2.8);
    CHECK(std::abs(back - d) / d <= 1e-9);
  }
}

TEST_CASE("inversion rejects nonphysical model parameters") {
  CHECK_THROWS_AS(invert_pathloss(-50.0, -35.0, 1.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_pathloss(-50.0, -35.0, 1.0, -2.8),
                  std::invalid_argument);
  CHECK_THROWS_AS(invert_pathloss(-50.0, -35.0, 0.0, 2.8),
                  std::invalid_argument);
}

// ---- multilateration --------------------------------------------------------

TEST_CASE("symmetric unit square with equal ranges solves to the center") {
  std::vector<Vec2> anchors = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  std::vector<double> ranges(4, std::sqrt(2.0));
  Vec2 p = multilaterate_lsq(anchors, ranges);
  CHECK(p.norm() <= 1e-9);
}

TEST_CASE("exact ranges from square corners recover the point") {
  std::vector<Vec2> anchors = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  const Vec2 truth(3.0, 4.0);
  Vec2 p = multilaterate_lsq(anchors, exact_ranges(truth, anchors));
  CHECK((p - truth).norm() <= 1e-9);
}

TEST_CASE("multilateration input validation") {
  std::vector<Vec2> three = {{0, 0}, {10, 0}, {0, 10}};
  CHECK_THROWS_AS(multilaterate_lsq(three, {1.0, 2.0, 3.0}),
                  std::invalid_argument);
  std::vector<Vec2> four = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  CHECK_THROWS_AS(multilaterate_lsq(four, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("collinear anchors are reported as degenerate geometry") {
  std::vector<Vec2> line = {{0, 0}, {10, 0}, {20, 0}, {30, 0}};
  CHECK_THROWS_WITH_AS(
      multilaterate_lsq(line, exact_ranges(Vec2(5.0, 3.0), line)),
      doctest::Contains("degenerate geometry"), std::runtime_error);
}

TEST_CASE("noisy multilateration agrees with an exhaustive grid search") {
  auto anchors = ring_anchors(6, 100.0);
  RandomStream rng(17, "oracle");
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 truth(rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0));
    auto ranges = exact_ranges(truth, anchors);
    for (auto& d : ranges) d = std::max(0.1, d + rng.gaussian(0.0, 1.0));

    Vec2 lsq = multilaterate_lsq(anchors, ranges);

    GridSpec grid;
    grid.center_x_m = lsq.x();
    grid.center_y_m = lsq.y();
    grid.half_extent_m = 12.0;
    grid.resolution_m = 0.1;
    Vec2 best = grid_search_serial(anchors, ranges, grid);
    // The oracle argmin must be interior, otherwise the window was too small.
    REQUIRE(std::abs(best.x() - lsq.x()) < grid.half_extent_m - 0.5);
    REQUIRE(std::abs(best.y() - lsq.y()) < grid.half_extent_m - 0.5);

    CHECK((lsq - best).norm() <= 0.5);
    CHECK(range_residual_cost(lsq, anchors, ranges) <=
          range_residual_cost(best, anchors, ranges) + 1e-9);
  }
}

// ---- EKF predict ------------------------------------------------------------

TEST_CASE("predict with zero velocity and zero process noise is identity") {
  NavState s;
  s.position_m = Vec2(3.0, -4.0);
  s.covariance = 2.5 * Mat2::Identity();
  s.step = 7;
  s.initialized = true;
  NavState out = ekf_predict(s, Vec2::Zero(), 0.2, 0.0);
  CHECK(out.position_m == s.position_m);
  CHECK(out.covariance == s.covariance);
  CHECK(out.step == 8);
  CHECK(out.initialized);
}

TEST_CASE("predict integrates commanded velocity over the step") {
  NavState s;
  s.initialized = true;
  NavState out = ekf_predict(s, Vec2(1.0, 2.0), 0.5, 0.0);
  CHECK(out.position_m.x() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.position_m.y() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("covariance trace grows by 2 q per predict") {
  const double q_sigma = 0.112;
  const double dt = 0.2;
  const double q = (q_sigma * dt) * (q_sigma * dt);
  NavState s;
  s.covariance = Mat2::Zero();
  s.initialized = true;
  for (int i = 0; i < 100; ++i) s = ekf_predict(s, Vec2::Zero(), dt, q_sigma);
  CHECK(s.covariance.trace() == doctest::Approx(200.0 * q).epsilon(1e-12));
  CHECK(s.step == 100);
}

// ---- EKF update -------------------------------------------------------------

TEST_CASE("range Jacobian matches central finite differences") {
  RandomStream rng(23, "fd");
  for (int trial = 0; trial < 50; ++trial) {
    const Vec2 p(rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0));
    const Vec2 a(rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0));
    if ((p - a).norm() < 1.0) continue;
    auto row = range_jacobian_row(p, a);
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      Vec2 hi = p, lo = p;
      hi[k] += h;
      lo[k] -= h;
      const double fd = ((hi - a).norm() - (lo - a).norm()) / (2.0 * h);
      CHECK(std::abs(row(k) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("zero innovation leaves the position unchanged and shrinks P") {
  auto anchors = ring_anchors(5, 80.0);
  NavState s;
  s.position_m = Vec2(12.0, -9.0);
  s.covariance = 4.0 * Mat2::Identity();
  s.initialized = true;
  auto ranges = exact_ranges(s.position_m, anchors);
  std::vector<double> r_var(anchors.size(), 0.25);
  EkfUpdateStats stats;
  NavState out = ekf_update(s, anchors, ranges, r_var, &stats);
  CHECK(out.position_m.x() == s.position_m.x());
  CHECK(out.position_m.y() == s.position_m.y());
  CHECK(out.covariance.trace() < s.covariance.trace());
  CHECK(stats.innovations_m.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.nis == 0.0);
  CHECK(stats.dropped_rows == 0);
}

TEST_CASE("relinearized updates with tight R converge to the true point") {
  std::vector<Vec2> anchors = {{0, 0}, {60, 0}, {0, 60}, {60, 60}};
  const Vec2 truth(21.0, 34.0);
  auto ranges = exact_ranges(truth, anchors);
  std::vector<double> r_var(anchors.size(), 1e-6);

  NavState s;
  s.position_m = truth + Vec2(3.0, -4.0);  // 5 m initial error
  s.initialized = true;
  for (int it = 0; it < 10; ++it) {
    // Re-arming the prior keeps each relinearized update a full step.
    s.covariance = 25.0 * Mat2::Identity();
    s = ekf_update(s, anchors, ranges, r_var);
  }
  CHECK((s.position_m - truth).norm() <= 1e-6);
  // Independent check: the batch solver lands on the same point.
  Vec2 batch = multilaterate_lsq(anchors, ranges);
  CHECK((s.position_m - batch).norm() <= 1e-6);
}

TEST_CASE("a single range only collapses uncertainty along the sight line") {
  NavState s;
  s.position_m = Vec2::Zero();
  s.covariance = 9.0 * Mat2::Identity();
  s.initialized = true;
  std::vector<Vec2> anchors = {{10.0, 0.0}};  // line of sight along x
  std::vector<double> ranges = {10.0};
  NavState out = ekf_update(s, anchors, ranges, {0.25});
  // Perpendicular (y) variance untouched, sight-line (x) variance reduced.
  CHECK(std::abs(out.covariance(1, 1) - 9.0) <= 1e-9);
  CHECK(out.covariance(0, 0) < 9.0 - 1e-3);
  CHECK(std::abs(out.covariance(0, 1)) <= 1e-9);
}

TEST_CASE("anchors coincident with the estimate are dropped and counted") {
  auto anchors = ring_anchors(4, 50.0);
  NavState s;
  s.position_m = Vec2(5.0, 5.0);
  s.covariance = 4.0 * Mat2::Identity();
  s.initialized = true;
  anchors.push_back(s.position_m + Vec2(1e-9, 0.0));
  auto ranges = exact_ranges(s.position_m, anchors);
  std::vector<double> r_var(anchors.size(), 0.25);
  EkfUpdateStats stats;
  NavState out = ekf_update(s, anchors, ranges, r_var, &stats);
  CHECK(stats.dropped_rows == 1);
  CHECK(stats.innovations_m.size() == 4);
  CHECK(out.position_m == s.position_m);  // remaining innovations are zero
}

TEST_CASE("update with no usable observation is rejected") {
  NavState s;
  s.position_m = Vec2(1.0, 2.0);
  s.initialized = true;
  std::vector<Vec2> anchors = {s.position_m, s.position_m};
  CHECK_THROWS_AS(ekf_update(s, anchors, {0.0, 0.0}, {0.25, 0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ekf_update(s, {}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      ekf_update(s, {{10.0, 0.0}}, {10.0, 11.0}, {0.25}),
      std::invalid_argument);
}

TEST_CASE("a non-positive innovation covariance is reported as singular") {
  // An indefinite state covariance drives S negative, which must be caught
  // rather than silently producing a garbage gain.
  NavState s;
  s.position_m = Vec2::Zero();
  s.covariance = -4.0 * Mat2::Identity();
  s.initialized = true;
  CHECK_THROWS_WITH_AS(ekf_update(s, {{10.0, 0.0}}, {10.0}, {1e-12}),
                       doctest::Contains("singular innovation"),
                       std::runtime_error);
}

TEST_CASE("covariance stays symmetric PSD through random filter cycles") {
  auto anchors = ring_anchors(6, 90.0);
  RandomStream rng(31, "psd");
  NavState s;
  s.position_m = Vec2(10.0, 0.0);
  s.covariance = 4.0 * Mat2::Identity();
  s.initialized = true;
  for (int cycle = 0; cycle < 200; ++cycle) {
    const Vec2 u(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    s = ekf_predict(s, u, 0.2, 0.112);
    auto ranges = exact_ranges(s.position_m, anchors);
    for (auto& d : ranges) d = std::max(0.1, d + rng.gaussian(0.0, 0.5));
    std::vector<double> r_var(anchors.size(), 0.25);
    s = ekf_update(s, anchors, ranges, r_var);

    CHECK((s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff() ==
          0.0);
    Eigen::SelfAdjointEigenSolver<Mat2> eig(s.covariance);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
  }
}

// ---- full estimation step ---------------------------------------------------

namespace {

std::vector<BandMoments> exact_moments(const Vec2& rx,
                                       const std::vector<Transmitter>& txs,
                                       double n_pl, double variance_db2 = 0.0,
                                       int n_samples = 64) {
  std::vector<BandMoments> m;
  for (const auto& tx : txs) {
    m.push_back({tx.id, pathloss_rss_dbm(rx, tx, n_pl), variance_db2,
                 n_samples});
  }
  return m;
}

std::vector<int> all_ids(const std::vector<Transmitter>& txs) {
  std::vector<int> ids;
  for (const auto& tx : txs) ids.push_back(tx.id);
  return ids;
}

}  // namespace

TEST_CASE("noiseless moments localize the receiver on the first call") {
  auto txs = ring_transmitters(6, 120.0);
  const Vec2 truth(18.0, -22.0);
  auto moments = exact_moments(truth, txs, 2.8);
  EkfConfig cfg;
  NavState out = estimate_position(moments, all_ids(txs), txs, NavState{},
                                   Vec2::Zero(), 0.2, cfg, 2.8);
  CHECK(out.initialized);
  CHECK((out.position_m - truth).norm() <= 1e-6);
}

TEST_CASE("the filter tracks a moving receiver fed exact moments") {
  auto txs = ring_transmitters(6, 120.0);
  EkfConfig cfg;
  const double dt = 0.2;
  const Vec2 u(1.0, 0.0);
  Vec2 truth(-10.0, 4.0);
  NavState s;
  for (int k = 0; k < 50; ++k) {
    truth += u * dt;
    auto moments = exact_moments(truth, txs, 2.8);
    s = estimate_position(moments, all_ids(txs), txs, s, u, dt, cfg, 2.8);
    CHECK((s.position_m - truth).norm() <= 1e-3);
  }
}

TEST_CASE("filtering beats the per-step batch fix under heavy shadowing") {
  auto txs = ring_transmitters(8, 150.0);
  EkfConfig cfg;
  const double dt = 0.2;
  const double sigma_db = 3.0;
  const Vec2 u(0.4, 0.2);
  RandomStream rng(41, "sweep");
  Vec2 truth(-15.0, -5.0);
  NavState s;
  double ekf_sq = 0.0, lsq_sq = 0.0;
  int counted = 0;
  for (int k = 0; k < 150; ++k) {
    truth += u * dt;
    auto samples = simulate_sweep(truth, txs, 2.8, sigma_db, 32, k, rng);
    auto moments = extract_moments(samples);
    EstimateDebug dbg;
    s = estimate_position(moments, all_ids(txs), txs, s, u, dt, cfg, 2.8,
                          &dbg);
    if (k >= 50) {  // past the transient
      ekf_sq += (s.position_m - truth).squaredNorm();
      lsq_sq += (dbg.lsq_position_m - truth).squaredNorm();
      ++counted;
    }
    CHECK(dbg.bands.size() == txs.size());
    CHECK(std::is_sorted(dbg.bands.begin(), dbg.bands.end()));
    CHECK(dbg.mean_range_m > 0.0);
    CHECK(dbg.clamped_ranges == 0);
  }
  const double ekf_rms = std::sqrt(ekf_sq / counted);
  const double lsq_rms = std::sqrt(lsq_sq / counted);
  CHECK(ekf_rms < lsq_rms);
}

TEST_CASE("estimation input contracts") {
  auto txs = ring_transmitters(5, 100.0);
  const Vec2 truth(0.0, 0.0);
  auto moments = exact_moments(truth, txs, 2.8);
  EkfConfig cfg;
  // Selected band absent from the moment list.
  CHECK_THROWS_AS(estimate_position(moments, {1, 2, 3, 99}, txs, NavState{},
                                    Vec2::Zero(), 0.2, cfg, 2.8),
                  std::invalid_argument);
  // Fewer than 4 selected bands.
  CHECK_THROWS_AS(estimate_position(moments, {1, 2, 3}, txs, NavState{},
                                    Vec2::Zero(), 0.2, cfg, 2.8),
                  std::invalid_argument);
  // Selected band with no matching transmitter definition.
  auto short_txs = txs;
  short_txs.pop_back();
  CHECK_THROWS_AS(estimate_position(moments, all_ids(txs), short_txs,
                                    NavState{}, Vec2::Zero(), 0.2, cfg, 2.8),
                  std::invalid_argument);
}

TEST_CASE("fixed measurement noise overrides the derived value") {
  auto txs = ring_transmitters(6, 120.0);
  const Vec2 truth(10.0, 10.0);
  // Large per-band scatter would normally inflate R...
  auto moments = exact_moments(truth, txs, 2.8, /*variance_db2=*/25.0);
  EkfConfig tight = EkfConfig{};
  tight.fixed_range_noise_sigma_m = 0.01;
  EkfConfig derived = EkfConfig{};
  NavState with_fixed = estimate_position(moments, all_ids(txs), txs,
                                          NavState{}, Vec2::Zero(), 0.2,
                                          tight, 2.8);
  NavState with_derived = estimate_position(moments, all_ids(txs), txs,
                                            NavState{}, Vec2::Zero(), 0.2,
                                            derived, 2.8);
  // ...so the fixed-R filter must end the step more confident.
  CHECK(with_fixed.covariance.trace() < with_derived.covariance.trace());
}

// ---- statistical consistency ------------------------------------------------

TEST_CASE("final-step NEES over repeated runs sits in the chi-square band") {
  // 60 Monte-Carlo runs of the matched filter; the run-averaged final NEES
  // of a consistent 2-state filter lies in the central 95% interval of
  // chi2(120)/60.
  const double kLo = 1.5262106983335755;
  const double kHi = 2.536856712085859;

  auto anchors = ring_anchors(5, 120.0);
  const double dt = 0.2;
  const double q_sigma = 0.5;
  const double sigma_r = 0.5;
  const double p0 = 2.0;
  const int runs = 60;
  const int steps = 50;

  double nees_sum = 0.0;
  for (int run = 0; run < runs; ++run) {
    RandomStream rng(1000 + run, "nees");
    Vec2 truth(rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
    NavState s;
    s.position_m =
        truth + Vec2(rng.gaussian(0.0, p0), rng.gaussian(0.0, p0));
    s.covariance = p0 * p0 * Mat2::Identity();
    s.initialized = true;
    for (int k = 0; k < steps; ++k) {
      const double w = q_sigma * dt;
      truth += Vec2(rng.gaussian(0.0, w), rng.gaussian(0.0, w));
      s = ekf_predict(s, Vec2::Zero(), dt, q_sigma);
      std::vector<double> ranges, r_var;
      for (const auto& a : anchors) {
        ranges.push_back((truth - a).norm() + rng.gaussian(0.0, sigma_r));
        r_var.push_back(sigma_r * sigma_r);
      }
      s = ekf_update(s, anchors, ranges, r_var);
    }
    const Vec2 err = s.position_m - truth;
    nees_sum += err.dot(s.covariance.inverse() * err);
  }
  const double nees_avg = nees_sum / runs;
  CHECK(nees_avg >= kLo);
  CHECK(nees_avg <= kHi);
}
