#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "sopjam/csv.hpp"
#include "sopjam/rng.hpp"
#include "sopjam/vision.hpp"

using namespace sopjam;

namespace {

VisionParams clean_params() {
  VisionParams p;
  p.ref_width_px = 100.0;
  p.ref_distance_m = 10.0;
  p.ref_width_m = 0.5;
  p.target_width_m = 0.5;
  p.pixel_noise_sigma_px = 0.0;
  p.smoothing_window = 1;
  p.min_detect_px = 2.0;
  return p;
}

}  // namespace

TEST_CASE("focal length calibration worked examples") {
  CHECK(calibrate_focal_px(100.0, 10.0, 1.0) == doctest::Approx(1000.0));
  CHECK(calibrate_focal_px(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(calibrate_focal_px(500.0, 4.0, 0.5) == doctest::Approx(4000.0));
}

TEST_CASE("calibration rejects non-positive inputs") {
  CHECK_THROWS_AS(calibrate_focal_px(0.0, 10.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_focal_px(100.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_focal_px(100.0, 10.0, 0.0), std::invalid_argument);
}

TEST_CASE("depth from box width worked example") {
  // 0.5 m target, 1000 px focal, 100 px box -> 5 m.
  CHECK(depth_from_width_m(100.0, 0.5, 1000.0) == doctest::Approx(5.0));
  CHECK_THROWS_AS(depth_from_width_m(0.0, 0.5, 1000.0), std::invalid_argument);
  CHECK_THROWS_AS(depth_from_width_m(-3.0, 0.5, 1000.0),
                  std::invalid_argument);
}

TEST_CASE("halving the pixel width doubles the estimated depth") {
  const double d1 = depth_from_width_m(80.0, 0.5, 1000.0);
  const double d2 = depth_from_width_m(40.0, 0.5, 1000.0);
  CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-14));
}

TEST_CASE("projection and recovery are exact inverses") {
  const double f = 1237.5;
  const double w_m = 0.38;
  for (double d : {1.0, 3.7, 12.0, 55.0}) {
    const double w_px = project_width_px(d, w_m, f);
    CHECK(depth_from_width_m(w_px, w_m, f) ==
          doctest::Approx(d).epsilon(1e-13));
  }
  for (double lat : {-4.0, -0.5, 0.0, 2.25}) {
    const double off = project_offset_px(lat, 9.0, f);
    CHECK(lateral_from_offset_m(off, 9.0, f) ==
          doctest::Approx(lat).epsilon(1e-13));
  }
}

TEST_CASE("lateral offset worked examples and sign convention") {
  CHECK(lateral_from_offset_m(0.0, 12.0, 1000.0) == 0.0);
  // 100 px offset at 10 m with f = 1000 px -> 1 m off axis.
  CHECK(lateral_from_offset_m(100.0, 10.0, 1000.0) == doctest::Approx(1.0));
  CHECK(lateral_from_offset_m(-100.0, 10.0, 1000.0) ==
        doctest::Approx(-1.0));
}

TEST_CASE("history smoothing averages both components") {
  std::vector<VisionEstimate> hist = {{4.0, 1.0}, {6.0, 3.0}};
  auto mean2 = smoothed_distance(hist, 2);
  CHECK(mean2.distance_m == doctest::Approx(5.0));
  CHECK(mean2.lateral_m == doctest::Approx(2.0));

  auto last_only = smoothed_distance(hist, 1);
  CHECK(last_only.distance_m == doctest::Approx(6.0));
  CHECK(last_only.lateral_m == doctest::Approx(3.0));

  // Window larger than the history falls back to the full mean.
  auto all = smoothed_distance(hist, 10);
  CHECK(all.distance_m == doctest::Approx(5.0));
  CHECK(all.lateral_m == doctest::Approx(2.0));
}

TEST_CASE("history smoothing input contracts") {
  CHECK_THROWS_AS(smoothed_distance({}, 3), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_distance({{1.0, 0.0}}, 0), std::invalid_argument);
}

TEST_CASE("noise-free tracker round-trips ground truth exactly") {
  auto params = clean_params();
  VisionTracker tracker(params);
  CHECK(tracker.focal_px() == doctest::Approx(2000.0));  // 100*10/0.5
  RandomStream rng(1, "vision");
  for (int step = 0; step < 10; ++step) {
    const double d = 5.0 + 0.5 * step;
    const double lat = 0.1 * step;
    auto det = generate_detection(step, d, lat, params, rng);
    auto est = tracker.update(det);
    REQUIRE(est.has_value());
    CHECK(est->distance_m == doctest::Approx(d).epsilon(1e-12));
    CHECK(est->lateral_m == doctest::Approx(lat).epsilon(1e-12));
  }
}

TEST_CASE("depth error grows with range under fixed pixel noise") {
  auto params = clean_params();
  params.pixel_noise_sigma_px = 1.0;
  const double f = calibrate_focal_px(params.ref_width_px,
                                      params.ref_distance_m,
                                      params.ref_width_m);
  auto median_abs_err = [&](double d_true) {
    RandomStream rng(77, "vision");
    std::vector<double> errs;
    for (int i = 0; i < 400; ++i) {
      auto det = generate_detection(i, d_true, 0.0, params, rng);
      const double d_est =
          depth_from_width_m(det.w_rp_px, params.target_width_m, f);
      errs.push_back(std::abs(d_est - d_true));
    }
    std::nth_element(errs.begin(), errs.begin() + errs.size() / 2,
                     errs.end());
    return errs[errs.size() / 2];
  };
  const double near = median_abs_err(5.0);
  const double mid = median_abs_err(15.0);
  const double far = median_abs_err(40.0);
  CHECK(near < mid);
  CHECK(mid < far);
}

TEST_CASE("smoothing reduces depth jitter") {
  auto params = clean_params();
  params.pixel_noise_sigma_px = 1.5;
  auto rms_err = [&](int window) {
    auto p = params;
    p.smoothing_window = window;
    VisionTracker tracker(p);
    RandomStream rng(5, "vision");
    double sq = 0.0;
    int n = 0;
    for (int step = 0; step < 500; ++step) {
      auto det = generate_detection(step, 12.0, 0.0, p, rng);
      auto est = tracker.update(det);
      if (step < 10 || !est) continue;  // let the window fill
      sq += (est->distance_m - 12.0) * (est->distance_m - 12.0);
      ++n;
    }
    return std::sqrt(sq / n);
  };
  CHECK(rms_err(9) < rms_err(1));
}

TEST_CASE("narrow boxes are dropped and the last estimate is held") {
  auto params = clean_params();
  params.min_detect_px = 6.0;
  VisionTracker tracker(params);

  Detection good;
  good.step = 0;
  good.w_rp_px = project_width_px(8.0, params.target_width_m, 2000.0);
  good.center_offset_px = 0.0;
  auto est = tracker.update(good);
  REQUIRE(est.has_value());
  const double held = est->distance_m;

  Detection faint;
  faint.step = 1;
  faint.w_rp_px = 3.0;  // below min_detect_px
  faint.center_offset_px = 50.0;
  auto after = tracker.update(faint);
  REQUIRE(after.has_value());
  CHECK(after->distance_m == held);
  CHECK(tracker.current()->distance_m == held);
}

TEST_CASE("tracker reports nothing before the first usable frame") {
  auto params = clean_params();
  params.min_detect_px = 6.0;
  VisionTracker tracker(params);
  CHECK_FALSE(tracker.current().has_value());
  Detection faint;
  faint.step = 0;
  faint.w_rp_px = 1.0;
  CHECK_FALSE(tracker.update(faint).has_value());
}

TEST_CASE("detection log round-trips and flags malformed rows") {
  namespace fs = std::filesystem;
  const std::string path =
      (fs::temp_directory_path() / "sopjam_detections.csv").string();
  std::vector<Detection> dets = {{0, 42.5, -3.25}, {1, 40.0, 0.0},
                                 {5, 12.125, 7.5}};
  write_detection_log(path, dets);
  auto back = load_detection_log(path);
  REQUIRE(back.size() == dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(back[i].step == dets[i].step);
    CHECK(back[i].w_rp_px == dets[i].w_rp_px);
    CHECK(back[i].center_offset_px == dets[i].center_offset_px);
  }
  write_text_file(path, "step,w_rp_px,center_offset_px\n0,42.5\n");
  CHECK_THROWS_WITH_AS(load_detection_log(path), doctest::Contains(":2"),
                       std::runtime_error);
  std::remove(path.c_str());
}
