// vision.hpp - monocular ranging of the rogue drone: pinhole calibration,
// box-width depth, lateral offset, detection log I/O, and a windowed tracker
// that smooths per-frame depth into the distance the controller consumes.

#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "sopjam/scenario.hpp"

namespace sopjam {

// One bounding-box detection in the pursuer camera.
struct Detection {
  int step = 0;
  double w_rp_px = 0.0;          // box width in pixels
  double center_offset_px = 0.0; // box center minus image center
};

struct VisionEstimate {
  double distance_m = 0.0;  // smoothed camera distance to the rogue
  double lateral_m = 0.0;   // signed offset perpendicular to the optical axis
};

// Pinhole calibration from a reference object: f = w_px * d / w_m.
double calibrate_focal_px(double ref_width_px, double ref_distance_m,
                          double ref_width_m);

// Depth from box width: d = w_m * f / w_px.  Throws std::invalid_argument
// for non-positive width.
double depth_from_width_m(double box_width_px, double target_width_m,
                          double focal_px);

// Lateral position from pixel offset at known depth: x = d * off / f.
double lateral_from_offset_m(double center_offset_px, double depth_m,
                             double focal_px);

// Forward projections (exact inverses of the two functions above).
double project_width_px(double distance_m, double target_width_m,
                        double focal_px);
double project_offset_px(double lateral_m, double distance_m, double focal_px);

// Synthesize one camera detection from ground truth plus pixel noise
// (width noise drawn first, then offset noise).
Detection generate_detection(int step, double true_distance_m,
                             double true_lateral_m, const VisionParams& params,
                             RandomStream& rng);

// Arithmetic mean of the last min(window, history size) entries, per
// component.  Throws std::invalid_argument on empty history or window < 1.
VisionEstimate smoothed_distance(const std::vector<VisionEstimate>& history,
                                 int window);

// Sliding-window depth smoother.  Frames whose box is narrower than
// min_detect_px are dropped: the window is left untouched and the previous
// estimate is held.
class VisionTracker {
 public:
  explicit VisionTracker(const VisionParams& params);

  // Ingest one frame; returns the current (possibly held) estimate, or
  // nullopt when nothing has been detected yet.
  std::optional<VisionEstimate> update(const Detection& det);

  std::optional<VisionEstimate> current() const { return last_; }
  double focal_px() const { return focal_px_; }

 private:
  VisionParams params_;
  double focal_px_ = 0.0;
  std::vector<VisionEstimate> window_;
  std::optional<VisionEstimate> last_;
};

// Detection log CSV ("step,w_rp_px,center_offset_px").
void write_detection_log(const std::string& path,
                         const std::vector<Detection>& detections);
std::vector<Detection> load_detection_log(const std::string& path);

}  // namespace sopjam
