#include "sopjam/vision.hpp"

#include <cmath>
#include <stdexcept>

#include "sopjam/csv.hpp"

namespace sopjam {

namespace {
constexpr const char* kDetectionHeader = "step,w_rp_px,center_offset_px";
}

double calibrate_focal_px(double ref_width_px, double ref_distance_m,
                          double ref_width_m) {
  if (ref_width_px <= 0.0 || ref_distance_m <= 0.0 || ref_width_m <= 0.0) {
    throw std::invalid_argument(
        "calibrate_focal_px: calibration quantities must be > 0");
  }
  return ref_width_px * ref_distance_m / ref_width_m;
}

double depth_from_width_m(double box_width_px, double target_width_m,
                          double focal_px) {
  if (box_width_px <= 0.0) {
    throw std::invalid_argument("depth_from_width_m: box width must be > 0");
  }
  return target_width_m * focal_px / box_width_px;
}

double lateral_from_offset_m(double center_offset_px, double depth_m,
                             double focal_px) {
  return depth_m * center_offset_px / focal_px;
}

double project_width_px(double distance_m, double target_width_m,
                        double focal_px) {
  if (distance_m <= 0.0) {
    throw std::invalid_argument("project_width_px: distance must be > 0");
  }
  return target_width_m * focal_px / distance_m;
}

double project_offset_px(double lateral_m, double distance_m, double focal_px) {
  if (distance_m <= 0.0) {
    throw std::invalid_argument("project_offset_px: distance must be > 0");
  }
  return lateral_m * focal_px / distance_m;
}

Detection generate_detection(int step, double true_distance_m,
                             double true_lateral_m, const VisionParams& params,
                             RandomStream& rng) {
  double focal = calibrate_focal_px(params.ref_width_px, params.ref_distance_m,
                                    params.ref_width_m);
  Detection det;
  det.step = step;
  det.w_rp_px = project_width_px(true_distance_m, params.target_width_m, focal) +
                rng.gaussian(0.0, params.pixel_noise_sigma_px);
  det.center_offset_px =
      project_offset_px(true_lateral_m, true_distance_m, focal) +
      rng.gaussian(0.0, params.pixel_noise_sigma_px);
  return det;
}

VisionEstimate smoothed_distance(const std::vector<VisionEstimate>& history,
                                 int window) {
  if (history.empty()) {
    throw std::invalid_argument("smoothed_distance: empty history");
  }
  if (window < 1) {
    throw std::invalid_argument("smoothed_distance: window must be >= 1");
  }
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(window), history.size());
  VisionEstimate mean;
  for (std::size_t i = history.size() - take; i < history.size(); ++i) {
    mean.distance_m += history[i].distance_m;
    mean.lateral_m += history[i].lateral_m;
  }
  mean.distance_m /= static_cast<double>(take);
  mean.lateral_m /= static_cast<double>(take);
  return mean;
}

VisionTracker::VisionTracker(const VisionParams& params)
    : params_(params),
      focal_px_(calibrate_focal_px(params.ref_width_px, params.ref_distance_m,
                                   params.ref_width_m)) {}

std::optional<VisionEstimate> VisionTracker::update(const Detection& det) {
  if (det.w_rp_px < params_.min_detect_px || det.w_rp_px <= 0.0) {
    return last_;  // dropped frame: hold the previous estimate
  }
  VisionEstimate frame;
  frame.distance_m = depth_from_width_m(det.w_rp_px, params_.target_width_m,
                                        focal_px_);
  frame.lateral_m = lateral_from_offset_m(det.center_offset_px,
                                          frame.distance_m, focal_px_);
  window_.push_back(frame);
  while (static_cast<int>(window_.size()) > params_.smoothing_window) {
    window_.erase(window_.begin());
  }
  last_ = smoothed_distance(window_, params_.smoothing_window);
  return last_;
}

void write_detection_log(const std::string& path,
                         const std::vector<Detection>& detections) {
  std::string out(kDetectionHeader);
  out += '\n';
  for (const auto& d : detections) {
    out += std::to_string(d.step);
    out += ',';
    out += format_double(d.w_rp_px);
    out += ',';
    out += format_double(d.center_offset_px);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<Detection> load_detection_log(const std::string& path) {
  auto rows = read_csv_rows(path, kDetectionHeader, /*allow_empty=*/true);
  std::vector<Detection> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = path + ":" + std::to_string(r.line);
    if (r.fields.size() != 3) {
      throw std::runtime_error("detection log row must have 3 fields at " + where);
    }
    Detection d;
    d.step = static_cast<int>(parse_int(r.fields[0], "'step' at " + where));
    d.w_rp_px = parse_double(r.fields[1], "'w_rp_px' at " + where);
    d.center_offset_px =
        parse_double(r.fields[2], "'center_offset_px' at " + where);
    out.push_back(d);
  }
  return out;
}

}  // namespace sopjam
