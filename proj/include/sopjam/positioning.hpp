// positioning.hpp - RSS self-localization: path-loss inversion to ranges,
// anchor-difference multilateration with Gauss-Newton polish, and a planar
// random-walk EKF over range observations.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "sopjam/scenario.hpp"
#include "sopjam/sweep.hpp"

namespace sopjam {

// Ranges recovered from RSS are clamped to this physically plausible window.
inline constexpr double kMinRangeM = 0.1;
inline constexpr double kMaxRangeM = 50000.0;

// Invert mean RSS through the log-distance model to a range estimate.
// Result is clamped to [kMinRangeM, kMaxRangeM]; *clamped reports whether
// the clamp was active.  Throws std::invalid_argument for n_pl <= 0 or
// d0 <= 0.
double invert_pathloss(double rss_dbm, double ref_rss_p0_dbm, double d0_m,
                       double n_pl, bool* clamped = nullptr);

// Position from >= 4 anchor/range pairs: linear anchor-difference
// initialization followed by Gauss-Newton refinement of the nonlinear
// range-residual least-squares cost
//   C(p) = sum_i (||p - a_i|| - d_i)^2.
// Throws std::invalid_argument on size mismatch or fewer than 4 anchors.
Vec2 multilaterate_lsq(const std::vector<Vec2>& anchors,
                       const std::vector<double>& ranges_m);

// Sum of squared range residuals at p (the multilateration cost).
double range_residual_cost(const Vec2& p, const std::vector<Vec2>& anchors,
                           const std::vector<double>& ranges_m);

// ---- EKF over the planar position ------------------------------------------

struct NavState {
  Vec2 position_m = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
  int step = 0;
  bool initialized = false;
};

// Motion update: position integrates commanded velocity; covariance grows by
// the velocity-domain process noise, Q = (q_sigma * dt)^2 I; step increments.
NavState ekf_predict(const NavState& state, const Vec2& velocity_m_s,
                     double dt_s, double q_velocity_sigma_m_s);

// Row of the range-measurement Jacobian at p for one anchor:
// d||p - a||/dp = (p - a)^T / ||p - a||, with the norm floored at 1e-6 m.
Eigen::RowVector2d range_jacobian_row(const Vec2& p, const Vec2& anchor);

struct EkfUpdateStats {
  Eigen::VectorXd innovations_m;      // pre-update residuals d_i - h_i(p), used rows
  Eigen::VectorXd innovation_var_m2;  // diagonal of S = H P H^T + R
  double nis = 0.0;                   // y^T S^-1 y
  int dropped_rows = 0;               // anchors coincident with the estimate
};

// Measurement update from range observations with per-observation variance
// r_var_m2.  Covariance is re-symmetrized after the Joseph-free update.
// Anchors within 1e-6 m of the estimate (undefined Jacobian) are dropped and
// counted in stats.  Throws std::invalid_argument on size mismatch or when
// no usable observation remains, std::runtime_error("singular innovation")
// when S is not invertible.
NavState ekf_update(const NavState& state, const std::vector<Vec2>& anchors,
                    const std::vector<double>& ranges_m,
                    const std::vector<double>& r_var_m2,
                    EkfUpdateStats* stats = nullptr);

// ---- Full estimation step ---------------------------------------------------

struct EstimateDebug {
  Vec2 lsq_position_m = Vec2::Zero();  // stand-alone multilateration monitor
  std::vector<int> bands;              // bands actually used, ascending
  std::vector<double> ranges_m;        // inverted ranges per band
  std::vector<double> innovation_m;    // |pre-update residual| per band
  double mean_range_m = 0.0;
  int clamped_ranges = 0;
};

// One self-localization step: invert per-band mean RSS to ranges, run the
// stand-alone multilateration (also used to initialize the filter on the
// first call), then EKF predict + update.  Per-band R is derived from the
// band's sweep scatter (std of the mean through the path-loss slope), floored
// at cfg.range_noise_floor_m, unless cfg.fixed_range_noise_sigma_m > 0.
// Throws std::invalid_argument if a selected band is missing from `moments`
// or from `transmitters`, or if fewer than 4 bands are selected.
NavState estimate_position(const std::vector<BandMoments>& moments,
                           const std::vector<int>& selected_bands,
                           const std::vector<Transmitter>& transmitters,
                           const NavState& state, const Vec2& velocity_m_s,
                           double dt_s, const EkfConfig& cfg, double n_pl,
                           EstimateDebug* debug = nullptr);

}  // namespace sopjam
