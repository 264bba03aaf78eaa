#include "sopjam/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sopjam {

double invert_pathloss(double rss_dbm, double ref_rss_p0_dbm, double d0_m,
                       double n_pl, bool* clamped) {
  if (n_pl <= 0.0) {
    throw std::invalid_argument("invert_pathloss: n_pl must be > 0");
  }
  if (d0_m <= 0.0) {
    throw std::invalid_argument("invert_pathloss: d0_m must be > 0");
  }
  double d = d0_m * std::pow(10.0, (ref_rss_p0_dbm - rss_dbm) / (10.0 * n_pl));
  bool was_clamped = false;
  if (!(d >= kMinRangeM)) {  // also catches NaN
    d = kMinRangeM;
    was_clamped = true;
  } else if (d > kMaxRangeM) {
    d = kMaxRangeM;
    was_clamped = true;
  }
  if (clamped) *clamped = was_clamped;
  return d;
}

double range_residual_cost(const Vec2& p, const std::vector<Vec2>& anchors,
                           const std::vector<double>& ranges_m) {
  double c = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double r = (p - anchors[i]).norm() - ranges_m[i];
    c += r * r;
  }
  return c;
}

Vec2 multilaterate_lsq(const std::vector<Vec2>& anchors,
                       const std::vector<double>& ranges_m) {
  const std::size_t n = anchors.size();
  if (n != ranges_m.size()) {
    throw std::invalid_argument("multilaterate_lsq: anchors/ranges size mismatch");
  }
  if (n < 4) {
    throw std::invalid_argument("multilaterate_lsq: need at least 4 anchors");
  }

  // Linear initialization: subtracting the first anchor's range equation
  // cancels the quadratic term, leaving rows
  //   2 (a_i - a_1)^T p = ||a_i||^2 - ||a_1||^2 - d_i^2 + d_1^2.
  Eigen::MatrixXd A(n - 1, 2);
  Eigen::VectorXd b(n - 1);
  const Vec2& a1 = anchors[0];
  const double d1sq = ranges_m[0] * ranges_m[0];
  for (std::size_t i = 1; i < n; ++i) {
    A.row(static_cast<Eigen::Index>(i - 1)) = 2.0 * (anchors[i] - a1).transpose();
    b(static_cast<Eigen::Index>(i - 1)) = anchors[i].squaredNorm() -
                                          a1.squaredNorm() -
                                          ranges_m[i] * ranges_m[i] + d1sq;
  }
  auto svd = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(1) <= 1e-9 * std::max(sv(0), 1.0)) {
    throw std::runtime_error(
        "multilaterate_lsq: degenerate geometry (collinear transmitters)");
  }
  Vec2 p = svd.solve(b);

  // Gauss-Newton polish of the nonlinear cost; the linear solve above is a
  // different estimator (it reweights residuals), so without this step the
  // result is not the cost minimizer.
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::MatrixXd J(n, 2);
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 diff = p - anchors[i];
      double dist = std::max(diff.norm(), 1e-9);
      J.row(static_cast<Eigen::Index>(i)) = diff.transpose() / dist;
      r(static_cast<Eigen::Index>(i)) = dist - ranges_m[i];
    }
    Mat2 JtJ = J.transpose() * J;
    JtJ += 1e-12 * Mat2::Identity();  // guard against collinear anchors
    Vec2 delta = JtJ.ldlt().solve(J.transpose() * r);
    p -= delta;
    if (delta.norm() < 1e-12) break;
  }
  return p;
}

NavState ekf_predict(const NavState& state, const Vec2& velocity_m_s,
                     double dt_s, double q_velocity_sigma_m_s) {
  if (dt_s <= 0.0) {
    throw std::invalid_argument("ekf_predict: dt_s must be > 0");
  }
  NavState out = state;
  out.position_m += velocity_m_s * dt_s;
  const double q = q_velocity_sigma_m_s * dt_s;
  out.covariance += (q * q) * Mat2::Identity();
  out.step = state.step + 1;
  return out;
}

Eigen::RowVector2d range_jacobian_row(const Vec2& p, const Vec2& anchor) {
  Vec2 diff = p - anchor;
  double dist = std::max(diff.norm(), 1e-6);
  return diff.transpose() / dist;
}

NavState ekf_update(const NavState& state, const std::vector<Vec2>& anchors,
                    const std::vector<double>& ranges_m,
                    const std::vector<double>& r_var_m2,
                    EkfUpdateStats* stats) {
  if (ranges_m.size() != anchors.size() || r_var_m2.size() != anchors.size()) {
    throw std::invalid_argument("ekf_update: observation size mismatch");
  }
  if (anchors.empty()) throw std::invalid_argument("ekf_update: no observations");

  // Drop rows whose anchor coincides with the estimate (Jacobian undefined).
  std::vector<std::size_t> keep;
  keep.reserve(anchors.size());
  int dropped = 0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if ((state.position_m - anchors[i]).norm() > 1e-6) {
      keep.push_back(i);
    } else {
      ++dropped;
    }
  }
  if (keep.empty()) {
    throw std::invalid_argument(
        "ekf_update: no usable observations (all anchors coincide with the "
        "estimate)");
  }

  const auto n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd H(n, 2);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t i = keep[static_cast<std::size_t>(k)];
    H.row(k) = range_jacobian_row(state.position_m, anchors[i]);
    y(k) = ranges_m[i] - (state.position_m - anchors[i]).norm();
    if (!(r_var_m2[i] > 0.0)) {
      throw std::invalid_argument("ekf_update: observation variance must be > 0");
    }
    R(k, k) = r_var_m2[i];
  }

  Eigen::MatrixXd S = H * state.covariance * H.transpose() + R;
  Eigen::LDLT<Eigen::MatrixXd> S_ldlt(S);
  if (S_ldlt.info() != Eigen::Success || !S_ldlt.isPositive()) {
    throw std::runtime_error("singular innovation");
  }
  Eigen::MatrixXd K = S_ldlt.solve(H * state.covariance).transpose();
  if (!K.allFinite()) {
    throw std::runtime_error("singular innovation");
  }

  NavState out = state;
  out.position_m += K * y;
  Mat2 P = (Mat2::Identity() - K * H) * state.covariance;
  out.covariance = 0.5 * (P + P.transpose());

  if (stats) {
    stats->innovations_m = y;
    stats->innovation_var_m2 = S.diagonal();
    stats->nis = y.dot(S_ldlt.solve(y));
    stats->dropped_rows = dropped;
  }
  return out;
}

NavState estimate_position(const std::vector<BandMoments>& moments,
                           const std::vector<int>& selected_bands,
                           const std::vector<Transmitter>& transmitters,
                           const NavState& state, const Vec2& velocity_m_s,
                           double dt_s, const EkfConfig& cfg, double n_pl,
                           EstimateDebug* debug) {
  if (selected_bands.size() < 4) {
    throw std::invalid_argument(
        "estimate_position: need at least 4 selected bands");
  }

  std::vector<Vec2> anchors;
  std::vector<double> ranges;
  std::vector<double> r_var;
  std::vector<int> bands_used;
  int clamped_count = 0;

  std::vector<int> wanted = selected_bands;
  std::sort(wanted.begin(), wanted.end());
  for (int band : wanted) {
    const BandMoments* m = nullptr;
    for (const auto& cand : moments) {
      if (cand.band == band) {
        m = &cand;
        break;
      }
    }
    if (!m) {
      throw std::invalid_argument("estimate_position: selected band " +
                                  std::to_string(band) +
                                  " missing from sweep moments");
    }
    const Transmitter* tx = nullptr;
    for (const auto& cand : transmitters) {
      if (cand.id == band) {
        tx = &cand;
        break;
      }
    }
    if (!tx) {
      throw std::invalid_argument("estimate_position: selected band " +
                                  std::to_string(band) +
                                  " has no known transmitter");
    }
    bool clamped = false;
    double d = invert_pathloss(m->mean_dbm, tx->ref_rss_p0_dbm, tx->d0_m, n_pl,
                               &clamped);
    if (clamped) ++clamped_count;

    double sigma_d;
    if (cfg.fixed_range_noise_sigma_m > 0.0) {
      sigma_d = cfg.fixed_range_noise_sigma_m;
    } else {
      // Std of the band mean in dB, pushed through the log-distance slope:
      // |dd/dRSS| = d * ln10 / (10 n_pl).
      double sigma_db_mean =
          m->n_samples > 0
              ? std::sqrt(m->variance_db2 / double(m->n_samples))
              : 0.0;
      sigma_d = d * std::log(10.0) / (10.0 * n_pl) * sigma_db_mean;
    }
    sigma_d = std::max(sigma_d, cfg.range_noise_floor_m);

    anchors.emplace_back(tx->x_m, tx->y_m);
    ranges.push_back(d);
    r_var.push_back(sigma_d * sigma_d);
    bands_used.push_back(band);
  }

  Vec2 lsq = multilaterate_lsq(anchors, ranges);

  NavState current = state;
  if (!current.initialized) {
    current.position_m = lsq;
    current.covariance = (cfg.p0_sigma_m * cfg.p0_sigma_m) * Mat2::Identity();
    current.initialized = true;
  }

  NavState predicted = ekf_predict(current, velocity_m_s, dt_s,
                                   cfg.q_velocity_sigma_m_s);
  NavState updated = ekf_update(predicted, anchors, ranges, r_var);

  if (debug) {
    debug->lsq_position_m = lsq;
    debug->bands = bands_used;
    debug->ranges_m = ranges;
    debug->innovation_m.resize(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      debug->innovation_m[i] =
          std::abs(ranges[i] - (predicted.position_m - anchors[i]).norm());
    }
    double sum = 0.0;
    for (double d : ranges) sum += d;
    debug->mean_range_m = sum / static_cast<double>(ranges.size());
    debug->clamped_ranges = clamped_count;
  }
  return updated;
}

}  // namespace sopjam
