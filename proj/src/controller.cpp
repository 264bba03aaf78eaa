#include "sopjam/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sopjam {

std::string to_string(RadioMode mode) {
  return mode == RadioMode::RPS_ACTIVE ? "RPS_ACTIVE" : "JAMMING";
}

RadioMode radio_mode_from_string(const std::string& s) {
  if (s == "RPS_ACTIVE") return RadioMode::RPS_ACTIVE;
  if (s == "JAMMING") return RadioMode::JAMMING;
  throw std::invalid_argument("unknown radio mode: " + s);
}

double percentile_linear(std::vector<double> values, double a) {
  if (values.empty()) {
    throw std::invalid_argument("percentile_linear: empty input");
  }
  if (a < 0.0 || a > 100.0) {
    throw std::invalid_argument("percentile_linear: a must be in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double rank = a / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double compute_threshold(const std::vector<double>& residuals,
                         double a_percentile) {
  if (residuals.empty()) {
    throw std::invalid_argument("no calibration residuals");
  }
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(residuals.size());
  return mean + percentile_linear(residuals, a_percentile);
}

SwitchingState update_drift_error(const SwitchingState& state,
                                  const NavState& nav) {
  SwitchingState out = state;
  out.e_m_m = std::sqrt(std::max(0.0, nav.covariance.trace()));
  return out;
}

SwitchingState step_mode(const SwitchingState& state, double d_c_m,
                         const ControllerParams& params, int step) {
  SwitchingState out = state;
  if (state.mode == RadioMode::RPS_ACTIVE) {
    if (d_c_m <= params.d_jam_m) {
      if (!state.t_d_calibrated) {
        throw std::logic_error(
            "step_mode: jamming requested before T_d calibration");
      }
      out.mode = RadioMode::JAMMING;
      ++out.switch_count;
      out.events.push_back({step, RadioMode::RPS_ACTIVE, RadioMode::JAMMING,
                            kCauseEnterJam, d_c_m, state.e_m_m, state.t_d_m});
    }
  } else {
    if (state.e_m_m >= state.t_d_m) {
      out.mode = RadioMode::RPS_ACTIVE;
      ++out.switch_count;
      out.events.push_back({step, RadioMode::JAMMING, RadioMode::RPS_ACTIVE,
                            kCauseExitJam, d_c_m, state.e_m_m, state.t_d_m});
    }
  }
  return out;
}

ControllerTickResult controller_tick(const SwitchingState& state,
                                     const NavState& nav,
                                     const ControllerInputs& inputs,
                                     const ControllerConfigs& configs) {
  if (!configs.transmitters) {
    throw std::invalid_argument("controller_tick: transmitters not configured");
  }
  ControllerTickResult res;
  res.state = state;

  if (state.mode == RadioMode::RPS_ACTIVE) {
    if (!inputs.moments) {
      throw std::invalid_argument(
          "controller_tick: sweep moments required in RPS_ACTIVE mode");
    }
    res.action = RadioAction::SWEEP;
    res.nav = estimate_position(*inputs.moments, configs.selected_bands,
                                *configs.transmitters, nav, inputs.velocity_m_s,
                                inputs.dt_s, configs.ekf, configs.params.n_pl,
                                &res.estimate_debug);

    // Refresh the calibration window only while the radio still sweeps
    // (residuals gathered prior to any jamming attack).
    for (double r : res.estimate_debug.innovation_m) {
      res.state.residual_window.push_back(r);
    }
    const std::size_t cap =
        static_cast<std::size_t>(configs.params.calib_window_steps) *
        std::max<std::size_t>(res.estimate_debug.innovation_m.size(), 1);
    while (res.state.residual_window.size() > cap) {
      res.state.residual_window.pop_front();
    }
    res.state.mean_range_m = res.estimate_debug.mean_range_m;
    res.state.t_d_m = compute_threshold(
        std::vector<double>(res.state.residual_window.begin(),
                            res.state.residual_window.end()),
        configs.params.a_percentile);
    res.state.t_d_calibrated = true;
  } else {
    if (inputs.moments) {
      throw std::logic_error(
          "controller_tick: contract violation - sweep moments supplied while "
          "the radio is jamming");
    }
    res.action = RadioAction::JAM;
    res.nav = ekf_predict(nav, inputs.velocity_m_s, inputs.dt_s,
                          configs.ekf.q_velocity_sigma_m_s);
  }

  res.state = update_drift_error(res.state, res.nav);
  res.state = step_mode(res.state, inputs.d_c_m, configs.params, inputs.step);
  return res;
}

}  // namespace sopjam
