// controller.hpp - shared-radio mode state machine: runs RSS self-positioning
// while the radio sweeps, switches the radio to jamming when the camera range
// closes inside d_jam, tracks the filter's drift error e_m while jamming, and
// hands the radio back to positioning once e_m reaches the threshold T_d.

#pragma once

#include <deque>
#include <string>
#include <vector>

#include "sopjam/positioning.hpp"
#include "sopjam/scenario.hpp"
#include "sopjam/sweep.hpp"

namespace sopjam {

enum class RadioMode { RPS_ACTIVE, JAMMING };
enum class RadioAction { SWEEP, JAM };

std::string to_string(RadioMode mode);
RadioMode radio_mode_from_string(const std::string& s);

// Transition causes recorded in the event log.
inline constexpr const char* kCauseEnterJam = "d_c_le_d_jam";
inline constexpr const char* kCauseExitJam = "e_m_ge_t_d";

struct SwitchEvent {
  int step = 0;
  RadioMode from = RadioMode::RPS_ACTIVE;
  RadioMode to = RadioMode::JAMMING;
  std::string cause;
  double d_c_m = 0.0;
  double e_m_m = 0.0;
  double t_d_m = 0.0;
};

struct SwitchingState {
  RadioMode mode = RadioMode::RPS_ACTIVE;
  double t_d_m = 0.0;
  bool t_d_calibrated = false;
  double e_m_m = 0.0;
  std::deque<double> residual_window;  // innovation magnitudes, newest last
  double mean_range_m = 0.0;           // d-bar: mean of the last used ranges
  int switch_count = 0;
  std::vector<SwitchEvent> events;
};

// Percentile of `values` with linear interpolation between order statistics
// (a in [0, 100]).  Throws std::invalid_argument on empty input.
double percentile_linear(std::vector<double> values, double a);

// Switching threshold from the innovation window gathered before jamming:
// T_d = mean(residuals) + a-th percentile(residuals).
// Throws std::invalid_argument("no calibration residuals") on empty window.
double compute_threshold(const std::vector<double>& residuals,
                         double a_percentile);

// Drift error from the filter covariance: e_m = sqrt(trace(P)).
SwitchingState update_drift_error(const SwitchingState& state,
                                  const NavState& nav);

// Apply the mode transitions for one step:
// RPS_ACTIVE -> JAMMING  iff d_c <= d_jam (boundary inclusive);
// JAMMING -> RPS_ACTIVE  iff e_m >= T_d (jamming continues strictly while
// e_m < T_d).  Transitions append to the event log.  Throws std::logic_error
// if jamming would start before T_d has been calibrated.
SwitchingState step_mode(const SwitchingState& state, double d_c_m,
                         const ControllerParams& params, int step);

struct ControllerInputs {
  const std::vector<BandMoments>* moments = nullptr;  // must be null in JAMMING
  double d_c_m = 0.0;   // smoothed camera distance (infinity when undetected)
  Vec2 velocity_m_s = Vec2::Zero();
  double dt_s = 0.0;
  int step = 0;
};

struct ControllerConfigs {
  const std::vector<Transmitter>* transmitters = nullptr;
  std::vector<int> selected_bands;
  EkfConfig ekf;
  ControllerParams params;
};

struct ControllerTickResult {
  SwitchingState state;
  NavState nav;
  RadioAction action = RadioAction::SWEEP;
  EstimateDebug estimate_debug;  // valid only after a SWEEP tick
};

// One controller step.  In RPS_ACTIVE the radio sweeps: the position estimate
// is refreshed from the supplied moments, the innovation window and T_d are
// updated.  In JAMMING the radio jams: the filter coasts on the inertial
// input only.  Mode transitions are applied at the end of the tick, so they
// take effect on the next tick's radio action.
// Throws std::logic_error if moments are supplied while JAMMING (the shared
// radio cannot sweep and jam simultaneously) and std::invalid_argument if
// moments are missing while RPS_ACTIVE.
ControllerTickResult controller_tick(const SwitchingState& state,
                                     const NavState& nav,
                                     const ControllerInputs& inputs,
                                     const ControllerConfigs& configs);

}  // namespace sopjam
