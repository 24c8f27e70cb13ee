#pragma once

#include <optional>

#include <sfl/interference.hpp>

namespace sfl {

/// Free parameters of the beat-curve model
///   C(l) = A [1 - V sinc(sigma dt) cos(w_d dt)],  dt = 2 (l - l0) / c,
/// with the signal-idler difference w_d held fixed.
struct BeatFitParams {
  double amplitude{1.0};
  double visibility{0.5};
  double sigma_rad_s{1.0};
  double origin_l0_mm{0.0};
  double fixed_freq_diff_rad_s{0.0};
};

struct FitReport {
  BeatFitParams params{};
  double visibility_std_err{0.0};
  double fitted_period_mm{0.0}; // model period pi c / w_d
  double residual_rms{0.0};
  bool converged{false};
  int iterations{0};
};

/// Weighted least-squares fit of (A, V, sigma, l0) to a counted beat curve.
/// Counting weights 1/max(C,1). Damped Gauss-Newton with multi-start on l0
/// across one beat period; ties resolved by lowest residual, then lowest l0.
/// Needs at least 8 points spanning at least one beat period.
FitReport fit_beat(const BeatCurve& data, const FrequencyPair& freq,
                   std::optional<BeatFitParams> init = std::nullopt);

/// Model value and its 4-parameter gradient at one stage position, for the
/// fit and for finite-difference cross-checks.
double beat_model(const BeatFitParams& p, double l_mm);
std::array<double, 4> beat_model_gradient(const BeatFitParams& p, double l_mm);

/// Dominant period of the mean-subtracted curve from a dense periodogram,
/// refined by golden-section search. Needs a span of at least two periods.
double extract_period_mm(const BeatCurve& data);

/// (1 + V) / 2.
double fidelity_from_visibility(double v);

} // namespace sfl
