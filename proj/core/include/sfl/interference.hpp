#pragma once

#include <vector>

#include <sfl/common.hpp>
#include <sfl/state.hpp>

namespace sfl {

/// Optical delay between the two paths feeding the output beam combiner.
/// A translation-stage move of delta_l produces delta_tau = 2 delta_l / c.
struct Delay {
  double delta_tau_s{};

  static Delay from_seconds(double s) { return {s}; }
  static Delay from_stage_mm(double mm);
  double stage_mm() const;
};

enum class FilterShape { Square, Gaussian };

/// Spectral window of the detection filters, reduced to the envelope scale
/// sigma it imprints on the coincidence beat.
struct FilterSpectrum {
  FilterShape shape{FilterShape::Square};
  double sigma_rad_s{1.0};
  double center_rad_s{0.0};

  /// Square window of full width delta_omega gives sigma = delta_omega / 2.
  static FilterSpectrum square_from_bandwidth_nm(double fwhm_nm,
                                                 double center_wavelength_nm);
  void validate() const;

  /// Beat envelope factor: sinc(sigma dt) for Square, a Gaussian otherwise,
  /// both 1 at zero delay.
  double envelope(double delta_tau_s) const;
};

/// One point of a coincidence-versus-stage-position curve.
struct BeatPoint {
  double delta_l_mm{};
  double p2{}; // relative coincidence, or dark-subtracted counts
};

struct BeatCurve {
  std::vector<BeatPoint> points;
};

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

/// Time-resolved coincidence between the two loop ports on the entangled
/// state: 1 + cos((w_s - w_i) tau).
double temporal_beat_p2(double tau_s, const FrequencyPair& freq);

/// Coincidence after the output beam combiner: 1 - cos((w_s - w_i) dt).
/// Detection times drop out; only the path delay remains.
double spatial_beat_p2(const Delay& delay, const FrequencyPair& freq);

/// Beat of the p-mixed state: 1 - p cos((w_s - w_i) dt). Fringe visibility
/// equals p.
double mixed_beat_p2(const Delay& delay, const FrequencyPair& freq, double p);

/// Broadband form: 1 - V f(dt) cos((w_i - w_s) dt) with f the filter
/// envelope.
double multimode_p2(const Delay& delay, const FrequencyPair& freq,
                    double visibility, const FilterSpectrum& filt);

/// Thermal multi-pair bound on the beat visibility: 1 - 2 * pairs_per_pulse.
double visibility_limit(double pairs_per_pulse);

/// Brute-force coincidence probability: composes the beam-combiner relation
/// with per-detector frequency filtering and evaluates the detector-operator
/// matrix element on the two-photon basis directly. Scaled so that
/// uncorrelated cross-mode pairs give 1. The detection times t and t+tau must
/// not affect the result; they are exposed so tests can verify that.
double oracle_p2(const Delay& delay, const TwoPhotonState& state,
                 const FrequencyPair& freq, double t_s = 0.0,
                 double tau_s = 0.0);
double oracle_p2(const Delay& delay, const DensityOperator& rho,
                 const FrequencyPair& freq, double t_s = 0.0,
                 double tau_s = 0.0);

} // namespace sfl
