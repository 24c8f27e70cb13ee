#include <sfl/interference.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sfl {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Detector-side field operator: two annihilation terms (mode, frequency)
// with complex coefficients.
enum class Mode { c, d };

struct OperatorTerm {
  Mode mode;
  bool at_signal; // annihilates the signal frequency, else the idler
  cplx coeff;
};

using DetectorOperator = std::array<OperatorTerm, 2>;

// Basis kets of the post-selected two-photon sector as (mode, freq) photon
// pairs, in DensityOperator order: cc, dd, sc_id, ic_sd.
struct KetPhoton {
  Mode mode;
  bool at_signal;
};
struct BasisKet {
  KetPhoton first, second;
};

constexpr std::array<BasisKet, 4> kBasis = {{
    {{Mode::c, true}, {Mode::c, false}},
    {{Mode::d, true}, {Mode::d, false}},
    {{Mode::c, true}, {Mode::d, false}},
    {{Mode::c, false}, {Mode::d, true}},
}};

bool annihilates(const OperatorTerm& t, const KetPhoton& p) {
  return t.mode == p.mode && t.at_signal == p.at_signal;
}

// <0| A B |ket> for single annihilation terms A, B: both photons must be
// consumed, in either pairing.
cplx vacuum_amplitude(const OperatorTerm& a, const OperatorTerm& b,
                      const BasisKet& ket) {
  cplx out{};
  if (annihilates(a, ket.first) && annihilates(b, ket.second))
    out += a.coeff * b.coeff;
  if (annihilates(a, ket.second) && annihilates(b, ket.first))
    out += a.coeff * b.coeff;
  return out;
}

// Coefficient vector m with m_k = <0| E_D1 E_D2 |basis_k>, built from the
// beam-combiner relation with the stage delay on the c arm and the
// frequency filters in front of the detectors.
std::array<cplx, 4> detection_vector(const Delay& delay,
                                     const FrequencyPair& freq, double t_s,
                                     double tau_s) {
  const double dt = delay.delta_tau_s;
  const double t1 = t_s + tau_s; // detector 1 fires at t + tau
  const double t2 = t_s;
  const double r = 1.0 / std::numbers::sqrt2;
  // detector 1 sits behind the signal filter, detector 2 behind the idler one
  const DetectorOperator d1 = {{
      {Mode::c, true, r * std::exp(-kI * (freq.omega_s() * (t1 + dt)))},
      {Mode::d, true, r * kI * std::exp(-kI * (freq.omega_s() * t1))},
  }};
  const DetectorOperator d2 = {{
      {Mode::d, false, r * std::exp(-kI * (freq.omega_i() * t2))},
      {Mode::c, false, r * kI * std::exp(-kI * (freq.omega_i() * (t2 + dt)))},
  }};
  std::array<cplx, 4> m{};
  for (std::size_t k = 0; k < 4; ++k)
    for (const auto& ta : d1)
      for (const auto& tb : d2) m[k] += vacuum_amplitude(ta, tb, kBasis[k]);
  return m;
}

} // namespace

Delay Delay::from_stage_mm(double mm) {
  return {2.0 * (mm * 1e-3) / speed_of_light_mps};
}

double Delay::stage_mm() const {
  return 0.5 * delta_tau_s * speed_of_light_mps * 1e3;
}

FilterSpectrum FilterSpectrum::square_from_bandwidth_nm(
    double fwhm_nm, double center_wavelength_nm) {
  if (fwhm_nm <= 0.0 || center_wavelength_nm <= 0.0)
    throw std::invalid_argument("FilterSpectrum: bandwidth must be positive");
  const double lambda = center_wavelength_nm * 1e-9;
  const double dnu = speed_of_light_mps * (fwhm_nm * 1e-9) / (lambda * lambda);
  return {FilterShape::Square, 0.5 * kTwoPi * dnu, kTwoPi * speed_of_light_mps / lambda};
}

void FilterSpectrum::validate() const {
  if (sigma_rad_s <= 0.0)
    throw std::invalid_argument("FilterSpectrum: sigma must be positive");
}

double FilterSpectrum::envelope(double delta_tau_s) const {
  const double x = sigma_rad_s * delta_tau_s;
  if (shape == FilterShape::Square) return sinc(x);
  return std::exp(-0.5 * x * x);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(x) / x;
}

double temporal_beat_p2(double tau_s, const FrequencyPair& freq) {
  return 1.0 + std::cos((freq.omega_s() - freq.omega_i()) * tau_s);
}

double spatial_beat_p2(const Delay& delay, const FrequencyPair& freq) {
  return 1.0 - std::cos((freq.omega_s() - freq.omega_i()) * delay.delta_tau_s);
}

double mixed_beat_p2(const Delay& delay, const FrequencyPair& freq, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("mixed_beat_p2: p must be in [0,1]");
  return 1.0 -
         p * std::cos((freq.omega_s() - freq.omega_i()) * delay.delta_tau_s);
}

double multimode_p2(const Delay& delay, const FrequencyPair& freq,
                    double visibility, const FilterSpectrum& filt) {
  if (visibility < 0.0 || visibility > 1.0)
    throw std::invalid_argument("multimode_p2: visibility must be in [0,1]");
  filt.validate();
  const double dt = delay.delta_tau_s;
  return 1.0 - visibility * filt.envelope(dt) * std::cos(freq.omega_diff() * dt);
}

double visibility_limit(double pairs_per_pulse) {
  if (pairs_per_pulse < 0.0 || pairs_per_pulse > 0.5)
    throw std::invalid_argument("visibility_limit: rate must be in [0, 0.5]");
  return 1.0 - 2.0 * pairs_per_pulse;
}

double oracle_p2(const Delay& delay, const TwoPhotonState& state,
                 const FrequencyPair& freq, double t_s, double tau_s) {
  const auto m = detection_vector(delay, freq, t_s, tau_s);
  const auto v = state.pair_amplitudes();
  cplx a{};
  for (std::size_t k = 0; k < 4; ++k) a += m[k] * v[k];
  return 4.0 * std::norm(a);
}

double oracle_p2(const Delay& delay, const DensityOperator& rho,
                 const FrequencyPair& freq, double t_s, double tau_s) {
  const auto m = detection_vector(delay, freq, t_s, tau_s);
  cplx p{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      p += m[i] * rho.element(i, j) * std::conj(m[j]);
  return 4.0 * p.real();
}

} // namespace sfl
