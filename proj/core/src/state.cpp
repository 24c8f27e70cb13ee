#include <sfl/state.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sfl {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wavelength_nm_to_omega(double nm) {
  return kTwoPi * speed_of_light_mps / (nm * 1e-9);
}

} // namespace

FrequencyPair::FrequencyPair(double omega_s_rad_s, double omega_i_rad_s)
    : omega_s_(omega_s_rad_s), omega_i_(omega_i_rad_s) {
  if (omega_s_ <= 0.0 || omega_i_ <= 0.0)
    throw std::invalid_argument("FrequencyPair: frequencies must be positive");
  if (omega_s_ == omega_i_)
    throw std::invalid_argument("FrequencyPair: signal and idler must differ");
}

FrequencyPair FrequencyPair::from_wavelengths_nm(double signal_nm,
                                                 double idler_nm) {
  if (signal_nm <= 0.0 || idler_nm <= 0.0)
    throw std::invalid_argument("FrequencyPair: wavelengths must be positive");
  return FrequencyPair(wavelength_nm_to_omega(signal_nm),
                       wavelength_nm_to_omega(idler_nm));
}

FrequencyPair FrequencyPair::from_center_nm_and_difference_hz(double center_nm,
                                                              double diff_hz) {
  if (diff_hz == 0.0)
    throw std::invalid_argument("FrequencyPair: difference must be nonzero");
  const double omega_p = wavelength_nm_to_omega(center_nm);
  const double half = 0.5 * kTwoPi * std::abs(diff_hz);
  // signal below the pump, idler above, as with a 1544.5/1531.9 nm pair
  return FrequencyPair(omega_p - half, omega_p + half);
}

SfwmGain::SfwmGain(cplx eta, double max_abs) : eta_(eta) {
  if (!(std::abs(eta) < max_abs))
    throw std::invalid_argument(
        "SfwmGain: |eta| must stay well below 1 (perturbative pair creation)");
}

SfwmGain SfwmGain::from_pump_power(double power_mw, double g_per_mw,
                                   double max_abs) {
  if (power_mw < 0.0)
    throw std::invalid_argument("SfwmGain: pump power must be >= 0");
  return SfwmGain(cplx{g_per_mw * power_mw, 0.0}, max_abs);
}

LoopPhase::LoopPhase(double radians) {
  phi_ = std::fmod(radians, kTwoPi);
  if (phi_ < 0.0) phi_ += kTwoPi;
}

double TwoPhotonState::norm_sq() const {
  return std::norm(amp_vac) + std::norm(amp_cc) + std::norm(amp_dd) +
         std::norm(amp_sc_id) + std::norm(amp_ic_sd);
}

bool TwoPhotonState::is_normalized(double tol) const {
  return std::abs(norm_sq() - 1.0) <= tol;
}

TwoPhotonState TwoPhotonState::normalized() const {
  const double n = std::sqrt(norm_sq());
  if (n == 0.0)
    throw std::invalid_argument("TwoPhotonState: cannot normalize zero state");
  return {amp_vac / n, amp_cc / n, amp_dd / n, amp_sc_id / n, amp_ic_sd / n};
}

TwoPhotonState TwoPhotonState::bunched_pair() {
  const double r = 1.0 / std::numbers::sqrt2;
  return {0.0, r, -r, 0.0, 0.0};
}

TwoPhotonState TwoPhotonState::frequency_entangled() {
  const double r = 1.0 / std::numbers::sqrt2;
  return {0.0, 0.0, 0.0, r, r};
}

cplx inner(const TwoPhotonState& a, const TwoPhotonState& b) {
  return std::conj(a.amp_vac) * b.amp_vac + std::conj(a.amp_cc) * b.amp_cc +
         std::conj(a.amp_dd) * b.amp_dd +
         std::conj(a.amp_sc_id) * b.amp_sc_id +
         std::conj(a.amp_ic_sd) * b.amp_ic_sd;
}

double overlap_up_to_phase(const TwoPhotonState& a, const TwoPhotonState& b) {
  return std::abs(inner(a, b));
}

PumpDirectionState sfwm_pair_state(const SfwmGain& eta, Direction dir,
                                   const LoopPhase& phi) {
  if (dir == Direction::clockwise) return {1.0, eta.value()};
  // cross-coupled pump: eta tracks the squared pump amplitude, so the pi/2
  // coupler phase enters twice and the loop phase enters twice
  const cplx phase = std::exp(kI * (2.0 * phi.radians()));
  return {1.0, -phase * eta.value()};
}

TwoPhotonState coupler_transform(const SagnacModeState& in) {
  TwoPhotonState out;
  out.amp_vac = in.amp_vac;

  // a_s a_i -> (d_s + i c_s)(d_i + i c_i)/2
  out.amp_dd += 0.5 * in.amp_aa;
  out.amp_sc_id += 0.5 * kI * in.amp_aa;
  out.amp_ic_sd += 0.5 * kI * in.amp_aa;
  out.amp_cc += -0.5 * in.amp_aa;

  // b_s b_i -> (c_s + i d_s)(c_i + i d_i)/2
  out.amp_cc += 0.5 * in.amp_bb;
  out.amp_sc_id += 0.5 * kI * in.amp_bb;
  out.amp_ic_sd += 0.5 * kI * in.amp_bb;
  out.amp_dd += -0.5 * in.amp_bb;

  // a_s b_i -> (d_s + i c_s)(c_i + i d_i)/2
  out.amp_ic_sd += 0.5 * in.amp_sa_ib;
  out.amp_dd += 0.5 * kI * in.amp_sa_ib;
  out.amp_cc += 0.5 * kI * in.amp_sa_ib;
  out.amp_sc_id += -0.5 * in.amp_sa_ib;

  // a_i b_s -> (d_i + i c_i)(c_s + i d_s)/2
  out.amp_sc_id += 0.5 * in.amp_ia_sb;
  out.amp_dd += 0.5 * kI * in.amp_ia_sb;
  out.amp_cc += 0.5 * kI * in.amp_ia_sb;
  out.amp_ic_sd += -0.5 * in.amp_ia_sb;

  return out;
}

TwoPhotonState sagnac_output(const SfwmGain& eta, const LoopPhase& phi) {
  if (eta.value() == cplx{0.0, 0.0})
    throw std::invalid_argument(
        "sagnac_output: no pairs without pump, post-selection undefined");
  const double c = std::cos(phi.radians());
  const double s = std::sin(phi.radians());
  const double r = 1.0 / std::numbers::sqrt2;
  // single-pair sector of the recombined state; the global sqrt(2) eta
  // exp(i phi) factor is dropped after post-selection
  TwoPhotonState out;
  out.amp_cc = -c * r;
  out.amp_dd = c * r;
  out.amp_sc_id = s * r;
  out.amp_ic_sd = s * r;
  return out;
}

DensityOperator DensityOperator::from_matrix(const std::array<cplx, 16>& m,
                                             double purity_p) {
  if (purity_p < 0.0 || purity_p > 1.0)
    throw std::invalid_argument("DensityOperator: purity must be in [0,1]");
  DensityOperator rho(m, purity_p);
  if (!rho.is_hermitian(1e-12))
    throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-12)
    throw std::invalid_argument("DensityOperator: trace must be 1");
  if (!rho.is_positive_semidefinite(1e-10))
    throw std::invalid_argument("DensityOperator: matrix is not PSD");
  return rho;
}

DensityOperator DensityOperator::pure(const TwoPhotonState& psi) {
  if (std::abs(psi.norm_sq() - std::norm(psi.amp_vac) - 1.0) > 1e-9)
    throw std::invalid_argument(
        "DensityOperator: pair sector of psi must be normalized");
  const auto v = psi.pair_amplitudes();
  std::array<cplx, 16> m{};
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] = v[i] * std::conj(v[j]);
  return DensityOperator(m, 1.0);
}

double DensityOperator::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim; ++i) t += m_[i * dim + i].real();
  return t;
}

bool DensityOperator::is_hermitian(double tol) const {
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::abs(m_[i * dim + i].imag()) > tol) return false;
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::abs(m_[i * dim + j] - std::conj(m_[j * dim + i])) > tol)
        return false;
    }
  }
  return true;
}

bool DensityOperator::is_positive_semidefinite(double tol) const {
  // Cholesky on rho + tol*I succeeds iff lambda_min(rho) >= -tol
  std::array<cplx, 16> a = m_;
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] += tol;
  for (std::size_t j = 0; j < dim; ++j) {
    double diag = a[j * dim + j].real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(a[j * dim + k]);
    if (diag < 0.0) return false;
    const double l = std::sqrt(diag);
    a[j * dim + j] = l;
    for (std::size_t i = j + 1; i < dim; ++i) {
      cplx s = a[i * dim + j];
      for (std::size_t k = 0; k < j; ++k)
        s -= a[i * dim + k] * std::conj(a[j * dim + k]);
      a[i * dim + j] = (l > 0.0) ? s / l : cplx{0.0, 0.0};
    }
  }
  return true;
}

DensityOperator mix_with_background(const TwoPhotonState& psi, double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("mix_with_background: p must be in [0,1]");
  if (std::abs(psi.norm_sq() - std::norm(psi.amp_vac) - 1.0) > 1e-9)
    throw std::invalid_argument(
        "mix_with_background: psi pair sector must be normalized");
  const auto v = psi.pair_amplitudes();
  std::array<cplx, 16> m{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      m[i * 4 + j] = p * v[i] * std::conj(v[j]);
  // unpolarized-path background: equal classical mixture of the two
  // cross-mode kets
  m[2 * 4 + 2] += 0.5 * (1.0 - p);
  m[3 * 4 + 3] += 0.5 * (1.0 - p);
  return DensityOperator::from_matrix(m, p);
}

double fidelity(const DensityOperator& rho, const TwoPhotonState& psi) {
  const auto v = psi.pair_amplitudes();
  cplx f{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      f += std::conj(v[i]) * rho.element(i, j) * v[j];
  double out = f.real();
  if (out < 0.0) out = 0.0;
  if (out > 1.0) out = 1.0;
  return out;
}

} // namespace sfl
