#pragma once

#include <array>
#include <cstddef>

#include <sfl/common.hpp>

namespace sfl {

/// Signal/idler angular frequencies produced by a degenerate-pump four-wave
/// mixing process, so 2*omega_pump = omega_s + omega_i.
class FrequencyPair {
public:
  FrequencyPair(double omega_s_rad_s, double omega_i_rad_s);

  static FrequencyPair from_wavelengths_nm(double signal_nm, double idler_nm);
  /// Build from a pump center wavelength plus a signal-idler difference in Hz.
  static FrequencyPair from_center_nm_and_difference_hz(double center_nm,
                                                        double diff_hz);

  double omega_s() const { return omega_s_; }
  double omega_i() const { return omega_i_; }
  double pump_frequency() const { return 0.5 * (omega_s_ + omega_i_); }
  /// omega_i - omega_s in rad/s. The beat laws are even in this quantity.
  double omega_diff() const { return omega_i_ - omega_s_; }

private:
  double omega_s_;
  double omega_i_;
};

/// Pair-creation amplitude of one pump pass. Perturbative regime only, so the
/// magnitude is capped (default 0.2).
class SfwmGain {
public:
  explicit SfwmGain(cplx eta, double max_abs = 0.2);
  /// eta = g * P with a single real calibration constant g.
  static SfwmGain from_pump_power(double power_mw, double g_per_mw,
                                  double max_abs = 0.2);
  cplx value() const { return eta_; }

private:
  cplx eta_;
};

/// Phase difference between the counter-propagating pump fields, kept in
/// [0, 2*pi).
class LoopPhase {
public:
  explicit LoopPhase(double radians);
  double radians() const { return phi_; }

private:
  double phi_;
};

/// Two-photon amplitudes over the loop output modes c and d.
///
/// Basis: vacuum, |w_s,w_i>_cc, |w_s,w_i>_dd, |w_s>_c|w_i>_d, |w_i>_c|w_s>_d.
struct TwoPhotonState {
  cplx amp_vac{};
  cplx amp_cc{};
  cplx amp_dd{};
  cplx amp_sc_id{};
  cplx amp_ic_sd{};

  double norm_sq() const;
  bool is_normalized(double tol = 1e-12) const;
  TwoPhotonState normalized() const;

  /// Pair-sector amplitudes in the DensityOperator basis order.
  std::array<cplx, 4> pair_amplitudes() const {
    return {amp_cc, amp_dd, amp_sc_id, amp_ic_sd};
  }

  /// (|w_s,w_i>_c - |w_s,w_i>_d)/sqrt(2): both photons bunch into one port.
  static TwoPhotonState bunched_pair();
  /// (|w_s>_c|w_i>_d + |w_i>_c|w_s>_d)/sqrt(2): the frequency-entangled target.
  static TwoPhotonState frequency_entangled();
};

cplx inner(const TwoPhotonState& a, const TwoPhotonState& b);
/// |<a|b>| for normalized states; 1 means equal up to a global phase.
double overlap_up_to_phase(const TwoPhotonState& a, const TwoPhotonState& b);

enum class Direction { clockwise, counter_clockwise };

/// Vacuum/pair amplitudes of one propagation direction before recombination.
struct PumpDirectionState {
  cplx vacuum_amp;
  cplx pair_amp;
};

/// Pair state created by the pump running one way around the loop. The
/// counter-clockwise pump has crossed the coupler once, picking up two pi/2
/// phases in the pair amplitude.
PumpDirectionState sfwm_pair_state(const SfwmGain& eta, Direction dir,
                                   const LoopPhase& phi);

/// Two-photon amplitudes over the counter-propagating loop modes a and b.
struct SagnacModeState {
  cplx amp_vac{};
  cplx amp_aa{};
  cplx amp_bb{};
  cplx amp_sa_ib{};
  cplx amp_ia_sb{};
};

/// 50/50 coupler acting on both photons: a -> (d + i c)/sqrt(2),
/// b -> (c + i d)/sqrt(2), expanded bilinearly over the two-photon kets.
TwoPhotonState coupler_transform(const SagnacModeState& in);

/// Normalized single-pair output of the loop,
/// [cos(phi) (dd - cc) + sin(phi) (sc_id + ic_sd)]/sqrt(2).
/// Post-selection is undefined without a pump, so eta must be nonzero.
TwoPhotonState sagnac_output(const SfwmGain& eta, const LoopPhase& phi);

/// Density operator on the post-selected two-photon sector.
/// Basis order: cc, dd, sc_id, ic_sd. The vacuum is excluded.
class DensityOperator {
public:
  static constexpr std::size_t dim = 4;

  static DensityOperator from_matrix(const std::array<cplx, 16>& m,
                                     double purity_p);
  static DensityOperator pure(const TwoPhotonState& psi);

  cplx element(std::size_t row, std::size_t col) const {
    return m_[row * dim + col];
  }
  double trace() const;
  bool is_hermitian(double tol = 1e-12) const;
  /// Cholesky-based check that all eigenvalues are >= -tol.
  bool is_positive_semidefinite(double tol = 1e-10) const;
  double purity_weight() const { return purity_p_; }

private:
  DensityOperator(const std::array<cplx, 16>& m, double purity_p)
      : m_(m), purity_p_(purity_p) {}

  std::array<cplx, 16> m_;
  double purity_p_;
};

/// rho = p |psi><psi| + (1-p)/2 (|sc_id><sc_id| + |ic_sd><ic_sd|).
DensityOperator mix_with_background(const TwoPhotonState& psi, double p);

/// <psi|rho|psi>, clamped to [0, 1].
double fidelity(const DensityOperator& rho, const TwoPhotonState& psi);

} // namespace sfl
