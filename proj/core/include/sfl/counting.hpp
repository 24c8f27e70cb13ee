#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include <sfl/interference.hpp>
#include <sfl/jones.hpp>
#include <sfl/state.hpp>

namespace sfl {

struct PumpConfig {
  double avg_power_mw{0.1};
  double rep_rate_hz{40e6};
  double pulse_width_s{4e-12};
  double center_wavelength_nm{1538.2};

  void validate() const;
};

/// Gated Geiger-mode single-photon detector. A click disables the detector
/// for the gates falling inside the dead window; a gate starting exactly at
/// the window edge is still skipped.
struct DetectorConfig {
  double efficiency{0.1};
  double dark_prob_per_gate{1e-5};
  double gate_width_s{2.5e-9};
  double gate_rate_hz{1.29e6};
  double dead_time_s{10e-6};

  void validate(const PumpConfig& pump) const;
  /// Number of gates skipped after a click.
  std::uint64_t dead_gates() const;
};

/// Per-pulse photon production model. Pair emission is thermal with mean
/// pair_coeff * P^2; Raman photons are Poisson and linear in P, split into
/// co- and cross-polarized rates per detection band. purity_p and loop_phase
/// normally come from the polarization analysis of the configured loop.
struct ScatterModel {
  double pair_coeff_per_mw2{1.3};
  double raman_co_per_mw{0.07};
  double raman_cross_per_mw{0.049};
  double purity_p{1.0};
  LoopPhase loop_phase{std::numbers::pi / 2.0};
  /// Polarizers in front of the detectors block cross-polarized Raman.
  bool co_polarized_selection{true};
  /// Diagnostic mode: replace pairs by two independent single-photon
  /// streams with the same marginal rates, killing true coincidences.
  bool pairing_disabled{false};

  void validate() const;
};

/// Where the loop output photons are sent.
///   both_d:   both detection bands filtered out of port d.
///   cross_cd: the signal band detected at port c, the idler band at port d.
///   stage:    ports c and d combined on a second 50/50 coupler, with the
///             c arm delayed by a translation stage.
struct Routing {
  enum class Kind { both_d, cross_cd, stage };
  Kind kind{Kind::cross_cd};
  double stage_position_mm{0.0};

  static Routing dd() { return {Kind::both_d, 0.0}; }
  static Routing cd() { return {Kind::cross_cd, 0.0}; }
  static Routing stage_scan(double position_mm) {
    return {Kind::stage, position_mm};
  }
};

struct ScanResult {
  double setting{};
  std::uint64_t singles_1{};
  std::uint64_t singles_2{};
  std::uint64_t coincidences{};
  double accidentals_est{};
  std::uint64_t n_gates{};
};

struct ExperimentSetup {
  PumpConfig pump{};
  DetectorConfig det1{};
  DetectorConfig det2{};
  ScatterModel scatter{};
  FrequencyPair freq = FrequencyPair::from_wavelengths_nm(1544.5, 1531.9);
  FilterSpectrum filter{FilterShape::Square, 2.0 * std::numbers::pi * 1.09e11};

  void validate() const;
};

/// Simulate n_gates detector gates. Deterministic for a fixed seed and
/// config, independent of the thread count: gates are partitioned into
/// fixed-size batches with seed-derived RNG substreams, detector dead-time
/// state resets at batch boundaries, and batch results merge by summation.
ScanResult simulate_gates(const ExperimentSetup& setup, const Routing& routing,
                          std::uint64_t n_gates, std::uint64_t seed,
                          int threads = 1);

/// Rotate the pump half-wave plate through the given angles at a fixed loop
/// controller. Per angle, the pump polarization sets the purity and loop
/// phase fed to the counting model. setting = angle in degrees.
std::vector<ScanResult> hwp_sweep(const ExperimentSetup& setup,
                                  const JonesMatrix& fpc,
                                  const std::vector<HwpAngle>& angles,
                                  Routing::Kind routing,
                                  std::uint64_t gates_per_point,
                                  std::uint64_t seed, int threads = 1);

/// Sweep the average pump power. gates_per_point may vary per power so low
/// powers can integrate longer. setting = power in mW.
std::vector<ScanResult> power_sweep(const ExperimentSetup& setup,
                                    const std::vector<double>& powers_mw,
                                    const std::vector<std::uint64_t>& gates_per_point,
                                    Routing::Kind routing, std::uint64_t seed,
                                    int threads = 1);

struct StageScanOutput {
  std::vector<ScanResult> rows;
  /// Dark-subtracted coincidence counts per stage position (clamped at 0).
  BeatCurve curve;
};

/// Scan the translation stage in the combined-port arrangement.
/// setting = stage position in mm.
StageScanOutput stage_scan(const ExperimentSetup& setup,
                           const std::vector<double>& positions_mm,
                           std::uint64_t gates_per_point, std::uint64_t seed,
                           int threads = 1);

/// Seed-derivation hash for independent RNG substreams.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b);

} // namespace sfl
