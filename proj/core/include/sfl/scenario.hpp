#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <sfl/counting.hpp>

namespace sfl {

struct HwpScanGrid {
  double start_deg{0.0};
  double stop_deg{180.0};
  double step_deg{11.25};
  std::uint64_t gates_per_point{1'000'000};
  bool co_polarized_selection{false};

  std::vector<HwpAngle> angles() const;
};

struct PowerScanGrid {
  double min_mw{0.018};
  double max_mw{0.18};
  int points{11};
  std::uint64_t gates_at_max{1'500'000};
  /// Scale gates per point as (max/P)^2 so pair counts stay level.
  bool equalize_counts{true};
  bool co_polarized_selection{true};

  std::vector<double> powers() const; // log-spaced, endpoints included
  std::vector<std::uint64_t> gates() const;
};

struct StageScanGrid {
  double start_mm{-0.1424};
  double stop_mm{0.1424};
  int points{40};
  std::uint64_t gates_per_point{10'000'000};
  bool co_polarized_selection{true};

  std::vector<double> positions() const;
};

/// Flat key-value experiment description with [section] headers. Units are
/// embedded in the key names. Unknown sections or keys are rejected.
struct Scenario {
  PumpConfig pump{};
  DetectorConfig det1{};
  DetectorConfig det2{};

  double pair_coeff_per_mw2{1.3};
  double raman_co_per_mw{0.07};
  double raman_cross_per_mw{0.049};
  std::optional<double> purity_p_override;
  std::optional<double> loop_phase_rad_override;

  double signal_wavelength_nm{1544.5};
  double idler_wavelength_nm{1531.9};
  std::optional<double> freq_diff_hz;

  FilterShape filter_shape{FilterShape::Square};
  std::optional<double> sigma_rad_per_s;
  std::optional<double> bandwidth_nm;

  // fiber polarization controller paddle angles
  double fpc_quarter1_deg{45.0};
  double fpc_half_deg{22.5};
  double fpc_quarter2_deg{135.0};
  double hwp1_deg{0.0};

  HwpScanGrid hwp_scan{};
  PowerScanGrid power_scan{};
  StageScanGrid stage_scan{};

  std::uint64_t seed{20260811};
  int threads{0}; // 0 = hardware concurrency

  JonesMatrix fpc() const;
  JonesVector pump_polarization() const;
  FrequencyPair frequency_pair() const;
  FilterSpectrum filter() const;
  /// Assemble a counting setup; purity and loop phase derive from the
  /// controller and pump polarization unless overridden.
  ExperimentSetup setup(bool co_polarized_selection) const;

  static Scenario from_file(const std::filesystem::path& path);
  static Scenario from_string(const std::string& text,
                              const std::string& name = "<string>");
};

} // namespace sfl
