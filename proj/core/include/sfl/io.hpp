#pragma once

#include <filesystem>
#include <vector>

#include <sfl/counting.hpp>

namespace sfl {

/// Columns: setting,singles_1,singles_2,coincidences,accidentals_est,n_gates.
/// Output is byte-stable for identical inputs.
void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<ScanResult>& rows);

std::vector<ScanResult> read_scan_csv(const std::filesystem::path& path);

/// Reinterpret scan rows as a beat curve: setting -> stage position in mm,
/// coincidences -> counts.
BeatCurve beat_curve_from_scan(const std::vector<ScanResult>& rows);

} // namespace sfl
