#include <sfl/io.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sfl {

namespace {

constexpr const char* kHeader =
    "setting,singles_1,singles_2,coincidences,accidentals_est,n_gates";

} // namespace

void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<ScanResult>& rows) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("write_scan_csv: cannot open " + path.string());
  out << kHeader << "\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.10g,%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%.10g,%" PRIu64,
                  r.setting, r.singles_1, r.singles_2, r.coincidences,
                  r.accidentals_est, r.n_gates);
    out << buf << "\n";
  }
  if (!out)
    throw std::runtime_error("write_scan_csv: write failed on " +
                             path.string());
}

std::vector<ScanResult> read_scan_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("read_scan_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("read_scan_csv: bad header in " + path.string());
  std::vector<ScanResult> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    ScanResult r;
    auto next = [&](const char* what) {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("read_scan_csv: missing " +
                                 std::string(what) + " at line " +
                                 std::to_string(lineno));
      return field;
    };
    try {
      r.setting = std::stod(next("setting"));
      r.singles_1 = std::stoull(next("singles_1"));
      r.singles_2 = std::stoull(next("singles_2"));
      r.coincidences = std::stoull(next("coincidences"));
      r.accidentals_est = std::stod(next("accidentals_est"));
      r.n_gates = std::stoull(next("n_gates"));
    } catch (const std::exception&) {
      throw std::runtime_error("read_scan_csv: malformed row at line " +
                               std::to_string(lineno));
    }
    rows.push_back(r);
  }
  return rows;
}

BeatCurve beat_curve_from_scan(const std::vector<ScanResult>& rows) {
  BeatCurve curve;
  curve.points.reserve(rows.size());
  for (const auto& r : rows)
    curve.points.push_back({r.setting, static_cast<double>(r.coincidences)});
  return curve;
}

} // namespace sfl
