#include <sfl/scenario.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sfl {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& name, int line,
                       const std::string& what) {
  std::ostringstream os;
  os << "scenario " << name << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

double parse_number(const std::string& name, int line,
                    const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(name, line, "expected a number, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& name, int line, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(name, line, "expected true/false, got '" + value + "'");
}

std::uint64_t parse_count(const std::string& name, int line,
                          const std::string& value) {
  const double v = parse_number(name, line, value);
  if (v < 0.0 || v != std::floor(v))
    fail(name, line, "expected a non-negative integer, got '" + value + "'");
  return static_cast<std::uint64_t>(v);
}

} // namespace

std::vector<HwpAngle> HwpScanGrid::angles() const {
  if (step_deg <= 0.0)
    throw std::invalid_argument("hwp_scan: step must be positive");
  std::vector<HwpAngle> out;
  for (double a = start_deg; a <= stop_deg + 1e-9; a += step_deg)
    out.push_back(HwpAngle::from_degrees(a));
  return out;
}

std::vector<double> PowerScanGrid::powers() const {
  if (min_mw <= 0.0 || max_mw <= min_mw || points < 2)
    throw std::invalid_argument("power_scan: need 0 < min < max and >= 2 points");
  std::vector<double> out;
  const double ratio = std::log(max_mw / min_mw);
  for (int i = 0; i < points; ++i)
    out.push_back(min_mw * std::exp(ratio * static_cast<double>(i) /
                                    static_cast<double>(points - 1)));
  out.back() = max_mw;
  return out;
}

std::vector<std::uint64_t> PowerScanGrid::gates() const {
  std::vector<std::uint64_t> out;
  for (double p : powers()) {
    if (!equalize_counts) {
      out.push_back(gates_at_max);
      continue;
    }
    const double scale = (max_mw / p) * (max_mw / p);
    out.push_back(static_cast<std::uint64_t>(
        std::llround(static_cast<double>(gates_at_max) * scale)));
  }
  return out;
}

std::vector<double> StageScanGrid::positions() const {
  if (points < 2 || stop_mm <= start_mm)
    throw std::invalid_argument("stage_scan: need >= 2 points and stop > start");
  std::vector<double> out;
  for (int i = 0; i < points; ++i)
    out.push_back(start_mm + (stop_mm - start_mm) * static_cast<double>(i) /
                                 static_cast<double>(points - 1));
  return out;
}

JonesMatrix Scenario::fpc() const {
  return JonesMatrix::paddle_stack(fpc_quarter1_deg * kDegToRad,
                                   fpc_half_deg * kDegToRad,
                                   fpc_quarter2_deg * kDegToRad);
}

JonesVector Scenario::pump_polarization() const {
  return hwp_matrix(HwpAngle::from_degrees(hwp1_deg)).apply({1.0, 0.0});
}

FrequencyPair Scenario::frequency_pair() const {
  if (freq_diff_hz)
    return FrequencyPair::from_center_nm_and_difference_hz(
        pump.center_wavelength_nm, *freq_diff_hz);
  return FrequencyPair::from_wavelengths_nm(signal_wavelength_nm,
                                            idler_wavelength_nm);
}

FilterSpectrum Scenario::filter() const {
  if (sigma_rad_per_s) {
    FilterSpectrum f{filter_shape, *sigma_rad_per_s, 0.0};
    f.validate();
    return f;
  }
  if (bandwidth_nm) {
    FilterSpectrum f = FilterSpectrum::square_from_bandwidth_nm(
        *bandwidth_nm, signal_wavelength_nm);
    f.shape = filter_shape;
    return f;
  }
  return FilterSpectrum{filter_shape, 2.0 * std::numbers::pi * 1.09e11, 0.0};
}

ExperimentSetup Scenario::setup(bool co_polarized_selection) const {
  ExperimentSetup s;
  s.pump = pump;
  s.det1 = det1;
  s.det2 = det2;
  s.scatter.pair_coeff_per_mw2 = pair_coeff_per_mw2;
  s.scatter.raman_co_per_mw = raman_co_per_mw;
  s.scatter.raman_cross_per_mw = raman_cross_per_mw;
  s.scatter.co_polarized_selection = co_polarized_selection;
  const JonesMatrix jc = fpc();
  const JonesVector e_in = pump_polarization();
  s.scatter.purity_p =
      purity_p_override ? *purity_p_override : effective_purity(jc, e_in);
  s.scatter.loop_phase = LoopPhase(loop_phase_rad_override
                                       ? *loop_phase_rad_override
                                       : effective_loop_phase(jc, e_in));
  s.freq = frequency_pair();
  s.filter = filter();
  s.validate();
  return s;
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("scenario: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), path.string());
}

Scenario Scenario::from_string(const std::string& text,
                               const std::string& name) {
  Scenario sc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(name, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "pump" && section != "bands" && section != "detector_1" &&
          section != "detector_2" && section != "scatter" &&
          section != "fpc" && section != "input" && section != "filter" &&
          section != "hwp_scan" && section != "power_scan" &&
          section != "stage_scan" && section != "run")
        fail(name, line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(name, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(name, line, "key outside any [section]");

    auto num = [&] { return parse_number(name, line, value); };
    auto cnt = [&] { return parse_count(name, line, value); };
    auto flag = [&] { return parse_bool(name, line, value); };
    auto positive = [&](double v) {
      if (v <= 0.0) fail(name, line, key + " must be positive");
      return v;
    };
    auto probability = [&](double v) {
      if (v < 0.0 || v > 1.0) fail(name, line, key + " must be in [0,1]");
      return v;
    };

    bool known = true;
    if (section == "pump") {
      if (key == "avg_power_mw") sc.pump.avg_power_mw = positive(num());
      else if (key == "rep_rate_hz") sc.pump.rep_rate_hz = positive(num());
      else if (key == "pulse_width_s") sc.pump.pulse_width_s = positive(num());
      else if (key == "center_wavelength_nm")
        sc.pump.center_wavelength_nm = positive(num());
      else known = false;
    } else if (section == "bands") {
      if (key == "signal_wavelength_nm")
        sc.signal_wavelength_nm = positive(num());
      else if (key == "idler_wavelength_nm")
        sc.idler_wavelength_nm = positive(num());
      else if (key == "freq_diff_hz") sc.freq_diff_hz = positive(num());
      else known = false;
    } else if (section == "detector_1" || section == "detector_2") {
      DetectorConfig& det = (section == "detector_1") ? sc.det1 : sc.det2;
      if (key == "efficiency") det.efficiency = probability(num());
      else if (key == "dark_prob_per_gate")
        det.dark_prob_per_gate = probability(num());
      else if (key == "gate_width_s") det.gate_width_s = positive(num());
      else if (key == "gate_rate_hz") det.gate_rate_hz = positive(num());
      else if (key == "dead_time_s") {
        const double v = num();
        if (v < 0.0) fail(name, line, "dead_time_s must be >= 0");
        det.dead_time_s = v;
      } else known = false;
    } else if (section == "scatter") {
      if (key == "pair_coeff_per_mw2") sc.pair_coeff_per_mw2 = num();
      else if (key == "raman_co_per_mw") sc.raman_co_per_mw = num();
      else if (key == "raman_cross_per_mw") sc.raman_cross_per_mw = num();
      else if (key == "purity_p") sc.purity_p_override = probability(num());
      else if (key == "loop_phase_rad") sc.loop_phase_rad_override = num();
      else known = false;
    } else if (section == "fpc") {
      if (key == "quarter1_deg") sc.fpc_quarter1_deg = num();
      else if (key == "half_deg") sc.fpc_half_deg = num();
      else if (key == "quarter2_deg") sc.fpc_quarter2_deg = num();
      else known = false;
    } else if (section == "input") {
      if (key == "hwp1_deg") sc.hwp1_deg = num();
      else known = false;
    } else if (section == "filter") {
      if (key == "shape") {
        if (value == "square") sc.filter_shape = FilterShape::Square;
        else if (value == "gaussian") sc.filter_shape = FilterShape::Gaussian;
        else fail(name, line, "shape must be square or gaussian");
      } else if (key == "sigma_rad_per_s")
        sc.sigma_rad_per_s = positive(num());
      else if (key == "bandwidth_nm") sc.bandwidth_nm = positive(num());
      else known = false;
    } else if (section == "hwp_scan") {
      if (key == "start_deg") sc.hwp_scan.start_deg = num();
      else if (key == "stop_deg") sc.hwp_scan.stop_deg = num();
      else if (key == "step_deg") sc.hwp_scan.step_deg = positive(num());
      else if (key == "gates_per_point")
        sc.hwp_scan.gates_per_point = cnt();
      else if (key == "co_polarized_selection")
        sc.hwp_scan.co_polarized_selection = flag();
      else known = false;
    } else if (section == "power_scan") {
      if (key == "min_mw") sc.power_scan.min_mw = positive(num());
      else if (key == "max_mw") sc.power_scan.max_mw = positive(num());
      else if (key == "points")
        sc.power_scan.points = static_cast<int>(cnt());
      else if (key == "gates_at_max") sc.power_scan.gates_at_max = cnt();
      else if (key == "equalize_counts")
        sc.power_scan.equalize_counts = flag();
      else if (key == "co_polarized_selection")
        sc.power_scan.co_polarized_selection = flag();
      else known = false;
    } else if (section == "stage_scan") {
      if (key == "start_mm") sc.stage_scan.start_mm = num();
      else if (key == "stop_mm") sc.stage_scan.stop_mm = num();
      else if (key == "points")
        sc.stage_scan.points = static_cast<int>(cnt());
      else if (key == "gates_per_point")
        sc.stage_scan.gates_per_point = cnt();
      else if (key == "co_polarized_selection")
        sc.stage_scan.co_polarized_selection = flag();
      else known = false;
    } else if (section == "run") {
      if (key == "seed") sc.seed = cnt();
      else if (key == "threads") sc.threads = static_cast<int>(cnt());
      else known = false;
    }
    if (!known)
      fail(name, line, "unknown key '" + key + "' in [" + section + "]");
  }
  try {
    sc.pump.validate();
    sc.det1.validate(sc.pump);
    sc.det2.validate(sc.pump);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("scenario " + name + ": " + e.what());
  }
  return sc;
}

} // namespace sfl
