// Scenario runner for the Sagnac-loop pair-source model: prints loop output
// states, classifies polarization mode matching, runs the counting
// experiments, and fits beat curves.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <sfl/counting.hpp>
#include <sfl/fitting.hpp>
#include <sfl/io.hpp>
#include <sfl/scenario.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;

fs::path resolve_scenario(const std::string& arg) {
  fs::path p(arg);
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("SFLSIM_SCENARIO_DIR")) {
    const fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  throw std::runtime_error("scenario file not found: " + arg);
}

void print_amp(const char* label, sfl::cplx a) {
  std::printf("  %-22s % .6f %+.6fi   |amp|^2 = %.6f\n", label, a.real(),
              a.imag(), std::norm(a));
}

int cmd_state(double phi, double p) {
  const sfl::TwoPhotonState psi =
      sfl::sagnac_output(sfl::SfwmGain(sfl::cplx{0.1, 0.0}),
                         sfl::LoopPhase(phi));
  std::printf("loop output state at phi = %.9g rad:\n", phi);
  print_amp("|w_s,w_i>_c", psi.amp_cc);
  print_amp("|w_s,w_i>_d", psi.amp_dd);
  print_amp("|w_s>_c |w_i>_d", psi.amp_sc_id);
  print_amp("|w_i>_c |w_s>_d", psi.amp_ic_sd);
  const sfl::TwoPhotonState target = sfl::TwoPhotonState::frequency_entangled();
  const sfl::DensityOperator rho = sfl::mix_with_background(target, p);
  std::printf("entangled fraction p = %.6g, fidelity F = %.6f\n", p,
              sfl::fidelity(rho, target));
  return 0;
}

int cmd_jones(const std::string& scenario_path) {
  const sfl::Scenario sc = sfl::Scenario::from_file(resolve_scenario(scenario_path));
  const sfl::JonesMatrix jc = sc.fpc();
  const sfl::JonesVector e_in = sc.pump_polarization();
  const sfl::LoopFields fields = sfl::trace_loop(jc, e_in);
  if (!fields.fpc_unitary)
    std::fprintf(stderr,
                 "warning: configured controller is not unitary; "
                 "mode-matching relations assume a lossless loop\n");
  std::printf("controller matrix:\n");
  std::printf("  [% .6f%+.6fi  % .6f%+.6fi]\n", jc.xx.real(), jc.xx.imag(),
              jc.xy.real(), jc.xy.imag());
  std::printf("  [% .6f%+.6fi  % .6f%+.6fi]\n", jc.yx.real(), jc.yx.imag(),
              jc.yy.real(), jc.yy.imag());
  const sfl::MatchCondition cond = sfl::check_match_conditions(jc, e_in);
  std::printf("match condition:   %s\n", sfl::to_string(cond));
  std::printf("transmission:      %.9f\n", sfl::transmission(jc));
  std::printf("pump match defect: %.3e\n",
              sfl::mode_match_defect(fields.ea, fields.eb));
  std::printf("effective purity:  %.9f\n", sfl::effective_purity(jc, e_in));
  std::printf("loop phase:        %.9f rad (%.4f pi)\n",
              sfl::effective_loop_phase(jc, e_in),
              sfl::effective_loop_phase(jc, e_in) / std::numbers::pi);
  return 0;
}

fs::path with_suffix(const fs::path& base, const std::string& tag) {
  fs::path p = base;
  const std::string stem = p.stem().string();
  const std::string ext = p.extension().string();
  p.replace_filename(stem + tag + ext);
  return p;
}

json overlay_stage(const sfl::Scenario& sc) {
  const sfl::ExperimentSetup setup =
      sc.setup(sc.stage_scan.co_polarized_selection);
  const double v =
      setup.scatter.purity_p *
      std::pow(std::sin(setup.scatter.loop_phase.radians()), 2);
  json overlay = json::array();
  for (double mm : sc.stage_scan.positions()) {
    overlay.push_back(
        {{"setting", mm},
         {"p2_relative", sfl::multimode_p2(sfl::Delay::from_stage_mm(mm),
                                           setup.freq, v, setup.filter)}});
  }
  return {{"kind", "stage"},
          {"visibility", v},
          {"sigma_rad_per_s", setup.filter.sigma_rad_s},
          {"freq_diff_rad_per_s", setup.freq.omega_diff()},
          {"overlay", overlay}};
}

json overlay_hwp(const sfl::Scenario& sc) {
  const sfl::JonesMatrix jc = sc.fpc();
  json overlay = json::array();
  for (const auto& angle : sc.hwp_scan.angles()) {
    const sfl::JonesVector e_in =
        sfl::hwp_matrix(angle).apply({1.0, 0.0});
    const double p = sfl::effective_purity(jc, e_in);
    const double phi = sfl::effective_loop_phase(jc, e_in);
    const sfl::TwoPhotonState psi =
        sfl::sagnac_output(sfl::SfwmGain(sfl::cplx{0.1, 0.0}),
                           sfl::LoopPhase(phi));
    const double q_dd = p * std::norm(psi.amp_dd) + (1.0 - p) * 0.25;
    const double q_cd = p * std::norm(psi.amp_sc_id) + (1.0 - p) * 0.25;
    overlay.push_back({{"angle_deg", angle.degrees()},
                       {"purity", p},
                       {"dd_pair_fraction", q_dd},
                       {"cd_pair_fraction", q_cd}});
  }
  return {{"kind", "hwp"}, {"transmission", sfl::transmission(jc)},
          {"overlay", overlay}};
}

json overlay_power(const sfl::Scenario& sc) {
  json overlay = json::array();
  for (double p_mw : sc.power_scan.powers()) {
    overlay.push_back(
        {{"power_mw", p_mw},
         {"pairs_per_pulse", sc.pair_coeff_per_mw2 * p_mw * p_mw}});
  }
  return {{"kind", "power"}, {"overlay", overlay}};
}

int cmd_scan(const std::string& scenario_path, const std::string& kind,
             const std::string& out_csv, std::string out_json, int threads) {
  const sfl::Scenario sc = sfl::Scenario::from_file(resolve_scenario(scenario_path));
  const int n_threads = threads > 0 ? threads : sc.threads;
  const fs::path csv_path(out_csv);
  if (out_json.empty())
    out_json = (fs::path(csv_path).replace_extension(".json")).string();

  json sidecar;
  if (kind == "hwp") {
    const sfl::ExperimentSetup setup =
        sc.setup(sc.hwp_scan.co_polarized_selection);
    const auto angles = sc.hwp_scan.angles();
    const auto dd =
        sfl::hwp_sweep(setup, sc.fpc(), angles, sfl::Routing::Kind::both_d,
                       sc.hwp_scan.gates_per_point, sc.seed, n_threads);
    const auto cd =
        sfl::hwp_sweep(setup, sc.fpc(), angles, sfl::Routing::Kind::cross_cd,
                       sc.hwp_scan.gates_per_point,
                       sfl::substream_seed(sc.seed, 1, 0xcd), n_threads);
    sfl::write_scan_csv(with_suffix(csv_path, "_dd"), dd);
    sfl::write_scan_csv(with_suffix(csv_path, "_cd"), cd);
    std::printf("wrote %s and %s (%zu angles)\n",
                with_suffix(csv_path, "_dd").c_str(),
                with_suffix(csv_path, "_cd").c_str(), angles.size());
    sidecar = overlay_hwp(sc);
  } else if (kind == "power") {
    const sfl::ExperimentSetup setup =
        sc.setup(sc.power_scan.co_polarized_selection);
    const auto powers = sc.power_scan.powers();
    const auto gates = sc.power_scan.gates();
    const auto dd =
        sfl::power_sweep(setup, powers, gates, sfl::Routing::Kind::both_d,
                         sc.seed, n_threads);
    const auto cd =
        sfl::power_sweep(setup, powers, gates, sfl::Routing::Kind::cross_cd,
                         sfl::substream_seed(sc.seed, 1, 0xcd), n_threads);
    sfl::write_scan_csv(with_suffix(csv_path, "_dd"), dd);
    sfl::write_scan_csv(with_suffix(csv_path, "_cd"), cd);
    std::printf("wrote %s and %s (%zu powers)\n",
                with_suffix(csv_path, "_dd").c_str(),
                with_suffix(csv_path, "_cd").c_str(), powers.size());
    sidecar = overlay_power(sc);
  } else if (kind == "stage") {
    const sfl::ExperimentSetup setup =
        sc.setup(sc.stage_scan.co_polarized_selection);
    const auto result = sfl::stage_scan(setup, sc.stage_scan.positions(),
                                        sc.stage_scan.gates_per_point, sc.seed,
                                        n_threads);
    sfl::write_scan_csv(csv_path, result.rows);
    std::printf("wrote %s (%zu positions)\n", csv_path.c_str(),
                result.rows.size());
    sidecar = overlay_stage(sc);
  } else {
    throw std::runtime_error("unknown scan kind: " + kind);
  }
  std::ofstream js(out_json);
  if (!js) throw std::runtime_error("cannot open " + out_json);
  js << sidecar.dump(2) << "\n";
  std::printf("wrote %s\n", out_json.c_str());
  return 0;
}

int cmd_fit(const std::string& csv, double freq_diff_hz, double sigma_init,
            const std::string& out_json) {
  const auto rows = sfl::read_scan_csv(csv);
  const sfl::BeatCurve curve = sfl::beat_curve_from_scan(rows);
  const sfl::FrequencyPair freq =
      sfl::FrequencyPair::from_center_nm_and_difference_hz(1538.2,
                                                           freq_diff_hz);
  std::optional<sfl::BeatFitParams> init;
  if (sigma_init > 0.0) {
    // seed the envelope scale from the configured filter, everything else
    // from the data
    sfl::BeatFitParams p;
    double mean = 0.0, cmin = curve.points[0].p2, cmax = curve.points[0].p2;
    std::size_t imin = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const double c = curve.points[i].p2;
      mean += c;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      if (c < curve.points[imin].p2) imin = i;
    }
    p.amplitude = mean / static_cast<double>(curve.points.size());
    p.visibility = (cmax + cmin) > 0.0 ? (cmax - cmin) / (cmax + cmin) : 0.0;
    p.sigma_rad_s = sigma_init;
    p.origin_l0_mm = curve.points[imin].delta_l_mm;
    init = p;
  }
  const sfl::FitReport report = sfl::fit_beat(curve, freq, init);
  bool have_period = true;
  double period = 0.0;
  try {
    period = sfl::extract_period_mm(curve);
  } catch (const std::invalid_argument&) {
    have_period = false; // no dominant beat in the data
  }

  json j = {{"amplitude", report.params.amplitude},
            {"visibility", report.params.visibility},
            {"visibility_std_err", report.visibility_std_err},
            {"sigma_rad_per_s", report.params.sigma_rad_s},
            {"origin_l0_mm", report.params.origin_l0_mm},
            {"freq_diff_rad_per_s", report.params.fixed_freq_diff_rad_s},
            {"fitted_period_mm", report.fitted_period_mm},
            {"extracted_period_mm",
             have_period ? json(period) : json(nullptr)},
            {"residual_rms", report.residual_rms},
            {"fidelity", sfl::fidelity_from_visibility(
                             std::clamp(report.params.visibility, 0.0, 1.0))},
            {"converged", report.converged},
            {"iterations", report.iterations}};
  if (!out_json.empty()) {
    std::ofstream js(out_json);
    if (!js) throw std::runtime_error("cannot open " + out_json);
    js << j.dump(2) << "\n";
  }
  std::printf("V        = %.4f +/- %.4f\n", report.params.visibility,
              report.visibility_std_err);
  std::printf("F        = %.4f\n",
              sfl::fidelity_from_visibility(
                  std::clamp(report.params.visibility, 0.0, 1.0)));
  if (have_period)
    std::printf("period   = %.6f mm (model %.6f mm)\n", period,
                report.fitted_period_mm);
  else
    std::printf("period   = no dominant beat (model %.6f mm)\n",
                report.fitted_period_mm);
  std::printf("sigma    = %.6e rad/s\n", report.params.sigma_rad_s);
  std::printf("l0       = %.6f mm\n", report.params.origin_l0_mm);
  std::printf("residual = %.4f rms, %s after %d iterations\n",
              report.residual_rms,
              report.converged ? "converged" : "NOT converged",
              report.iterations);
  if (!report.converged) return kExitNoConvergence;
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sagnac fiber-loop photon-pair source simulator"};
  app.require_subcommand(1);

  double phi = 0.0, p = 1.0;
  auto* state = app.add_subcommand(
      "state", "Print the two-photon loop output state and mixture fidelity");
  state->add_option("--phi", phi, "loop phase in radians")->required();
  state->add_option("--p", p, "entangled fraction of the mixed state")
      ->check(CLI::Range(0.0, 1.0));

  std::string scenario;
  auto* jones = app.add_subcommand(
      "jones", "Report polarization mode matching for the configured loop");
  jones->add_option("--scenario", scenario, "scenario file")->required();

  std::string scan_scenario, scan_kind, scan_csv = "scan.csv", scan_json;
  int threads = 0;
  auto* scan = app.add_subcommand("scan", "Run a counting experiment sweep");
  scan->add_option("--scenario", scan_scenario, "scenario file")->required();
  scan->add_option("--kind", scan_kind, "hwp | power | stage")
      ->required()
      ->check(CLI::IsMember({"hwp", "power", "stage"}));
  scan->add_option("--out", scan_csv, "output CSV path");
  scan->add_option("--json", scan_json, "sidecar JSON path");
  scan->add_option("--threads", threads, "worker threads (0 = auto)");

  std::string fit_csv, fit_json;
  double freq_diff_hz = 1.58e12, sigma_init = 0.0;
  auto* fit = app.add_subcommand("fit", "Fit a stage-scan beat curve");
  fit->add_option("--csv", fit_csv, "stage-scan CSV")->required();
  fit->add_option("--freq-diff-hz", freq_diff_hz,
                  "signal-idler frequency difference in Hz");
  fit->add_option("--sigma-init", sigma_init,
                  "initial envelope scale in rad/s (default: from data span)");
  fit->add_option("--json", fit_json, "write the fit report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (state->parsed()) return cmd_state(phi, p);
    if (jones->parsed()) return cmd_jones(scenario);
    if (scan->parsed())
      return cmd_scan(scan_scenario, scan_kind, scan_csv, scan_json, threads);
    if (fit->parsed()) return cmd_fit(fit_csv, freq_diff_hz, sigma_init, fit_json);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
