#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include <sfl/fitting.hpp>
#include <sfl/io.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sfl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunResult run_cli(const TempDir& tmp, const std::string& args) {
  const fs::path out = tmp.path / "stdout.txt";
  const fs::path err = tmp.path / "stderr.txt";
  const std::string cmd = std::string(SFLSIM_BIN) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  int code = -1;
  if (status != -1 && WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, slurp(out), slurp(err)};
}

// quick scenario for cheap scans
const char* kSmallScenario =
    "[pump]\n"
    "avg_power_mw = 0.1\n"
    "[scatter]\n"
    "pair_coeff_per_mw2 = 1.3\n"
    "raman_co_per_mw = 0.07\n"
    "[bands]\n"
    "freq_diff_hz = 1.58e12\n"
    "[stage_scan]\n"
    "start_mm = -0.08\n"
    "stop_mm = 0.08\n"
    "points = 9\n"
    "gates_per_point = 20000\n"
    "[hwp_scan]\n"
    "start_deg = 0\n"
    "stop_deg = 45\n"
    "step_deg = 22.5\n"
    "gates_per_point = 20000\n"
    "[power_scan]\n"
    "min_mw = 0.05\n"
    "max_mw = 0.1\n"
    "points = 2\n"
    "gates_at_max = 20000\n"
    "[run]\n"
    "seed = 4242\n"
    "threads = 2\n";

} // namespace

TEST_CASE("cli: state prints amplitudes and fidelity") {
  TempDir tmp;
  SUBCASE("entangled point") {
    const RunResult r = run_cli(tmp, "state --phi 1.5707963267948966 --p 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.707107") != std::string::npos);
    CHECK(r.out.find("F = 1.000000") != std::string::npos);
  }
  SUBCASE("reflector point") {
    const RunResult r = run_cli(tmp, "state --phi 0 --p 1");
    CHECK(r.exit_code == 0);
    // photons bunch: cross-mode amplitudes are zero
    CHECK(r.out.find("-0.707107") != std::string::npos);
  }
  SUBCASE("intermediate phase and mixture") {
    const RunResult r = run_cli(tmp, "state --phi 0.7853981633974483 --p 0.9");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.500000") != std::string::npos);
    CHECK(r.out.find("F = 0.950000") != std::string::npos);
  }
  SUBCASE("bad arguments exit nonzero") {
    CHECK(run_cli(tmp, "state").exit_code != 0);
    CHECK(run_cli(tmp, "state --phi 1 --p 2").exit_code != 0);
    CHECK(run_cli(tmp, "bogus-subcommand").exit_code != 0);
  }
}

TEST_CASE("cli: jones classifies the configured loop") {
  TempDir tmp;
  SUBCASE("flat paddle stack reflects") {
    const fs::path scn = tmp.path / "reflector.scn";
    std::ofstream(scn) << "[fpc]\nquarter1_deg = 0\nhalf_deg = 0\n"
                          "quarter2_deg = 0\n";
    const RunResult r = run_cli(tmp, "jones --scenario " + scn.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("ReflectorMatch") != std::string::npos);
    CHECK(r.out.find("transmission:      0.000000") != std::string::npos);
  }
  SUBCASE("default scenario directory via environment") {
    const fs::path scn = tmp.path / "env_test.scn";
    std::ofstream(scn) << "[input]\nhwp1_deg = 0\n";
    setenv("SFLSIM_SCENARIO_DIR", tmp.path.c_str(), 1);
    const RunResult r = run_cli(tmp, "jones --scenario env_test.scn");
    unsetenv("SFLSIM_SCENARIO_DIR");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("InputMatched") != std::string::npos);
    CHECK(r.out.find("effective purity:  1.000000") != std::string::npos);
  }
  SUBCASE("missing scenario exits nonzero") {
    const RunResult r = run_cli(tmp, "jones --scenario /does/not/exist.scn");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("not found") != std::string::npos);
  }
}

TEST_CASE("cli: shipped scenarios parse") {
  TempDir tmp;
  for (const char* name :
       {"stage_scan.scn", "hwp_sweep.scn", "power_sweep.scn"}) {
    const RunResult r = run_cli(
        tmp, "jones --scenario " + (fs::path(SFLSIM_SCENARIO_DIR) / name).string());
    CHECK(r.exit_code == 0);
  }
}

TEST_CASE("cli: scan writes CSV and sidecar JSON") {
  TempDir tmp;
  const fs::path scn = tmp.path / "small.scn";
  std::ofstream(scn) << kSmallScenario;

  SUBCASE("stage scan") {
    const fs::path csv = tmp.path / "stage.csv";
    const RunResult r =
        run_cli(tmp, "scan --scenario " + scn.string() + " --kind stage --out " +
                         csv.string());
    REQUIRE(r.exit_code == 0);
    const auto rows = sfl::read_scan_csv(csv);
    CHECK(rows.size() == 9);
    for (const auto& row : rows) CHECK(row.n_gates == 20000);

    const json sidecar = json::parse(slurp(tmp.path / "stage.json"));
    CHECK(sidecar.at("kind") == "stage");
    CHECK(sidecar.at("overlay").size() == 9);
    CHECK(sidecar.at("visibility").get<double>() == doctest::Approx(1.0));
    // overlay curve dips at zero delay
    double at_zero = 1e9;
    for (const auto& pt : sidecar.at("overlay"))
      if (std::abs(pt.at("setting").get<double>()) < 1e-12)
        at_zero = pt.at("p2_relative").get<double>();
    CHECK(at_zero == doctest::Approx(0.0).epsilon(1e-9));

    // identical scenario and seed give byte-identical CSV
    const fs::path csv2 = tmp.path / "stage_rerun.csv";
    const RunResult r2 =
        run_cli(tmp, "scan --scenario " + scn.string() +
                         " --kind stage --out " + csv2.string());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(csv) == slurp(csv2));
  }
  SUBCASE("hwp scan writes one file per routing") {
    const fs::path csv = tmp.path / "hwp.csv";
    const RunResult r =
        run_cli(tmp, "scan --scenario " + scn.string() + " --kind hwp --out " +
                         csv.string());
    REQUIRE(r.exit_code == 0);
    CHECK(sfl::read_scan_csv(tmp.path / "hwp_dd.csv").size() == 3);
    CHECK(sfl::read_scan_csv(tmp.path / "hwp_cd.csv").size() == 3);
    const json sidecar = json::parse(slurp(tmp.path / "hwp.json"));
    CHECK(sidecar.at("kind") == "hwp");
    CHECK(sidecar.at("overlay")[0].at("purity").get<double>() ==
          doctest::Approx(1.0));
  }
  SUBCASE("power scan") {
    const fs::path csv = tmp.path / "power.csv";
    const RunResult r =
        run_cli(tmp, "scan --scenario " + scn.string() +
                         " --kind power --out " + csv.string());
    REQUIRE(r.exit_code == 0);
    const auto cd = sfl::read_scan_csv(tmp.path / "power_cd.csv");
    REQUIRE(cd.size() == 2);
    CHECK(cd[0].n_gates == 80000); // (0.1/0.05)^2 * 20000
    const json sidecar = json::parse(slurp(tmp.path / "power.json"));
    CHECK(sidecar.at("kind") == "power");
  }
  SUBCASE("unknown kind is rejected") {
    CHECK(run_cli(tmp, "scan --scenario " + scn.string() +
                           " --kind banana --out x.csv")
              .exit_code != 0);
  }
}

TEST_CASE("cli: fit recovers the beat parameters from a CSV") {
  TempDir tmp;
  const auto freq =
      sfl::FrequencyPair::from_center_nm_and_difference_hz(1538.2, 1.58e12);
  sfl::BeatFitParams truth;
  truth.amplitude = 800.0;
  truth.visibility = 0.95;
  truth.sigma_rad_s = 2.0 * std::numbers::pi * 1.09e11;
  truth.origin_l0_mm = 0.004;
  truth.fixed_freq_diff_rad_s = std::abs(freq.omega_diff());

  std::vector<sfl::ScanResult> rows;
  for (int i = 0; i < 61; ++i) {
    const double l = -0.15 + 0.3 * i / 60.0;
    sfl::ScanResult r;
    r.setting = l;
    r.coincidences = static_cast<std::uint64_t>(
        std::llround(sfl::beat_model(truth, l)));
    r.singles_1 = 100000;
    r.singles_2 = 100000;
    r.accidentals_est = 10.0;
    r.n_gates = 1000000;
    rows.push_back(r);
  }
  const fs::path csv = tmp.path / "beat.csv";
  sfl::write_scan_csv(csv, rows);

  const fs::path report = tmp.path / "fit.json";
  const RunResult r = run_cli(
      tmp, "fit --csv " + csv.string() +
               " --freq-diff-hz 1.58e12 --sigma-init 6.8e11 --json " +
               report.string());
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(slurp(report));
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("visibility").get<double>() == doctest::Approx(0.95).epsilon(5e-3));
  CHECK(j.at("fidelity").get<double>() == doctest::Approx(0.975).epsilon(5e-3));
  CHECK(j.at("sigma_rad_per_s").get<double>() ==
        doctest::Approx(truth.sigma_rad_s).epsilon(0.05));
  CHECK(j.at("extracted_period_mm").get<double>() ==
        doctest::Approx(0.0949).epsilon(0.01));
  CHECK(j.at("fitted_period_mm").get<double>() ==
        doctest::Approx(0.0949).epsilon(0.005));
  CHECK(r.out.find("V        = 0.9") != std::string::npos);

  SUBCASE("missing csv exits nonzero") {
    CHECK(run_cli(tmp, "fit --csv /no/such.csv").exit_code != 0);
  }
  SUBCASE("flat data reports no beat") {
    std::vector<sfl::ScanResult> flat = rows;
    for (auto& row : flat) row.coincidences = 500;
    const fs::path fcsv = tmp.path / "flat.csv";
    sfl::write_scan_csv(fcsv, flat);
    const RunResult fr = run_cli(tmp, "fit --csv " + fcsv.string());
    CHECK(fr.exit_code == 0);
    CHECK(fr.out.find("V        = 0.0000") != std::string::npos);
  }
}
