#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <sfl/fitting.hpp>

#include "helpers.hpp"

using namespace sfl;
using sfl_test::uniform;

namespace {

const FrequencyPair kFreq =
    FrequencyPair::from_center_nm_and_difference_hz(1538.2, 1.58e12);
constexpr double kSigmaTrue = 2.0 * std::numbers::pi * 1.09e11;

BeatCurve synthetic_curve(const BeatFitParams& truth, int n_points,
                          double l_min, double l_max) {
  BeatCurve curve;
  for (int i = 0; i < n_points; ++i) {
    const double l =
        l_min + (l_max - l_min) * static_cast<double>(i) /
                    static_cast<double>(n_points - 1);
    curve.points.push_back({l, beat_model(truth, l)});
  }
  return curve;
}

BeatFitParams truth_params() {
  BeatFitParams t;
  t.amplitude = 1000.0;
  t.visibility = 0.95;
  t.sigma_rad_s = kSigmaTrue;
  t.origin_l0_mm = 0.013;
  t.fixed_freq_diff_rad_s = std::abs(kFreq.omega_diff());
  return t;
}

} // namespace

TEST_CASE("fidelity_from_visibility") {
  CHECK(fidelity_from_visibility(0.95) == doctest::Approx(0.975).epsilon(1e-14));
  CHECK(fidelity_from_visibility(1.0) == 1.0);
  CHECK(fidelity_from_visibility(0.0) == 0.5);
  CHECK_THROWS_AS(fidelity_from_visibility(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(fidelity_from_visibility(1.1), std::invalid_argument);
}

TEST_CASE("round-trip recovery on noiseless data") {
  const BeatFitParams truth = truth_params();
  const BeatCurve data = synthetic_curve(truth, 60, -0.15, 0.15);

  const double dirs[2] = {0.8, 1.2};
  for (double da : dirs)
    for (double dv : dirs)
      for (double ds : dirs)
        for (double dl : dirs) {
          BeatFitParams init = truth;
          init.amplitude *= da;
          init.visibility = std::min(truth.visibility * dv, 1.0);
          init.sigma_rad_s *= ds;
          init.origin_l0_mm *= dl;
          const FitReport r = fit_beat(data, kFreq, init);
          CHECK(r.converged);
          CHECK(std::abs(r.params.amplitude - truth.amplitude) /
                    truth.amplitude <
                1e-4);
          CHECK(std::abs(r.params.visibility - truth.visibility) < 1e-6);
          CHECK(std::abs(r.params.sigma_rad_s - truth.sigma_rad_s) /
                    truth.sigma_rad_s <
                1e-4);
          CHECK(std::abs(r.params.origin_l0_mm - truth.origin_l0_mm) /
                    std::abs(truth.origin_l0_mm) <
                1e-4);
        }
}

TEST_CASE("default initial guesses recover the truth too") {
  const BeatFitParams truth = truth_params();
  const BeatCurve data = synthetic_curve(truth, 80, -0.2, 0.2);
  const FitReport r = fit_beat(data, kFreq);
  CHECK(r.converged);
  CHECK(std::abs(r.params.visibility - truth.visibility) < 1e-5);
  CHECK(std::abs(r.params.sigma_rad_s - truth.sigma_rad_s) / truth.sigma_rad_s <
        1e-3);
}

TEST_CASE("deterministic fit output") {
  const BeatCurve data = synthetic_curve(truth_params(), 60, -0.15, 0.15);
  const FitReport a = fit_beat(data, kFreq);
  const FitReport b = fit_beat(data, kFreq);
  CHECK(a.params.visibility == b.params.visibility);
  CHECK(a.params.origin_l0_mm == b.params.origin_l0_mm);
  CHECK(a.residual_rms == b.residual_rms);
}

TEST_CASE("flat data fits to zero visibility with a large relative error") {
  BeatCurve flat;
  for (int i = 0; i < 40; ++i)
    flat.points.push_back({-0.15 + 0.3 * i / 39.0, 500.0});
  const FitReport r = fit_beat(flat, kFreq);
  CHECK(std::abs(r.params.visibility) < 1e-6);
  CHECK(r.params.amplitude == doctest::Approx(500.0).epsilon(1e-9));
}

TEST_CASE("fit input validation") {
  BeatCurve tiny;
  for (int i = 0; i < 5; ++i) tiny.points.push_back({0.01 * i, 100.0});
  CHECK_THROWS_AS(fit_beat(tiny, kFreq), std::invalid_argument);

  BeatCurve narrow; // 10 points inside a fraction of one period
  for (int i = 0; i < 10; ++i) narrow.points.push_back({0.002 * i, 100.0});
  CHECK_THROWS_AS(fit_beat(narrow, kFreq), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(211);
  for (int k = 0; k < 50; ++k) {
    BeatFitParams p;
    p.amplitude = uniform(rng, 100.0, 2000.0);
    p.visibility = uniform(rng, 0.2, 0.99);
    p.sigma_rad_s = uniform(rng, 0.3, 2.0) * kSigmaTrue;
    p.origin_l0_mm = uniform(rng, -0.05, 0.05);
    p.fixed_freq_diff_rad_s = std::abs(kFreq.omega_diff());
    const double l = uniform(rng, -0.2, 0.2);

    const auto g = beat_model_gradient(p, l);
    const double scales[4] = {p.amplitude, 1.0, p.sigma_rad_s, 0.1};
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-6 * scales[j];
      BeatFitParams lo = p, hi = p;
      double* fields_lo[4] = {&lo.amplitude, &lo.visibility, &lo.sigma_rad_s,
                              &lo.origin_l0_mm};
      double* fields_hi[4] = {&hi.amplitude, &hi.visibility, &hi.sigma_rad_s,
                              &hi.origin_l0_mm};
      *fields_lo[j] -= h;
      *fields_hi[j] += h;
      const double fd = (beat_model(hi, l) - beat_model(lo, l)) / (2.0 * h);
      // the subtraction leaves rounding noise of order eps*A/h in fd, so a
      // vanishing gradient needs an absolute floor
      const double floor = 1e-8 * p.amplitude / scales[j];
      const double tol =
          std::max(1e-6 * std::max(std::abs(g[j]), std::abs(fd)), floor);
      CHECK(std::abs(fd - g[j]) < tol);
    }
  }
}

TEST_CASE("extract_period") {
  const BeatFitParams truth = truth_params();

  SUBCASE("synthetic curve at the design frequency difference") {
    const BeatCurve data = synthetic_curve(truth, 81, -0.15, 0.15);
    const double period = extract_period_mm(data);
    const double expected =
        std::numbers::pi * speed_of_light_mps / std::abs(kFreq.omega_diff()) *
        1e3;
    CHECK(expected == doctest::Approx(0.0949).epsilon(2e-3));
    CHECK(std::abs(period - expected) / expected < 5e-3);
    CHECK(std::abs(period - 0.095) / 0.095 < 0.01);
  }
  SUBCASE("doubling the frequency difference halves the period") {
    BeatFitParams fast = truth;
    fast.fixed_freq_diff_rad_s *= 2.0;
    const double p1 = extract_period_mm(synthetic_curve(truth, 121, -0.2, 0.2));
    const double p2 = extract_period_mm(synthetic_curve(fast, 121, -0.2, 0.2));
    CHECK(p2 == doctest::Approx(0.5 * p1).epsilon(5e-3));
  }
  SUBCASE("invariant under scaling and offsets") {
    const BeatCurve base = synthetic_curve(truth, 81, -0.15, 0.15);
    BeatCurve scaled = base;
    for (auto& p : scaled.points) p.p2 = 5.0 * p.p2 + 1234.0;
    // invariant up to the rounding noise of the shifted mean subtraction
    CHECK(extract_period_mm(scaled) ==
          doctest::Approx(extract_period_mm(base)).epsilon(1e-9));
  }
  SUBCASE("insufficient span is rejected") {
    const BeatCurve narrow = synthetic_curve(truth, 12, -0.02, 0.02);
    CHECK_THROWS_AS(extract_period_mm(narrow), std::invalid_argument);
  }
}

TEST_CASE("visibility error never shrinks with more noise") {
  const BeatFitParams shape = [] {
    BeatFitParams t = truth_params();
    t.amplitude = 1.0;
    return t;
  }();
  const double amplitudes[3] = {10000.0, 400.0, 50.0};
  double mean_err[3] = {0.0, 0.0, 0.0};
  for (int level = 0; level < 3; ++level) {
    for (int seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(1000 + seed);
      BeatFitParams t = shape;
      t.amplitude = amplitudes[level];
      BeatCurve data;
      for (int i = 0; i < 60; ++i) {
        const double l = -0.15 + 0.3 * i / 59.0;
        const double mu = beat_model(t, l);
        std::poisson_distribution<long> pois(mu);
        data.points.push_back({l, static_cast<double>(pois(rng))});
      }
      const FitReport r = fit_beat(data, kFreq, t);
      mean_err[level] += r.visibility_std_err / 20.0;
    }
  }
  CHECK(mean_err[0] < mean_err[1]);
  CHECK(mean_err[1] < mean_err[2]);
}
