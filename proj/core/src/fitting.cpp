#include <sfl/fitting.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sfl {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRelTolerance = 1e-10;

double dsinc(double x) {
  // d/dx [sin(x)/x]
  if (std::abs(x) < 1e-6) return -x / 3.0 + x * x * x / 30.0;
  return std::cos(x) / x - std::sin(x) / (x * x);
}

struct Design {
  std::vector<double> l_mm;
  std::vector<double> counts;
  std::vector<double> weights;
};

Design make_design(const BeatCurve& data) {
  Design d;
  d.l_mm.reserve(data.points.size());
  d.counts.reserve(data.points.size());
  d.weights.reserve(data.points.size());
  for (const auto& p : data.points) {
    d.l_mm.push_back(p.delta_l_mm);
    d.counts.push_back(p.p2);
    d.weights.push_back(1.0 / std::max(p.p2, 1.0));
  }
  return d;
}

double weighted_ssr(const Design& d, const BeatFitParams& p) {
  double ssr = 0.0;
  for (std::size_t i = 0; i < d.l_mm.size(); ++i) {
    const double r = d.counts[i] - beat_model(p, d.l_mm[i]);
    ssr += d.weights[i] * r * r;
  }
  return ssr;
}

// Solve the symmetric 4x4 normal equations by Gaussian elimination with
// partial pivoting.
bool solve4(std::array<double, 16>& a, std::array<double, 4>& b) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 4; ++row)
      if (std::abs(a[row * 4 + col]) > std::abs(a[pivot * 4 + col]))
        pivot = row;
    if (std::abs(a[pivot * 4 + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int k = 0; k < 4; ++k) std::swap(a[col * 4 + k], a[pivot * 4 + k]);
      std::swap(b[col], b[pivot]);
    }
    for (int row = col + 1; row < 4; ++row) {
      const double f = a[row * 4 + col] / a[col * 4 + col];
      for (int k = col; k < 4; ++k) a[row * 4 + k] -= f * a[col * 4 + k];
      b[row] -= f * b[col];
    }
  }
  for (int row = 3; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < 4; ++k) s -= a[row * 4 + k] * b[k];
    b[row] = s / a[row * 4 + row];
  }
  return true;
}

// Invert the 4x4 normal matrix (for the parameter covariance) by solving
// against unit vectors.
bool invert4(const std::array<double, 16>& m, std::array<double, 16>& inv) {
  for (int col = 0; col < 4; ++col) {
    std::array<double, 16> a = m;
    std::array<double, 4> e{};
    e[col] = 1.0;
    if (!solve4(a, e)) return false;
    for (int row = 0; row < 4; ++row) inv[row * 4 + col] = e[row];
  }
  return true;
}

struct GnResult {
  BeatFitParams params;
  double ssr;
  bool converged;
  int iterations;
};

void clamp_params(BeatFitParams& p, double sigma_floor) {
  if (p.amplitude < 1e-12) p.amplitude = 1e-12;
  p.visibility = std::clamp(p.visibility, 0.0, 1.0);
  if (p.sigma_rad_s < sigma_floor) p.sigma_rad_s = sigma_floor;
}

GnResult gauss_newton(const Design& d, BeatFitParams p) {
  const double sigma_floor = 1e-6 * p.fixed_freq_diff_rad_s;
  clamp_params(p, sigma_floor);
  double ssr = weighted_ssr(d, p);
  double lambda = 1e-3;
  bool converged = false;
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    std::array<double, 16> jtj{};
    std::array<double, 4> jtr{};
    for (std::size_t i = 0; i < d.l_mm.size(); ++i) {
      const double r = d.counts[i] - beat_model(p, d.l_mm[i]);
      const auto g = beat_model_gradient(p, d.l_mm[i]);
      const double w = d.weights[i];
      for (int a = 0; a < 4; ++a) {
        jtr[a] += w * g[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a * 4 + b] += w * g[a] * g[b];
      }
    }
    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      std::array<double, 16> a = jtj;
      for (int k = 0; k < 4; ++k) a[k * 4 + k] *= (1.0 + lambda);
      // a parameter with no leverage at all (zero gradient everywhere, e.g.
      // sigma on a flat curve) leaves a zero row; pin it so the solve stays
      // well posed and that parameter simply does not move
      for (int k = 0; k < 4; ++k)
        if (a[k * 4 + k] == 0.0) a[k * 4 + k] = 1.0;
      std::array<double, 4> delta = jtr;
      if (!solve4(a, delta)) {
        lambda *= 10.0;
        continue;
      }
      BeatFitParams trial = p;
      trial.amplitude += delta[0];
      trial.visibility += delta[1];
      trial.sigma_rad_s += delta[2];
      trial.origin_l0_mm += delta[3];
      clamp_params(trial, sigma_floor);
      const double trial_ssr = weighted_ssr(d, trial);
      if (trial_ssr <= ssr) {
        const double rel = (ssr - trial_ssr) / std::max(ssr, 1e-300);
        p = trial;
        ssr = trial_ssr;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel < kRelTolerance) {
          converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (converged || !stepped) {
      converged = converged || stepped;
      break;
    }
  }
  return {p, ssr, converged, iter + 1};
}

} // namespace

double beat_model(const BeatFitParams& p, double l_mm) {
  const double dt = 2.0 * (l_mm - p.origin_l0_mm) * 1e-3 / speed_of_light_mps;
  const double env = sinc(p.sigma_rad_s * dt);
  const double osc = std::cos(p.fixed_freq_diff_rad_s * dt);
  return p.amplitude * (1.0 - p.visibility * env * osc);
}

std::array<double, 4> beat_model_gradient(const BeatFitParams& p,
                                          double l_mm) {
  const double dt = 2.0 * (l_mm - p.origin_l0_mm) * 1e-3 / speed_of_light_mps;
  const double x = p.sigma_rad_s * dt;
  const double env = sinc(x);
  const double c = std::cos(p.fixed_freq_diff_rad_s * dt);
  const double s = std::sin(p.fixed_freq_diff_rad_s * dt);
  const double denv_dx = dsinc(x);
  std::array<double, 4> g{};
  g[0] = 1.0 - p.visibility * env * c;                 // d/dA
  g[1] = -p.amplitude * env * c;                       // d/dV
  g[2] = -p.amplitude * p.visibility * denv_dx * dt * c; // d/dsigma
  // dt depends on l0 with d(dt)/dl0 = -2e-3/c_light
  const double ddt_dl0 = -2.0e-3 / speed_of_light_mps;
  g[3] = -p.amplitude * p.visibility *
         (denv_dx * p.sigma_rad_s * c - env * s * p.fixed_freq_diff_rad_s) *
         ddt_dl0;
  return g;
}

FitReport fit_beat(const BeatCurve& data, const FrequencyPair& freq,
                   std::optional<BeatFitParams> init) {
  const double w_d = std::abs(freq.omega_diff());
  const double period_mm =
      std::numbers::pi * speed_of_light_mps / w_d * 1e3;
  if (data.points.size() < 8)
    throw std::invalid_argument("fit_beat: need at least 8 data points");
  auto [lmin, lmax] = std::minmax_element(
      data.points.begin(), data.points.end(),
      [](const BeatPoint& a, const BeatPoint& b) {
        return a.delta_l_mm < b.delta_l_mm;
      });
  const double span = lmax->delta_l_mm - lmin->delta_l_mm;
  if (span < period_mm)
    throw std::invalid_argument("fit_beat: data must span one beat period");

  const Design d = make_design(data);

  BeatFitParams start;
  if (init) {
    start = *init;
  } else {
    double mean = 0.0, cmin = d.counts[0], cmax = d.counts[0];
    for (double c : d.counts) {
      mean += c;
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    mean /= static_cast<double>(d.counts.size());
    start.amplitude = std::max(mean, 1e-12);
    start.visibility =
        (cmax + cmin) > 0.0 ? (cmax - cmin) / (cmax + cmin) : 0.0;
    // a gently decaying envelope across the scan unless the caller knows
    // the filter scale
    const double dt_span = 2.0 * span * 1e-3 / speed_of_light_mps;
    start.sigma_rad_s = 1.0 / dt_span;
    // deepest sampled point approximates the beat origin
    std::size_t imin = 0;
    for (std::size_t i = 1; i < d.counts.size(); ++i)
      if (d.counts[i] < d.counts[imin]) imin = i;
    start.origin_l0_mm = d.l_mm[imin];
  }
  start.fixed_freq_diff_rad_s = w_d;

  // the cosine phase has local minima one period apart; scan l0 starts over
  // a full period
  GnResult best{};
  best.ssr = std::numeric_limits<double>::infinity();
  bool have_best = false;
  for (int k = 0; k < 8; ++k) {
    BeatFitParams s = start;
    s.origin_l0_mm =
        start.origin_l0_mm + (static_cast<double>(k) - 3.5) / 8.0 * period_mm;
    const GnResult r = gauss_newton(d, s);
    const bool better =
        !have_best || r.ssr < best.ssr - 1e-12 ||
        (std::abs(r.ssr - best.ssr) <= 1e-12 &&
         r.params.origin_l0_mm < best.params.origin_l0_mm);
    if (better) {
      best = r;
      have_best = true;
    }
  }

  FitReport report;
  report.params = best.params;
  report.fitted_period_mm = period_mm;
  report.converged = best.converged;
  report.iterations = best.iterations;
  const std::size_t n = d.counts.size();
  report.residual_rms = std::sqrt(best.ssr / static_cast<double>(n));

  // visibility standard error from the scaled inverse normal matrix
  std::array<double, 16> jtj{};
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = beat_model_gradient(best.params, d.l_mm[i]);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        jtj[a * 4 + b] += d.weights[i] * g[a] * g[b];
  }
  // zero-leverage parameters decouple exactly (their row and column vanish)
  for (int k = 0; k < 4; ++k)
    if (jtj[k * 4 + k] == 0.0) jtj[k * 4 + k] = 1.0;
  std::array<double, 16> cov{};
  if (n > 4 && invert4(jtj, cov)) {
    const double s2 = best.ssr / static_cast<double>(n - 4);
    const double var = cov[1 * 4 + 1] * s2;
    report.visibility_std_err = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return report;
}

double extract_period_mm(const BeatCurve& data) {
  if (data.points.size() < 8)
    throw std::invalid_argument("extract_period_mm: need at least 8 points");
  const std::size_t n = data.points.size();
  std::vector<double> l(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = data.points[i].delta_l_mm;
    c[i] = data.points[i].p2;
  }
  const auto [lmin, lmax] = std::minmax_element(l.begin(), l.end());
  const double span = *lmax - *lmin;
  if (span <= 0.0)
    throw std::invalid_argument("extract_period_mm: degenerate positions");
  double mean = 0.0;
  for (double v : c) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : c) v -= mean;

  // direct periodogram on a dense frequency grid (cycles per mm)
  auto power_at = [&](double f) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2.0 * std::numbers::pi * f * l[i];
      re += c[i] * std::cos(ph);
      im += c[i] * std::sin(ph);
    }
    return re * re + im * im;
  };

  double median_dl = span / static_cast<double>(n - 1);
  const double f_lo = 2.0 / span;            // at least two cycles in span
  const double f_hi = 0.5 / median_dl;       // Nyquist of the mean spacing
  if (f_hi <= f_lo)
    throw std::invalid_argument(
        "extract_period_mm: data span too short for period estimation");
  const int grid = 4000;
  double best_f = f_lo, best_p = -1.0;
  for (int k = 0; k <= grid; ++k) {
    const double f =
        f_lo + (f_hi - f_lo) * static_cast<double>(k) / static_cast<double>(grid);
    const double p = power_at(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // a genuine in-band beat concentrates the curve's variance at the peak;
  // data spanning less than two periods only leaks into the band
  double ssq = 0.0;
  for (double v : c) ssq += v * v;
  // a full-span pure sinusoid scores 1 on this scale
  const double concentration =
      best_p / std::max(0.5 * static_cast<double>(n) * ssq, 1e-300);
  if (concentration < 0.15)
    throw std::invalid_argument(
        "extract_period_mm: no dominant beat inside the resolvable band "
        "(data span below two periods?)");
  // golden-section refinement around the grid peak
  const double step = (f_hi - f_lo) / static_cast<double>(grid);
  double a = std::max(f_lo, best_f - step);
  double b = std::min(f_hi, best_f + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double p1 = power_at(x1), p2 = power_at(x2);
  for (int it = 0; it < 80; ++it) {
    if (p1 > p2) {
      b = x2;
      x2 = x1;
      p2 = p1;
      x1 = b - gr * (b - a);
      p1 = power_at(x1);
    } else {
      a = x1;
      x1 = x2;
      p1 = p2;
      x2 = a + gr * (b - a);
      p2 = power_at(x2);
    }
  }
  const double f_peak = 0.5 * (a + b);
  return 1.0 / f_peak;
}

double fidelity_from_visibility(double v) {
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument(
        "fidelity_from_visibility: visibility must be in [0,1]");
  return 0.5 * (1.0 + v);
}

} // namespace sfl
