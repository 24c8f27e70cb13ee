#include <sfl/counting.hpp>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace sfl {

namespace {

constexpr std::uint64_t kBatchGates = 1u << 16;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Thermal (Bose-Einstein) photon-pair number, P(n) = mu^n / (1+mu)^(n+1).
std::uint32_t sample_thermal(std::mt19937_64& rng, double mu, double p_zero,
                             double log_q) {
  if (mu <= 0.0) return 0;
  const double u = uniform01(rng);
  if (u < p_zero) return 0;
  return static_cast<std::uint32_t>(std::floor(std::log1p(-u) / log_q));
}

// Knuth sampler, cheap for the small per-pulse Raman rates used here.
std::uint32_t sample_poisson(std::mt19937_64& rng, double exp_neg_lambda) {
  if (exp_neg_lambda >= 1.0) return 0;
  std::uint32_t k = 0;
  double p = uniform01(rng);
  while (p > exp_neg_lambda) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

// Joint per-pair photon placement at the two detector inputs.
struct PairPlacement {
  // cumulative probabilities of (1,1), (1,0), (0,1); remainder is (0,0)
  double c11, c10, c01;
  double marginal1, marginal2;
};

struct GateRates {
  double mu_pairs;
  double p_zero_pairs;
  double log_q_pairs;
  double exp_neg_raman1;
  double exp_neg_raman2;
  PairPlacement place;
  bool pairing_disabled;
};

// Routing probabilities of one pair over the four two-photon basis states,
// mixing the coherent loop output with the unpolarized-path background.
struct ClassProbs {
  double cc, dd, sc_id, ic_sd;
};

ClassProbs pair_class_probs(double purity_p, const LoopPhase& phi) {
  const TwoPhotonState psi = sagnac_output(SfwmGain(cplx{0.1, 0.0}), phi);
  const double p = purity_p;
  auto blend = [p](double coherent) { return p * coherent + (1.0 - p) * 0.25; };
  return {blend(std::norm(psi.amp_cc)), blend(std::norm(psi.amp_dd)),
          blend(std::norm(psi.amp_sc_id)), blend(std::norm(psi.amp_ic_sd))};
}

PairPlacement make_placement(const ExperimentSetup& setup,
                             const Routing& routing) {
  const ClassProbs q =
      pair_class_probs(setup.scatter.purity_p, setup.scatter.loop_phase);
  double p11 = 0.0, p10 = 0.0, p01 = 0.0;
  switch (routing.kind) {
    case Routing::Kind::both_d:
      // both bands filtered out of port d
      p11 = q.dd;
      p10 = q.ic_sd; // signal photon in d
      p01 = q.sc_id; // idler photon in d
      break;
    case Routing::Kind::cross_cd:
      // signal filter on port c, idler filter on port d
      p11 = q.sc_id;
      p10 = q.cc; // only the signal photon clears its filter
      p01 = q.dd; // only the idler photon clears its filter
      break;
    case Routing::Kind::stage: {
      // analytic beat law drives the joint coincidence probability; each
      // band reaches its detector through the output coupler half the time
      const double v = setup.scatter.purity_p *
                       std::pow(std::sin(setup.scatter.loop_phase.radians()), 2);
      const Delay delay = Delay::from_stage_mm(routing.stage_position_mm);
      p11 = 0.25 * multimode_p2(delay, setup.freq, v, setup.filter);
      p10 = 0.5 - p11;
      p01 = 0.5 - p11;
      break;
    }
  }
  PairPlacement pl;
  pl.c11 = p11;
  pl.c10 = p11 + p10;
  pl.c01 = p11 + p10 + p01;
  pl.marginal1 = p11 + p10;
  pl.marginal2 = p11 + p01;
  return pl;
}

GateRates make_rates(const ExperimentSetup& setup, const Routing& routing) {
  const double power = setup.pump.avg_power_mw;
  GateRates r;
  r.mu_pairs = setup.scatter.pair_coeff_per_mw2 * power * power;
  r.p_zero_pairs = 1.0 / (1.0 + r.mu_pairs);
  r.log_q_pairs =
      r.mu_pairs > 0.0 ? std::log(r.mu_pairs / (1.0 + r.mu_pairs)) : 0.0;
  double raman = setup.scatter.raman_co_per_mw * power;
  if (!setup.scatter.co_polarized_selection)
    raman += setup.scatter.raman_cross_per_mw * power;
  // a band photon reaches its detector input half the time in every routing
  r.exp_neg_raman1 = std::exp(-0.5 * raman);
  r.exp_neg_raman2 = std::exp(-0.5 * raman);
  r.place = make_placement(setup, routing);
  r.pairing_disabled = setup.scatter.pairing_disabled;
  return r;
}

struct BatchCounts {
  std::uint64_t singles_1{}, singles_2{}, coincidences{};
};

struct DetectorRuntime {
  double efficiency;
  double dark;
  std::uint64_t dead_gates;
  std::uint64_t next_live{0};

  bool live(std::uint64_t gate) const { return gate >= next_live; }
  void clicked(std::uint64_t gate) { next_live = gate + dead_gates + 1; }
  double click_prob(std::uint32_t photons) const {
    const double miss = std::pow(1.0 - efficiency, photons);
    return 1.0 - miss * (1.0 - dark);
  }
};

BatchCounts run_batch(const GateRates& rates, const DetectorConfig& det1,
                      const DetectorConfig& det2, std::uint64_t n_gates,
                      std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  BatchCounts out;
  DetectorRuntime d1{det1.efficiency, det1.dark_prob_per_gate,
                     det1.dead_gates()};
  DetectorRuntime d2{det2.efficiency, det2.dark_prob_per_gate,
                     det2.dead_gates()};
  for (std::uint64_t gate = 0; gate < n_gates; ++gate) {
    std::uint32_t photons1 = 0, photons2 = 0;
    if (!rates.pairing_disabled) {
      const std::uint32_t pairs = sample_thermal(
          rng, rates.mu_pairs, rates.p_zero_pairs, rates.log_q_pairs);
      for (std::uint32_t k = 0; k < pairs; ++k) {
        const double u = uniform01(rng);
        if (u < rates.place.c11) {
          ++photons1;
          ++photons2;
        } else if (u < rates.place.c10) {
          ++photons1;
        } else if (u < rates.place.c01) {
          ++photons2;
        }
      }
    } else {
      // independent streams with the same marginal statistics
      const std::uint32_t na = sample_thermal(
          rng, rates.mu_pairs, rates.p_zero_pairs, rates.log_q_pairs);
      for (std::uint32_t k = 0; k < na; ++k)
        if (uniform01(rng) < rates.place.marginal1) ++photons1;
      const std::uint32_t nb = sample_thermal(
          rng, rates.mu_pairs, rates.p_zero_pairs, rates.log_q_pairs);
      for (std::uint32_t k = 0; k < nb; ++k)
        if (uniform01(rng) < rates.place.marginal2) ++photons2;
    }
    photons1 += sample_poisson(rng, rates.exp_neg_raman1);
    photons2 += sample_poisson(rng, rates.exp_neg_raman2);

    bool click1 = false, click2 = false;
    if (d1.live(gate) && uniform01(rng) < d1.click_prob(photons1))
      click1 = true;
    if (d2.live(gate) && uniform01(rng) < d2.click_prob(photons2))
      click2 = true;
    if (click1) {
      ++out.singles_1;
      d1.clicked(gate);
    }
    if (click2) {
      ++out.singles_2;
      d2.clicked(gate);
    }
    if (click1 && click2) ++out.coincidences;
  }
  return out;
}

} // namespace

void PumpConfig::validate() const {
  if (avg_power_mw < 0.0)
    throw std::invalid_argument("PumpConfig: power must be >= 0");
  if (rep_rate_hz <= 0.0 || pulse_width_s <= 0.0 || center_wavelength_nm <= 0.0)
    throw std::invalid_argument("PumpConfig: parameters must be positive");
}

void DetectorConfig::validate(const PumpConfig& pump) const {
  if (efficiency < 0.0 || efficiency > 1.0)
    throw std::invalid_argument("DetectorConfig: efficiency must be in [0,1]");
  if (dark_prob_per_gate < 0.0 || dark_prob_per_gate > 1.0)
    throw std::invalid_argument(
        "DetectorConfig: dark probability must be in [0,1]");
  if (gate_width_s <= 0.0 || gate_rate_hz <= 0.0 || dead_time_s < 0.0)
    throw std::invalid_argument("DetectorConfig: invalid gate parameters");
  if (gate_rate_hz > pump.rep_rate_hz)
    throw std::invalid_argument(
        "DetectorConfig: gate rate cannot exceed the pulse repetition rate");
}

std::uint64_t DetectorConfig::dead_gates() const {
  return static_cast<std::uint64_t>(
      std::floor(dead_time_s * gate_rate_hz + 1e-9));
}

void ScatterModel::validate() const {
  if (pair_coeff_per_mw2 < 0.0 || raman_co_per_mw < 0.0 ||
      raman_cross_per_mw < 0.0)
    throw std::invalid_argument("ScatterModel: coefficients must be >= 0");
  if (purity_p < 0.0 || purity_p > 1.0)
    throw std::invalid_argument("ScatterModel: purity must be in [0,1]");
}

void ExperimentSetup::validate() const {
  pump.validate();
  det1.validate(pump);
  det2.validate(pump);
  scatter.validate();
  filter.validate();
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ b);
}

ScanResult simulate_gates(const ExperimentSetup& setup, const Routing& routing,
                          std::uint64_t n_gates, std::uint64_t seed,
                          int threads) {
  if (n_gates == 0)
    throw std::invalid_argument("simulate_gates: n_gates must be > 0");
  setup.validate();
  const GateRates rates = make_rates(setup, routing);
  const std::uint64_t n_batches = (n_gates + kBatchGates - 1) / kBatchGates;

  auto batch_counts = [&](std::uint64_t batch) {
    const std::uint64_t first = batch * kBatchGates;
    const std::uint64_t count = std::min(kBatchGates, n_gates - first);
    return run_batch(rates, setup.det1, setup.det2, count,
                     substream_seed(seed, batch, 0x5f1c));
  };

  BatchCounts total;
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(
                                    std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  if (static_cast<std::uint64_t>(n_threads) > n_batches)
    n_threads = static_cast<int>(n_batches);

  if (n_threads == 1) {
    for (std::uint64_t b = 0; b < n_batches; ++b) {
      const BatchCounts c = batch_counts(b);
      total.singles_1 += c.singles_1;
      total.singles_2 += c.singles_2;
      total.coincidences += c.coincidences;
    }
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<BatchCounts> partial(static_cast<std::size_t>(n_threads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        BatchCounts local;
        for (std::uint64_t b = next.fetch_add(1); b < n_batches;
             b = next.fetch_add(1)) {
          const BatchCounts c = batch_counts(b);
          local.singles_1 += c.singles_1;
          local.singles_2 += c.singles_2;
          local.coincidences += c.coincidences;
        }
        partial[static_cast<std::size_t>(t)] = local;
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& c : partial) {
      total.singles_1 += c.singles_1;
      total.singles_2 += c.singles_2;
      total.coincidences += c.coincidences;
    }
  }

  ScanResult out;
  out.setting = 0.0;
  out.singles_1 = total.singles_1;
  out.singles_2 = total.singles_2;
  out.coincidences = total.coincidences;
  out.accidentals_est = static_cast<double>(total.singles_1) *
                        static_cast<double>(total.singles_2) /
                        static_cast<double>(n_gates);
  out.n_gates = n_gates;
  return out;
}

std::vector<ScanResult> hwp_sweep(const ExperimentSetup& setup,
                                  const JonesMatrix& fpc,
                                  const std::vector<HwpAngle>& angles,
                                  Routing::Kind routing,
                                  std::uint64_t gates_per_point,
                                  std::uint64_t seed, int threads) {
  std::vector<ScanResult> out;
  out.reserve(angles.size());
  const JonesVector pump_in{1.0, 0.0};
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const JonesVector e_in = hwp_matrix(angles[i]).apply(pump_in);
    ExperimentSetup point = setup;
    point.scatter.purity_p = effective_purity(fpc, e_in);
    point.scatter.loop_phase = LoopPhase(effective_loop_phase(fpc, e_in));
    ScanResult r = simulate_gates(point, Routing{routing, 0.0},
                                  gates_per_point,
                                  substream_seed(seed, i, 0xa117), threads);
    r.setting = angles[i].degrees();
    out.push_back(r);
  }
  return out;
}

std::vector<ScanResult> power_sweep(
    const ExperimentSetup& setup, const std::vector<double>& powers_mw,
    const std::vector<std::uint64_t>& gates_per_point, Routing::Kind routing,
    std::uint64_t seed, int threads) {
  if (powers_mw.size() != gates_per_point.size())
    throw std::invalid_argument(
        "power_sweep: powers and gate counts must pair up");
  std::vector<ScanResult> out;
  out.reserve(powers_mw.size());
  for (std::size_t i = 0; i < powers_mw.size(); ++i) {
    ExperimentSetup point = setup;
    point.pump.avg_power_mw = powers_mw[i];
    ScanResult r = simulate_gates(point, Routing{routing, 0.0},
                                  gates_per_point[i],
                                  substream_seed(seed, i, 0xb0b0), threads);
    r.setting = powers_mw[i];
    out.push_back(r);
  }
  return out;
}

StageScanOutput stage_scan(const ExperimentSetup& setup,
                           const std::vector<double>& positions_mm,
                           std::uint64_t gates_per_point, std::uint64_t seed,
                           int threads) {
  StageScanOutput out;
  out.rows.reserve(positions_mm.size());
  out.curve.points.reserve(positions_mm.size());
  for (std::size_t i = 0; i < positions_mm.size(); ++i) {
    ScanResult r =
        simulate_gates(setup, Routing::stage_scan(positions_mm[i]),
                       gates_per_point, substream_seed(seed, i, 0x57a6),
                       threads);
    r.setting = positions_mm[i];
    // dark-count estimate an experimenter would subtract, from the known
    // per-gate dark probabilities and the measured singles
    const double dark1 = setup.det1.dark_prob_per_gate;
    const double dark2 = setup.det2.dark_prob_per_gate;
    const double dark_coinc =
        dark1 * static_cast<double>(r.singles_2) +
        dark2 * static_cast<double>(r.singles_1) -
        dark1 * dark2 * static_cast<double>(r.n_gates);
    double counts = static_cast<double>(r.coincidences) - dark_coinc;
    if (counts < 0.0) counts = 0.0;
    out.curve.points.push_back({positions_mm[i], counts});
    out.rows.push_back(r);
  }
  return out;
}

} // namespace sfl
