#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <sfl/jones.hpp>
#include <sfl/state.hpp>

namespace sfl_test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline sfl::cplx random_phase(std::mt19937_64& rng) {
  const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return {std::cos(a), std::sin(a)};
}

// Random 2x2 unitary: SU(2) element times a global phase.
inline sfl::JonesMatrix random_unitary(std::mt19937_64& rng) {
  const double chi = std::asin(std::sqrt(uniform(rng, 0.0, 1.0)));
  const sfl::cplx a = random_phase(rng) * std::cos(chi);
  const sfl::cplx b = random_phase(rng) * std::sin(chi);
  const sfl::cplx g = random_phase(rng);
  return {g * a, g * b, g * (-std::conj(b)), g * std::conj(a)};
}

inline sfl::JonesVector random_jones_vector(std::mt19937_64& rng) {
  sfl::JonesVector v{random_phase(rng) * uniform(rng, 0.1, 2.0),
                     random_phase(rng) * uniform(rng, 0.1, 2.0)};
  return v;
}

// Random normalized state on the post-selected two-photon sector.
inline sfl::TwoPhotonState random_pair_state(std::mt19937_64& rng) {
  sfl::TwoPhotonState s;
  s.amp_cc = random_phase(rng) * uniform(rng, 0.0, 1.0);
  s.amp_dd = random_phase(rng) * uniform(rng, 0.0, 1.0);
  s.amp_sc_id = random_phase(rng) * uniform(rng, 0.0, 1.0);
  s.amp_ic_sd = random_phase(rng) * uniform(rng, 0.0, 1.0);
  if (s.norm_sq() == 0.0) s.amp_sc_id = 1.0;
  return s.normalized();
}

} // namespace sfl_test
