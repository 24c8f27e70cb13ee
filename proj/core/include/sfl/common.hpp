#pragma once

#include <complex>

namespace sfl {

using cplx = std::complex<double>;

inline constexpr double speed_of_light_mps = 299'792'458.0;

} // namespace sfl
