#include <sfl/jones.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace sfl {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

} // namespace

double JonesVector::norm_sq() const { return std::norm(ex) + std::norm(ey); }

bool JonesVector::is_zero(double tol) const { return norm_sq() <= tol; }

JonesVector operator*(cplx s, const JonesVector& v) {
  return {s * v.ex, s * v.ey};
}

JonesVector operator+(const JonesVector& a, const JonesVector& b) {
  return {a.ex + b.ex, a.ey + b.ey};
}

cplx inner(const JonesVector& a, const JonesVector& b) {
  return std::conj(a.ex) * b.ex + std::conj(a.ey) * b.ey;
}

JonesVector JonesMatrix::apply(const JonesVector& v) const {
  return {xx * v.ex + xy * v.ey, yx * v.ex + yy * v.ey};
}

JonesMatrix JonesMatrix::transposed() const { return {xx, yx, xy, yy}; }

JonesMatrix JonesMatrix::adjoint() const {
  return {std::conj(xx), std::conj(yx), std::conj(xy), std::conj(yy)};
}

bool JonesMatrix::is_unitary(double tol) const {
  const JonesMatrix p = adjoint() * (*this);
  return std::abs(p.xx - 1.0) <= tol && std::abs(p.yy - 1.0) <= tol &&
         std::abs(p.xy) <= tol && std::abs(p.yx) <= tol;
}

JonesMatrix JonesMatrix::identity() { return {1.0, 0.0, 0.0, 1.0}; }

JonesMatrix JonesMatrix::loop_geometry() { return {-1.0, 0.0, 0.0, 1.0}; }

JonesMatrix JonesMatrix::swap() { return {0.0, 1.0, 1.0, 0.0}; }

JonesMatrix JonesMatrix::retarder(double delta, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const cplx f = std::exp(-kI * (delta / 2.0));
  const cplx g = std::exp(kI * (delta / 2.0));
  // R(theta) diag(f, g) R(-theta)
  return {f * c * c + g * s * s, (f - g) * c * s, (f - g) * c * s,
          f * s * s + g * c * c};
}

JonesMatrix JonesMatrix::quarter_wave(double theta) {
  return retarder(std::numbers::pi / 2.0, theta);
}

JonesMatrix JonesMatrix::half_wave(double theta) {
  return retarder(std::numbers::pi, theta);
}

JonesMatrix JonesMatrix::paddle_stack(double quarter1, double half,
                                      double quarter2) {
  return quarter_wave(quarter2) * (half_wave(half) * quarter_wave(quarter1));
}

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b) {
  return {a.xx * b.xx + a.xy * b.yx, a.xx * b.xy + a.xy * b.yy,
          a.yx * b.xx + a.yy * b.yx, a.yx * b.xy + a.yy * b.yy};
}

HwpAngle::HwpAngle(double radians) {
  theta_ = std::fmod(radians, std::numbers::pi);
  if (theta_ < 0.0) theta_ += std::numbers::pi;
}

HwpAngle HwpAngle::from_degrees(double deg) {
  return HwpAngle(deg * std::numbers::pi / 180.0);
}

double HwpAngle::degrees() const { return theta_ * 180.0 / std::numbers::pi; }

JonesMatrix hwp_matrix(const HwpAngle& theta) {
  const double c = std::cos(2.0 * theta.radians());
  const double s = std::sin(2.0 * theta.radians());
  return {c, s, s, -c};
}

std::pair<JonesVector, JonesVector> split_at_coupler(const JonesVector& e_in) {
  if (e_in.is_zero())
    throw std::invalid_argument("split_at_coupler: zero input field");
  return {kInvSqrt2 * e_in, (kI * kInvSqrt2) * e_in};
}

JonesVector propagate_cw(const JonesVector& ea_in, const JonesMatrix& jc) {
  return jc.apply(JonesMatrix::loop_geometry().apply(ea_in));
}

JonesVector propagate_ccw(const JonesVector& eb_in, const JonesMatrix& jc) {
  return JonesMatrix::loop_geometry().apply(jc.transposed().apply(eb_in));
}

std::pair<JonesVector, JonesVector> recombine(const JonesVector& ea,
                                              const JonesVector& eb) {
  return {kInvSqrt2 * (kI * ea + eb), kInvSqrt2 * (kI * eb + ea)};
}

double transmission(const JonesMatrix& jc) {
  return std::norm(0.5 * (jc.xy + jc.yx));
}

double mode_match_defect(const JonesVector& ea, const JonesVector& eb) {
  const double na = ea.norm_sq();
  const double nb = eb.norm_sq();
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("mode_match_defect: zero field");
  double d = 1.0 - std::norm(inner(ea, eb)) / (na * nb);
  if (d < 0.0) d = 0.0;
  if (d > 1.0) d = 1.0;
  return d;
}

const char* to_string(MatchCondition c) {
  switch (c) {
    case MatchCondition::ReflectorMatch: return "ReflectorMatch";
    case MatchCondition::TransmitterMatch: return "TransmitterMatch";
    case MatchCondition::InputMatched: return "InputMatched";
    case MatchCondition::Unmatched: return "Unmatched";
  }
  return "Unmatched";
}

MatchCondition check_match_conditions(const JonesMatrix& jc,
                                      const JonesVector& e_in, double tol) {
  if (std::abs(jc.xy + jc.yx) <= tol) return MatchCondition::ReflectorMatch;
  if (std::abs(jc.xx) <= tol && std::abs(jc.yy) <= tol &&
      std::abs(jc.xy - jc.yx) <= tol)
    return MatchCondition::TransmitterMatch;
  if (!e_in.is_zero()) {
    const double n = std::sqrt(e_in.norm_sq());
    const cplx ex = e_in.ex / n;
    const cplx ey = e_in.ey / n;
    const cplx lhs = jc.xx * ex * ex - jc.yy * ey * ey;
    const cplx rhs = (jc.xy - jc.yx) * ex * ey;
    if (std::abs(lhs - rhs) <= tol) return MatchCondition::InputMatched;
  }
  return MatchCondition::Unmatched;
}

JonesVector orthogonal_input(const JonesVector& e_in) {
  if (e_in.is_zero())
    throw std::invalid_argument("orthogonal_input: zero input field");
  return {std::conj(e_in.ey), -std::conj(e_in.ex)};
}

std::vector<JonesVector> matched_inputs(const JonesMatrix& jc) {
  // roots of Jxx r^2 - (Jxy - Jyx) r - Jyy = 0 with r = Ex/Ey
  std::vector<JonesVector> out;
  const cplx a = jc.xx;
  const cplx b = -(jc.xy - jc.yx);
  const cplx c = -jc.yy;
  auto push = [&out](cplx ex, cplx ey) {
    const double n = std::sqrt(std::norm(ex) + std::norm(ey));
    if (n > 0.0) out.push_back({ex / n, ey / n});
  };
  if (std::abs(a) < 1e-14) {
    if (std::abs(b) < 1e-14) {
      // both ports match every input (transmitter-like controller)
      push(1.0, 0.0);
      push(0.0, 1.0);
      return out;
    }
    push(-c / b, 1.0);
    // with Jxx = 0 a pure x input satisfies the relation as well
    push(1.0, 0.0);
    return out;
  }
  const cplx disc = std::sqrt(b * b - 4.0 * a * c);
  push((-b + disc) / (2.0 * a), 1.0);
  push((-b - disc) / (2.0 * a), 1.0);
  return out;
}

double effective_purity(const JonesMatrix& jc, const JonesVector& e_in) {
  const auto [ea_in, eb_in] = split_at_coupler(e_in);
  const JonesVector ea = propagate_cw(ea_in, jc);
  const JonesVector eb = propagate_ccw(eb_in, jc);
  const double na = ea.norm_sq();
  const double nb = eb.norm_sq();
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("effective_purity: controller absorbs a pump");
  double p = std::norm(inner(ea, eb)) / (na * nb);
  if (p > 1.0) p = 1.0;
  return p;
}

double effective_loop_phase(const JonesMatrix& jc, const JonesVector& e_in) {
  const auto [ea_in, eb_in] = split_at_coupler(e_in);
  const JonesVector ea = propagate_cw(ea_in, jc);
  const JonesVector eb = propagate_ccw(eb_in, jc);
  double phi = std::arg(inner(ea, eb)) - std::numbers::pi / 2.0;
  phi = std::fmod(phi, 2.0 * std::numbers::pi);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  return phi;
}

LoopFields trace_loop(const JonesMatrix& jc, const JonesVector& e_in) {
  LoopFields f;
  std::tie(f.ea_in, f.eb_in) = split_at_coupler(e_in);
  f.ea = propagate_cw(f.ea_in, jc);
  f.eb = propagate_ccw(f.eb_in, jc);
  std::tie(f.ec, f.ed) = recombine(f.ea, f.eb);
  f.fpc_unitary = jc.is_unitary(1e-9);
  return f;
}

} // namespace sfl
