#pragma once

#include <utility>
#include <vector>

#include <sfl/common.hpp>

namespace sfl {

/// Transverse field amplitudes along the loop-plane x and y axes.
struct JonesVector {
  cplx ex{};
  cplx ey{};

  double norm_sq() const;
  bool is_zero(double tol = 0.0) const;
};

JonesVector operator*(cplx s, const JonesVector& v);
JonesVector operator+(const JonesVector& a, const JonesVector& b);

/// Hermitian inner product <a,b> = conj(a.ex) b.ex + conj(a.ey) b.ey.
cplx inner(const JonesVector& a, const JonesVector& b);

/// 2x2 complex transfer matrix of a loop element.
struct JonesMatrix {
  cplx xx{1.0};
  cplx xy{};
  cplx yx{};
  cplx yy{1.0};

  JonesVector apply(const JonesVector& v) const;
  JonesMatrix transposed() const;
  JonesMatrix adjoint() const;
  bool is_unitary(double tol = 1e-12) const;

  static JonesMatrix identity();
  /// Fixed geometry matrix of one fiber half-loop: the x component flips sign.
  static JonesMatrix loop_geometry();
  static JonesMatrix swap();
  /// Linear retarder with retardance delta and fast axis at angle theta.
  static JonesMatrix retarder(double delta, double theta);
  static JonesMatrix quarter_wave(double theta);
  static JonesMatrix half_wave(double theta);
  /// Fiber polarization controller as a quarter/half/quarter paddle stack.
  /// Light meets the paddles in argument order.
  static JonesMatrix paddle_stack(double quarter1, double half, double quarter2);
};

JonesMatrix operator*(const JonesMatrix& a, const JonesMatrix& b);

/// Half-wave-plate fast-axis orientation, normalized to [0, pi).
class HwpAngle {
public:
  explicit HwpAngle(double radians);
  static HwpAngle from_degrees(double deg);
  double radians() const { return theta_; }
  double degrees() const;

private:
  double theta_;
};

/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]]; rotates linear polarization by 2t.
JonesMatrix hwp_matrix(const HwpAngle& theta);

/// 50/50 split of the incident pump: the clockwise branch takes e_in/sqrt(2),
/// the cross-coupled counter-clockwise branch i*e_in/sqrt(2).
std::pair<JonesVector, JonesVector> split_at_coupler(const JonesVector& e_in);

/// Clockwise pass: geometry flip, then the controller. Jc is used as given,
/// unitary or not; lossy settings propagate unchanged.
JonesVector propagate_cw(const JonesVector& ea_in, const JonesMatrix& jc);

/// Counter-clockwise pass: the controller is traversed backwards, which is
/// its transpose, then the geometry flip.
JonesVector propagate_ccw(const JonesVector& eb_in, const JonesMatrix& jc);

/// Exit fields: ec = (i ea + eb)/sqrt(2), ed = (i eb + ea)/sqrt(2).
std::pair<JonesVector, JonesVector> recombine(const JonesVector& ea,
                                              const JonesVector& eb);

/// Power fraction leaving through the transmitted port d,
/// |(Jxy + Jyx)/2|^2. Independent of the input polarization.
double transmission(const JonesMatrix& jc);

/// 1 - |<ea,eb>|^2 / (|ea|^2 |eb|^2): 0 for identical polarizations up to a
/// complex scalar, 1 for orthogonal ones.
double mode_match_defect(const JonesVector& ea, const JonesVector& eb);

enum class MatchCondition {
  ReflectorMatch,   // Jxy + Jyx = 0, loop reflects everything
  TransmitterMatch, // Jxx = Jyy = 0 and Jxy = Jyx, loop transmits everything
  InputMatched,     // Jxx Ex^2 - Jyy Ey^2 = (Jxy - Jyx) Ex Ey
  Unmatched
};

const char* to_string(MatchCondition c);

/// Classify which polarization mode-matching relation holds for this
/// controller and input, within tol on normalized quantities.
MatchCondition check_match_conditions(const JonesMatrix& jc,
                                      const JonesVector& e_in,
                                      double tol = 1e-10);

/// (conj(Ey), -conj(Ex)): the orthogonal pump input. Mode matching for e_in
/// carries over to this input when jc is unitary.
JonesVector orthogonal_input(const JonesVector& e_in);

/// Inputs satisfying the input-dependent matching relation for this
/// controller (roots of the matching quadratic), normalized. Size 0..2.
std::vector<JonesVector> matched_inputs(const JonesMatrix& jc);

/// Polarization overlap of the counter-propagating pumps at the output
/// coupler, |<ea,eb>|^2/(|ea|^2|eb|^2). Weight of the coherent two-photon
/// component in the loop output.
double effective_purity(const JonesMatrix& jc, const JonesVector& e_in);

/// Loop phase difference seen by the pump pair amplitudes,
/// arg<ea,eb> - pi/2, normalized to [0, 2*pi). Meaningful when the pumps are
/// polarization matched; otherwise it is the phase of the matched component.
double effective_loop_phase(const JonesMatrix& jc, const JonesVector& e_in);

/// All fields of one pump pass through the loop.
struct LoopFields {
  JonesVector ea_in, eb_in; // after the input split
  JonesVector ea, eb;       // back at the coupler
  JonesVector ec, ed;       // exit fields
  bool fpc_unitary{true};   // false flags a lossy controller setting
};

LoopFields trace_loop(const JonesMatrix& jc, const JonesVector& e_in);

} // namespace sfl
