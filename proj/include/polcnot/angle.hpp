#pragma once
// Linear polarization states as directions modulo pi, with Jones/Stokes views
// used for reporting and fidelity.
//
// Angle 0 is the axis in the plane of the bench figure (horizontal, |1>);
// angle pi/2 is perpendicular to it (vertical, |0>). A rotation by a positive
// phi maps theta to theta - phi, i.e. it turns the polarization from the
// pi/2-axis toward the 0-axis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "polcnot/error.hpp"

namespace polcnot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Default tolerance (radians) for comparing two polarization states.
inline constexpr double kStateTolerance = 1e-9;

/// Reduce a finite angle into [0, pi).
inline double reduce_mod_pi(double raw) {
  if (!std::isfinite(raw)) throw InvalidArgument("polarization angle must be finite");
  double r = std::fmod(raw, kPi);
  if (r < 0.0) r += kPi;
  // fmod of a tiny negative value plus pi can round up to pi itself.
  if (r >= kPi) r = 0.0;
  return r;
}

/// A direction of linear polarization. The stored angle is always the
/// canonical representative in [0, pi).
class LinearPolarizationAngle {
 public:
  constexpr LinearPolarizationAngle() = default;
  explicit LinearPolarizationAngle(double raw) : theta_(reduce_mod_pi(raw)) {}

  constexpr double radians() const { return theta_; }

  friend constexpr bool operator==(LinearPolarizationAngle, LinearPolarizationAngle) = default;

 private:
  double theta_ = 0.0;
};

inline LinearPolarizationAngle normalize_angle(double raw) { return LinearPolarizationAngle(raw); }

/// Horizontal (in-plane) state, written as a right arrow in truth tables.
inline LinearPolarizationAngle horizontal() { return LinearPolarizationAngle(0.0); }
/// Vertical state, written as an up arrow in truth tables.
inline LinearPolarizationAngle vertical() { return LinearPolarizationAngle(kHalfPi); }

inline LinearPolarizationAngle rotate_angle(LinearPolarizationAngle state, double phi) {
  if (!std::isfinite(phi)) throw InvalidArgument("rotation angle must be finite");
  // Reduce phi first so that large windings do not eat into the precision of theta.
  return LinearPolarizationAngle(state.radians() - reduce_mod_pi(phi));
}

/// Shortest angular distance between two directions, in [0, pi/2].
inline double mod_pi_distance(LinearPolarizationAngle a, LinearPolarizationAngle b) {
  const double d = std::abs(a.radians() - b.radians());
  return std::min(d, kPi - d);
}

/// Signed difference a - b reduced into [-pi/2, pi/2).
inline double signed_mod_pi_difference(LinearPolarizationAngle a, LinearPolarizationAngle b) {
  double d = a.radians() - b.radians();
  if (d >= kHalfPi) d -= kPi;
  if (d < -kHalfPi) d += kPi;
  return d;
}

inline bool approx_equal(LinearPolarizationAngle a, LinearPolarizationAngle b,
                         double tolerance = kStateTolerance) {
  return mod_pi_distance(a, b) <= tolerance;
}

/// Squared overlap of the two states, cos^2(a - b).
inline double fidelity(LinearPolarizationAngle a, LinearPolarizationAngle b) {
  const double c = std::cos(a.radians() - b.radians());
  return c * c;
}

struct JonesVector {
  std::complex<double> a;
  std::complex<double> b;

  double norm() const { return std::sqrt(std::norm(a) + std::norm(b)); }
};

/// <u|v> with the first argument conjugated.
inline std::complex<double> inner_product(const JonesVector& u, const JonesVector& v) {
  return std::conj(u.a) * v.a + std::conj(u.b) * v.b;
}

/// Equality up to a global phase.
inline bool same_state(const JonesVector& u, const JonesVector& v, double tolerance = 1e-12) {
  return std::abs(std::abs(inner_product(u, v)) - 1.0) <= tolerance;
}

inline JonesVector angle_to_jones(LinearPolarizationAngle state) {
  return {std::complex<double>(std::cos(state.radians()), 0.0),
          std::complex<double>(std::sin(state.radians()), 0.0)};
}

struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double polarized_intensity() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }
};

inline StokesVector jones_to_stokes(const JonesVector& j) {
  const double aa = std::norm(j.a);
  const double bb = std::norm(j.b);
  const std::complex<double> cross = std::conj(j.a) * j.b;
  return {aa + bb, aa - bb, 2.0 * cross.real(), 2.0 * cross.imag()};
}

/// Point on the Poincare sphere (unit radius) for a fully polarized state:
/// longitude 2*theta on the equator for linear states.
struct PoincarePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline PoincarePoint to_poincare(const StokesVector& s) {
  return {s.s1 / s.s0, s.s2 / s.s0, s.s3 / s.s0};
}

}  // namespace polcnot
