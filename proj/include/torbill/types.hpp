#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace torbill {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps t into the half-open period [a, b).
inline double wrap_periodic(double t, double a, double b) {
  const double p = b - a;
  double r = std::fmod(t - a, p);
  if (r < 0) r += p;
  if (r >= p) r = 0;
  return a + r;
}

/// Maps an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Rotation about the z-axis.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotation_z(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Eigen::Matrix<Scalar, 3, 1>::UnitZ())
      .toRotationMatrix();
}

/// Unit azimuthal direction at azimuth phi, i.e. the rotation of (0, 1, 0).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> azimuthal_direction(Scalar phi) {
  using std::cos;
  using std::sin;
  return {-sin(phi), cos(phi), Scalar(0)};
}

/// Unit radial direction at azimuth phi.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> radial_direction(Scalar phi) {
  using std::cos;
  using std::sin;
  return {cos(phi), sin(phi), Scalar(0)};
}

/// Azimuth of the projection of p onto the xy-plane, in (-pi, pi].
template <typename Derived>
typename Derived::Scalar azimuth(const Eigen::MatrixBase<Derived>& p) {
  using std::atan2;
  return atan2(p(1), p(0));
}

/// Distance of p from the z-axis.
template <typename Derived>
typename Derived::Scalar axial_radius(const Eigen::MatrixBase<Derived>& p) {
  using std::hypot;
  return hypot(p(0), p(1));
}

}  // namespace torbill
