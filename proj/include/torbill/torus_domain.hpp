#pragma once

#include <cstdint>
#include <string>

#include "torbill/profile_curve.hpp"
#include "torbill/types.hpp"

namespace torbill {

enum class PointClass { Inside, Boundary, Outside };

const char* to_string(PointClass c);

/// Boundary point with its generator parameter and unwrapped azimuth.
struct SurfacePoint {
  double tau = 0.0;
  double phi = 0.0;
  Vec3 xyz = Vec3::Zero();
};

/// Solid torus obtained by revolving a ProfileCurve about the z-axis.
///
/// The indicator xi is the exact quadric for circle generators and the signed
/// distance to the generator in the (rho, z) half-plane otherwise.
class ToroidalDomain {
 public:
  struct Options {
    double boundary_band = 1e-10;
    int marker_grid = 4096;
  };

  explicit ToroidalDomain(ProfileCurve profile, Options opts);
  explicit ToroidalDomain(ProfileCurve profile) : ToroidalDomain(std::move(profile), Options{}) {}

  static ToroidalDomain circle(double major_radius, double minor_radius);
  static ToroidalDomain ellipse(double center, double semi_rho, double semi_z);

  const ProfileCurve& profile() const { return profile_; }
  const CurveMarkers& markers() const { return markers_; }
  const Options& options() const { return opts_; }
  bool quadric() const { return quadric_; }

  /// Indicator in the meridian half-plane.
  double xi_bar(double rho, double z) const;
  /// (d/drho, d/dz) of xi_bar.
  Vec2 xi_bar_gradient(double rho, double z) const;
  /// Second derivatives of xi_bar; piecewise smooth for signed distance far from the boundary.
  Mat2 xi_bar_hessian(double rho, double z) const;

  double xi(const Vec3& p) const;
  Vec3 grad_xi(const Vec3& p) const;
  Mat3 hessian_xi(const Vec3& p) const;
  /// Normalized gradient; the outward normal when p is on the boundary.
  Vec3 normal_at(const Vec3& p) const;

  /// Largest k with d^T hessian_xi d >= -k |d|^2 wherever rho >= rho_min.
  double hessian_lower_bound(double rho_min) const;

  Vec3 sigma(double tau, double phi) const;
  Vec3 outward_normal(double tau, double phi) const;
  /// Rotation by phi of (gamma1', 0, gamma2').
  Vec3 meridian_tangent(double tau, double phi) const;
  SurfacePoint surface_point(double tau, double phi) const;

  PointClass classify_point(const Vec3& p) const;
  PointClass classify_point(const Vec3& p, double band) const;

  /// Inverse of sigma near the boundary. phi is taken on the branch nearest phi_hint.
  SurfacePoint boundary_params(const Vec3& p, double phi_hint) const;

  /// Smallest radius of curvature of the generator.
  double min_curvature_radius() const { return min_radius_; }
  double max_rho() const { return max_rho_; }
  double min_rho() const { return min_rho_; }
  /// Upper bound on the length of any chord of the domain.
  double diameter() const { return diameter_; }

  std::string describe() const;
  std::uint64_t hash() const;

 private:
  ProfileCurve profile_;
  CurveMarkers markers_;
  Options opts_;
  bool quadric_ = false;
  double major_ = 0.0;
  double minor_ = 0.0;
  double min_radius_ = 0.0;
  double max_rho_ = 0.0;
  double min_rho_ = 0.0;
  double diameter_ = 0.0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace torbill
