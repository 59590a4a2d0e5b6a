#include "torbill/torus_domain.hpp"

#include <algorithm>
#include <cstdio>

#include "torbill/errors.hpp"

namespace torbill {

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Inside: return "Inside";
    case PointClass::Boundary: return "Boundary";
    case PointClass::Outside: return "Outside";
  }
  return "?";
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ToroidalDomain::ToroidalDomain(ProfileCurve profile, Options opts)
    : profile_(std::move(profile)), opts_(opts) {
  markers_ = find_markers(profile_, opts_.marker_grid);
  if (profile_.native_unit_speed()) {
    if (const auto* c = dynamic_cast<const CircleGenerator*>(&profile_.raw())) {
      quadric_ = true;
      major_ = c->major_radius();
      minor_ = c->minor_radius();
    }
  }
  const int n = 2048;
  double kmax = 0.0, zmin = 1e300, zmax = -1e300;
  max_rho_ = 0.0;
  min_rho_ = 1e300;
  for (int i = 0; i < n; ++i) {
    const double tau = profile_.period() * i / n;
    const Vec2 g = profile_.point(tau);
    kmax = std::max(kmax, profile_.curvature(tau));
    max_rho_ = std::max(max_rho_, g.x());
    min_rho_ = std::min(min_rho_, g.x());
    zmin = std::min(zmin, g.y());
    zmax = std::max(zmax, g.y());
  }
  min_radius_ = 1.0 / kmax;
  diameter_ = 1.01 * std::hypot(2.0 * max_rho_, zmax - zmin);
}

ToroidalDomain ToroidalDomain::circle(double major_radius, double minor_radius) {
  return ToroidalDomain(ProfileCurve::circle(major_radius, minor_radius));
}

ToroidalDomain ToroidalDomain::ellipse(double center, double semi_rho, double semi_z) {
  return ToroidalDomain(ProfileCurve::ellipse(center, semi_rho, semi_z));
}

double ToroidalDomain::xi_bar(double rho, double z) const {
  if (quadric_) {
    const double d = rho - major_;
    return d * d + z * z - minor_ * minor_;
  }
  return profile_.foot_point(Vec2(rho, z)).signed_distance;
}

Vec2 ToroidalDomain::xi_bar_gradient(double rho, double z) const {
  if (quadric_) return Vec2(2.0 * (rho - major_), 2.0 * z);
  return profile_.foot_point(Vec2(rho, z)).normal;
}

Mat2 ToroidalDomain::xi_bar_hessian(double rho, double z) const {
  if (quadric_) return 2.0 * Mat2::Identity();
  const FootPoint fp = profile_.foot_point(Vec2(rho, z));
  const double denom = 1.0 + fp.curvature * fp.signed_distance;
  return (fp.curvature / denom) * fp.tangent * fp.tangent.transpose();
}

namespace {

Vec3 radial_unit(const Vec3& p, double rho) {
  if (rho > 0.0) return Vec3(p.x() / rho, p.y() / rho, 0.0);
  return Vec3::UnitX();
}

}  // namespace

double ToroidalDomain::xi(const Vec3& p) const { return xi_bar(axial_radius(p), p.z()); }

Vec3 ToroidalDomain::grad_xi(const Vec3& p) const {
  const double rho = axial_radius(p);
  const Vec2 g = xi_bar_gradient(rho, p.z());
  return g.x() * radial_unit(p, rho) + g.y() * Vec3::UnitZ();
}

Mat3 ToroidalDomain::hessian_xi(const Vec3& p) const {
  const double rho = axial_radius(p);
  if (!(rho > 0.0)) throw PreconditionError("indicator Hessian is singular on the axis");
  const Vec3 er = radial_unit(p, rho);
  const Vec3 ez = Vec3::UnitZ();
  const Vec2 g = xi_bar_gradient(rho, p.z());
  const Mat2 h = xi_bar_hessian(rho, p.z());
  Mat3 ixy = Mat3::Zero();
  ixy(0, 0) = ixy(1, 1) = 1.0;
  return h(0, 0) * er * er.transpose() + h(0, 1) * (er * ez.transpose() + ez * er.transpose()) +
         h(1, 1) * ez * ez.transpose() + (g.x() / rho) * (ixy - er * er.transpose());
}

Vec3 ToroidalDomain::normal_at(const Vec3& p) const { return grad_xi(p).normalized(); }

double ToroidalDomain::hessian_lower_bound(double rho_min) const {
  rho_min = std::max(rho_min, 1e-12);
  if (quadric_) return std::max(0.0, 2.0 * major_ / rho_min - 2.0);
  return 1.0 / rho_min;
}

Vec3 ToroidalDomain::sigma(double tau, double phi) const {
  const Vec2 g = profile_.point(tau);
  return Vec3(g.x() * std::cos(phi), g.x() * std::sin(phi), g.y());
}

Vec3 ToroidalDomain::outward_normal(double tau, double phi) const {
  const Vec2 d = profile_.jet(tau).d1;
  return Vec3(d.y() * std::cos(phi), d.y() * std::sin(phi), -d.x()).normalized();
}

Vec3 ToroidalDomain::meridian_tangent(double tau, double phi) const {
  const Vec2 d = profile_.jet(tau).d1;
  return Vec3(d.x() * std::cos(phi), d.x() * std::sin(phi), d.y());
}

SurfacePoint ToroidalDomain::surface_point(double tau, double phi) const {
  return {profile_.wrap(tau), phi, sigma(tau, phi)};
}

PointClass ToroidalDomain::classify_point(const Vec3& p) const {
  return classify_point(p, opts_.boundary_band);
}

PointClass ToroidalDomain::classify_point(const Vec3& p, double band) const {
  const double v = xi(p);
  if (std::abs(v) <= band) return PointClass::Boundary;
  return v < 0.0 ? PointClass::Inside : PointClass::Outside;
}

SurfacePoint ToroidalDomain::boundary_params(const Vec3& p, double phi_hint) const {
  const double residual = xi(p);
  if (!(std::abs(residual) < 1e-6)) {
    throw PreconditionError("boundary_params needs a point within 1e-6 of the boundary");
  }
  const double a = azimuth(p);
  const double phi = a + kTwoPi * std::round((phi_hint - a) / kTwoPi);
  const double rho = axial_radius(p);
  double tau;
  if (quadric_) {
    tau = profile_.wrap(minor_ * std::atan2(p.z(), rho - major_));
  } else {
    tau = profile_.foot_point(Vec2(rho, p.z())).tau;
  }
  // Newton polish of (gamma(tau) - q) . gamma'(tau) = 0 in the meridian half-plane.
  const Vec2 q(rho, p.z());
  for (int it = 0;; ++it) {
    const CurveJet j = profile_.jet(tau);
    const double f = (j.point - q).dot(j.d1);
    const double df = 1.0 + (j.point - q).dot(j.d2);
    const double step = f / df;
    tau -= step;
    if (std::abs(step) <= 1e-15 * profile_.period()) break;
    if (it >= 50) throw NumericError("boundary_params Newton did not converge", std::abs(f));
  }
  tau = profile_.wrap(tau);
  return {tau, phi, sigma(tau, phi)};
}

std::string ToroidalDomain::describe() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, " band=%.17g", opts_.boundary_band);
  return profile_.describe() + (quadric_ ? " quadric" : " signed-distance") + buf;
}

std::uint64_t ToroidalDomain::hash() const { return fnv1a(describe()); }

}  // namespace torbill
