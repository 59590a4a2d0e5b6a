#include <doctest.h>

#include <random>

#include "torbill/errors.hpp"
#include "torbill/grazing.hpp"

using namespace torbill;

namespace {

const ToroidalDomain& circle_torus() {
  static const auto d = ToroidalDomain::circle(2.0, 1.0);
  return d;
}

double hessian_normal_curvature(const ToroidalDomain& d, double tau, double phi, const Vec3& w) {
  const Vec3 x = d.sigma(tau, phi);
  return w.dot(d.hessian_xi(x) * w) / d.grad_xi(x).norm();
}

}  // namespace

TEST_CASE("principal curvatures") {
  const auto& d = circle_torus();
  auto k = principal_curvatures(d, 0.0);
  CHECK(k.azimuthal == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(k.meridian == doctest::Approx(1.0).epsilon(1e-14));
  k = principal_curvatures(d, kPi);
  CHECK(k.azimuthal == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(principal_curvatures(d, kPi / 2).azimuthal) < 1e-15);
}

TEST_CASE("normal curvature and the Hessian oracle") {
  const auto& d = circle_torus();
  CHECK(normal_curvature(d, kPi, 0.0, azimuthal_direction(0.0)) == doctest::Approx(-1.0));
  CHECK(normal_curvature(d, kPi, 0.0, d.meridian_tangent(kPi, 0.0)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(normal_curvature(d, kPi, 0.0, Vec3(1, 0, 0)), PreconditionError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (const auto* dom : {&d}) {
    for (int i = 0; i < 1000; ++i) {
      const double tau = u(rng), phi = u(rng), a = u(rng);
      const Vec3 w = std::cos(a) * azimuthal_direction(phi) + std::sin(a) * dom->meridian_tangent(tau, phi);
      CHECK(std::abs(normal_curvature(*dom, tau, phi, w) - hessian_normal_curvature(*dom, tau, phi, w)) < 1e-7);
    }
  }
  const auto e = ToroidalDomain::ellipse(4.0, 2.0, 1.0);
  std::uniform_real_distribution<double> ut(0.0, e.profile().period());
  for (int i = 0; i < 200; ++i) {
    const double tau = ut(rng), phi = u(rng), a = u(rng);
    const Vec3 w = std::cos(a) * azimuthal_direction(phi) + std::sin(a) * e.meridian_tangent(tau, phi);
    CHECK(std::abs(normal_curvature(e, tau, phi, w) - hessian_normal_curvature(e, tau, phi, w)) < 1e-7);
  }
}

TEST_CASE("inflection directions at tau = 2 pi / 3") {
  const auto& d = circle_torus();
  const double tau = 2 * kPi / 3, phi = 0.3;
  const auto dirs = inflection_directions(d, tau, phi);
  CHECK(std::abs(dirs.theta - kPi / 6) < 1e-12);
  const Vec3 n = d.outward_normal(tau, phi), x = d.sigma(tau, phi);
  CHECK(std::abs(n.dot(dirs.I1)) < 1e-12);
  CHECK(std::abs(n.dot(dirs.I2)) < 1e-12);
  CHECK(std::abs(normal_curvature(d, tau, phi, dirs.I1)) < 1e-12);
  // angular momentum rho |v_phi|
  const double omega = std::abs(x.x() * dirs.I2.y() - x.y() * dirs.I2.x());
  CHECK(omega == doctest::Approx(1.5 * std::sqrt(3.0) / 2).epsilon(1e-12));
  CHECK(dirs.I1.dot(azimuthal_direction(phi)) > 0);
  CHECK(dirs.I2.dot(azimuthal_direction(phi)) > 0);
  for (double s : {1e-2, 5e-3, 2.5e-3}) {
    CHECK(d.xi(x + s * dirs.I1) > 0.0);
    CHECK(d.xi(x - s * dirs.I1) < 0.0);
  }
  CHECK(classify(d, x, dirs.I1) == GrazingClass::InflectionPlus);
  CHECK(classify(d, x, -dirs.I1) == GrazingClass::InflectionMinus);
  CHECK(classify(d, x, dirs.I2) == GrazingClass::InflectionMinus);
  const auto m = dirs.mirrored();
  CHECK(classify(d, x, m.I1) == GrazingClass::InflectionPlus);
}

TEST_CASE("inflection angle tends to zero at the markers") {
  const auto& d = circle_torus();
  double prev = 1.0;
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double th = inflection_angle(d, kPi / 2 + delta);
    CHECK(th < prev);
    prev = th;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("undefined inflection") {
  const auto& d = circle_torus();
  CHECK_THROWS_AS(inflection_directions(d, 0.3, 0.0), UndefinedInflection);
  CHECK_THROWS_AS(inflection_directions(d, kPi + 1e-4, 0.0), UndefinedInflection);
}

TEST_CASE("classification examples") {
  const auto& d = circle_torus();
  const double phi = 0.7;
  Vec3 x = d.sigma(0.1, phi);
  for (double a : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    const Vec3 w = std::cos(a) * azimuthal_direction(phi) + std::sin(a) * d.meridian_tangent(0.1, phi);
    CHECK(classify(d, x, w) == GrazingClass::ConvexGrazing);
  }
  x = d.sigma(kPi, phi);
  CHECK(classify(d, x, azimuthal_direction(phi)) == GrazingClass::ConcaveGrazing);
  CHECK(classify(d, x, d.outward_normal(kPi, phi)) == GrazingClass::NonGrazing);

  const double tau = 2 * kPi / 3;
  x = d.sigma(tau, phi);
  const auto dirs = inflection_directions(d, tau, phi);
  const Vec3 mid = concave_direction(d, tau, phi, 0.5);
  CHECK((mid - (dirs.I1 + dirs.I2).normalized()).norm() < 1e-14);
  CHECK(classify(d, x, mid) == GrazingClass::ConcaveGrazing);
  CHECK((concave_direction(d, tau, phi, 1e-12) - dirs.I2).norm() < 1e-9);
  CHECK((concave_direction(d, tau, phi, 1 - 1e-12) - dirs.I1).norm() < 1e-9);
  CHECK_THROWS_AS(concave_direction(d, tau, phi, 1.0), PreconditionError);
  // fallback at Z_h
  const Vec3 v = concave_direction(d, kPi, phi, 0.5);
  CHECK((v - azimuthal_direction(phi)).norm() < 1e-12);
}

TEST_CASE("sign rule and pairing over random tangents") {
  const auto& d = circle_torus();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const double tol = 0.05;
  for (int i = 0; i < 500; ++i) {
    const double tau = u(rng), phi = u(rng), a = u(rng);
    const Vec3 x = d.sigma(tau, phi);
    const Vec3 w = std::cos(a) * azimuthal_direction(phi) + std::sin(a) * d.meridian_tangent(tau, phi);
    const double kn = normal_curvature(d, tau, phi, w);
    if (kn > tol) CHECK(classify(d, x, w) == GrazingClass::ConvexGrazing);
    if (kn < -tol) CHECK(classify(d, x, w) == GrazingClass::ConcaveGrazing);
  }
  for (int i = 0; i < 100; ++i) {
    const double tau = 1.7 + 1.0 * i / 100.0, phi = u(rng);
    if (std::abs(tau - kPi) < 0.05) continue;
    const auto dirs = inflection_directions(d, tau, phi);
    const Vec3 x = d.sigma(tau, phi);
    CHECK(classify(d, x, dirs.I1) == GrazingClass::InflectionPlus);
    CHECK(classify(d, x, -dirs.I1) == GrazingClass::InflectionMinus);
  }
}
