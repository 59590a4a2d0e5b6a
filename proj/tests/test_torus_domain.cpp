#include <doctest.h>

#include <random>

#include "torbill/errors.hpp"
#include "torbill/torus_domain.hpp"

using namespace torbill;

namespace {

bool near(const Vec3& a, const Vec3& b, double tol) { return (a - b).norm() <= tol; }

}  // namespace

TEST_CASE("sigma on the circle torus") {
  const auto d = ToroidalDomain::circle(2.0, 1.0);
  CHECK(near(d.sigma(0.0, 0.0), Vec3(3, 0, 0), 1e-15));
  CHECK(near(d.sigma(0.0, kPi / 2), Vec3(0, 3, 0), 1e-15));
  CHECK(near(d.sigma(kPi, 0.0), Vec3(1, 0, 0), 1e-15));
}

TEST_CASE("outward normal") {
  const auto d = ToroidalDomain::circle(2.0, 1.0);
  CHECK(near(d.outward_normal(0.0, 0.0), Vec3(1, 0, 0), 1e-15));
  CHECK(near(d.outward_normal(kPi, 0.0), Vec3(-1, 0, 0), 1e-15));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int i = 0; i < 200; ++i) {
    const double tau = u(rng), phi = u(rng);
    const Vec3 n = d.outward_normal(tau, phi);
    CHECK(std::abs(n.norm() - 1.0) < 1e-12);
    CHECK(std::abs(n.dot(azimuthal_direction(phi))) < 1e-12);
    CHECK(near(d.normal_at(d.sigma(tau, phi)), n, 1e-8));
    CHECK(std::abs(d.xi(d.sigma(tau, phi))) < 1e-10);
  }
}

TEST_CASE("classify_point") {
  const auto d = ToroidalDomain::circle(2.0, 1.0);
  CHECK(d.xi(Vec3(2, 0, 0)) == doctest::Approx(-1.0));
  CHECK(d.classify_point(Vec3(2, 0, 0)) == PointClass::Inside);
  CHECK(d.classify_point(Vec3(3, 0, 0)) == PointClass::Boundary);
  CHECK(d.xi(Vec3(4, 0, 0)) == doctest::Approx(3.0));
  CHECK(d.classify_point(Vec3(4, 0, 0)) == PointClass::Outside);
}

TEST_CASE("boundary_params branch selection") {
  const auto d = ToroidalDomain::circle(2.0, 1.0);
  auto sp = d.boundary_params(Vec3(3, 0, 0), 0.0);
  CHECK(std::abs(sp.tau) < 1e-15);
  CHECK(std::abs(sp.phi) < 1e-15);
  sp = d.boundary_params(Vec3(0, 3, 0), 1.5);
  CHECK(std::abs(sp.phi - kPi / 2) < 1e-15);
  sp = d.boundary_params(Vec3(0, 3, 0), -5.0);
  CHECK(std::abs(sp.phi - (kPi / 2 - kTwoPi)) < 1e-14);
  CHECK_THROWS_AS(d.boundary_params(Vec3(2, 0, 0), 0.0), PreconditionError);
}

TEST_CASE("round trip and axisymmetry on circle and ellipse tori") {
  for (const auto& d : {ToroidalDomain::circle(2.0, 1.0), ToroidalDomain::ellipse(4.0, 2.0, 1.0)}) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, d.profile().period());
    std::uniform_real_distribution<double> up(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
      const double tau = ut(rng), phi = up(rng);
      const auto sp = d.boundary_params(d.sigma(tau, phi), phi);
      const double dt = std::abs(wrap_angle((sp.tau - tau) * kTwoPi / d.profile().period()));
      CHECK(dt < 1e-9);
      CHECK(std::abs(sp.phi - phi) < 1e-9);
    }
    for (int i = 0; i < 100; ++i) {
      const Vec3 p(up(rng) * 0.5, up(rng) * 0.5, up(rng) * 0.1);
      const Vec3 q = rotation_z(up(rng)) * p;
      CHECK(std::abs(d.xi(p) - d.xi(q)) < 1e-12 * (1.0 + std::abs(d.xi(p))));
    }
    // xi increases along the outward normal
    for (int i = 0; i < 100; ++i) {
      const double tau = ut(rng), phi = up(rng);
      const Vec3 s = d.sigma(tau, phi), n = d.outward_normal(tau, phi);
      CHECK(d.xi(s + 1e-4 * n) > 0.0);
      CHECK(d.xi(s - 1e-4 * n) < 0.0);
      CHECK(near(d.normal_at(s), n, 1e-8));
    }
  }
}

TEST_CASE("indicator Hessian matches finite differences") {
  for (const auto& d : {ToroidalDomain::circle(2.0, 1.0), ToroidalDomain::ellipse(4.0, 2.0, 1.0)}) {
    const Vec3 p = d.sigma(1.1, 0.4) - 0.05 * d.outward_normal(1.1, 0.4);
    const Mat3 h = d.hessian_xi(p);
    const double step = 1e-5;
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = Vec3::Unit(j) * step;
      const Vec3 col = (d.grad_xi(p + e) - d.grad_xi(p - e)) / (2 * step);
      CHECK((col - h.col(j)).norm() < 1e-6);
    }
  }
}

TEST_CASE("hash is stable and distinguishes domains") {
  const auto a = ToroidalDomain::circle(2.0, 1.0), b = ToroidalDomain::circle(2.0, 1.0);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != ToroidalDomain::circle(2.5, 1.0).hash());
}
