#include <doctest.h>

#include <cmath>

#include "torbill/errors.hpp"
#include "torbill/profile_curve.hpp"

using namespace torbill;

TEST_CASE("circle curvature is the reciprocal radius") {
  const auto c = ProfileCurve::circle(2.0, 1.0);
  for (double tau : {0.0, 0.7, 2.0, 4.5}) CHECK(curvature(c, tau) == doctest::Approx(1.0).epsilon(1e-14));
  const auto half = ProfileCurve::circle(2.0, 0.5);
  CHECK(curvature(half, 0.3) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(half.period() == doctest::Approx(kPi));
}

TEST_CASE("circle markers") {
  const auto c = ProfileCurve::circle(2.0, 1.0);
  const auto m = find_markers(c);
  CHECK(std::abs(m.tau1_star - kPi / 2) < 1e-10);
  CHECK(std::abs(m.tau2_star - 3 * kPi / 2) < 1e-10);
  CHECK(std::abs(m.lambda_star - kPi) < 1e-10);
  REQUIRE(m.z_h_zeros.size() == 1);
  CHECK(std::abs(m.z_h_zeros[0] - kPi) < 1e-10);
}

TEST_CASE("h at the circle inner interval") {
  const auto c = ProfileCurve::circle(2.0, 1.0);
  const auto m = find_markers(c);
  // gamma1' = -sin tau, gamma1 = 2 + cos tau, kappa = 1, |gamma2'| = |cos tau|
  for (double tau : {1.8, 2.5, 3.5, 4.4}) {
    const double expect = (-std::sin(tau) / (2 + std::cos(tau))) * (2 + std::cos(tau) + std::abs(std::cos(tau)));
    CHECK(h_value(c, m, tau) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(h_value(c, m, 0.3), PreconditionError);
}

TEST_CASE("ellipse arc length and markers") {
  const auto e = ProfileCurve::ellipse(4.0, 2.0, 1.0);
  // 4 a E(k), k^2 = 1 - b^2/a^2
  const double perimeter = 4.0 * 2.0 * std::comp_ellint_2(std::sqrt(0.75));
  CHECK(e.period() == doctest::Approx(perimeter).epsilon(1e-12));
  CHECK(perimeter == doctest::Approx(9.6884482).epsilon(1e-8));
  const auto m = find_markers(e);
  CHECK(std::abs(m.tau1_star - perimeter / 4) < 1e-9);
  CHECK(std::abs(m.lambda_star - perimeter / 2) < 1e-9);
  CHECK(std::abs(m.tau2_star - 3 * perimeter / 4) < 1e-9);
  CHECK(std::abs(e.raw_parameter(perimeter / 2) - kPi) < 1e-10);
}

TEST_CASE("ellipse is unit speed after reparametrization") {
  const auto e = ProfileCurve::ellipse(4.0, 2.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double tau = e.period() * i / 50.0;
    CHECK(std::abs(e.jet(tau).d1.norm() - 1.0) < 1e-12);
  }
  // vertex curvature a/b^2 and turning-rate check
  CHECK(curvature(e, 0.0) == doctest::Approx(2.0).epsilon(1e-10));
  const double h = 1e-5, tau = 1.3;
  const Vec2 t0 = e.jet(tau - h).d1, t1 = e.jet(tau + h).d1;
  const double turning = std::atan2(t0.x() * t1.y() - t0.y() * t1.x(), t0.dot(t1)) / (2 * h);
  CHECK(curvature(e, tau) == doctest::Approx(turning).epsilon(1e-7));
}

TEST_CASE("zero set of h is stable under grid doubling") {
  const auto e = ProfileCurve::ellipse(4.0, 2.0, 1.0);
  const auto m = find_markers(e);
  const auto a = zero_set_h(e, m, 2048), b = zero_set_h(e, m, 4096);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("foot point on the circle") {
  const auto c = ProfileCurve::circle(2.0, 1.0);
  const auto fp = c.foot_point(Vec2(2.0 + 0.5 * std::cos(1.0), 0.5 * std::sin(1.0)));
  CHECK(fp.tau == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fp.signed_distance == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(fp.curvature == doctest::Approx(1.0).epsilon(1e-13));
  const auto out = c.foot_point(Vec2(2.0 + 1.5 * std::cos(-2.0), 1.5 * std::sin(-2.0)));
  CHECK(out.tau == doctest::Approx(kTwoPi - 2.0).epsilon(1e-13));
  CHECK(out.signed_distance == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("non-convex input is rejected") {
  // Fourier curve with a dent
  std::vector<Vec2> samples;
  for (int i = 0; i < 64; ++i) {
    const double t = kTwoPi * i / 64;
    const double r = 1.0 + 0.4 * std::cos(3 * t);
    samples.emplace_back(4.0 + r * std::cos(t), r * std::sin(t));
  }
  auto curve = std::make_shared<FourierCurve>(FourierCurve::from_samples(samples));
  CHECK_THROWS_AS(reparametrize_arclength(curve), InvariantViolation);
  CHECK_THROWS_AS(ProfileCurve::circle(1.0, 2.0), InvariantViolation);
}

TEST_CASE("Fourier interpolation reproduces an ellipse") {
  std::vector<Vec2> samples;
  for (int i = 0; i < 33; ++i) {
    const double t = kTwoPi * i / 33;
    samples.emplace_back(4.0 + 2.0 * std::cos(t), std::sin(t));
  }
  const auto f = FourierCurve::from_samples(samples);
  const auto p = f.jet(0.37).point;
  CHECK(p.x() == doctest::Approx(4.0 + 2.0 * std::cos(0.37)).epsilon(1e-12));
  CHECK(p.y() == doctest::Approx(std::sin(0.37)).epsilon(1e-12));
}
