#include <doctest.h>

#include <random>

#include "torbill/errors.hpp"
#include "torbill/phase_analysis.hpp"

using namespace torbill;

namespace {

const ToroidalDomain& torus() {
  static const auto d = ToroidalDomain::circle(2.0, 1.0);
  return d;
}

const Vec3 kGoldenX(3, 0, 0);
const Vec3 kGoldenV(-std::sqrt(3.0) / 2, 0.5, 0);

Trajectory creeping(const ToroidalDomain& d, double alpha, double beta) {
  const PhaseState s = tangential_launch(d, d.markers().tau1_star + 0.1, 0.0, alpha, beta);
  return forward_cycles(d, s, Budget::length(1.2 * d.profile().period()));
}

}  // namespace

TEST_CASE("bounce count on the triangle orbit") {
  const auto& d = torus();
  const double chord = 3 * std::sqrt(3.0);
  CHECK(bounce_count(d, kGoldenX, kGoldenV, 3 * chord).n == 3);
  CHECK(bounce_count(d, kGoldenX, kGoldenV, 0.5 * chord).n == 0);
  int prev = 0;
  for (double L = 0.5; L < 40; L += 1.7) {
    const int n = bounce_count(d, Vec3(2.1, 0.3, 0.2), Vec3(0.3, -0.7, 0.4), L).n;
    CHECK(n >= prev);
    prev = n;
  }
  Caps caps;
  caps.max_bounces = 4;
  CHECK(bounce_count(d, Vec3(2, 0, 0), Vec3(1, 0, 0), 100.0, caps).capped);
}

TEST_CASE("recurrence residuals") {
  const auto& d = torus();
  // meridian circle orbit: equal arcs, r2 = 0
  const auto m = creeping(d, 0.02, 0.0);
  const auto recs = recurrence_residuals(d, m);
  REQUIRE(recs.size() > 10);
  for (const auto& r : recs) {
    CHECK(r.r1 < 1e-9);
    CHECK(r.r2 < 1e-6);
    const double expect = std::abs(r.dtau_next - r.dtau) /
                          (r.dtau * r.dtau + r.dtau_next * r.dtau_next + r.dphi * r.dphi + r.dphi_next * r.dphi_next);
    CHECK(r.r2 == doctest::Approx(expect));
  }
  // gate removes large steps
  Caps caps;
  caps.max_bounces = 20;
  const auto big = backward_cycles(d, {Vec3(2, 0, 0), Vec3(0.2, 1, 0.5), 0.0}, Budget{}, caps);
  CHECK(recurrence_residuals(d, big).empty());
  // fewer than three events
  caps.max_bounces = 2;
  CHECK(recurrence_residuals(d, backward_cycles(d, {Vec3(2, 0, 0), Vec3(1, 0, 0), 0.0}, Budget{}, caps)).empty());
}

TEST_CASE("recurrence residuals stay bounded under refinement") {
  const auto e = ToroidalDomain::ellipse(4.0, 2.0, 1.0);
  RecurrenceOptions opts;
  opts.inner_only = true;
  double lo1 = 1e300, hi1 = 0, lo2 = 1e300, hi2 = 0;
  for (double alpha = 0.025; alpha > 0.004; alpha *= 0.5) {
    const auto recs = recurrence_residuals(e, creeping(e, alpha, 0.05), opts);
    REQUIRE(!recs.empty());
    double r1 = 0, r2 = 0;
    for (const auto& r : recs) {
      r1 = std::max(r1, r.r1);
      r2 = std::max(r2, r.r2);
    }
    lo1 = std::min(lo1, r1);
    hi1 = std::max(hi1, r1);
    lo2 = std::min(lo2, r2);
    hi2 = std::max(hi2, r2);
  }
  CHECK(hi1 / lo1 < 10.0);
  CHECK(hi2 / lo2 < 10.0);
}

TEST_CASE("ring membership") {
  const auto& d = torus();
  const Vec3 x(2.5, 0, 0.1);
  const std::vector<RingSpec> specs{{RingKind::AzimuthAligned, 1e-6, 0.0},
                                    {RingKind::Perp, 0.05, 0.0},
                                    {RingKind::Symmetric, 0.05, 0.0}};
  auto m = ring_membership(d, x, azimuthal_direction(0.0), specs);
  CHECK(m[0]);
  CHECK(!m[1]);
  CHECK(angular_momentum(x, azimuthal_direction(0.0)) == doctest::Approx(2.5));
  m = ring_membership(d, x, Vec3(1, 0, 1).normalized(), specs);
  CHECK(!m[0]);
  CHECK(m[1]);
  CHECK(m[2]);
  const double w = ring_reference_omega(d, 2 * kPi / 3);
  CHECK(w == doctest::Approx(1.5 * std::sqrt(3.0) / 2).epsilon(1e-12));
  const Vec3 xr(3, 0, 0);
  const Vec3 vexact = Vec3(std::sqrt(1 - (w / 3) * (w / 3)), w / 3, 0);
  m = ring_membership(d, xr, vexact, {{RingKind::AngularMomentum, 1e-9, 2 * kPi / 3}});
  CHECK(m[0]);
  CHECK_THROWS_AS(ring_membership(d, xr, vexact, {{RingKind::AngularMomentum, 0.1, 0.3}}), UndefinedInflection);
}

TEST_CASE("bad-set estimator") {
  const auto& d = torus();
  BadSetParams p;
  p.n_samples = 2000;
  p.seed = 42;
  const auto samples = badset_samples(d, p);
  const auto r0 = summarize_badset(p, samples, 0.0);
  CHECK(r0.near_grazing == 0);
  const auto r = summarize_badset(p, samples, 0.05);
  CHECK(r.fraction >= 0.0);
  CHECK(r.fraction <= 1.0);
  CHECK(r.ci95 == doctest::Approx(1.96 * std::sqrt(r.fraction * (1 - r.fraction) / 2000)));

  // worker count does not change the result
  p.workers = 3;
  const auto again = badset_samples(d, p);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].min_normal_dot == again[i].min_normal_dot);
    CHECK(samples[i].bounces == again[i].bounces);
  }

  // outer base point, short L: the inner region is out of reach
  BadSetParams q;
  q.x_section = Vec3(2.9, 0, 0);
  q.length = 0.5;
  q.n_samples = 1000;
  CHECK(badset_measure(d, q, 0.05).stopped_at_inflection == 0);

  // ring exclusions are counted
  BadSetParams rp = q;
  rp.rings = {{RingKind::Perp, 0.1, 0.0}};
  const auto rr = badset_measure(d, rp, 0.0);
  CHECK(rr.ring_excluded > 50);
  CHECK(rr.ring_excluded < 150);

  BadSetParams small = q;
  small.n_samples = 10;
  CHECK_THROWS_AS(badset_samples(d, small), PreconditionError);
}

TEST_CASE("bad-set confidence interval shrinks like 1/sqrt(n)") {
  const auto& d = torus();
  BadSetParams p;
  p.length = 3.0;
  p.seed = 9;
  p.rings = {{RingKind::Symmetric, 0.2, 0.0}};
  p.n_samples = 4000;
  const auto a = badset_measure(d, p, 0.05);
  p.n_samples = 8000;
  const auto b = badset_measure(d, p, 0.05);
  CHECK(a.ci95 / b.ci95 == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("sample velocities are reproducible and unit") {
  const Vec3 a = sample_velocity(5, 17, 1.0), b = sample_velocity(5, 17, 1.0);
  CHECK(a == b);
  CHECK(std::abs(a.norm() - 1.0) < 1e-15);
  CHECK(sample_velocity(5, 18, 1.0) != a);
  const Vec3 c = sample_velocity(5, 17, 4.0);
  CHECK(c.norm() >= 0.25);
  CHECK(c.norm() <= 4.0);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}

TEST_CASE("Jacobian determinant") {
  const auto& d = torus();
  auto r = jacobian_det(d, {Vec3(2, 0, 0), Vec3(0.1, 0.2, 0.05), 2.0}, 0.0, 1e-5);
  CHECK(r.bounces == 0);
  CHECK(r.det == doctest::Approx(-8.0).epsilon(1e-9));
  r = jacobian_det(d, {Vec3(2, 0, 0), Vec3(0.1, 0.2, 0.05), 0.5}, 0.0, 1e-5);
  CHECK(std::abs(r.det) == doctest::Approx(0.125).epsilon(1e-9));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const double dt = u(rng);
    const Vec3 v = Vec3(g(rng), g(rng), g(rng)).normalized() * (0.5 / dt);
    const auto res = jacobian_det(d, {Vec3(2, 0, 0), v, dt}, 0.0, 1e-5);
    CHECK(std::abs(std::abs(res.det) - dt * dt * dt) / (dt * dt * dt) < 1e-6);
  }

  // one planar bounce
  r = jacobian_det(d, {Vec3(2, 0, 0), Vec3(1, 0, 0.3), 0.0}, -1.5, 1e-5);
  CHECK(r.bounces == 1);
  CHECK(r.rel_spread < 1e-4);

  // tangential touch of the inner equator between s and t
  CHECK_THROWS_AS(jacobian_det(d, {Vec3(1, -2, 0), Vec3(0, -1, 0), 3.0}, 0.0, 1e-5), NonSmoothPoint);
  // evaluation time on a bounce
  CHECK_THROWS_AS(jacobian_det(d, {Vec3(2, 0, 0), Vec3(1, 0, 0), 0.0}, -1.0, 1e-5), PreconditionError);
}

TEST_CASE("specular basis") {
  const auto& d = torus();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const double tau = u(rng), phi = u(rng);
    const Vec3 x = d.sigma(tau, phi);
    Vec3 v(g(rng), g(rng), g(rng));
    if (d.normal_at(x).dot(v) > 0) v = reflect(d.normal_at(x), v);
    const auto b = specular_basis(d, x, v);
    Mat3 m;
    m << b.e0, b.e1, b.e2;
    CHECK((m.transpose() * m - Mat3::Identity()).norm() < 1e-12);
    CHECK(m.determinant() == doctest::Approx(1.0));
    CHECK(b.e0.dot(v) == doctest::Approx(v.norm()));
    CHECK(std::abs(b.e1.dot(azimuthal_direction(phi))) < 1e-12);
  }
  const Vec3 x = d.sigma(1.0, 0.0);
  CHECK_THROWS_AS(specular_basis(d, x, azimuthal_direction(0.0)), PreconditionError);
}
