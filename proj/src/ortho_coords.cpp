#include "torbill/ortho_coords.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <Eigen/LU>

#include "torbill/errors.hpp"

namespace torbill {

namespace {

void check_index(int i) {
  if (i < 1 || i > 3) throw PreconditionError("chart index must be 1, 2 or 3");
}

// First-derivative weights on the nodes start, start + 1, ..., start + n - 1.
const std::vector<double>& stencil_weights(int n, int start) {
  static const std::map<std::pair<int, int>, std::vector<double>> table = [] {
    std::map<std::pair<int, int>, std::vector<double>> t;
    for (int pts : {3, 5}) {
      for (int s = -(pts - 1); s <= 0; ++s) {
        Eigen::MatrixXd a(pts, pts);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(pts);
        rhs(1) = 1.0;
        for (int p = 0; p < pts; ++p) {
          for (int m = 0; m < pts; ++m) a(p, m) = std::pow(double(s + m), p);
        }
        const Eigen::VectorXd w = a.fullPivLu().solve(rhs);
        t[{pts, s}] = std::vector<double>(w.data(), w.data() + pts);
      }
    }
    return t;
  }();
  return table.at({n, start});
}

}  // namespace

bool OrthoChart::contains(const ChartPoint& c) const {
  const auto per = periods();
  const auto bnd = bounds();
  for (int i = 0; i < 3; ++i) {
    if (per[i]) continue;
    if (!(c[i] > bnd[i].first && c[i] < bnd[i].second)) return false;
  }
  return true;
}

ChartPoint OrthoChart::wrap(const ChartPoint& c) const {
  const auto per = periods();
  ChartPoint w = c;
  for (int i = 0; i < 3; ++i) {
    if (per[i]) w[i] = wrap_periodic(c[i], 0.0, *per[i]);
  }
  return w;
}

Vec3 OrthoChart::scale_factors(const ChartPoint& c) const {
  const Mat3 j = jacobian(c);
  return {j.col(0).norm(), j.col(1).norm(), j.col(2).norm()};
}

Mat3 OrthoChart::metric(const ChartPoint& c) const {
  const Mat3 j = jacobian(c);
  return (j.transpose() * j).diagonal().asDiagonal();
}

Mat3 OrthoChart::frame(const ChartPoint& c) const {
  Mat3 q = jacobian(c);
  for (int i = 0; i < 3; ++i) q.col(i).normalize();
  return q;
}

double OrthoChart::christoffel(int i, int j, int k, const ChartPoint& c) const {
  return christoffel_numeric(i, j, k, c);
}

double OrthoChart::christoffel_numeric(int i, int j, int k, const ChartPoint& c, double step) const {
  check_index(i);
  check_index(j);
  check_index(k);
  Vec3 dij;
  for (int m = 0; m < 3; ++m) {
    dij[m] = d_operator(*this, i, [&](const ChartPoint& p) { return frame(p)(m, j - 1); }, c, step);
  }
  return dij.dot(frame(c).col(k - 1));
}

AnnulusChart::AnnulusChart(double height, double r_inner, double r_outer)
    : height_(height), r_inner_(r_inner), r_outer_(r_outer) {
  if (!(height > 0.0) || !(r_inner > 0.0) || !(r_outer > r_inner)) {
    throw PreconditionError("annulus chart needs H > 0 and 0 < R1 < R2");
  }
}

Vec3 AnnulusChart::eta(const ChartPoint& c) const {
  return {c[2] * std::cos(c[0]), c[2] * std::sin(c[0]), c[1]};
}

Mat3 AnnulusChart::jacobian(const ChartPoint& c) const {
  const double ct = std::cos(c[0]), st = std::sin(c[0]);
  Mat3 j;
  j << -c[2] * st, 0, ct,
        c[2] * ct, 0, st,
        0,         1, 0;
  return j;
}

std::array<std::optional<double>, 3> AnnulusChart::periods() const {
  return {kTwoPi, height_, std::nullopt};
}

std::array<std::pair<double, double>, 3> AnnulusChart::bounds() const {
  return {{{0.0, kTwoPi}, {0.0, height_}, {r_inner_, r_outer_}}};
}

double AnnulusChart::christoffel(int i, int j, int k, const ChartPoint& c) const {
  check_index(i);
  check_index(j);
  check_index(k);
  const double r = c[2];
  if (!(r > r_inner_ && r < r_outer_)) throw RangeError("r outside the annulus");
  if (i == 1 && j == 1 && k == 3) return -1.0 / r;
  if (i == 1 && j == 3 && k == 1) return 1.0 / r;
  return 0.0;
}

Vec3 transform_velocity(const OrthoChart& chart, const Vec3& v, const ChartPoint& c) {
  return chart.frame(c).transpose() * v;
}

Vec3 inverse_transform_velocity(const OrthoChart& chart, const Vec3& vc, const ChartPoint& c) {
  return chart.frame(c) * vc;
}

double d_operator(const OrthoChart& chart, int i, const ScalarField& u, const ChartPoint& c,
                  double step, int order, StencilInfo* info) {
  check_index(i);
  if (!(step > 0.0)) throw PreconditionError("step must be positive");
  if (order != 2 && order != 4) throw PreconditionError("stencil order must be 2 or 4");
  const int n = order + 1;
  const int a = i - 1;
  int start = -order / 2;
  const auto per = chart.periods();
  if (!per[a]) {
    const auto [lo, hi] = chart.bounds()[a];
    if (c[a] < lo || c[a] > hi) throw RangeError("point outside the chart");
    const int smin = static_cast<int>(std::ceil((lo - c[a]) / step - 1e-9));
    const int smax = static_cast<int>(std::floor((hi - c[a]) / step + 1e-9)) - (n - 1);
    if (smin > smax) throw PreconditionError("stencil does not fit in the chart");
    const int shifted = std::clamp(start, smin, smax);
    if (shifted != start && info) info->one_sided = true;
    start = shifted;
  }
  const auto& w = stencil_weights(n, start);
  double acc = 0.0;
  for (int m = 0; m < n; ++m) {
    if (w[m] == 0.0) continue;
    ChartPoint p = c;
    p[a] += (start + m) * step;
    acc += w[m] * u(chart.wrap(p));
  }
  return acc / (step * chart.scale_factors(c)[a]);
}

double commutator_residual(const OrthoChart& chart, int i, int j, const ScalarField& u,
                           const ChartPoint& c, double step, int order) {
  if (i == j) throw PreconditionError("commutator needs distinct indices");
  auto d = [&](int a, const ScalarField& f, const ChartPoint& p) {
    return d_operator(chart, a, f, p, step, order);
  };
  const double dij = d(i, [&](const ChartPoint& p) { return d(j, u, p); }, c);
  const double dji = d(j, [&](const ChartPoint& p) { return d(i, u, p); }, c);
  const double rhs = chart.christoffel(j, j, i, c) * d(j, u, c) - chart.christoffel(i, i, j, c) * d(i, u, c);
  return std::abs(dij - dji - rhs);
}

double laplace_beltrami_residual(const OrthoChart& chart, const TestField& field, const ChartPoint& c,
                                 double step, int order) {
  double delta_d = 0.0, correction = 0.0;
  for (int i = 1; i <= 3; ++i) {
    const ScalarField di = [&](const ChartPoint& p) { return d_operator(chart, i, field.u, p, step, order); };
    delta_d += d_operator(chart, i, di, c, step, order);
    double g = 0.0;
    for (int k = 1; k <= 3; ++k) {
      if (k != i) g += chart.christoffel(k, k, i, c);
    }
    if (g != 0.0) correction += g * di(c);
  }
  return std::abs(delta_d - correction - field.laplacian(c));
}

double dv_identity_residual(const OrthoChart& chart, int i, int j, const ChartPoint& c, const Vec3& v,
                            double step, int order) {
  check_index(j);
  const double lhs = d_operator(
      chart, i, [&](const ChartPoint& p) { return chart.frame(p).col(j - 1).dot(v); }, c, step, order);
  const Vec3 vc = transform_velocity(chart, v, c);
  double rhs = 0.0;
  for (int k = 1; k <= 3; ++k) rhs += chart.christoffel(i, j, k, c) * vc[k - 1];
  return std::abs(lhs - rhs);
}

ZetaResiduals zeta_residuals(const AnnulusChart& chart, const ChartPoint& c) {
  const double r = c[2];
  if (!(r > chart.r_inner() && r < chart.r_outer())) throw RangeError("r outside the annulus");
  const Vec3 h = chart.scale_factors(c);
  auto gam = [&](int i, int j, int k) { return chart.christoffel(i, j, k, c); };
  // zeta and its chart gradient (d_theta, d_z, d_r)
  struct Zeta {
    double value;
    Vec3 grad;
  };
  const Zeta zr{1.0 / r, Vec3(0, 0, -1.0 / (r * r))};
  const Zeta zt = zr;
  const Zeta zz{1.0, Vec3::Zero()};
  auto D = [&](const Zeta& z, int i) { return z.grad[i - 1] / h[i - 1]; };

  ZetaResiduals out{};
  out[0] = {std::abs(D(zr, 1) - gam(3, 3, 1) * zr.value),
            std::abs(D(zr, 2) - gam(3, 3, 2) * zr.value),
            std::abs(D(zr, 3) - (gam(1, 1, 3) + gam(2, 2, 3)) * zr.value)};
  out[1] = {std::abs(D(zt, 1) - (gam(2, 2, 1) + gam(3, 3, 1)) * zt.value),
            std::abs(D(zt, 2) - gam(1, 1, 2) * zt.value),
            std::abs(D(zt, 3) - gam(1, 1, 3) * zt.value)};
  out[2] = {std::abs(D(zz, 1) - gam(2, 2, 1) * zz.value),
            std::abs(D(zz, 2) - (gam(1, 1, 2) + gam(3, 3, 2)) * zz.value),
            std::abs(D(zz, 3) - gam(2, 2, 3) * zz.value)};
  return out;
}

std::vector<TestField> annulus_test_fields(const AnnulusChart& chart) {
  const double k = kTwoPi / chart.height();
  std::vector<TestField> f;
  f.push_back({"r cos(theta)", [](const ChartPoint& c) { return c[2] * std::cos(c[0]); },
               [](const ChartPoint&) { return 0.0; }});
  f.push_back({"r^2", [](const ChartPoint& c) { return c[2] * c[2]; },
               [](const ChartPoint&) { return 4.0; }});
  f.push_back({"cos(kz)", [k](const ChartPoint& c) { return std::cos(k * c[1]); },
               [k](const ChartPoint& c) { return -k * k * std::cos(k * c[1]); }});
  f.push_back({"exp(r/2) sin(theta) cos(kz)",
               [k](const ChartPoint& c) { return std::exp(0.5 * c[2]) * std::sin(c[0]) * std::cos(k * c[1]); },
               [k](const ChartPoint& c) {
                 const double r = c[2];
                 return std::exp(0.5 * r) * std::sin(c[0]) * std::cos(k * c[1]) *
                        (0.25 + 0.5 / r - 1.0 / (r * r) - k * k);
               }});
  return f;
}

double convergence_ratio(const std::function<double(double)>& residual, double step) {
  const double coarse = residual(step);
  if (coarse < 1e-13) return 0.0;
  return residual(0.5 * step) / coarse;
}

std::vector<IdentityCheck> run_identity_suite(const AnnulusChart& chart, const IdentitySuiteOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const double margin = 0.1 * (chart.r_outer() - chart.r_inner());
  std::uniform_real_distribution<double> th(0.0, kTwoPi), zd(0.0, chart.height()),
      rd(chart.r_inner() + margin, chart.r_outer() - margin);
  std::normal_distribution<double> g;
  auto point = [&] { return ChartPoint(th(rng), zd(rng), rd(rng)); };

  std::vector<ChartPoint> pts(opts.points);
  for (auto& p : pts) p = point();
  std::vector<IdentityCheck> out;
  auto add = [&](std::string name, double value, double threshold, bool exact = false) {
    out.push_back({std::move(name), value, threshold, exact ? value == 0.0 : value < threshold});
  };

  double anti = 0.0, distinct = 0.0, table = 0.0;
  for (const auto& c : pts) {
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) {
        anti = std::max(anti, std::abs(chart.christoffel(i, j, j, c)));
        for (int k = 1; k <= 3; ++k) {
          const double v = chart.christoffel(i, j, k, c);
          anti = std::max(anti, std::abs(v + chart.christoffel(i, k, j, c)));
          if (i != j && j != k && i != k) distinct = std::max(distinct, std::abs(v));
          table = std::max(table, std::abs(v - chart.christoffel_numeric(i, j, k, c, opts.step)));
        }
      }
    }
  }
  add("christoffel antisymmetry", anti, 0.0, true);
  add("christoffel distinct indices", distinct, 0.0, true);
  add("christoffel table vs <D_ij eta, D_k eta>", table, opts.residual_tol);

  double frame = 0.0, metric = 0.0, iso = 0.0;
  for (int s = 0; s < opts.frame_samples; ++s) {
    const ChartPoint c = point();
    const Mat3 q = chart.frame(c);
    frame = std::max(frame, (q.transpose() * q - Mat3::Identity()).cwiseAbs().maxCoeff());
    const Vec3 expect(c[2] * c[2], 1.0, 1.0);
    metric = std::max(metric, (chart.metric(c).diagonal() - expect).cwiseAbs().maxCoeff() / (c[2] * c[2]));
    const Vec3 v(g(rng), g(rng), g(rng));
    const Vec3 vc = transform_velocity(chart, v, c);
    iso = std::max(iso, std::abs(vc.norm() - v.norm()));
    iso = std::max(iso, (inverse_transform_velocity(chart, vc, c) - v).cwiseAbs().maxCoeff());
  }
  add("frame orthonormality", frame, opts.frame_tol);
  add("metric diag(r^2, 1, 1)", metric, opts.frame_tol);
  add("velocity isometry", iso, opts.frame_tol);

  const auto fields = annulus_test_fields(chart);
  double comm = 0.0, lb = 0.0, dv = 0.0, zeta = 0.0;
  for (const auto& c : pts) {
    for (const auto& f : fields) {
      for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 3; ++j) {
          if (i != j) comm = std::max(comm, commutator_residual(chart, i, j, f.u, c, opts.step));
        }
      }
      lb = std::max(lb, laplace_beltrami_residual(chart, f, c, opts.step));
    }
    const Vec3 v(g(rng), g(rng), g(rng));
    for (int i = 1; i <= 3; ++i) {
      for (int j = 1; j <= 3; ++j) dv = std::max(dv, dv_identity_residual(chart, i, j, c, v, opts.step));
    }
    for (const auto& row : zeta_residuals(chart, c)) {
      for (double x : row) zeta = std::max(zeta, x);
    }
  }
  add("commutator", comm, opts.residual_tol);
  add("laplace-beltrami", lb, opts.residual_tol);
  add("dv identity", dv, opts.residual_tol);
  add("zeta systems", zeta, opts.zeta_tol);

  const double order_bound = 1.0 / 16.0 + opts.convergence_margin;
  const ChartPoint c0(0.7, 0.3, 0.5 * (chart.r_inner() + chart.r_outer()));
  const auto& smooth = fields.back();
  const Vec3 v0(0.3, -0.5, 0.8);
  add("commutator order",
      convergence_ratio([&](double h) { return commutator_residual(chart, 1, 3, smooth.u, c0, h); },
                        opts.convergence_step),
      order_bound);
  add("laplace-beltrami order",
      convergence_ratio([&](double h) { return laplace_beltrami_residual(chart, smooth, c0, h); },
                        opts.convergence_step),
      order_bound);
  add("dv identity order",
      convergence_ratio([&](double h) { return dv_identity_residual(chart, 1, 1, c0, v0, h); },
                        opts.convergence_step),
      order_bound);
  return out;
}

}  // namespace torbill
