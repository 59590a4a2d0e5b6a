#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "torbill/types.hpp"

namespace torbill {

/// Chart coordinates c = (c1, c2, c3). Indices in this module are 1-based.
using ChartPoint = Vec3;
using ScalarField = std::function<double(const ChartPoint&)>;

/// Orthogonal curvilinear chart eta: c -> R^3 with diagonal metric.
class OrthoChart {
 public:
  virtual ~OrthoChart() = default;

  virtual Vec3 eta(const ChartPoint& c) const = 0;
  /// Columns d eta / d c_i.
  virtual Mat3 jacobian(const ChartPoint& c) const = 0;
  /// Period of each coordinate, empty when the coordinate is bounded.
  virtual std::array<std::optional<double>, 3> periods() const = 0;
  /// Closed range of each bounded coordinate.
  virtual std::array<std::pair<double, double>, 3> bounds() const = 0;

  /// Gamma_{D,ij}^k = <D_i D_j eta, D_k eta>. Defaults to the numeric evaluator.
  virtual double christoffel(int i, int j, int k, const ChartPoint& c) const;

  bool contains(const ChartPoint& c) const;
  ChartPoint wrap(const ChartPoint& c) const;
  /// sqrt(g_ii).
  Vec3 scale_factors(const ChartPoint& c) const;
  Mat3 metric(const ChartPoint& c) const;
  /// Q = [D_1 eta | D_2 eta | D_3 eta].
  Mat3 frame(const ChartPoint& c) const;

  /// Finite-difference evaluation of <D_i D_j eta, D_k eta>.
  double christoffel_numeric(int i, int j, int k, const ChartPoint& c, double step = 1e-3) const;
};

/// Periodic cylinder with annulus cross-section: c = (theta, z, r),
/// eta = (r cos theta, r sin theta, z), g = diag(r^2, 1, 1).
class AnnulusChart : public OrthoChart {
 public:
  explicit AnnulusChart(double height = kTwoPi, double r_inner = 1.0, double r_outer = 3.0);

  Vec3 eta(const ChartPoint& c) const override;
  Mat3 jacobian(const ChartPoint& c) const override;
  std::array<std::optional<double>, 3> periods() const override;
  std::array<std::pair<double, double>, 3> bounds() const override;
  double christoffel(int i, int j, int k, const ChartPoint& c) const override;

  double height() const { return height_; }
  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }

 private:
  double height_;
  double r_inner_;
  double r_outer_;
};

/// Chart components Q^T v and the inverse map.
Vec3 transform_velocity(const OrthoChart& chart, const Vec3& v, const ChartPoint& c);
Vec3 inverse_transform_velocity(const OrthoChart& chart, const Vec3& vc, const ChartPoint& c);

struct StencilInfo {
  bool one_sided = false;
};

/// D_i u = (1 / sqrt(g_ii)) d_i u by central differences of the given order (2 or 4).
/// Periodic coordinates wrap; bounded coordinates shift to a one-sided stencil
/// near the ends and report it through `info`.
double d_operator(const OrthoChart& chart, int i, const ScalarField& u, const ChartPoint& c,
                  double step = 1e-3, int order = 4, StencilInfo* info = nullptr);

/// |(D_i D_j - D_j D_i) u - (Gamma_jj^i D_j u - Gamma_ii^j D_i u)|.
double commutator_residual(const OrthoChart& chart, int i, int j, const ScalarField& u,
                           const ChartPoint& c, double step = 1e-3, int order = 4);

/// Test field with its analytic Laplacian.
struct TestField {
  std::string name;
  ScalarField u;
  ScalarField laplacian;
};

/// |Delta_D u - sum_i sum_{k != i} Gamma_kk^i D_i u - Delta u|.
double laplace_beltrami_residual(const OrthoChart& chart, const TestField& field, const ChartPoint& c,
                                 double step = 1e-3, int order = 4);

/// |D_i vc_j - sum_k Gamma_ij^k vc_k| for the chart components vc of a fixed Cartesian v.
double dv_identity_residual(const OrthoChart& chart, int i, int j, const ChartPoint& c, const Vec3& v,
                            double step = 1e-3, int order = 4);

/// Rows: zeta_r (= zeta_3), zeta_theta (= zeta_1), zeta_z (= zeta_2); columns: the
/// D_1, D_2, D_3 equations of each first-order system.
using ZetaResiduals = std::array<std::array<double, 3>, 3>;
ZetaResiduals zeta_residuals(const AnnulusChart& chart, const ChartPoint& c);

/// Smooth fields on the annulus chart: r cos(theta), r^2, cos(2 pi z / H) and
/// exp(r/2) sin(theta) cos(2 pi z / H).
std::vector<TestField> annulus_test_fields(const AnnulusChart& chart);

/// residual(step / 2) / residual(step); 0 when the coarse residual is already at rounding level.
double convergence_ratio(const std::function<double(double)>& residual, double step);

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct IdentitySuiteOptions {
  double step = 1e-3;
  double residual_tol = 1e-6;
  double zeta_tol = 1e-12;
  double frame_tol = 1e-12;
  int frame_samples = 1000;
  int points = 16;
  double convergence_step = 0.1;
  double convergence_margin = 0.05;
  std::uint64_t seed = 1;
};

std::vector<IdentityCheck> run_identity_suite(const AnnulusChart& chart,
                                              const IdentitySuiteOptions& opts = {});

}  // namespace torbill
