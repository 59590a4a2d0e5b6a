#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "torbill/types.hpp"

namespace torbill {

/// Position and first two derivatives of a planar curve in the (rho, z) half-plane.
struct CurveJet {
  Vec2 point;
  Vec2 d1;
  Vec2 d2;
};

/// A closed planar curve over a periodic parameter interval [begin, end).
///
/// Implementations must be C2 and positively oriented. The parameter need
/// not be arc length; ProfileCurve takes care of reparametrization.
class ParametricCurve {
 public:
  virtual ~ParametricCurve() = default;

  virtual CurveJet jet(double t) const = 0;
  virtual double begin() const = 0;
  virtual double end() const = 0;

  /// True when |jet(t).d1| == 1 identically.
  virtual bool unit_speed() const { return false; }

  /// Analytic d(kappa)/d(arc length), when the implementation knows it.
  virtual std::optional<double> curvature_derivative(double /*t*/) const {
    return std::nullopt;
  }

  virtual std::string describe() const = 0;
};

/// Circle of radius r centred at (R, 0), unit speed, tau = 0 on the outer equator.
class CircleGenerator final : public ParametricCurve {
 public:
  CircleGenerator(double major_radius, double minor_radius);

  CurveJet jet(double t) const override;
  double begin() const override { return 0.0; }
  double end() const override { return kTwoPi * minor_; }
  bool unit_speed() const override { return true; }
  std::optional<double> curvature_derivative(double) const override { return 0.0; }
  std::string describe() const override;

  double major_radius() const { return major_; }
  double minor_radius() const { return minor_; }

 private:
  double major_;
  double minor_;
};

/// Ellipse (center + a cos t, b sin t) in the angular parameter t.
class EllipseGenerator final : public ParametricCurve {
 public:
  EllipseGenerator(double center, double semi_rho, double semi_z);

  CurveJet jet(double t) const override;
  double begin() const override { return 0.0; }
  double end() const override { return kTwoPi; }
  std::string describe() const override;

 private:
  double center_;
  double a_;
  double b_;
};

/// Truncated Fourier series rho(t), z(t) over [0, 2 pi).
class FourierCurve final : public ParametricCurve {
 public:
  /// cos_rho[k], sin_rho[k] multiply cos(k t), sin(k t); index 0 of the sine
  /// arrays is ignored.
  FourierCurve(std::vector<double> cos_rho, std::vector<double> sin_rho,
               std::vector<double> cos_z, std::vector<double> sin_z);

  /// Trigonometric interpolant of samples taken at equally spaced parameter values.
  static FourierCurve from_samples(const std::vector<Vec2>& samples);

  CurveJet jet(double t) const override;
  double begin() const override { return 0.0; }
  double end() const override { return kTwoPi; }
  std::string describe() const override;

 private:
  std::vector<double> cr_, sr_, cz_, sz_;
};

/// Cumulative arc length of a raw curve and its inverse.
class ArcLengthTable {
 public:
  ArcLengthTable(std::shared_ptr<const ParametricCurve> raw, int panels);

  double total() const { return cumulative_.back(); }
  /// Arc length from raw.begin() to t, t in [begin, end].
  double arc_length(double t) const;
  /// Raw parameter whose arc length is s, s in [0, total].
  double parameter(double s) const;

 private:
  double panel_integral(double a, double b) const;

  std::shared_ptr<const ParametricCurve> raw_;
  double t0_;
  double dt_;
  std::vector<double> cumulative_;
};

/// Nearest point on the generator to a query point of the half-plane.
struct FootPoint {
  double tau;               ///< arc-length parameter, wrapped into [a, b)
  Vec2 point;
  Vec2 tangent;             ///< unit, positively oriented
  Vec2 normal;              ///< unit, outward
  double curvature;         ///< nonnegative for a convex curve
  double signed_distance;   ///< negative inside
};

/// Analytic, strictly convex, unit-speed generator gamma(tau) over [a, b).
///
/// Immutable after construction and cheap to copy (shared state).
class ProfileCurve {
 public:
  struct Options {
    int arc_length_panels = 512;
    int seed_points = 512;
    double unit_speed_tol = 1e-10;
    double kappa_prime_step = 1e-6;
  };

  /// Wraps a curve that is already unit speed. Invariants are validated on a grid.
  static ProfileCurve from_unit_speed(std::shared_ptr<const ParametricCurve> curve,
                                      Options opts);
  static ProfileCurve from_unit_speed(std::shared_ptr<const ParametricCurve> curve) {
    return from_unit_speed(std::move(curve), Options{});
  }

  static ProfileCurve circle(double major_radius, double minor_radius);
  static ProfileCurve ellipse(double center, double semi_rho, double semi_z);

  double begin() const { return 0.0; }
  double end() const { return period_; }
  double period() const { return period_; }
  double wrap(double tau) const { return wrap_periodic(tau, 0.0, period_); }

  /// gamma, gamma', gamma'' at arc length tau.
  CurveJet jet(double tau) const;
  Vec2 point(double tau) const { return jet(tau).point; }

  /// Curvature sqrt(g1''^2 + g2''^2). Throws InvariantViolation off unit speed.
  double curvature(double tau) const;
  /// d(kappa)/d(tau): analytic when available, else a central difference.
  double curvature_derivative(double tau) const;

  /// Raw parameter at arc length tau, and back.
  double raw_parameter(double tau) const;
  double arc_length_of(double t) const;

  FootPoint foot_point(const Vec2& q) const;

  const ParametricCurve& raw() const { return *raw_; }
  bool native_unit_speed() const { return !table_; }
  const Options& options() const { return opts_; }
  std::string describe() const;

 private:
  friend ProfileCurve reparametrize_arclength(std::shared_ptr<const ParametricCurve>,
                                              ProfileCurve::Options);
  ProfileCurve() = default;
  void build_seed_grid();
  void validate() const;

  std::shared_ptr<const ParametricCurve> raw_;
  std::shared_ptr<const ArcLengthTable> table_;
  std::shared_ptr<const std::vector<Vec2>> seeds_;
  double period_ = 0.0;
  Options opts_;
};

/// Arc-length reparametrization of a closed convex raw curve.
///
/// Rejects non-convex or axis-touching input with InvariantViolation naming
/// the offending parameter.
ProfileCurve reparametrize_arclength(std::shared_ptr<const ParametricCurve> raw,
                                     ProfileCurve::Options opts = {});

/// Special parameters of the generator.
///
/// tau2_star and lambda_star are unwrapped so that
/// tau1_star < lambda_star < tau2_star < tau1_star + period.
struct CurveMarkers {
  double tau1_star = 0.0;
  double tau2_star = 0.0;
  double lambda_star = 0.0;
  std::vector<double> z_h_zeros;
};

/// Curvature of a unit-speed curve at tau.
double curvature(const ProfileCurve& curve, double tau);

/// Locates tau1*, tau2*, lambda* (and the zeros of h) by dense scan and bisection.
CurveMarkers find_markers(const ProfileCurve& curve, int grid_points = 4096);

/// Unwraps tau into the inner interval (tau1*, tau2*) if it lies there modulo the period.
std::optional<double> inner_parameter(const ProfileCurve& curve, const CurveMarkers& markers,
                                      double tau);

/// h(tau) on the inner interval.
double h_value(const ProfileCurve& curve, const CurveMarkers& markers, double tau);

/// Sign changes of h on (tau1*, tau2*), refined by bisection.
std::vector<double> zero_set_h(const ProfileCurve& curve, const CurveMarkers& markers,
                               int grid_points = 4096);

}  // namespace torbill
