#include "torbill/grazing.hpp"

#include <algorithm>
#include <optional>

#include "torbill/errors.hpp"

namespace torbill {

const char* to_string(GrazingClass c) {
  switch (c) {
    case GrazingClass::NonGrazing: return "NonGrazing";
    case GrazingClass::ConvexGrazing: return "ConvexGrazing";
    case GrazingClass::ConcaveGrazing: return "ConcaveGrazing";
    case GrazingClass::InflectionPlus: return "InflectionPlus";
    case GrazingClass::InflectionMinus: return "InflectionMinus";
  }
  return "?";
}

GrazingClass reversed(GrazingClass c) {
  if (c == GrazingClass::InflectionPlus) return GrazingClass::InflectionMinus;
  if (c == GrazingClass::InflectionMinus) return GrazingClass::InflectionPlus;
  return c;
}

PrincipalCurvatures principal_curvatures(const ToroidalDomain& domain, double tau) {
  const auto& curve = domain.profile();
  const CurveJet j = curve.jet(tau);
  return {j.d1.y() / j.point.x(), curve.curvature(tau)};
}

double local_curvature_radius(const ToroidalDomain& domain, double tau) {
  const auto k = principal_curvatures(domain, tau);
  return 1.0 / std::max(std::abs(k.azimuthal), std::abs(k.meridian));
}

double normal_curvature(const ToroidalDomain& domain, double tau, double phi, const Vec3& w) {
  const Vec3 u = w.normalized();
  if (std::abs(domain.outward_normal(tau, phi).dot(u)) > 1e-10) {
    throw PreconditionError("normal_curvature needs a tangent direction");
  }
  const auto k = principal_curvatures(domain, tau);
  const double c = u.dot(azimuthal_direction(phi));
  const double c2 = c * c;
  return k.azimuthal * c2 + k.meridian * (1.0 - c2);
}

double inflection_angle(const ToroidalDomain& domain, double tau) {
  const auto& curve = domain.profile();
  const auto u = inner_parameter(curve, domain.markers(), tau);
  if (!u) throw UndefinedInflection("inflection directions exist only on (tau1*, tau2*)");
  const CurveJet j = curve.jet(*u);
  return std::atan(std::sqrt(std::abs(j.d1.y()) / (curve.curvature(*u) * j.point.x())));
}

InflectionDirections InflectionDirections::mirrored() const {
  const Vec3 e = azimuthal_direction(phi);
  InflectionDirections m = *this;
  m.I1 = I1 - 2.0 * I1.dot(e) * e;
  m.I2 = I2 - 2.0 * I2.dot(e) * e;
  return m;
}

std::vector<double> ladder_steps(const ToroidalDomain& domain, double tau,
                                 const GrazingOptions& opts) {
  std::vector<double> steps;
  double s = opts.ladder_fraction * local_curvature_radius(domain, tau);
  for (int i = 0; i < opts.ladder_rungs; ++i, s *= 0.5) steps.push_back(s);
  return steps;
}

namespace {

std::optional<GrazingClass> ladder(const ToroidalDomain& domain, const Vec3& x, const Vec3& v,
                                   const std::vector<double>& steps) {
  std::optional<GrazingClass> result;
  for (double s : steps) {
    const double f = domain.xi(x + s * v), b = domain.xi(x - s * v);
    if (f == 0.0 || b == 0.0) return std::nullopt;
    GrazingClass c;
    if (f < 0 && b < 0) c = GrazingClass::ConcaveGrazing;
    else if (f > 0 && b > 0) c = GrazingClass::ConvexGrazing;
    else if (f > 0) c = GrazingClass::InflectionPlus;
    else c = GrazingClass::InflectionMinus;
    if (result && *result != c) return std::nullopt;
    result = c;
  }
  return result;
}

struct FormalPair {
  double theta;
  Vec3 plus;
  Vec3 minus;
};

FormalPair formal_pair(const ToroidalDomain& domain, double tau, double phi) {
  const double theta = inflection_angle(domain, tau);
  const Vec3 e = azimuthal_direction(phi);
  const Vec3 t = domain.meridian_tangent(tau, phi);
  return {theta, (std::cos(theta) * e + std::sin(theta) * t).normalized(),
          (std::cos(theta) * e - std::sin(theta) * t).normalized()};
}

}  // namespace

GrazingClass classify_tangent(const ToroidalDomain& domain, const Vec3& x, double tau,
                              const Vec3& v, const GrazingOptions& opts) {
  const auto c = ladder(domain, x, v.normalized(), ladder_steps(domain, tau, opts));
  if (!c) throw GrazingAmbiguous("grazing sign ladder is inconclusive", 0.0);
  return *c;
}

GrazingClass classify(const ToroidalDomain& domain, const Vec3& x, const Vec3& v,
                      const GrazingOptions& opts) {
  const Vec3 u = v.normalized();
  if (std::abs(domain.normal_at(x).dot(u)) >= opts.graze_threshold) {
    return GrazingClass::NonGrazing;
  }
  const SurfacePoint sp = domain.boundary_params(x, azimuth(x));
  return classify_tangent(domain, x, sp.tau, u, opts);
}

InflectionDirections inflection_directions(const ToroidalDomain& domain, double tau, double phi,
                                           const GrazingOptions& opts) {
  const auto& curve = domain.profile();
  const auto u = inner_parameter(curve, domain.markers(), tau);
  if (!u) throw UndefinedInflection("inflection directions exist only on (tau1*, tau2*)");
  for (double z : domain.markers().z_h_zeros) {
    if (std::abs(*u - z) < opts.zh_band) {
      throw UndefinedInflection("tau lies in the exclusion band around a zero of h");
    }
  }
  const FormalPair p = formal_pair(domain, tau, phi);
  const Vec3 x = domain.sigma(tau, phi);
  const auto steps = ladder_steps(domain, tau, opts);
  const auto ca = ladder(domain, x, p.plus, steps);
  const auto cb = ladder(domain, x, p.minus, steps);
  InflectionDirections d;
  d.tau = curve.wrap(tau);
  d.phi = phi;
  d.theta = p.theta;
  if (ca == GrazingClass::InflectionPlus && cb == GrazingClass::InflectionMinus) {
    d.I1 = p.plus;
    d.I2 = p.minus;
  } else if (cb == GrazingClass::InflectionPlus && ca == GrazingClass::InflectionMinus) {
    d.I1 = p.minus;
    d.I2 = p.plus;
  } else {
    throw UndefinedInflection("sign ladder does not separate the inflection directions");
  }
  return d;
}

Vec3 concave_direction(const ToroidalDomain& domain, double tau, double phi, double eta,
                       const GrazingOptions& opts) {
  if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("eta must lie in (0, 1)");
  Vec3 i1, i2;
  try {
    const auto d = inflection_directions(domain, tau, phi, opts);
    i1 = d.I1;
    i2 = d.I2;
  } catch (const UndefinedInflection&) {
    const FormalPair p = formal_pair(domain, tau, phi);
    i1 = p.plus;
    i2 = p.minus;
  }
  return (eta * i1 + (1.0 - eta) * i2).normalized();
}

}  // namespace torbill
