#pragma once

#include <vector>

#include "torbill/torus_domain.hpp"
#include "torbill/types.hpp"

namespace torbill {

enum class GrazingClass { NonGrazing, ConvexGrazing, ConcaveGrazing, InflectionPlus, InflectionMinus };

const char* to_string(GrazingClass c);

/// InflectionPlus <-> InflectionMinus, other classes unchanged.
GrazingClass reversed(GrazingClass c);

struct GrazingOptions {
  double graze_threshold = 1e-7;  ///< on |n . v/|v||
  double zh_band = 1e-3;          ///< exclusion half-width around Z_h, in tau
  double ladder_fraction = 1e-2;  ///< first rung as a fraction of the local curvature radius
  int ladder_rungs = 3;
};

struct PrincipalCurvatures {
  double azimuthal;  ///< gamma2' / gamma1
  double meridian;   ///< kappa
};

PrincipalCurvatures principal_curvatures(const ToroidalDomain& domain, double tau);

/// 1 / max(|kappa_1|, |kappa_2|) at tau.
double local_curvature_radius(const ToroidalDomain& domain, double tau);

/// Euler's formula. w must be tangent at sigma(tau, phi).
double normal_curvature(const ToroidalDomain& domain, double tau, double phi, const Vec3& w);

/// arctan sqrt(|gamma2'| / (kappa gamma1)) on the inner interval.
double inflection_angle(const ToroidalDomain& domain, double tau);

struct InflectionDirections {
  double tau = 0.0;
  double phi = 0.0;
  double theta = 0.0;  ///< angle of both directions against the azimuthal tangent
  Vec3 I1 = Vec3::Zero();
  Vec3 I2 = Vec3::Zero();

  /// Reflection of both directions through the meridian plane (negative angular momentum).
  InflectionDirections mirrored() const;
};

/// Directions of vanishing normal curvature with positive angular momentum.
/// I1 is the one classified InflectionPlus by the sign ladder.
InflectionDirections inflection_directions(const ToroidalDomain& domain, double tau, double phi,
                                           const GrazingOptions& opts = {});

/// Normalized eta I1 + (1 - eta) I2. Near Z_h the formal directions at angles
/// +-theta are used without classification.
Vec3 concave_direction(const ToroidalDomain& domain, double tau, double phi, double eta,
                       const GrazingOptions& opts = {});

/// Sign-ladder steps at a boundary parameter.
std::vector<double> ladder_steps(const ToroidalDomain& domain, double tau,
                                 const GrazingOptions& opts = {});

/// Class from the signs of xi(x + s v) and xi(x - s v) over the ladder.
/// Returns NonGrazing when |n . v| is above the threshold. Throws
/// GrazingAmbiguous when the rungs disagree.
GrazingClass classify(const ToroidalDomain& domain, const Vec3& x, const Vec3& v,
                      const GrazingOptions& opts = {});

/// Ladder classification without the threshold test.
GrazingClass classify_tangent(const ToroidalDomain& domain, const Vec3& x, double tau,
                              const Vec3& v, const GrazingOptions& opts = {});

}  // namespace torbill
