#pragma once

#include <cstdint>
#include <vector>

#include "torbill/billiard.hpp"

namespace torbill {

// ---------------------------------------------------------------------------
// Bounce counting

struct BounceCount {
  int n = 0;
  bool capped = false;
};

/// Bounces of the backward cycle from (x, v) whose cumulative chord length is
/// at most L, counted before any InflectionMinus stop. A zero-length
/// reflection at a boundary origin is not counted.
BounceCount bounce_count(const ToroidalDomain& domain, const Vec3& x, const Vec3& v, double L,
                         const Caps& caps = {});

// ---------------------------------------------------------------------------
// Recurrence residuals

struct RecurrenceOptions {
  double gate = 0.1;           ///< |dtau| and |dphi| must stay below this
  bool inner_only = false;     ///< keep steps on [tau1* + eps, tau2* - eps] away from Z_h
  double inner_margin = 0.05;  ///< eps of the inner filter
};

struct RecurrenceRecord {
  int i = 0;  ///< index of the first event of the pair
  double dtau = 0.0;
  double dphi = 0.0;
  double dtau_next = 0.0;
  double dphi_next = 0.0;
  double r1 = 0.0;  ///< |dphi| / |dtau|
  double r2 = 0.0;  ///< |dtau_next - dtau| / (dtau^2 + dtau_next^2 + dphi^2 + dphi_next^2)
};

/// Boundary state at sigma(tau, phi) whose unit velocity leans into the domain by
/// alpha from the tangent cos(beta) t_m + sin(beta) phi_hat.
PhaseState tangential_launch(const ToroidalDomain& domain, double tau, double phi, double alpha,
                             double beta);

std::vector<RecurrenceRecord> recurrence_residuals(const ToroidalDomain& domain,
                                                   const Trajectory& traj,
                                                   const RecurrenceOptions& opts = {});

// ---------------------------------------------------------------------------
// Rings

enum class RingKind { AngularMomentum, Perp, AzimuthAligned, Symmetric };

struct RingSpec {
  RingKind kind = RingKind::Perp;
  double epsilon = 0.05;
  double tau_ref = 0.0;  ///< AngularMomentum only
};

/// (v_x, v_phi, v_y): radial, azimuthal and axial components at x.
Vec3 cross_section_components(const Vec3& x, const Vec3& v);

/// Angular momentum of the inflection direction I2 at tau_ref (independent of phi).
double ring_reference_omega(const ToroidalDomain& domain, double tau_ref);

std::vector<bool> ring_membership(const ToroidalDomain& domain, const Vec3& x, const Vec3& v,
                                  const std::vector<RingSpec>& specs);

// ---------------------------------------------------------------------------
// Bad-set Monte Carlo

struct BadSetParams {
  Vec3 x_section = Vec3(2, 0, 0);  ///< base point in the S_0 frame
  double phi = 0.0;                ///< rotates the base onto S_phi
  double length = 10.0;
  int n_samples = 1000;
  std::uint64_t seed = 0;
  double speed_band = 1.0;  ///< speeds uniform in [1/N, N]; N = 1 means unit speed
  std::vector<RingSpec> rings;
  Caps caps;
  int workers = 1;
};

/// Outcome of one sampled backward run.
struct BadSetSample {
  double min_normal_dot = 1.0;  ///< min over events of |n . v|
  int bounces = 0;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  bool ring_excluded = false;
};

struct BadSetReport {
  Vec3 x = Vec3::Zero();
  double epsilon_graze = 0.0;
  double length = 0.0;
  int n_samples = 0;
  double fraction = 0.0;  ///< bad samples / n
  double ci95 = 0.0;
  double near_grazing_fraction = 0.0;
  double near_grazing_ci95 = 0.0;
  int near_grazing = 0;
  int ring_excluded = 0;
  int stopped_at_inflection = 0;
  int max_bounces = 0;
  int ambiguous = 0;
  int max_good_bounces = 0;  ///< largest bounce count among good samples
};

/// Unit direction (and speed) for sample `index`, reproducible from (seed, index).
Vec3 sample_velocity(std::uint64_t seed, std::uint64_t index, double speed_band);

/// Runs all samples; records are stored by index so the result does not depend on workers.
std::vector<BadSetSample> badset_samples(const ToroidalDomain& domain, const BadSetParams& params);

BadSetReport summarize_badset(const BadSetParams& params, const std::vector<BadSetSample>& samples,
                              double epsilon_graze);

BadSetReport badset_measure(const ToroidalDomain& domain, const BadSetParams& params,
                            double epsilon_graze);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Jacobian and specular basis

struct JacobianResult {
  double det = 0.0;         ///< at step h / 2
  double det_coarse = 0.0;  ///< at step h
  double rel_spread = 0.0;  ///< |det_coarse - det| / |det|
  int bounces = 0;
};

/// det dX(s; t, x, v)/dv by central differences, s <= t (backward flow).
JacobianResult jacobian_det(const ToroidalDomain& domain, const PhaseState& state, double s,
                            double h, const Caps& caps = {});

struct SpecularBasis {
  Vec3 e0;
  Vec3 e1;
  Vec3 e2;
};

SpecularBasis specular_basis(const ToroidalDomain& domain, const Vec3& x_k, const Vec3& v_k);

}  // namespace torbill
