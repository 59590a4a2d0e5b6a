#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "torbill/grazing.hpp"
#include "torbill/torus_domain.hpp"
#include "torbill/types.hpp"

namespace torbill {

struct PhaseState {
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double t = 0.0;
};

enum class TimeDirection { Backward, Forward };

enum class TrajectoryStatus {
  Completed,
  StoppedAtInflectionMinus,
  StoppedAtInflectionPlus,
  StuckConvexGrazing,
  MaxBouncesReached,
  GrazingAmbiguous
};

const char* to_string(TrajectoryStatus s);

/// One boundary event of a cycle. v_in is the velocity carried by the
/// segment that ends here, v_out the reflected one (equal to v_in for a
/// concave touch).
struct BounceEvent {
  int k = 0;
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  double tau = 0.0;
  double phi = 0.0;  ///< unwrapped
  Vec3 v_in = Vec3::Zero();
  Vec3 v_out = Vec3::Zero();
  double normal_dot = 0.0;  ///< n(x) . v_in / |v_in|
  GrazingClass graze = GrazingClass::NonGrazing;
};

struct TrajectoryDiagnostics {
  double speed_drift = 0.0;  ///< max relative change of |v|
  double omega_drift = 0.0;  ///< max relative change of the angular momentum
};

struct Trajectory {
  TimeDirection direction = TimeDirection::Backward;
  PhaseState origin;
  double origin_phi = 0.0;
  std::vector<BounceEvent> events;
  PhaseState end;  ///< state at the far end of the covered time range
  double end_phi = 0.0;
  double total_length = 0.0;
  double winding = 0.0;  ///< forward-time azimuth advance / 2 pi
  TrajectoryStatus status = TrajectoryStatus::Completed;
  TrajectoryDiagnostics diagnostics;
};

struct Budget {
  double max_length = std::numeric_limits<double>::infinity();
  double max_time = std::numeric_limits<double>::infinity();

  static Budget length(double l) { return {l, std::numeric_limits<double>::infinity()}; }
  static Budget time(double t) { return {std::numeric_limits<double>::infinity(), t}; }
};

struct Caps {
  int max_bounces = 10000;
  GrazingOptions grazing;  ///< graze_threshold lives here
};

enum class RayHitKind { Exit, NoExitWithin, Touch };

struct RayHit {
  RayHitKind kind = RayHitKind::NoExitWithin;
  double s = 0.0;
};

/// First s in [s_begin, s_max] where xi(x + s d) changes sign from inside to
/// outside. A start on the boundary with d pointing outward exits at s_begin.
/// Touch reports a tangential contact that does not cross within the band.
RayHit ray_exit(const ToroidalDomain& domain, const Vec3& x, const Vec3& d, double s_max,
                double s_begin = 0.0);

struct ExitPoint {
  double t_b = 0.0;
  Vec3 x_b = Vec3::Zero();
};

/// Backward exit time with the sup(empty) = 0 convention. Throws GrazingAmbiguous on a touch.
ExitPoint backward_exit(const ToroidalDomain& domain, const Vec3& x, const Vec3& v);

/// v - 2 (n . v) n for a unit normal n.
inline Vec3 reflect(const Vec3& n, const Vec3& v) { return v - 2.0 * n.dot(v) * n; }

/// Specular reflection at a boundary point.
Vec3 reflect_at(const ToroidalDomain& domain, const Vec3& x_b, const Vec3& v);

double angular_momentum(const Vec3& x, const Vec3& v);
/// x v_y - y v_x; positive for counter-clockwise motion about the z-axis.
double signed_angular_momentum(const Vec3& x, const Vec3& v);

/// Azimuth swept by the straight segment from a to b, in (-pi, pi].
double segment_azimuth_change(const Vec3& a, const Vec3& b);

Trajectory backward_cycles(const ToroidalDomain& domain, const PhaseState& state,
                           const Budget& budget, const Caps& caps = {});
Trajectory backward_cycles(const ToroidalDomain& domain, const PhaseState& state, double phi0,
                           const Budget& budget, const Caps& caps = {});
Trajectory forward_cycles(const ToroidalDomain& domain, const PhaseState& state,
                          const Budget& budget, const Caps& caps = {});
Trajectory forward_cycles(const ToroidalDomain& domain, const PhaseState& state, double phi0,
                          const Budget& budget, const Caps& caps = {});

/// Time interval [lo, hi] covered by the trajectory.
std::pair<double, double> time_range(const Trajectory& traj);

/// (X(s), V(s)). Bounce times use s in [t^{k+1}, t^k) for backward runs and
/// [t^k, t^{k+1}) for forward runs. Throws RangeError outside time_range.
std::pair<Vec3, Vec3> trajectory_eval(const Trajectory& traj, double s);

/// Time for the forward trajectory from (x, v), whose azimuth coordinate is
/// phi_unwrapped, to sweep -phi_unwrapped of azimuth and reach S_0.
/// Negative angular momentum is handled by mirroring through the xz-plane.
double arrival_time_S0(const ToroidalDomain& domain, const Vec3& x, double phi_unwrapped,
                       const Vec3& v, const Caps& caps = {}, double max_length = 1e4);

}  // namespace torbill
