#include "torbill/billiard.hpp"

#include <algorithm>
#include <optional>

#include "torbill/errors.hpp"

namespace torbill {

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Completed: return "Completed";
    case TrajectoryStatus::StoppedAtInflectionMinus: return "StoppedAtInflectionMinus";
    case TrajectoryStatus::StoppedAtInflectionPlus: return "StoppedAtInflectionPlus";
    case TrajectoryStatus::StuckConvexGrazing: return "StuckConvexGrazing";
    case TrajectoryStatus::MaxBouncesReached: return "MaxBouncesReached";
    case TrajectoryStatus::GrazingAmbiguous: return "GrazingAmbiguous";
  }
  return "?";
}

namespace {

constexpr double kTouchBand = 1e-12;

// Scans g(s) = xi(x + s d) for the first crossing. Intervals are discarded
// when an upper bound built from the lower bound g'' >= -K proves g < 0.
class RayScanner {
 public:
  RayScanner(const ToroidalDomain& domain, const Vec3& x, const Vec3& d)
      : domain_(domain), x_(x), d_(d), dd_(d.squaredNorm()),
        step_(0.1 * domain.min_curvature_radius() / std::sqrt(dd_)),
        refine_len_(1e-3 * step_), min_len_(1e-10 * step_) {}

  double step() const { return step_; }
  double g(double s) const { return domain_.xi(x_ + s * d_); }
  double dg(double s) const { return domain_.grad_xi(x_ + s * d_).dot(d_); }

  std::optional<RayHit> scan(double a, double ga, double b, double gb, bool boundary_start) const {
    if (gb > kTouchBand) {
      if (b - a <= refine_len_) return RayHit{RayHitKind::Exit, refine(a, ga, b, gb)};
    } else {
      if (certified(a, ga, b, gb, boundary_start)) return std::nullopt;
      if (b - a <= min_len_) return resolve_touch(a, ga, b, gb);
    }
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if (auto r = scan(a, ga, m, gm, boundary_start)) return r;
    return scan(m, gm, b, gb, false);
  }

  double refine(double lo, double glo, double hi, double ghi) const {
    if (glo >= 0.0) return lo;
    double s = lo - glo * (hi - lo) / (ghi - glo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    double best = s, best_abs = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
      const double gs = g(s);
      if (std::abs(gs) < best_abs) {
        best_abs = std::abs(gs);
        best = s;
      }
      if (gs == 0.0) break;
      if (gs > 0.0) hi = s; else lo = s;
      const double slope = dg(s);
      double next = slope > 0.0 ? s - gs / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) break;
      s = next;
    }
    return best;
  }

 private:
  double curvature_bound(double a, double b) const {
    const Vec2 p(x_.x() + a * d_.x(), x_.y() + a * d_.y());
    const Vec2 q(d_.x(), d_.y());
    const double qq = q.squaredNorm();
    const double u = qq > 0.0 ? std::clamp(-p.dot(q) / qq, 0.0, b - a) : 0.0;
    return domain_.hessian_lower_bound((p + u * q).norm()) * dd_;
  }

  bool certified(double a, double ga, double b, double gb, bool boundary_start) const {
    const double len = b - a;
    const double c = 0.5 * curvature_bound(a, b) * len * len;
    // Concave majorant decreasing from the start point.
    if (boundary_start && (gb - ga) + c < 0.0) return true;
    double u;
    if (c > 0.0) {
      u = std::clamp(0.5 + (gb - ga) / (2.0 * c), 0.0, 1.0);
    } else {
      u = gb > ga ? 1.0 : 0.0;
    }
    const double fmax = ga + (gb - ga) * u + c * u * (1.0 - u);
    return fmax < -kTouchBand;
  }

  std::optional<RayHit> resolve_touch(double a, double ga, double b, double gb) const {
    const double st = ga > gb ? a : b;
    const double gt = std::max(ga, gb);
    if (gt < -kTouchBand) return std::nullopt;
    const double slope = dg(st);
    const double scale = domain_.grad_xi(x_ + st * d_).norm() * std::sqrt(dd_);
    if (slope > 1e-8 * scale) {
      if (gt >= 0.0) return RayHit{RayHitKind::Exit, st};
      double delta = min_len_;
      double hi = st + delta, ghi = g(hi);
      while (ghi <= 0.0 && delta < step_) {
        delta *= 2.0;
        hi = st + delta;
        ghi = g(hi);
      }
      if (ghi > 0.0) return RayHit{RayHitKind::Exit, refine(st, gt, hi, ghi)};
    }
    if (slope < -1e-8 * scale) return std::nullopt;
    return RayHit{RayHitKind::Touch, st};
  }

  const ToroidalDomain& domain_;
  Vec3 x_;
  Vec3 d_;
  double dd_;
  double step_;
  double refine_len_;
  double min_len_;
};

}  // namespace

RayHit ray_exit(const ToroidalDomain& domain, const Vec3& x, const Vec3& d, double s_max,
                double s_begin) {
  if (!(d.squaredNorm() > 0.0)) throw PreconditionError("ray direction must be nonzero");
  const RayScanner scanner(domain, x, d);
  const double g0 = scanner.g(s_begin);
  const double band = domain.options().boundary_band;
  if (g0 > band) throw PreconditionError("ray starts outside the domain");
  const bool on_boundary = std::abs(g0) <= band;
  if (on_boundary && scanner.dg(s_begin) > 0.0) return {RayHitKind::Exit, s_begin};
  double a = s_begin, ga = g0;
  while (a < s_max) {
    const double b = std::min(a + scanner.step(), s_max);
    const double gb = scanner.g(b);
    if (auto r = scanner.scan(a, ga, b, gb, on_boundary && a == s_begin)) return *r;
    a = b;
    ga = gb;
  }
  return {RayHitKind::NoExitWithin, s_max};
}

ExitPoint backward_exit(const ToroidalDomain& domain, const Vec3& x, const Vec3& v) {
  if (domain.classify_point(x) == PointClass::Outside) {
    throw PreconditionError("backward_exit needs a point of the closed domain");
  }
  const Vec3 d = -v;
  const double s_max = domain.diameter() / v.norm();
  const RayHit hit = ray_exit(domain, x, d, s_max);
  switch (hit.kind) {
    case RayHitKind::Exit: return {hit.s, x + hit.s * d};
    case RayHitKind::Touch: throw GrazingAmbiguous("backward ray touches the boundary", hit.s);
    case RayHitKind::NoExitWithin: break;
  }
  throw NumericError("backward ray found no exit within the domain diameter", 0.0);
}

Vec3 reflect_at(const ToroidalDomain& domain, const Vec3& x_b, const Vec3& v) {
  if (std::abs(domain.xi(x_b)) > 1e-8) throw PreconditionError("reflection point is off the boundary");
  return reflect(domain.normal_at(x_b), v);
}

double signed_angular_momentum(const Vec3& x, const Vec3& v) {
  return x.x() * v.y() - x.y() * v.x();
}

double angular_momentum(const Vec3& x, const Vec3& v) {
  return std::abs(signed_angular_momentum(x, v));
}

double segment_azimuth_change(const Vec3& a, const Vec3& b) {
  const double cross = a.x() * b.y() - a.y() * b.x();
  const double dot = a.x() * b.x() + a.y() * b.y();
  return std::atan2(cross, dot);
}

namespace {

Trajectory run_cycles(const ToroidalDomain& domain, const PhaseState& state, double phi0,
                      const Budget& budget, const Caps& caps, TimeDirection direction) {
  const double speed0 = state.v.norm();
  if (!(speed0 > 0.0)) throw PreconditionError("velocity must be nonzero");
  if (domain.classify_point(state.x) == PointClass::Outside) {
    throw PreconditionError("state must lie in the closed domain");
  }
  const bool backward = direction == TimeDirection::Backward;
  const double sign = backward ? -1.0 : 1.0;
  const GrazingClass stop_class =
      backward ? GrazingClass::InflectionMinus : GrazingClass::InflectionPlus;
  const TrajectoryStatus stop_status = backward ? TrajectoryStatus::StoppedAtInflectionMinus
                                                : TrajectoryStatus::StoppedAtInflectionPlus;
  const double threshold = caps.grazing.graze_threshold;

  Trajectory traj;
  traj.direction = direction;
  traj.origin = state;
  traj.origin_phi = phi0;

  Vec3 x = state.x, v = state.v;
  double t = state.t, phi = phi0;
  double length_left = std::min(budget.max_length, budget.max_time * speed0);
  const double omega0 = angular_momentum(x, v);
  const double omega_scale = std::max(omega0, 1e-12 * domain.max_rho() * speed0);

  auto finish = [&](TrajectoryStatus status) {
    traj.status = status;
    traj.end = {x, v, t};
    traj.end_phi = phi;
    traj.winding = sign * (phi - phi0) / kTwoPi;
    return traj;
  };

  if (domain.classify_point(state.x) == PointClass::Boundary) {
    const double nd = domain.normal_at(x).dot(v) / speed0;
    if (std::abs(nd) < threshold) {
      const SurfacePoint sp = domain.boundary_params(x, phi);
      GrazingClass c;
      try {
        c = classify_tangent(domain, x, sp.tau, v, caps.grazing);
      } catch (const GrazingAmbiguous&) {
        return finish(TrajectoryStatus::GrazingAmbiguous);
      }
      if (c == GrazingClass::ConvexGrazing) return finish(TrajectoryStatus::StuckConvexGrazing);
      if (c == stop_class) return finish(stop_status);
    }
  }

  double s_begin = 0.0;
  while (true) {
    if (static_cast<int>(traj.events.size()) >= caps.max_bounces) {
      return finish(TrajectoryStatus::MaxBouncesReached);
    }
    const Vec3 d = sign * v;
    const double speed = v.norm();
    const double s_max = std::min(domain.diameter(), length_left) / speed;
    const RayHit hit = ray_exit(domain, x, d, s_max, s_begin);

    if (hit.kind == RayHitKind::NoExitWithin) {
      const Vec3 xe = x + s_max * d;
      phi += segment_azimuth_change(x, xe);
      traj.total_length += s_max * speed;
      length_left = 0.0;
      x = xe;
      t += sign * s_max;
      return finish(TrajectoryStatus::Completed);
    }

    const bool at_start = hit.s <= s_begin;
    if (at_start && !traj.events.empty() && s_begin == 0.0) {
      // A reflected ray that cannot leave its own bounce point.
      return finish(TrajectoryStatus::GrazingAmbiguous);
    }

    const Vec3 xb = x + hit.s * d;
    const double new_phi = phi + segment_azimuth_change(x, xb);
    const SurfacePoint sp = domain.boundary_params(xb, new_phi);
    const Vec3 n = domain.normal_at(xb);

    BounceEvent ev;
    ev.k = static_cast<int>(traj.events.size()) + 1;
    ev.t = t + sign * hit.s;
    ev.x = xb;
    ev.tau = sp.tau;
    ev.phi = sp.phi;
    ev.v_in = v;
    ev.normal_dot = n.dot(v) / speed;

    bool ambiguous = false;
    if (hit.kind == RayHitKind::Touch || std::abs(ev.normal_dot) < threshold) {
      try {
        ev.graze = classify_tangent(domain, xb, sp.tau, v, caps.grazing);
      } catch (const GrazingAmbiguous&) {
        ambiguous = true;
      }
    }

    if (hit.kind == RayHitKind::Touch) {
      if (!ambiguous && ev.graze == GrazingClass::ConcaveGrazing) {
        // Straight through: skip far enough past the contact to be strictly inside.
        const double skip = 1e-4 / speed;
        if (domain.xi(xb + skip * d) < -kTouchBand) {
          traj.total_length += hit.s * speed;
          length_left -= hit.s * speed;
          x = xb;
          t = ev.t;
          phi = sp.phi;
          if (!at_start) {
            ev.v_out = v;
            traj.events.push_back(ev);
          }
          s_begin = skip;
          continue;
        }
        ambiguous = true;
      }
      if (!ambiguous && ev.graze == stop_class) {
        ev.v_out = v;
      } else {
        ambiguous = true;
      }
    }

    if (ambiguous) {
      ev.v_out = v;
      traj.events.push_back(ev);
      traj.total_length += hit.s * speed;
      x = xb;
      t = ev.t;
      phi = sp.phi;
      return finish(TrajectoryStatus::GrazingAmbiguous);
    }

    if (hit.kind == RayHitKind::Exit) ev.v_out = reflect(n, v);
    traj.events.push_back(ev);
    traj.total_length += hit.s * speed;
    length_left -= hit.s * speed;
    x = xb;
    t = ev.t;
    phi = sp.phi;
    v = ev.v_out;
    s_begin = 0.0;

    traj.diagnostics.speed_drift =
        std::max(traj.diagnostics.speed_drift, std::abs(v.norm() - speed0) / speed0);
    traj.diagnostics.omega_drift = std::max(
        traj.diagnostics.omega_drift, std::abs(angular_momentum(x, v) - omega0) / omega_scale);

    if (ev.graze == stop_class) return finish(stop_status);
    if (length_left <= 0.0) return finish(TrajectoryStatus::Completed);
  }
}

}  // namespace

Trajectory backward_cycles(const ToroidalDomain& domain, const PhaseState& state, double phi0,
                           const Budget& budget, const Caps& caps) {
  return run_cycles(domain, state, phi0, budget, caps, TimeDirection::Backward);
}

Trajectory backward_cycles(const ToroidalDomain& domain, const PhaseState& state,
                           const Budget& budget, const Caps& caps) {
  return backward_cycles(domain, state, azimuth(state.x), budget, caps);
}

Trajectory forward_cycles(const ToroidalDomain& domain, const PhaseState& state, double phi0,
                          const Budget& budget, const Caps& caps) {
  return run_cycles(domain, state, phi0, budget, caps, TimeDirection::Forward);
}

Trajectory forward_cycles(const ToroidalDomain& domain, const PhaseState& state,
                          const Budget& budget, const Caps& caps) {
  return forward_cycles(domain, state, azimuth(state.x), budget, caps);
}

std::pair<double, double> time_range(const Trajectory& traj) {
  const double a = traj.origin.t, b = traj.end.t;
  return {std::min(a, b), std::max(a, b)};
}

namespace {

struct Segment {
  double t;  // start time
  Vec3 x;    // position at t
  Vec3 v;
};

std::vector<Segment> segments(const Trajectory& traj) {
  std::vector<Segment> segs;
  segs.reserve(traj.events.size() + 1);
  segs.push_back({traj.origin.t, traj.origin.x, traj.origin.v});
  for (const auto& e : traj.events) segs.push_back({e.t, e.x, e.v_out});
  return segs;
}

}  // namespace

std::pair<Vec3, Vec3> trajectory_eval(const Trajectory& traj, double s) {
  const auto [lo, hi] = time_range(traj);
  if (!(s >= lo && s <= hi)) throw RangeError("evaluation time outside the trajectory");
  if (s == traj.origin.t) return {traj.origin.x, traj.origin.v};
  const auto segs = segments(traj);
  const std::size_t n = segs.size();
  if (traj.direction == TimeDirection::Backward) {
    // segment k covers [t^{k+1}, t^k)
    for (std::size_t k = 0; k < n; ++k) {
      const double t_next = k + 1 < n ? segs[k + 1].t : traj.end.t;
      if (s >= t_next && s < segs[k].t) return {segs[k].x - (segs[k].t - s) * segs[k].v, segs[k].v};
    }
    const auto& last = segs.back();
    return {last.x - (last.t - s) * last.v, last.v};
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t_next = k + 1 < n ? segs[k + 1].t : traj.end.t;
    if (s >= segs[k].t && s < t_next) return {segs[k].x + (s - segs[k].t) * segs[k].v, segs[k].v};
  }
  const auto& last = segs.back();
  return {last.x + (s - last.t) * last.v, last.v};
}

double arrival_time_S0(const ToroidalDomain& domain, const Vec3& x, double phi_unwrapped,
                       const Vec3& v, const Caps& caps, double max_length) {
  const double lz = signed_angular_momentum(x, v);
  if (!(std::abs(lz) > 1e-14 * x.norm() * v.norm())) {
    throw PreconditionError("arrival time needs nonzero angular momentum");
  }
  Vec3 xm = x, vm = v;
  double phi = phi_unwrapped;
  if (lz < 0.0) {
    xm.y() = -xm.y();
    vm.y() = -vm.y();
    phi = -phi;
  }
  if (!(phi < 0.0)) throw PreconditionError("the orbit must sweep toward S_0");
  const double target = -phi;
  const Trajectory traj = forward_cycles(domain, {xm, vm, 0.0}, phi, Budget::length(max_length), caps);
  const auto segs = segments(traj);
  double swept = 0.0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const double t_next = k + 1 < segs.size() ? segs[k + 1].t : traj.end.t;
    const Vec3 x_next = segs[k].x + (t_next - segs[k].t) * segs[k].v;
    const double dphi = segment_azimuth_change(segs[k].x, x_next);
    if (swept + dphi >= target) {
      const double alpha = target - swept;
      const Vec2 p(segs[k].x.x(), segs[k].x.y());
      const Vec2 q(segs[k].v.x(), segs[k].v.y());
      const Vec2 u = Eigen::Rotation2Dd(alpha) * p;
      const double s = -(u.x() * p.y() - u.y() * p.x()) / (u.x() * q.y() - u.y() * q.x());
      return segs[k].t + s;
    }
    swept += dphi;
  }
  if (traj.status == TrajectoryStatus::StoppedAtInflectionPlus) {
    throw StoppedTrajectory("trajectory stops at an inflection grazing before reaching S_0");
  }
  throw StoppedTrajectory(std::string("trajectory ended (") + to_string(traj.status) +
                          ") before reaching S_0");
}

}  // namespace torbill
