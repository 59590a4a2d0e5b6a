#include "torbill/phase_analysis.hpp"

#include <algorithm>
#include <random>
#include <thread>

#include "torbill/errors.hpp"

namespace torbill {

BounceCount bounce_count(const ToroidalDomain& domain, const Vec3& x, const Vec3& v, double L,
                         const Caps& caps) {
  const double speed = v.norm();
  const double limit = L * (1.0 + 1e-12);
  const Trajectory traj = backward_cycles(domain, {x, v, 0.0}, Budget::length(limit * (1.0 + 1e-9)), caps);
  BounceCount out;
  for (const auto& e : traj.events) {
    const double travelled = std::abs(e.t) * speed;
    if (travelled > limit) break;
    if (e.t == 0.0) continue;
    ++out.n;
  }
  out.capped = traj.status == TrajectoryStatus::MaxBouncesReached;
  return out;
}

PhaseState tangential_launch(const ToroidalDomain& domain, double tau, double phi, double alpha,
                             double beta) {
  const Vec3 x = domain.sigma(tau, phi);
  const Vec3 n = domain.outward_normal(tau, phi);
  const Vec3 t = domain.meridian_tangent(tau, phi);
  const Vec3 w = std::cos(beta) * t + std::sin(beta) * azimuthal_direction(phi);
  return {x, (std::cos(alpha) * w - std::sin(alpha) * n).normalized(), 0.0};
}

std::vector<RecurrenceRecord> recurrence_residuals(const ToroidalDomain& domain,
                                                   const Trajectory& traj,
                                                   const RecurrenceOptions& opts) {
  std::vector<RecurrenceRecord> out;
  const auto& ev = traj.events;
  if (ev.size() < 3) return out;
  const auto& curve = domain.profile();
  const auto& markers = domain.markers();
  const double period = curve.period();

  auto inner_ok = [&](double tau) {
    const auto u = inner_parameter(curve, markers, tau);
    if (!u) return false;
    if (*u < markers.tau1_star + opts.inner_margin || *u > markers.tau2_star - opts.inner_margin) {
      return false;
    }
    return std::none_of(markers.z_h_zeros.begin(), markers.z_h_zeros.end(),
                        [&](double z) { return std::abs(*u - z) < opts.inner_margin; });
  };
  auto dtau = [&](std::size_t i) {
    double d = std::remainder(ev[i + 1].tau - ev[i].tau, period);
    if (d <= -0.5 * period) d += period;
    return d;
  };
  auto gated = [&](double dt, double dp) {
    return std::abs(dt) > 0.0 && std::abs(dt) < opts.gate && std::abs(dp) < opts.gate;
  };

  for (std::size_t i = 0; i + 2 < ev.size(); ++i) {
    RecurrenceRecord r;
    r.i = static_cast<int>(i);
    r.dtau = dtau(i);
    r.dtau_next = dtau(i + 1);
    r.dphi = ev[i + 1].phi - ev[i].phi;
    r.dphi_next = ev[i + 2].phi - ev[i + 1].phi;
    if (!gated(r.dtau, r.dphi) || !gated(r.dtau_next, r.dphi_next)) continue;
    if (opts.inner_only && !(inner_ok(ev[i].tau) && inner_ok(ev[i + 1].tau) && inner_ok(ev[i + 2].tau))) {
      continue;
    }
    r.r1 = std::abs(r.dphi) / std::abs(r.dtau);
    const double denom = r.dtau * r.dtau + r.dtau_next * r.dtau_next + r.dphi * r.dphi +
                         r.dphi_next * r.dphi_next;
    r.r2 = std::abs(r.dtau_next - r.dtau) / denom;
    out.push_back(r);
  }
  return out;
}

Vec3 cross_section_components(const Vec3& x, const Vec3& v) {
  const double phi = azimuth(x);
  return {v.dot(radial_direction(phi)), v.dot(azimuthal_direction(phi)), v.z()};
}

double ring_reference_omega(const ToroidalDomain& domain, double tau_ref) {
  const auto dirs = inflection_directions(domain, tau_ref, 0.0);
  return angular_momentum(domain.sigma(tau_ref, 0.0), dirs.I2);
}

std::vector<bool> ring_membership(const ToroidalDomain& domain, const Vec3& x, const Vec3& v,
                                  const std::vector<RingSpec>& specs) {
  const Vec3 c = cross_section_components(x, v);
  std::vector<bool> out;
  out.reserve(specs.size());
  for (const auto& s : specs) {
    if (!(s.epsilon > 0.0)) throw PreconditionError("ring width must be positive");
    switch (s.kind) {
      case RingKind::AngularMomentum:
        out.push_back(std::abs(ring_reference_omega(domain, s.tau_ref) - angular_momentum(x, v)) <
                      s.epsilon);
        break;
      case RingKind::Perp: out.push_back(std::abs(c.y()) < s.epsilon); break;
      case RingKind::AzimuthAligned: out.push_back(std::abs(c.y()) > 1.0 - s.epsilon); break;
      case RingKind::Symmetric:
        out.push_back(std::abs(std::abs(c.x()) - std::abs(c.z())) < s.epsilon);
        break;
    }
  }
  return out;
}

Vec3 sample_velocity(std::uint64_t seed, std::uint64_t index, double speed_band) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (!(v.squaredNorm() > 1e-24));
  v.normalize();
  if (speed_band > 1.0) {
    std::uniform_real_distribution<double> speed(1.0 / speed_band, speed_band);
    v *= speed(rng);
  }
  return v;
}

std::vector<BadSetSample> badset_samples(const ToroidalDomain& domain, const BadSetParams& params) {
  if (params.n_samples < 1000) throw PreconditionError("badset needs at least 1000 samples");
  const Vec3 base = rotation_z(params.phi) * params.x_section;
  if (domain.classify_point(base) == PointClass::Outside) {
    throw PreconditionError("badset base point lies outside the domain");
  }
  std::vector<BadSetSample> out(params.n_samples);
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const Vec3 v = sample_velocity(params.seed, static_cast<std::uint64_t>(i), params.speed_band);
      BadSetSample s;
      const auto rings = ring_membership(domain, base, v.normalized(), params.rings);
      s.ring_excluded = std::any_of(rings.begin(), rings.end(), [](bool b) { return b; });
      const Trajectory tr =
          backward_cycles(domain, {base, v, 0.0}, params.phi, Budget::length(params.length), params.caps);
      for (const auto& e : tr.events) s.min_normal_dot = std::min(s.min_normal_dot, std::abs(e.normal_dot));
      s.bounces = static_cast<int>(tr.events.size());
      s.status = tr.status;
      out[i] = s;
    }
  };
  const int workers = std::max(1, std::min(params.workers, params.n_samples));
  if (workers == 1) {
    work(0, params.n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (params.n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b = w * chunk, e = std::min(params.n_samples, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

BadSetReport summarize_badset(const BadSetParams& params, const std::vector<BadSetSample>& samples,
                              double epsilon_graze) {
  BadSetReport r;
  r.x = rotation_z(params.phi) * params.x_section;
  r.epsilon_graze = epsilon_graze;
  r.length = params.length;
  r.n_samples = static_cast<int>(samples.size());
  int bad = 0;
  for (const auto& s : samples) {
    const bool graze = s.min_normal_dot < epsilon_graze;
    const bool stop = s.status == TrajectoryStatus::StoppedAtInflectionMinus;
    const bool capped = s.status == TrajectoryStatus::MaxBouncesReached;
    const bool ambiguous = s.status == TrajectoryStatus::GrazingAmbiguous;
    r.near_grazing += graze;
    r.stopped_at_inflection += stop;
    r.max_bounces += capped;
    r.ambiguous += ambiguous;
    r.ring_excluded += s.ring_excluded;
    if (graze || stop || capped || ambiguous || s.ring_excluded) {
      ++bad;
    } else {
      r.max_good_bounces = std::max(r.max_good_bounces, s.bounces);
    }
  }
  const double n = r.n_samples;
  auto ci = [n](double p) { return 1.96 * std::sqrt(p * (1.0 - p) / n); };
  r.fraction = bad / n;
  r.ci95 = ci(r.fraction);
  r.near_grazing_fraction = r.near_grazing / n;
  r.near_grazing_ci95 = ci(r.near_grazing_fraction);
  return r;
}

BadSetReport badset_measure(const ToroidalDomain& domain, const BadSetParams& params,
                            double epsilon_graze) {
  return summarize_badset(params, badset_samples(domain, params), epsilon_graze);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope needs matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw PreconditionError("log-log slope needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

struct FlowEnd {
  Vec3 x;
  int bounces;
};

FlowEnd flow_to(const ToroidalDomain& domain, const PhaseState& state, double s, const Caps& caps) {
  const Trajectory tr = backward_cycles(domain, state, Budget::time(state.t - s), caps);
  if (tr.status != TrajectoryStatus::Completed) {
    throw NonSmoothPoint(std::string("trajectory did not reach the evaluation time: ") +
                         to_string(tr.status));
  }
  return {tr.end.x, static_cast<int>(tr.events.size())};
}

double fd_det(const ToroidalDomain& domain, const PhaseState& state, double s, double h,
              int expected, const Caps& caps) {
  Mat3 jac;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i) * h;
    const FlowEnd p = flow_to(domain, {state.x, state.v + e, state.t}, s, caps);
    const FlowEnd m = flow_to(domain, {state.x, state.v - e, state.t}, s, caps);
    if (p.bounces != expected || m.bounces != expected) {
      throw NonSmoothPoint("perturbed trajectories change their bounce count");
    }
    jac.col(i) = (p.x - m.x) / (2.0 * h);
  }
  return jac.determinant();
}

}  // namespace

JacobianResult jacobian_det(const ToroidalDomain& domain, const PhaseState& state, double s,
                            double h, const Caps& caps) {
  if (!(h > 0.0)) throw PreconditionError("step must be positive");
  if (!(s <= state.t)) throw PreconditionError("evaluation time must not exceed the state time");
  const Trajectory base = backward_cycles(domain, state, Budget::time(state.t - s), caps);
  if (base.status != TrajectoryStatus::Completed) {
    throw NonSmoothPoint(std::string("base trajectory did not reach the evaluation time: ") +
                         to_string(base.status));
  }
  const double guard = 10.0 * h * state.v.norm();
  for (const auto& e : base.events) {
    if (std::abs(e.t - s) < guard) {
      throw PreconditionError("evaluation time is too close to a bounce time");
    }
  }
  const int n = static_cast<int>(base.events.size());
  JacobianResult r;
  r.bounces = n;
  r.det_coarse = fd_det(domain, state, s, h, n, caps);
  r.det = fd_det(domain, state, s, 0.5 * h, n, caps);
  r.rel_spread = std::abs(r.det_coarse - r.det) / std::abs(r.det);
  return r;
}

SpecularBasis specular_basis(const ToroidalDomain& domain, const Vec3& x_k, const Vec3& v_k) {
  const double speed = v_k.norm();
  if (!(speed > 0.0)) throw PreconditionError("velocity must be nonzero");
  const Vec3 e0 = v_k / speed;
  if (std::abs(domain.normal_at(x_k).dot(e0)) < 1e-12) {
    throw PreconditionError("specular basis needs a non-grazing bounce");
  }
  const Vec3 c = e0.cross(azimuthal_direction(azimuth(x_k)));
  const double cn = c.norm();
  if (cn < 1e-12) throw DegenerateBasis("velocity is parallel to the azimuthal tangent");
  const Vec3 e1 = c / cn;
  return {e0, e1, e0.cross(e1)};
}

}  // namespace torbill
