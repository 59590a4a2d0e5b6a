#include "torbill/profile_curve.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "torbill/errors.hpp"

namespace torbill {

namespace {

constexpr int kGaussOrder = 16;

struct GaussRule {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_rule() {
  GaussRule rule;
  const int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Bisection on [lo, hi] where f(lo) and f(hi) have opposite signs (zero counts as negative).
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const bool lo_positive = f(lo) > 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// All sign changes of f sampled at lo + k*step, k = 1..; the samples stay strictly inside (lo, hi).
std::vector<double> scan_roots(const std::function<double(double)>& f, double lo, double hi,
                               double step, double tol) {
  std::vector<double> roots;
  double prev_t = std::numeric_limits<double>::quiet_NaN();
  bool prev_positive = false;
  for (double t = lo + step; t < hi; t += step) {
    const bool positive = f(t) > 0.0;
    if (!std::isnan(prev_t) && positive != prev_positive) {
      roots.push_back(bisect(f, prev_t, t, tol));
    }
    prev_t = t;
    prev_positive = positive;
  }
  return roots;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generators

CircleGenerator::CircleGenerator(double major_radius, double minor_radius)
    : major_(major_radius), minor_(minor_radius) {
  if (!(minor_ > 0.0) || !(major_ > minor_)) {
    throw InvariantViolation("circle generator needs 0 < r < R");
  }
}

CurveJet CircleGenerator::jet(double t) const {
  const double u = t / minor_;
  const double c = std::cos(u), s = std::sin(u);
  return {Vec2(major_ + minor_ * c, minor_ * s), Vec2(-s, c), Vec2(-c, -s) / minor_};
}

std::string CircleGenerator::describe() const {
  return "circle R=" + fmt_double(major_) + " r=" + fmt_double(minor_);
}

EllipseGenerator::EllipseGenerator(double center, double semi_rho, double semi_z)
    : center_(center), a_(semi_rho), b_(semi_z) {
  if (!(a_ > 0.0) || !(b_ > 0.0) || !(center_ > a_)) {
    throw InvariantViolation("ellipse generator needs semi-axes > 0 and center > semi_rho");
  }
}

CurveJet EllipseGenerator::jet(double t) const {
  const double c = std::cos(t), s = std::sin(t);
  return {Vec2(center_ + a_ * c, b_ * s), Vec2(-a_ * s, b_ * c), Vec2(-a_ * c, -b_ * s)};
}

std::string EllipseGenerator::describe() const {
  return "ellipse center=" + fmt_double(center_) + " a=" + fmt_double(a_) + " b=" +
         fmt_double(b_);
}

FourierCurve::FourierCurve(std::vector<double> cos_rho, std::vector<double> sin_rho,
                           std::vector<double> cos_z, std::vector<double> sin_z)
    : cr_(std::move(cos_rho)), sr_(std::move(sin_rho)), cz_(std::move(cos_z)),
      sz_(std::move(sin_z)) {
  const std::size_t n = cr_.size();
  if (n == 0 || sr_.size() != n || cz_.size() != n || sz_.size() != n) {
    throw PreconditionError("Fourier coefficient arrays must be non-empty and equal length");
  }
}

FourierCurve FourierCurve::from_samples(const std::vector<Vec2>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 5) throw PreconditionError("custom curve needs at least 5 samples");
  const int harmonics = (n - 1) / 2;
  std::vector<double> cr(harmonics + 1), sr(harmonics + 1), cz(harmonics + 1), sz(harmonics + 1);
  for (int k = 0; k <= harmonics; ++k) {
    double acr = 0, asr = 0, acz = 0, asz = 0;
    for (int j = 0; j < n; ++j) {
      const double t = kTwoPi * j / n;
      const double c = std::cos(k * t), s = std::sin(k * t);
      acr += samples[j].x() * c;
      asr += samples[j].x() * s;
      acz += samples[j].y() * c;
      asz += samples[j].y() * s;
    }
    const double scale = (k == 0) ? 1.0 / n : 2.0 / n;
    cr[k] = acr * scale;
    sr[k] = asr * scale;
    cz[k] = acz * scale;
    sz[k] = asz * scale;
  }
  return FourierCurve(std::move(cr), std::move(sr), std::move(cz), std::move(sz));
}

CurveJet FourierCurve::jet(double t) const {
  CurveJet j{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  for (std::size_t k = 0; k < cr_.size(); ++k) {
    const double kk = static_cast<double>(k);
    const double c = std::cos(kk * t), s = std::sin(kk * t);
    const double sr = k == 0 ? 0.0 : sr_[k];
    const double sz = k == 0 ? 0.0 : sz_[k];
    j.point += Vec2(cr_[k] * c + sr * s, cz_[k] * c + sz * s);
    j.d1 += kk * Vec2(-cr_[k] * s + sr * c, -cz_[k] * s + sz * c);
    j.d2 -= kk * kk * Vec2(cr_[k] * c + sr * s, cz_[k] * c + sz * s);
  }
  return j;
}

std::string FourierCurve::describe() const {
  std::ostringstream os;
  os << "fourier harmonics=" << cr_.size() - 1;
  for (std::size_t k = 0; k < cr_.size(); ++k) {
    os << ' ' << fmt_double(cr_[k]) << ',' << fmt_double(sr_[k]) << ',' << fmt_double(cz_[k])
       << ',' << fmt_double(sz_[k]);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Arc length

ArcLengthTable::ArcLengthTable(std::shared_ptr<const ParametricCurve> raw, int panels)
    : raw_(std::move(raw)), t0_(raw_->begin()), dt_((raw_->end() - raw_->begin()) / panels) {
  cumulative_.resize(panels + 1);
  cumulative_[0] = 0.0;
  for (int k = 0; k < panels; ++k) {
    cumulative_[k + 1] = cumulative_[k] + panel_integral(t0_ + k * dt_, t0_ + (k + 1) * dt_);
  }
}

double ArcLengthTable::panel_integral(double a, double b) const {
  const auto& rule = gauss_rule();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < kGaussOrder; ++i) {
    sum += rule.weights[i] * raw_->jet(mid + half * rule.nodes[i]).d1.norm();
  }
  return sum * half;
}

double ArcLengthTable::arc_length(double t) const {
  const int panels = static_cast<int>(cumulative_.size()) - 1;
  int k = static_cast<int>(std::floor((t - t0_) / dt_));
  k = std::clamp(k, 0, panels - 1);
  const double tk = t0_ + k * dt_;
  return cumulative_[k] + panel_integral(tk, t);
}

double ArcLengthTable::parameter(double s) const {
  const int panels = static_cast<int>(cumulative_.size()) - 1;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  int k = static_cast<int>(it - cumulative_.begin()) - 1;
  k = std::clamp(k, 0, panels - 1);
  const double lo = t0_ + k * dt_, hi = lo + dt_;
  const double span = cumulative_[k + 1] - cumulative_[k];
  double t = lo + dt_ * (s - cumulative_[k]) / span;
  for (int it_n = 0; it_n < 8; ++it_n) {
    const double f = cumulative_[k] + panel_integral(lo, t) - s;
    const double step = f / raw_->jet(t).d1.norm();
    t = std::clamp(t - step, lo, hi);
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(t))) break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// ProfileCurve

ProfileCurve ProfileCurve::from_unit_speed(std::shared_ptr<const ParametricCurve> curve,
                                           Options opts) {
  if (!curve) throw PreconditionError("null curve");
  ProfileCurve pc;
  pc.opts_ = opts;
  pc.raw_ = std::move(curve);
  if (std::abs(pc.raw_->begin()) > 0.0) {
    throw PreconditionError("unit-speed curves must start at parameter 0");
  }
  pc.period_ = pc.raw_->end() - pc.raw_->begin();
  pc.validate();
  pc.build_seed_grid();
  return pc;
}

ProfileCurve ProfileCurve::circle(double major_radius, double minor_radius) {
  return from_unit_speed(std::make_shared<CircleGenerator>(major_radius, minor_radius));
}

ProfileCurve ProfileCurve::ellipse(double center, double semi_rho, double semi_z) {
  return reparametrize_arclength(std::make_shared<EllipseGenerator>(center, semi_rho, semi_z));
}

ProfileCurve reparametrize_arclength(std::shared_ptr<const ParametricCurve> raw,
                                     ProfileCurve::Options opts) {
  if (!raw) throw PreconditionError("null curve");
  const double t0 = raw->begin(), t1 = raw->end();
  const CurveJet j0 = raw->jet(t0), j1 = raw->jet(t1);
  if ((j0.point - j1.point).norm() > 1e-9 * (1.0 + j0.point.norm())) {
    throw InvariantViolation("raw curve is not closed");
  }
  // Convexity and positivity on a dense raw grid, reported in arc length.
  const int n = 4 * opts.arc_length_panels;
  std::optional<double> bad_t;
  std::string reason;
  for (int i = 0; i < n && !bad_t; ++i) {
    const double t = t0 + (t1 - t0) * i / n;
    const CurveJet j = raw->jet(t);
    if (!(j.point.x() > 0.0)) {
      bad_t = t;
      reason = "curve reaches the rotation axis";
    } else if (!(cross2(j.d1, j.d2) > 0.0)) {
      bad_t = t;
      reason = "curve is not strictly convex and positively oriented";
    }
  }
  auto table = std::make_shared<ArcLengthTable>(raw, opts.arc_length_panels);
  if (bad_t) {
    throw InvariantViolation(reason + " at tau=" + fmt_double(table->arc_length(*bad_t)));
  }
  ProfileCurve pc;
  pc.opts_ = opts;
  pc.raw_ = std::move(raw);
  pc.table_ = std::move(table);
  pc.period_ = pc.table_->total();
  pc.build_seed_grid();
  return pc;
}

void ProfileCurve::validate() const {
  const int n = 1024;
  for (int i = 0; i < n; ++i) {
    const double tau = period_ * i / n;
    const CurveJet j = jet(tau);
    if (std::abs(j.d1.squaredNorm() - 1.0) > opts_.unit_speed_tol) {
      throw InvariantViolation("curve is not unit speed at tau=" + fmt_double(tau));
    }
    if (!(j.point.x() > 0.0)) {
      throw InvariantViolation("curve reaches the rotation axis at tau=" + fmt_double(tau));
    }
    if (!(cross2(j.d1, j.d2) > 0.0)) {
      throw InvariantViolation("curve is not strictly convex at tau=" + fmt_double(tau));
    }
  }
  const Vec2 gap = jet(0.0).point - raw_->jet(raw_->end()).point;
  if (gap.norm() > 1e-9) throw InvariantViolation("curve is not closed");
}

void ProfileCurve::build_seed_grid() {
  auto seeds = std::make_shared<std::vector<Vec2>>();
  const int n = opts_.seed_points;
  seeds->reserve(n);
  const double t0 = raw_->begin(), dt = (raw_->end() - raw_->begin()) / n;
  for (int i = 0; i < n; ++i) seeds->push_back(raw_->jet(t0 + i * dt).point);
  seeds_ = std::move(seeds);
}

double ProfileCurve::raw_parameter(double tau) const {
  const double w = wrap(tau);
  return table_ ? table_->parameter(w) : w;
}

double ProfileCurve::arc_length_of(double t) const {
  const double w = wrap_periodic(t, raw_->begin(), raw_->end());
  return table_ ? table_->arc_length(w) : w;
}

CurveJet ProfileCurve::jet(double tau) const {
  if (!table_) return raw_->jet(wrap(tau));
  const CurveJet r = raw_->jet(table_->parameter(wrap(tau)));
  const double speed = r.d1.norm();
  const Vec2 t = r.d1 / speed;
  const Vec2 dd = (r.d2 - t * t.dot(r.d2)) / (speed * speed);
  return {r.point, t, dd};
}

double ProfileCurve::curvature(double tau) const {
  const CurveJet j = jet(tau);
  if (std::abs(j.d1.squaredNorm() - 1.0) > opts_.unit_speed_tol) {
    throw InvariantViolation("curvature requested off unit speed at tau=" + fmt_double(tau));
  }
  return j.d2.norm();
}

double ProfileCurve::curvature_derivative(double tau) const {
  if (!table_) {
    if (auto k = raw_->curvature_derivative(wrap(tau))) return *k;
  }
  const double h = opts_.kappa_prime_step;
  return (curvature(tau + h) - curvature(tau - h)) / (2.0 * h);
}

FootPoint ProfileCurve::foot_point(const Vec2& q) const {
  const auto& seeds = *seeds_;
  const int n = static_cast<int>(seeds.size());
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double d2 = (seeds[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  const double t0 = raw_->begin(), dt = (raw_->end() - raw_->begin()) / n;
  // Stationarity of |r(t) - q|^2: f(t) = (r - q) . r'
  auto f = [&](double t) {
    const CurveJet j = raw_->jet(t);
    return (j.point - q).dot(j.d1);
  };
  double lo = t0 + (best - 1) * dt, hi = t0 + (best + 1) * dt;
  double flo = f(lo), fhi = f(hi);
  for (int widen = 0; widen < 8 && !(flo <= 0.0 && fhi >= 0.0); ++widen) {
    lo -= dt;
    hi += dt;
    flo = f(lo);
    fhi = f(hi);
  }
  if (!(flo <= 0.0 && fhi >= 0.0)) {
    throw NumericError("foot point bracket not found", std::min(std::abs(flo), std::abs(fhi)));
  }
  double t = t0 + best * dt;
  for (int it = 0; it < 100; ++it) {
    const CurveJet j = raw_->jet(t);
    const double ft = (j.point - q).dot(j.d1);
    if (ft < 0.0) lo = t; else hi = t;
    const double dft = j.d1.squaredNorm() + (j.point - q).dot(j.d2);
    double next = dft > 0.0 ? t - ft / dft : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - t;
    t = next;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(t)) || hi - lo <= 1e-16 * (1.0 + std::abs(t))) {
      break;
    }
  }
  const CurveJet j = raw_->jet(t);
  FootPoint fp;
  const double speed = j.d1.norm();
  fp.point = j.point;
  fp.tangent = j.d1 / speed;
  fp.normal = Vec2(fp.tangent.y(), -fp.tangent.x());
  fp.curvature = cross2(j.d1, j.d2) / (speed * speed * speed);
  fp.signed_distance = (q - j.point).dot(fp.normal);
  fp.tau = arc_length_of(t);
  return fp;
}

std::string ProfileCurve::describe() const {
  return raw_->describe() + (table_ ? " arclength" : "");
}

// ---------------------------------------------------------------------------
// Markers and h

double curvature(const ProfileCurve& curve, double tau) { return curve.curvature(tau); }

std::optional<double> inner_parameter(const ProfileCurve& curve, const CurveMarkers& markers,
                                      double tau) {
  const double u = markers.tau1_star + wrap_periodic(tau - markers.tau1_star, 0.0, curve.period());
  if (u > markers.tau1_star && u < markers.tau2_star) return u;
  return std::nullopt;
}

CurveMarkers find_markers(const ProfileCurve& curve, int grid_points) {
  if (grid_points < 16) throw PreconditionError("marker scan needs at least 16 grid points");
  const double period = curve.period();
  const double step = period / grid_points;
  const double tol = 1e-12;
  auto g2p = [&](double t) { return curve.jet(t).d1.y(); };
  auto g1p = [&](double t) { return curve.jet(t).d1.x(); };

  // Periodic scan of gamma2'.
  std::vector<std::pair<double, bool>> changes;  // (root, becomes_negative)
  bool prev = g2p(0.0) > 0.0;
  for (int i = 1; i <= grid_points; ++i) {
    const double t = i * step;
    const bool cur = g2p(t) > 0.0;
    if (cur != prev) changes.emplace_back(bisect(g2p, t - step, t, tol), prev);
    prev = cur;
  }
  if (changes.size() != 2 || changes[0].second == changes[1].second) {
    throw NonConformingCurve("gamma2' must change sign exactly twice, found " +
                             std::to_string(changes.size()));
  }
  CurveMarkers m;
  const auto& down = changes[0].second ? changes[0] : changes[1];
  const auto& up = changes[0].second ? changes[1] : changes[0];
  m.tau1_star = curve.wrap(down.first);
  m.tau2_star = m.tau1_star + wrap_periodic(up.first - m.tau1_star, 0.0, period);

  const auto lambdas = scan_roots(g1p, m.tau1_star, m.tau2_star, step, tol);
  if (lambdas.size() != 1) {
    throw NonConformingCurve("gamma1' must vanish exactly once on (tau1*, tau2*), found " +
                             std::to_string(lambdas.size()));
  }
  m.lambda_star = lambdas.front();
  if (!(g1p(0.5 * (m.tau1_star + m.lambda_star)) < 0.0) ||
      !(g1p(0.5 * (m.lambda_star + m.tau2_star)) > 0.0)) {
    throw NonConformingCurve("gamma1' sign pattern around lambda* does not match");
  }
  m.z_h_zeros = zero_set_h(curve, m, grid_points);
  return m;
}

double h_value(const ProfileCurve& curve, const CurveMarkers& markers, double tau) {
  const auto u = inner_parameter(curve, markers, tau);
  if (!u) throw PreconditionError("h is defined only on (tau1*, tau2*)");
  const CurveJet j = curve.jet(*u);
  const double kappa = curve.curvature(*u);
  if (!(kappa > 0.0)) throw PreconditionError("h needs positive curvature");
  const double g1 = j.point.x(), g1p = j.d1.x(), g2p_abs = std::abs(j.d1.y());
  const double kappa_p = curve.curvature_derivative(*u);
  return (g1p / g1) * (g1 * kappa + g2p_abs) + g2p_abs * kappa_p / (3.0 * kappa);
}

std::vector<double> zero_set_h(const ProfileCurve& curve, const CurveMarkers& markers,
                               int grid_points) {
  const double step = curve.period() / grid_points;
  auto h = [&](double t) { return h_value(curve, markers, t); };
  return scan_roots(h, markers.tau1_star, markers.tau2_star, step, 1e-12);
}

}  // namespace torbill
