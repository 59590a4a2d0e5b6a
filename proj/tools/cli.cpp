#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "torbill/errors.hpp"
#include "torbill/grazing.hpp"
#include "torbill/ortho_coords.hpp"
#include "torbill/phase_analysis.hpp"

namespace torbill::cli {

namespace {

using ojson = nlohmann::ordered_json;
using Format = RecordWriter::Format;

ojson vec(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

std::string echo(const std::vector<double>& xs) {
  std::ostringstream s;
  for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? "," : "") << format_double(xs[i]);
  return s.str();
}

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string format;
};

// Everything a subcommand needs once flags and config are resolved.
struct Context {
  RunConfig cfg;
  std::ostream* os = nullptr;
  std::ostream* err = nullptr;
  std::string failing_state;  ///< echoed on numeric failure
};

using Action = std::function<int(Context&)>;

int simulate(Context& ctx, const std::vector<double>& state, double t0, const std::string& direction,
             std::optional<double> length) {
  if (state.size() != 6) throw ConfigError("--state needs x1,x2,x3,v1,v2,v3");
  if (direction != "forward" && direction != "backward") throw ConfigError("--direction is forward or backward");
  ctx.failing_state = "state=" + echo(state) + " t=" + format_double(t0) + " direction=" + direction;
  const ToroidalDomain domain = make_domain(ctx.cfg);
  const PhaseState ps{Vec3(state[0], state[1], state[2]), Vec3(state[3], state[4], state[5]), t0};
  const Budget budget = Budget::length(length.value_or(ctx.cfg.max_length));
  const Caps caps = make_caps(ctx.cfg);
  const Trajectory traj = direction == "forward" ? forward_cycles(domain, ps, budget, caps)
                                                 : backward_cycles(domain, ps, budget, caps);

  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Jsonl), ctx.cfg, "simulate");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(domain.hash()));
  w.record(ojson{{"record", "header"},
                 {"origin", {{"x", vec(ps.x)}, {"v", vec(ps.v)}, {"t", ps.t}}},
                 {"direction", direction},
                 {"seed", ctx.cfg.seed},
                 {"domain_hash", hash},
                 {"domain", domain.describe()}});
  for (const auto& e : traj.events) {
    w.row(ojson{{"record", "event"}, {"k", e.k}, {"t", e.t}, {"x", vec(e.x)}, {"tau", e.tau},
                {"phi_unwrapped", e.phi}, {"v_in", vec(e.v_in)}, {"v_out", vec(e.v_out)},
                {"normal_dot", e.normal_dot}, {"graze", to_string(e.graze)}});
  }
  w.record(ojson{{"record", "end"},
                 {"status", to_string(traj.status)},
                 {"bounces", traj.events.size()},
                 {"total_length", traj.total_length},
                 {"winding", traj.winding},
                 {"x", vec(traj.end.x)},
                 {"v", vec(traj.end.v)},
                 {"t", traj.end.t}});
  return kOk;
}

int classify_boundary(Context& ctx, double phi, int n_tau, int n_dir) {
  if (n_tau < 1 || n_dir < 1) throw ConfigError("grid sizes must be positive");
  const ToroidalDomain domain = make_domain(ctx.cfg);
  const Caps caps = make_caps(ctx.cfg);
  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "classify-boundary");
  const double period = domain.profile().period();
  for (int i = 0; i < n_tau; ++i) {
    const double tau = period * i / n_tau;
    const Vec3 x = domain.sigma(tau, phi);
    const Vec3 e_phi = azimuthal_direction(phi), e_m = domain.meridian_tangent(tau, phi);
    for (int j = 0; j < n_dir; ++j) {
      const double a = kTwoPi * j / n_dir;
      const Vec3 wdir = std::cos(a) * e_phi + std::sin(a) * e_m;
      ctx.failing_state = "tau=" + format_double(tau) + " theta_dir=" + format_double(a);
      std::string cls;
      try {
        cls = to_string(classify_tangent(domain, x, tau, wdir, caps.grazing));
      } catch (const GrazingAmbiguous&) {
        cls = "Ambiguous";
      }
      w.row(ojson{{"tau", tau}, {"theta_dir", a}, {"class", cls},
                  {"kappa_n", normal_curvature(domain, tau, phi, wdir)}});
    }
  }
  return kOk;
}

int inflection_map(Context& ctx, double phi, int n_tau) {
  if (n_tau < 1) throw ConfigError("grid size must be positive");
  const ToroidalDomain domain = make_domain(ctx.cfg);
  const Caps caps = make_caps(ctx.cfg);
  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "inflection-map");
  const double period = domain.profile().period();
  for (int i = 0; i < n_tau; ++i) {
    const double tau = period * i / n_tau;
    ctx.failing_state = "tau=" + format_double(tau);
    try {
      const auto dirs = inflection_directions(domain, tau, phi, caps.grazing);
      w.row(ojson{{"tau", tau}, {"theta", dirs.theta}, {"omega_I", ring_reference_omega(domain, tau)}});
    } catch (const UndefinedInflection&) {
    }
  }
  return kOk;
}

int badset(Context& ctx, const std::vector<double>& x, double phi, const std::vector<double>& eps, double length,
           int samples, double speed_band) {
  if (x.size() != 3) throw ConfigError("--x needs x1,x2,x3");
  if (eps.empty()) throw ConfigError("--eps needs at least one value");
  for (double e : eps) {
    if (!(e > 0.0)) throw ConfigError("--eps values must be positive");
  }
  if (!(length > 0.0) || !(speed_band >= 1.0)) throw ConfigError("--length > 0 and --speed-band >= 1");
  if (samples < 1000) throw ConfigError("--samples must be at least 1000");
  ctx.failing_state = "x=" + echo(x) + " phi=" + format_double(phi);
  const ToroidalDomain domain = make_domain(ctx.cfg);
  BadSetParams p;
  p.x_section = Vec3(x[0], x[1], x[2]);
  p.phi = phi;
  p.length = length;
  p.n_samples = samples;
  p.seed = ctx.cfg.seed;
  p.speed_band = speed_band;
  p.caps = make_caps(ctx.cfg);
  p.workers = ctx.cfg.workers;
  const auto runs = badset_samples(domain, p);

  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "badset");
  std::vector<double> ds, fs;
  for (double e : eps) {
    const auto r = summarize_badset(p, runs, e);
    w.row(ojson{{"delta", e},
                {"n", r.n_samples},
                {"fraction", r.fraction},
                {"ci95", r.ci95},
                {"near_grazing_fraction", r.near_grazing_fraction},
                {"near_grazing_ci95", r.near_grazing_ci95},
                {"near_grazing", r.near_grazing},
                {"stopped_at_inflection", r.stopped_at_inflection},
                {"max_bounces", r.max_bounces},
                {"ambiguous", r.ambiguous},
                {"ring_excluded", r.ring_excluded},
                {"max_good_bounces", r.max_good_bounces}});
    if (r.near_grazing_fraction > 0.0) {
      ds.push_back(e);
      fs.push_back(r.near_grazing_fraction);
    }
  }
  if (ds.size() >= 2) *ctx.err << "near-grazing log-log slope: " << format_double(loglog_slope(ds, fs)) << '\n';
  return kOk;
}

int jacobian(Context& ctx, const std::vector<double>& state, double s, double h) {
  if (state.size() != 7) throw ConfigError("--state needs x1,x2,x3,v1,v2,v3,t");
  ctx.failing_state = "state=" + echo(state) + " s=" + format_double(s) + " h=" + format_double(h);
  const ToroidalDomain domain = make_domain(ctx.cfg);
  const PhaseState ps{Vec3(state[0], state[1], state[2]), Vec3(state[3], state[4], state[5]), state[6]};
  const auto r = jacobian_det(domain, ps, s, h, make_caps(ctx.cfg));
  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "jacobian");
  w.row(ojson{{"det", r.det}, {"det_coarse", r.det_coarse}, {"rel_spread", r.rel_spread}, {"bounces", r.bounces}});
  return kOk;
}

int recurrence_check(Context& ctx, const std::vector<double>& alphas, double beta, double offset, double gate,
                     bool all_steps) {
  if (alphas.empty()) throw ConfigError("--alpha needs at least one value");
  const ToroidalDomain domain = make_domain(ctx.cfg);
  const Caps caps = make_caps(ctx.cfg);
  RecurrenceOptions opts;
  opts.gate = gate;
  opts.inner_only = !all_steps;
  const double tau0 = domain.markers().tau1_star + offset;
  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "recurrence-check");
  double lo1 = INFINITY, hi1 = 0, lo2 = INFINITY, hi2 = 0;
  for (double a : alphas) {
    ctx.failing_state = "tau=" + format_double(tau0) + " alpha=" + format_double(a) + " beta=" + format_double(beta);
    const PhaseState ps = tangential_launch(domain, tau0, 0.0, a, beta);
    const Trajectory traj = forward_cycles(domain, ps, Budget::length(1.2 * domain.profile().period()), caps);
    const auto recs = recurrence_residuals(domain, traj, opts);
    double r1 = 0, r2 = 0;
    for (const auto& r : recs) {
      r1 = std::max(r1, r.r1);
      r2 = std::max(r2, r.r2);
    }
    w.row(ojson{{"alpha", a}, {"bounces", traj.events.size()}, {"records", recs.size()}, {"max_r1", r1},
                {"max_r2", r2}});
    if (!recs.empty()) {
      lo1 = std::min(lo1, r1);
      hi1 = std::max(hi1, r1);
      lo2 = std::min(lo2, r2);
      hi2 = std::max(hi2, r2);
    }
  }
  if (hi1 > 0) *ctx.err << "r1 spread " << format_double(hi1 / lo1) << ", r2 spread " << format_double(hi2 / lo2) << '\n';
  return kOk;
}

int coords_check(Context& ctx, double height, double r_inner, double r_outer, double step) {
  std::optional<AnnulusChart> chart;
  try {
    chart.emplace(height, r_inner, r_outer);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  IdentitySuiteOptions opts;
  opts.step = step;
  opts.seed = ctx.cfg.seed;
  ctx.failing_state = "H=" + format_double(height) + " R1=" + format_double(r_inner) + " R2=" + format_double(r_outer);
  const auto checks = run_identity_suite(*chart, opts);
  RecordWriter w(*ctx.os, resolve_format(ctx.cfg, Format::Csv), ctx.cfg, "coords-check");
  bool ok = true;
  for (const auto& c : checks) {
    w.row(ojson{{"check", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    ok = ok && c.pass;
  }
  return ok ? kOk : kIdentityFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Billiard trajectories in toroidal domains"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  auto* o_config = app.add_option("--config", g.config, "JSON config file")->envname("TORBILL_CONFIG");
  auto* o_seed = app.add_option("--seed", g.seed, "RNG seed (u64)")->envname("TORBILL_SEED");
  auto* o_workers = app.add_option("--workers", g.workers, "worker threads")->envname("TORBILL_WORKERS");
  auto* o_out = app.add_option("--out", g.out, "output path, - for stdout")->envname("TORBILL_OUT");
  auto* o_format = app.add_option("--format", g.format, "auto, csv or jsonl")->envname("TORBILL_FORMAT");
  (void)o_config;

  Action action;

  auto* sim = app.add_subcommand("simulate", "trajectory event stream");
  std::vector<double> sim_state{3.0, 0.0, 0.0, -std::sqrt(3.0) / 2.0, 0.5, 0.0};
  double sim_t0 = 0.0;
  std::string sim_dir = "forward";
  std::optional<double> sim_length;
  sim->add_option("--state", sim_state, "x1,x2,x3,v1,v2,v3")->delimiter(',');
  sim->add_option("--t0", sim_t0, "initial time");
  sim->add_option("--direction", sim_dir, "forward or backward");
  sim->add_option("--length", sim_length, "path length budget (default caps.max_length)");
  sim->callback([&] { action = [&](Context& c) { return simulate(c, sim_state, sim_t0, sim_dir, sim_length); }; });

  auto* cb = app.add_subcommand("classify-boundary", "grazing class atlas over (tau, direction)");
  double cb_phi = 0.0;
  int cb_tau = 64, cb_dir = 36;
  cb->add_option("--phi", cb_phi, "azimuth");
  cb->add_option("--n-tau", cb_tau, "tau grid size");
  cb->add_option("--n-dir", cb_dir, "direction grid size");
  cb->callback([&] { action = [&](Context& c) { return classify_boundary(c, cb_phi, cb_tau, cb_dir); }; });

  auto* im = app.add_subcommand("inflection-map", "inflection angle and angular momentum over tau");
  double im_phi = 0.0;
  int im_tau = 256;
  im->add_option("--phi", im_phi, "azimuth");
  im->add_option("--n-tau", im_tau, "tau grid size");
  im->callback([&] { action = [&](Context& c) { return inflection_map(c, im_phi, im_tau); }; });

  auto* bs = app.add_subcommand("badset", "near-grazing Monte Carlo estimate");
  std::vector<double> bs_x{2.0, 0.0, 0.0}, bs_eps{0.02, 0.01, 0.005};
  double bs_phi = 0.0, bs_length = 10.0, bs_band = 1.0;
  int bs_samples = 1000;
  bs->add_option("--x", bs_x, "base point in the S_0 frame")->delimiter(',');
  bs->add_option("--phi", bs_phi, "azimuth of the base cross-section");
  bs->add_option("--eps", bs_eps, "grazing thresholds")->delimiter(',');
  bs->add_option("--length", bs_length, "backward path length");
  bs->add_option("--samples", bs_samples, "sample count (>= 1000)");
  bs->add_option("--speed-band", bs_band, "speeds uniform in [1/N, N]");
  bs->callback([&] {
    action = [&](Context& c) { return badset(c, bs_x, bs_phi, bs_eps, bs_length, bs_samples, bs_band); };
  });

  auto* jac = app.add_subcommand("jacobian", "det dX(s)/dv by finite differences");
  jac->set_help_flag("--help", "print this help message and exit");
  std::vector<double> jac_state;
  double jac_s = 0.0, jac_h = 1e-5;
  jac->add_option("--state", jac_state, "x1,x2,x3,v1,v2,v3,t")->delimiter(',')->required();
  jac->add_option("--s", jac_s, "evaluation time")->required();
  jac->add_option("--h", jac_h, "difference step");
  jac->callback([&] { action = [&](Context& c) { return jacobian(c, jac_state, jac_s, jac_h); }; });

  auto* rc = app.add_subcommand("recurrence-check", "recurrence residuals under launch refinement");
  std::vector<double> rc_alpha{0.025, 0.0125, 0.00625, 0.003125};
  double rc_beta = 0.05, rc_offset = 0.1, rc_gate = 0.1;
  bool rc_all = false;
  rc->add_option("--alpha", rc_alpha, "launch angles")->delimiter(',');
  rc->add_option("--beta", rc_beta, "azimuthal lean of the launch tangent");
  rc->add_option("--tau-offset", rc_offset, "launch parameter past tau1*");
  rc->add_option("--gate", rc_gate, "smallness gate on steps");
  rc->add_flag("--all-steps", rc_all, "keep steps outside the inner region");
  rc->callback([&] {
    action = [&](Context& c) { return recurrence_check(c, rc_alpha, rc_beta, rc_offset, rc_gate, rc_all); };
  });

  auto* cc = app.add_subcommand("coords-check", "orthogonal chart identity suite");
  double cc_h = kTwoPi, cc_r1 = 1.0, cc_r2 = 3.0, cc_step = 1e-3;
  cc->add_option("--height", cc_h, "period H in z");
  cc->add_option("--r-inner", cc_r1, "R1");
  cc->add_option("--r-outer", cc_r2, "R2");
  cc->add_option("--step", cc_step, "difference step");
  cc->callback([&] { action = [&](Context& c) { return coords_check(c, cc_h, cc_r1, cc_r2, cc_step); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  Context ctx;
  ctx.err = &err;
  std::ofstream file;
  try {
    if (!g.config.empty()) ctx.cfg = load_config(g.config);
    if (o_seed->count()) ctx.cfg.seed = g.seed;
    if (o_workers->count()) ctx.cfg.workers = g.workers;
    if (o_out->count()) ctx.cfg.out = g.out;
    if (o_format->count()) ctx.cfg.format = g.format;
    validate(ctx.cfg);
    if (ctx.cfg.out == "-") {
      ctx.os = &out;
    } else {
      file.open(ctx.cfg.out, std::ios::binary);
      if (!file) throw ConfigError("cannot open output " + ctx.cfg.out);
      ctx.os = &file;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const int code = action(ctx);
    ctx.os->flush();
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    if (!ctx.failing_state.empty()) err << "failing state: " << ctx.failing_state << '\n';
    return kNumericError;
  }
}

}  // namespace torbill::cli
