#include "abohm/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <sstream>

#include "abohm/analysis.hpp"
#include "abohm/discretize.hpp"
#include "abohm/eigensolve.hpp"
#include "abohm/geometry.hpp"
#include "abohm/grid.hpp"
#include "abohm/potential.hpp"
#include "abohm/report.hpp"

namespace abohm::runner {

namespace {

constexpr const char* kVersion = "abohm 0.1.0";
constexpr double kDiskReference = 5.783185962946785;  // square of the first J0 zero

using report::format_double;

std::string now_utc() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Bundle {
  const config::ExperimentConfig& cfg;
  const RunOptions& opt;
  std::filesystem::path dir;
  std::vector<std::string> files;
  bool flagged = false;

  void emit(const std::string& name, const std::string& content) {
    report::write_file_atomic((dir / name).string(), content);
    files.push_back(name);
  }
  void manifest() {
    std::ostringstream m;
    m << "{\n  \"tool\": \"" << kVersion << "\",\n  \"kind\": \"" << cfg.kind
      << "\",\n  \"config_hash\": \"" << report::content_hash(cfg.raw) << "\",\n  \"seed\": "
      << cfg.seed << ",\n  \"tol\": " << format_double(cfg.tol) << ",\n  \"threads\": "
      << opt.threads << ",\n  \"flagged\": " << (flagged ? "true" : "false")
      << ",\n  \"timestamp\": \"" << now_utc() << "\",\n  \"files\": [";
    for (std::size_t i = 0; i < files.size(); ++i) m << (i ? ", " : "") << '"' << files[i] << '"';
    m << "]\n}\n";
    report::write_file_atomic((dir / "manifest.json").string(), m.str());
  }
};

double grid_pitch(int side) { return 2.0 / (side - 1); }

potential::PotentialField empty_field() {
  potential::PotentialField f;
  f.bump = potential::normalize_bump();
  return f;
}

// lambda on the fine grid corrected by the coarse one. The nearest-node
// Dirichlet walls carry an O(h) boundary defect that dominates the O(h^2)
// interior error (measured ratio ~2 per halving on disk and annulus), so the
// extrapolation removes the first-order term.
double richardson(double coarse, double fine, double h_coarse, double h_fine) {
  double r = h_coarse / h_fine;
  return fine + (fine - coarse) / (r - 1.0);
}

int run_disk_baseline(Bundle& b) {
  report::Table t;
  t.header = {"side", "h", "lambda", "residual", "converged"};
  std::vector<double> hs, lambdas;
  auto field = empty_field();
  for (std::size_t i = 0; i < b.cfg.grid_sides.size(); ++i) {
    int side = b.cfg.grid_sides[i];
    double h = grid_pitch(side);
    auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, h));
    auto op = discretize::assemble_electric(g, field, 0);
    auto r = eigensolve::lowest_eigenpair(op, b.cfg.tol, 800, mix_seed(b.cfg.seed, i));
    if (!r.converged) b.flagged = true;
    hs.push_back(h);
    lambdas.push_back(r.lambda);
    t.rows.push_back({std::to_string(side), format_double(h), format_double(r.lambda),
                      format_double(r.residual), r.converged ? "true" : "false"});
  }
  double best = lambdas.back();
  if (lambdas.size() >= 2)
    best = richardson(lambdas[lambdas.size() - 2], lambdas.back(), hs[hs.size() - 2], hs.back());
  double rel = std::abs(best - kDiskReference) / kDiskReference;
  t.rows.push_back({"extrapolated", "", format_double(best), format_double(rel), rel <= 0.01 ? "true" : "false"});
  if (rel > 0.01) b.flagged = true;
  b.emit("disk-baseline.csv", report::to_csv(t));
  if (b.opt.format == "csv+svg") {
    report::Series s{"lambda(h)", hs, lambdas};
    b.emit("disk-baseline.svg",
           report::line_chart_svg({s}, "Dirichlet disk ground state", "h", "lambda", false));
  }
  return b.flagged ? 1 : 0;
}

int run_ab_annulus(Bundle& b) {
  report::Table t;
  t.header = {"alpha", "lambda", "bound", "oracle", "richardson", "oracle_rel_err",
              "bound_pass", "converged"};
  std::vector<double> xs, ys, bs;
  std::vector<std::string> notes(b.cfg.alphas.size());
  struct Row {
    double lambda = 0, bound = 0, oracle = 0, rich = 0, err = 0;
    bool pass = false, conv = false;
  };
  std::vector<Row> rows(b.cfg.alphas.size());
  parallel_for(b.cfg.alphas.size(), b.opt.threads, [&](std::size_t i) {
    double alpha = b.cfg.alphas[i];
    try {
      std::vector<analysis::ABReport> reps;
      std::vector<double> hh;
      for (int side : b.cfg.grid_sides) {
        double h = grid_pitch(side);
        reps.push_back(analysis::ab_annulus_check(b.cfg.r_in, b.cfg.r_out, alpha, h,
                                                  b.cfg.defect_tol, b.cfg.tol,
                                                  mix_seed(b.cfg.seed, i)));
        hh.push_back(h);
      }
      const auto& last = reps.back();
      Row r;
      r.lambda = last.lambda;
      r.bound = last.bound;
      r.oracle = last.oracle;
      r.rich = reps.size() >= 2 ? richardson(reps[reps.size() - 2].lambda, last.lambda,
                                             hh[hh.size() - 2], hh.back())
                                : last.lambda;
      r.err = std::abs(r.rich - r.oracle) / std::max(r.oracle, 1e-12);
      r.pass = last.pass;
      r.conv = last.converged;
      rows[i] = r;
    } catch (const Error& e) {
      notes[i] = e.tag();
    }
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!notes[i].empty()) {
      b.flagged = true;
      t.rows.push_back({format_double(b.cfg.alphas[i]), notes[i], "", "", "", "", "false", "false"});
      continue;
    }
    const Row& r = rows[i];
    if (!r.pass || !r.conv || r.err > 0.02) b.flagged = true;
    xs.push_back(b.cfg.alphas[i]);
    ys.push_back(r.lambda);
    bs.push_back(r.bound);
    t.rows.push_back({format_double(b.cfg.alphas[i]), format_double(r.lambda),
                      format_double(r.bound), format_double(r.oracle), format_double(r.rich),
                      format_double(r.err), r.pass ? "true" : "false", r.conv ? "true" : "false"});
  }
  b.emit("ab-annulus-sweep.csv", report::to_csv(t));
  if (b.opt.format == "csv+svg")
    b.emit("ab-annulus-sweep.svg",
           report::line_chart_svg({{"lambda_m", xs, ys}, {"lower bound", xs, bs}},
                                  "Flux threading an annulus", "alpha", "lambda", false));
  return b.flagged ? 1 : 0;
}

void profile_to_table(Bundle& b, const analysis::CompactnessProfile& prof) {
  report::Table t;
  t.header = {"n", "lambda_e", "lambda_m", "trial_bound", "exceptional",
              "resid_e", "resid_m", "ok", "note"};
  std::vector<double> xs, le, lm, tb;
  for (const auto& r : prof.rows) {
    if (!r.ok) b.flagged = true;
    t.rows.push_back({std::to_string(r.n), format_double(r.lambda_e), format_double(r.lambda_m),
                      format_double(r.trial_bound), r.exceptional ? "true" : "false",
                      format_double(r.resid_e), format_double(r.resid_m),
                      r.ok ? "true" : "false", r.note});
    xs.push_back(double(r.n));
    le.push_back(r.lambda_e);
    lm.push_back(r.lambda_m);
    tb.push_back(r.trial_bound);
  }
  b.emit(b.cfg.kind + ".csv", report::to_csv(t));
  if (b.opt.format == "csv+svg")
    b.emit(b.cfg.kind + ".svg",
           report::line_chart_svg({{"lambda_e", xs, le}, {"lambda_m", xs, lm}, {"trial bound", xs, tb}},
                                  "Ground states against coupling", "n", "lambda", true));
}

int run_counterexample(Bundle& b) {
  auto params = geometry::ThickSetParams::with_defaults(b.cfg.B, b.cfg.K);
  auto gens = geometry::build_generations(params);
  std::vector<geometry::SubfamilyPartition> parts;
  for (int k = 1; k <= b.cfg.K; ++k) parts.push_back(geometry::build_subfamilies(gens, k, params));
  auto sched = potential::schedule_mu(gens, parts, params, b.cfg.n_max);
  auto bump = potential::normalize_bump();

  analysis::ProfileParams pp;
  pp.n_list = b.cfg.n_list;
  pp.tol = b.cfg.tol;
  pp.exceptional_eps = b.cfg.exceptional_eps;
  pp.threads = b.opt.threads;
  pp.seed = b.cfg.seed;
  auto spec = grid::GridSpec::disk(Complex(0, 0), 1.0, grid_pitch(b.cfg.grid_sides[0]));
  auto prof = analysis::compactness_profile(gens, sched, bump, spec, pp);
  profile_to_table(b, prof);
  return b.flagged ? 1 : 0;
}

int run_pigeonhole(Bundle& b) {
  report::Table t;
  t.header = {"trial", "step", "found", "n", "max_dist", "n_collision", "max_dist_collision",
              "scanned", "guarantee"};
  for (int trial = 0; trial < b.cfg.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(b.cfg.seed, trial));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    analysis::FluxVector fv;
    for (int i = 0; i < b.cfg.M; ++i) {
      fv.fluxes.push_back(uni(rng));
      fv.region_ids.push_back(i);
    }
    for (auto step : b.cfg.steps) {
      try {
        auto r = analysis::pigeonhole_search(fv, b.cfg.N, b.cfg.epsilon, step);
        t.rows.push_back({std::to_string(trial), std::to_string(step), "true", std::to_string(r.n),
                          format_double(r.max_dist), std::to_string(r.n_collision),
                          format_double(r.max_dist_collision), std::to_string(r.candidates_scanned),
                          r.guarantee ? "true" : "false"});
      } catch (const Error& e) {
        if (e.tag() != "not-found") throw;
        t.rows.push_back({std::to_string(trial), std::to_string(step), "false", "", "", "", "", "",
                          "false"});
      }
    }
  }
  b.emit("pigeonhole-study.csv", report::to_csv(t));
  return b.flagged ? 1 : 0;
}

int run_inequalities(Bundle& b) {
  report::Table t;
  t.header = {"check", "trial", "lhs", "rhs", "ratio", "pass"};
  auto add = [&](const std::string& name, int trial, double lhs, double rhs, double ratio,
                 bool pass) {
    if (!pass) b.flagged = true;
    t.rows.push_back({name, std::to_string(trial), format_double(lhs), format_double(rhs),
                      format_double(ratio), pass ? "true" : "false"});
  };

  int side = b.cfg.grid_sides[0];
  double h = grid_pitch(side);
  auto spec = grid::GridSpec::disk(Complex(0, 0), 1.0, h);
  auto g = grid::build_grid(spec);
  auto bump = potential::normalize_bump();

  for (int trial = 0; trial < b.cfg.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(b.cfg.seed, 1000 + trial));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    potential::PotentialField f;
    f.bump = bump;
    for (int c = 0; c < 3; ++c) {
      double ang = kTwoPi * uni(rng);
      double rad = 0.5 * uni(rng);
      std::int64_t num = 1 + std::int64_t(uni(rng) * 6);
      f.charges.push_back({std::polar(rad, ang), 0.05 + 0.1 * uni(rng), Rational(num, 16)});
    }
    auto phases = discretize::link_phases(g, f);
    auto op = discretize::assemble_magnetic(g, phases, f, 3);
    std::vector<Complex> u(g.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : u) x = Complex(gauss(rng), gauss(rng));
    auto kr = analysis::kato_check(op, u);
    add("kato", trial, kr.lhs, kr.rhs, kr.rhs > 0 ? kr.lhs / kr.rhs : 0, kr.pass);
  }

  {
    double R = 1.0;
    auto u_disk = [R](Complex z) { return std::max(0.0, 1.0 - std::norm(z) / (R * R)); };
    auto g_disk = [R](Complex z) {
      double r = std::abs(z);
      return 4.0 * r * r / (R * R * R * R);
    };
    auto pr = analysis::poincare_disk_check(u_disk, g_disk, R);
    add("poincare-disk", 0, pr.lhs, pr.rhs, pr.slack, pr.pass);
    double r0 = 0.4;
    double lg = std::log(R / r0);
    auto u_ann = [&](Complex z) { return std::log(std::abs(z) / r0) / lg; };
    auto g_ann = [&](Complex z) {
      double r = std::abs(z);
      return 1.0 / (lg * lg * r * r);
    };
    auto ar = analysis::poincare_annulus_check(u_ann, g_ann, r0, R);
    add("poincare-annulus", 0, ar.lhs, ar.rhs, ar.slack, ar.pass);
  }

  {
    potential::PotentialField f;
    f.bump = bump;
    f.charges.push_back({Complex(0.1, -0.05), 0.3, Rational(1, 4)});
    auto a = [](Complex z) { return 1.0 + 0.3 * std::cos(2 * z.real()) * std::cos(z.imag()); };
    auto a_z = [](Complex z) {
      double ax = -0.6 * std::sin(2 * z.real()) * std::cos(z.imag());
      double ay = -0.3 * std::cos(2 * z.real()) * std::sin(z.imag());
      return 0.5 * Complex(ax, -ay);
    };
    auto lap_a = [](Complex z) { return -0.3 * 5.0 * std::cos(2 * z.real()) * std::cos(z.imag()); };
    auto u_fn = [](Complex z) {
      double c = std::max(0.0, 1.0 - std::norm(z));
      return std::polar(c * c * c, 2.0 * z.real() - z.imag());
    };
    double resid[2];
    for (int lvl = 0; lvl < 2; ++lvl) {
      auto gs = grid::GridSpec::disk(Complex(0, 0), 1.0, h / (lvl + 1));
      auto gg = grid::build_grid(gs);
      std::vector<Complex> u(gg.size());
      for (std::size_t i = 0; i < gg.size(); ++i) u[i] = u_fn(gg.nodes[i]);
      auto tr = analysis::twistor_residual(gg, f, 2, u, a, a_z, lap_a);
      resid[lvl] = tr.residual;
    }
    double ratio = resid[0] / std::max(resid[1], 1e-300);
    add("twistor-halving", 0, resid[0], resid[1], ratio, ratio >= 1.5 && ratio <= 3.0);
  }

  for (int trial = 0; trial < b.cfg.trials; ++trial) {
    std::mt19937_64 rng(mix_seed(b.cfg.seed, 2000 + trial));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double rho = 0.5 + uni(rng);
    double w = 0.1 + 0.8 * uni(rng);
    int m = 256;
    std::vector<double> hs(m);
    double c1 = uni(rng), p1 = kTwoPi * uni(rng);
    for (int i = 0; i < m; ++i) {
      double s = (i + 0.5) * rho / m;
      hs[i] = kTwoPi * w / rho + c1 * std::cos(kTwoPi * s / rho + p1);
    }
    auto wr = analysis::periodic_winding_check(hs, rho);
    add("periodic-winding", trial, wr.smin, wr.bound, wr.sharpness, wr.pass);
  }

  {
    potential::PotentialField f;
    f.bump = bump;
    f.charges.push_back({Complex(0.2, 0.1), 0.15, Rational(3, 8)});
    f.charges.push_back({Complex(-0.3, -0.2), 0.1, Rational(1, 2)});
    double wl = analysis::winding_line(f, Complex(0, 0), 0.8);
    double wf = analysis::winding_flux(f, Complex(0, 0), 0.8);
    add("winding-consistency", 0, wl, wf, std::abs(wl - wf), std::abs(wl - wf) <= 1e-6);
  }

  b.emit("inequality-suite.csv", report::to_csv(t));
  return b.flagged ? 1 : 0;
}

int run_smooth_exceptional(Bundle& b) {
  auto bump = potential::normalize_bump();
  potential::PotentialField f;
  f.bump = bump;
  for (const auto& c : b.cfg.charges)
    f.charges.push_back({Complex(c.x, c.y), c.rho, Rational(c.mu_num, c.mu_den)});
  for (const auto& p : b.cfg.fluxes) f.point_fluxes.push_back({Complex(p.x, p.y), p.alpha});

  report::Table side;
  side.header = {"item", "value", "detail", "pass"};

  if (b.cfg.mollify_delta > 0) {
    Complex z0 = f.charges[0].center;
    double direct = f.phi(z0);
    double averaged = potential::mollify(f, b.cfg.mollify_delta, z0);
    bool pass = averaged >= direct - 1e-12;
    if (!pass) b.flagged = true;
    side.rows.push_back({"mollify-mean", format_double(averaged), format_double(direct),
                         pass ? "true" : "false"});
  }

  {
    std::string note;
    double kappa_used = 0;
    bool ok = false;
    std::vector<double> tries;
    if (b.cfg.kappa > 0)
      tries = {b.cfg.kappa};
    else
      tries = {16, 24, 32, 48, 64};
    potential::PotentialField ext;
    for (double k : tries) {
      try {
        ext = potential::extend_to_psi(f, potential::CutoffWindow{}, k);
        kappa_used = k;
        ok = true;
        break;
      } catch (const Error& e) {
        note = e.tag();
      }
    }
    if (ok) {
      double near_rim = ext.phi(Complex(1.995, 0));
      side.rows.push_back({"extension", format_double(kappa_used), format_double(near_rim), "true"});
    } else {
      b.flagged = true;
      side.rows.push_back({"extension", "0", note, "false"});
    }
  }
  b.emit("smooth-exceptional-field.csv", report::to_csv(side));

  analysis::ProfileParams pp;
  pp.n_list = b.cfg.n_list;
  pp.tol = b.cfg.tol;
  pp.exceptional_eps = b.cfg.exceptional_eps;
  pp.threads = b.opt.threads;
  pp.seed = b.cfg.seed;
  auto spec = grid::GridSpec::disk(Complex(0, 0), 1.0, grid_pitch(b.cfg.grid_sides[0]));
  auto prof = analysis::compactness_profile(f, spec, pp);
  profile_to_table(b, prof);
  return b.flagged ? 1 : 0;
}

}  // namespace

int run(const config::ExperimentConfig& cfg, const RunOptions& opt) {
  Bundle b{cfg, opt, {}, {}, false};
  std::string dir = !opt.out_dir.empty() ? opt.out_dir : (!cfg.out_dir.empty() ? cfg.out_dir : "out");
  b.dir = dir;
  std::error_code ec;
  std::filesystem::create_directories(b.dir, ec);
  require(!ec, "io-failure", "cannot create output directory " + dir);

  int code = 0;
  if (cfg.kind == "disk-baseline")
    code = run_disk_baseline(b);
  else if (cfg.kind == "ab-annulus-sweep")
    code = run_ab_annulus(b);
  else if (cfg.kind == "counterexample-profile")
    code = run_counterexample(b);
  else if (cfg.kind == "pigeonhole-study")
    code = run_pigeonhole(b);
  else if (cfg.kind == "inequality-suite")
    code = run_inequalities(b);
  else if (cfg.kind == "smooth-exceptional")
    code = run_smooth_exceptional(b);
  else
    fail("config-invalid", "unknown experiment kind " + cfg.kind);
  b.manifest();
  return code;
}

}  // namespace abohm::runner
