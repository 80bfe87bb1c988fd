#include "abohm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "abohm/eigensolve.hpp"
#include "abohm/quadrature.hpp"

namespace abohm::analysis {

double dist_to_integers(double x) {
  require(std::isfinite(x), "invalid-range", "distance to integers of a non-finite value");
  return std::abs(x - std::round(x));
}

double winding_line(const potential::PotentialField& field, Complex center, double R, int m) {
  require(m >= 16, "invalid-range", "need at least 16 quadrature points");
  require(R > 0, "invalid-range", "circle radius must be positive");
  double acc = 0;
  for (int j = 0; j < m; ++j) {
    double th = kTwoPi * (j + 0.5) / m;
    Complex z = center + std::polar(R, th);
    potential::FieldEval e;
    try {
      e = field.eval(z);
    } catch (const Error& err) {
      fail("field-singular-on-circle", err.what());
    }
    require(std::abs(e.lap) <= 1e-10, "field-singular-on-circle",
            "field curvature is nonzero on the circle");
    // A . dl for the step dz = i z' dtheta
    Complex dz = Complex(0, 1) * std::polar(R, th) * (kTwoPi / m);
    acc += std::imag(std::conj(e.grad) * dz);
  }
  return acc / kTwoPi;
}

double winding_flux(const potential::PotentialField& field, Complex center, double R) {
  if (field.extended)
    require(std::abs(center) + R <= 1.0 + 1e-9, "outside-domain",
            "flux closed forms cover the base disk only");
  return field.flux_in_disk(center, R);
}

KatoReport kato_check(const discretize::HermitianOperator& op, const std::vector<Complex>& u) {
  require(int(u.size()) == op.dim, "dimension-mismatch", "vector does not match operator");
  double inv_h2 = 1.0 / (op.h * op.h);
  std::vector<int> deg(op.dim, 0);
  KatoReport rep;
  for (const auto& e : op.off) {
    ++deg[e.a];
    ++deg[e.b];
    Complex U = -e.v * (op.h * op.h);  // unit link phase
    double both = std::norm(u[e.a] - U * u[e.b]) * inv_h2;
    double flat = std::abs(u[e.a]) - std::abs(u[e.b]);
    rep.rhs += both;
    rep.lhs += flat * flat * inv_h2;
  }
  for (int i = 0; i < op.dim; ++i) {
    double wall = (4 - deg[i]) * std::norm(u[i]) * inv_h2;
    rep.lhs += wall;
    rep.rhs += wall;
  }
  rep.pass = rep.lhs <= rep.rhs + 1e-9 * rep.rhs;
  return rep;
}

namespace {

PoincareReport poincare_impl(const std::function<double(Complex)>& abs_u,
                             const std::function<double(Complex)>& grad_abs_sq, double r_lo,
                             double r_hi, double ring_r, double bulk_weight,
                             double ring_weight, int m_r, int m_th) {
  require(m_r >= 8 && m_th >= 8, "invalid-range", "too few quadrature points");
  double dr = (r_hi - r_lo) / m_r;
  double dth = kTwoPi / m_th;
  double l2 = 0, grad2 = 0;
  for (int i = 0; i < m_r; ++i) {
    double r = r_lo + (i + 0.5) * dr;
    for (int j = 0; j < m_th; ++j) {
      Complex z = std::polar(r, (j + 0.5) * dth);
      double a = abs_u(z);
      l2 += a * a * r;
      grad2 += grad_abs_sq(z) * r;
    }
  }
  l2 *= dr * dth;
  grad2 *= dr * dth;
  double ring = 0;
  for (int j = 0; j < m_th; ++j) ring += std::pow(abs_u(std::polar(ring_r, j * dth)), 2);
  ring *= dth;

  PoincareReport rep;
  rep.lhs = l2;
  rep.rhs = bulk_weight * grad2 + ring_weight * ring;
  rep.slack = rep.rhs / std::max(rep.lhs, 1e-300);
  rep.pass = rep.lhs <= rep.rhs * (1 + 1e-6) + 1e-9;
  return rep;
}

}  // namespace

PoincareReport poincare_disk_check(const std::function<double(Complex)>& abs_u,
                                   const std::function<double(Complex)>& grad_abs_sq,
                                   double R, int m_r, int m_th) {
  require(R > 0, "invalid-range", "radius must be positive");
  return poincare_impl(abs_u, grad_abs_sq, 0.0, R, R, 2.0 * R * R, R * R, m_r, m_th);
}

PoincareReport poincare_annulus_check(const std::function<double(Complex)>& abs_u,
                                      const std::function<double(Complex)>& grad_abs_sq,
                                      double r, double R, int m_r, int m_th) {
  require(0 < r && r < R, "invalid-range", "need 0 < r < R");
  double w = R * R - r * r;
  return poincare_impl(abs_u, grad_abs_sq, r, R, r, w * std::log(R / r), w, m_r, m_th);
}

TwistorReport twistor_residual(const grid::Grid& g, const potential::PotentialField& field,
                               std::int64_t n, const std::vector<Complex>& u,
                               const std::function<double(Complex)>& a,
                               const std::function<Complex(Complex)>& a_z,
                               const std::function<double(Complex)>& lap_a) {
  require(u.size() == g.size(), "dimension-mismatch", "vector does not match grid");
  double h = g.h();
  double cell = h * h;
  double lhs = 0, rhs = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    auto [i, j] = g.node_ij[idx];
    int bx = g.at(i + 1, j);
    int by = g.at(i, j + 1);
    if (bx < 0 || by < 0) continue;
    Complex z = g.nodes[idx];
    Complex dx = (u[bx] - u[idx]) / h;
    Complex dy = (u[by] - u[idx]) / h;
    Complex du_z = 0.5 * (dx - Complex(0, 1) * dy);
    Complex du_zb = 0.5 * (dx + Complex(0, 1) * dy);
    auto f = field.eval(z);
    Complex psi_z = 0.5 * double(n) * std::conj(f.grad);
    Complex Lu = -du_z + psi_z * u[idx];
    Complex Lbu = du_zb + std::conj(psi_z) * u[idx];
    double av = a(z);
    double curv = 2.0 * av * (double(n) * f.lap / 4.0) - lap_a(z) / 4.0;
    lhs += av * std::norm(Lu) * cell;
    rhs += (curv * std::norm(u[idx]) + av * std::norm(Lbu)) * cell;
    rhs += 2.0 * std::real(u[idx] * a_z(z) * std::conj(Lu)) * cell;
  }
  TwistorReport rep;
  rep.residual = std::abs(lhs - rhs);
  rep.scale = std::abs(lhs);
  return rep;
}

ABReport ab_annulus_check(double r_in, double r_out, double alpha, double h,
                          double defect_tol, double solver_tol, std::uint64_t seed) {
  require(0 < r_in && r_in < r_out, "invalid-range", "need 0 < r_in < r_out");
  auto spec = grid::GridSpec::annulus(Complex(0, 0), r_in, r_out, h);
  auto g = grid::build_grid(spec);
  potential::PotentialField field;
  field.bump = potential::normalize_bump();
  field.point_fluxes.push_back({Complex(0, 0), alpha});
  discretize::LinkPhaseField phases;
  try {
    phases = discretize::link_phases(g, field);
  } catch (const Error& err) {
    fail("grid-singularity", err.what());
  }
  auto op = discretize::assemble_magnetic(g, phases, field, 1);
  auto r = eigensolve::lowest_eigenpair(op, solver_tol, 1600, seed);

  ABReport rep;
  rep.lambda = r.lambda;
  rep.converged = r.converged;
  rep.residual = r.residual;
  double star = dist_to_integers(alpha);
  rep.bound = star * star / (r_out * r_out);
  double best = std::numeric_limits<double>::infinity();
  for (int k = -8; k <= 8; ++k) {
    auto t = discretize::assemble_radial(r_in, r_out, std::abs(double(k) - alpha), 8192);
    best = std::min(best, discretize::lowest_tridiag(t));
  }
  rep.oracle = best;
  rep.pass = r.converged && rep.lambda >= rep.bound - defect_tol;
  return rep;
}

WindingGapReport periodic_winding_check(const std::vector<double>& h_samples, double rho) {
  auto d = discretize::assemble_periodic_1d(h_samples, rho);
  WindingGapReport rep;
  rep.smin = discretize::smallest_singular_value(d);
  double total = 0;
  for (double p : d.phase) total += p;
  rep.winding = total / kTwoPi;
  // integer winding closes the gap exactly; distances at the rounding level
  // of the phase sum are noise, not a reportable gap
  double star = dist_to_integers(rep.winding);
  if (star <= 64.0 * std::numeric_limits<double>::epsilon() *
                  std::max(1.0, std::abs(rep.winding)))
    star = 0.0;
  rep.bound = 4.0 * star / rho;
  rep.sharpness = rep.bound > 0 ? rep.smin / rep.bound : 0.0;
  rep.pass = rep.smin >= rep.bound * (1 - 1e-3);
  return rep;
}

ComponentLabeling label_components(const std::vector<double>& lap_cells, int nx, int ny,
                                   double h, double threshold) {
  require(threshold >= 0, "invalid-range", "threshold must be nonnegative");
  require(int(lap_cells.size()) == nx * ny, "dimension-mismatch", "cell count mismatch");
  ComponentLabeling lab;
  lab.nx = nx;
  lab.ny = ny;
  lab.labels.assign(lap_cells.size(), -1);
  std::vector<int> stack;
  for (int start = 0; start < nx * ny; ++start) {
    if (lab.labels[start] >= 0 || !(lap_cells[start] > 0)) continue;
    int id = int(lab.components.size());
    Component comp;
    stack.push_back(start);
    lab.labels[start] = id;
    long cells = 0;
    double sum = 0, peak = 0;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      ++cells;
      sum += lap_cells[c];
      peak = std::max(peak, lap_cells[c]);
      int ci = c % nx, cj = c / nx;
      const int di[4] = {1, -1, 0, 0};
      const int dj[4] = {0, 0, 1, -1};
      for (int t = 0; t < 4; ++t) {
        int ni = ci + di[t], nj = cj + dj[t];
        if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
        int nc = nj * nx + ni;
        if (lab.labels[nc] >= 0 || !(lap_cells[nc] > 0)) continue;
        lab.labels[nc] = id;
        stack.push_back(nc);
      }
    }
    comp.area = double(cells) * h * h;
    comp.max_lap = peak;
    comp.flux = sum * h * h / kTwoPi;
    comp.dangerous = peak >= threshold;
    if (comp.dangerous) ++lab.dangerous_count;
    lab.components.push_back(comp);
  }
  return lab;
}

FluxVector dangerous_fluxes(const ComponentLabeling& lab) {
  FluxVector fv;
  for (std::size_t i = 0; i < lab.components.size(); ++i) {
    if (!lab.components[i].dangerous) continue;
    fv.fluxes.push_back(lab.components[i].flux);
    fv.region_ids.push_back(int(i));
  }
  return fv;
}

PigeonholeResult pigeonhole_search(const FluxVector& fluxes, std::int64_t N, double epsilon,
                                   std::int64_t step) {
  require(step >= 1, "invalid-range", "step must be at least 1");
  require(N >= 2 * step, "invalid-range", "need N >= 2 step");
  require(epsilon > 0 && epsilon < 0.5, "invalid-range", "epsilon must lie in (0, 1/2)");
  std::size_t M = fluxes.fluxes.size();
  require(M >= 1, "invalid-range", "empty flux vector");

  PigeonholeResult res;
  res.step = step;
  long double cubes = std::pow((long double)(1.0 + std::ceil(1.0 / epsilon)), (long double)M);
  res.guarantee = cubes < (long double)N / (2.0L * step);

  auto max_dist = [&](std::int64_t n) {
    double d = 0;
    for (double w : fluxes.fluxes) d = std::max(d, dist_to_integers(double(n) * w));
    return d;
  };

  std::map<std::vector<std::int64_t>, std::int64_t> first_in_cube;
  bool scan_found = false;
  for (std::int64_t n = step; n <= N; n += step) {
    ++res.candidates_scanned;
    if (!scan_found) {
      double d = max_dist(n);
      if (d <= epsilon) {
        res.n = n;
        res.max_dist = d;
        scan_found = true;
      }
    }
    if (res.n_collision == 0) {
      std::vector<std::int64_t> key(M);
      for (std::size_t i = 0; i < M; ++i) {
        double f = double(n) * fluxes.fluxes[i];
        f -= std::floor(f);
        key[i] = std::int64_t(std::floor(f / epsilon));
      }
      auto [it, fresh] = first_in_cube.try_emplace(std::move(key), n);
      if (!fresh) {
        res.n_collision = n - it->second;
        res.max_dist_collision = max_dist(res.n_collision);
      }
    }
    if (scan_found && res.n_collision != 0) break;
  }
  if (!scan_found) {
    if (res.guarantee)
      fail("guarantee-violated",
           "counting guarantees a multiplier up to " + std::to_string(N) + " but none was found");
    fail("not-found", "no multiplier up to " + std::to_string(N) +
                          " brings all fluxes within epsilon; the counting bound does not apply");
  }
  return res;
}

GaugeCorrection gauge_correction(const FluxVector& fluxes, const std::vector<Region>& regions,
                                 double epsilon_target, double h) {
  require(fluxes.fluxes.size() == regions.size(), "dimension-mismatch",
          "one region per flux entry");
  GaugeCorrection out;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    double f = fluxes.fluxes[i];
    double defect = f - std::round(f);
    require(std::abs(defect) <= epsilon_target + 1e-12, "invalid-range",
            "flux defect exceeds the target");
    require(regions[i].radius >= 2 * h, "region-too-small",
            "no sub-disk of radius 2h fits region " + std::to_string(i));
    out.total_l1 += kTwoPi * std::abs(defect);
    if (std::abs(defect) < 1e-15) continue;
    out.charges.push_back({regions[i].center, std::max(2 * h, regions[i].radius / 2), defect});
  }
  return out;
}

discretize::HermitianOperator gauge_corrected_operator(
    const grid::Grid& g, const discretize::LinkPhaseField& base,
    const potential::PotentialField& field, std::int64_t n,
    const std::vector<CounterCharge>& correction, const potential::BumpProfile& bump) {
  require(base.angle_x.size() == g.size(), "dimension-mismatch",
          "link phases were built for a different grid");
  discretize::HermitianOperator op;
  op.dim = int(g.size());
  op.h = g.h();
  op.magnetic = true;
  op.tag = "gauge-corrected n=" + std::to_string(n);
  double inv_h2 = 1.0 / (op.h * op.h);

  auto counter_lap = [&](Complex z) {
    double acc = 0;
    for (const auto& c : correction) {
      double t = std::abs(z - c.center) / c.radius;
      if (t < 1.0) acc += kTwoPi * c.flux * bump.density(t) / (c.radius * c.radius);
    }
    return acc;
  };
  auto counter_angle = [&](Complex a, Complex b) {
    double acc = 0;
    for (const auto& c : correction)
      acc += discretize::edge_angle_charge(a, b, c.center, c.radius, c.flux, bump, nullptr);
    return acc;
  };

  op.diag.resize(op.dim);
  for (int idx = 0; idx < op.dim; ++idx)
    op.diag[idx] =
        4.0 * inv_h2 + double(n) * field.lap(g.nodes[idx]) - counter_lap(g.nodes[idx]);
  for (int idx = 0; idx < op.dim; ++idx) {
    auto [i, j] = g.node_ij[idx];
    Complex za = g.pos(i, j);
    int bx = g.at(i + 1, j);
    int by = g.at(i, j + 1);
    if (bx >= 0) {
      double ang = double(n) * base.angle_x[idx] - counter_angle(za, g.pos(i + 1, j));
      op.off.push_back({idx, bx, -std::polar(inv_h2, -ang)});
    }
    if (by >= 0) {
      double ang = double(n) * base.angle_y[idx] - counter_angle(za, g.pos(i, j + 1));
      op.off.push_back({idx, by, -std::polar(inv_h2, -ang)});
    }
  }
  return op;
}

GaugeReport gauge_invariance_check(const discretize::HermitianOperator& op,
                                   const std::vector<double>& theta, double tol,
                                   std::uint64_t seed) {
  require(int(theta.size()) == op.dim, "dimension-mismatch", "one angle per node");
  discretize::HermitianOperator conj = op;
  for (auto& e : conj.off) e.v *= std::polar(1.0, theta[e.a] - theta[e.b]);
  auto r0 = eigensolve::lowest_eigenpair(op, tol, 1600, seed);
  auto r1 = eigensolve::lowest_eigenpair(conj, tol, 1600, seed);
  GaugeReport rep;
  rep.lambda = r0.lambda;
  rep.lambda_conjugated = r1.lambda;
  rep.deviation = std::abs(r0.lambda - r1.lambda);
  rep.pass = r0.converged && r1.converged &&
             rep.deviation <= 1e-10 * std::max(1.0, std::abs(r0.lambda));
  return rep;
}

namespace {

// exact distance of n*mu to the integers without int64 overflow
double rational_dist(const Rational& mu, std::int64_t n) {
  __int128 r = (__int128)mu.num * n % mu.den;
  if (r < 0) r += mu.den;
  __int128 d = std::min(r, (__int128)mu.den - r);
  return double((long double)d / (long double)mu.den);
}

CompactnessProfile profile_impl(const potential::PotentialField& field,
                                const std::vector<std::vector<Complex>>& trials,
                                const std::function<bool(std::int64_t)>& exceptional,
                                const grid::Grid& g, const discretize::LinkPhaseField& phases,
                                const ProfileParams& pp) {
  for (std::size_t i = 1; i < pp.n_list.size(); ++i)
    require(pp.n_list[i - 1] <= pp.n_list[i], "invalid-range", "n_list must be ascending");

  CompactnessProfile prof;
  prof.h = g.h();
  prof.interior_nodes = int(g.size());
  prof.rows.resize(pp.n_list.size());

  parallel_for(pp.n_list.size(), pp.threads, [&](std::size_t row) {
    std::int64_t n = pp.n_list[row];
    ProfileRow& r = prof.rows[row];
    r.n = n;
    try {
      auto op_e = discretize::assemble_electric(g, field, n);
      auto re = eigensolve::lowest_eigenpair(op_e, pp.tol, pp.max_iter, mix_seed(pp.seed, 2 * row));
      r.lambda_e = re.lambda;
      r.resid_e = re.residual;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& t : trials) best = std::min(best, eigensolve::rayleigh_quotient(op_e, t));
      r.trial_bound = best;
      auto op_m = discretize::assemble_magnetic(g, phases, field, n);
      auto rm =
          eigensolve::lowest_eigenpair(op_m, pp.tol, pp.max_iter, mix_seed(pp.seed, 2 * row + 1));
      r.lambda_m = rm.lambda;
      r.resid_m = rm.residual;
      r.exceptional = exceptional(n);
      r.ok = re.converged && rm.converged;
      if (!r.ok) r.note = "not-converged";
    } catch (const Error& err) {
      r.ok = false;
      r.note = err.tag();
    }
  });
  return prof;
}

}  // namespace

double schedule_max_dist(const potential::MuSchedule& sched, std::int64_t n) {
  double d = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& gm : sched.gens) {
    for (const auto& mu : gm.mu) {
      if (mu.num == 0) continue;
      auto key = std::make_pair(mu.num, mu.den);
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      d = std::max(d, rational_dist(mu, n));
    }
  }
  return d;
}

CompactnessProfile compactness_profile(const std::vector<geometry::Generation>& gens,
                                       const potential::MuSchedule& sched,
                                       const potential::BumpProfile& bump,
                                       const grid::GridSpec& gspec, const ProfileParams& pp) {
  auto field = potential::assemble_phi(gens, sched, bump, int(gens.size()));
  auto g = grid::build_grid(gspec);
  auto phases = discretize::link_phases(g, field, pp.threads);
  std::vector<std::vector<Complex>> trials;
  for (int k = 0; k <= int(gens.size()); ++k) {
    auto t = potential::trial_F(gens, k, gspec);
    std::vector<Complex> v(t.samples.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.samples[i];
    trials.push_back(std::move(v));
  }
  auto exceptional = [&](std::int64_t n) { return schedule_max_dist(sched, n) <= pp.exceptional_eps; };
  return profile_impl(field, trials, exceptional, g, phases, pp);
}

CompactnessProfile compactness_profile(const potential::PotentialField& field,
                                       const grid::GridSpec& gspec, const ProfileParams& pp) {
  auto g = grid::build_grid(gspec);
  auto phases = discretize::link_phases(g, field, pp.threads);
  std::vector<Complex> cap(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    cap[i] = std::max(0.0, 1.0 - std::norm(g.nodes[i]));
  std::vector<std::vector<Complex>> trials{std::move(cap)};
  auto exceptional = [&](std::int64_t n) {
    double d = 0;
    for (const auto& ch : field.charges) d = std::max(d, rational_dist(ch.mu, n));
    for (const auto& pf : field.point_fluxes)
      d = std::max(d, dist_to_integers(double(n) * pf.alpha));
    return d <= pp.exceptional_eps;
  };
  return profile_impl(field, trials, exceptional, g, phases, pp);
}

FourierReport fourier_mode_check(const std::vector<Complex>& u, int m_r, int m_theta,
                                 double r_in, double r_out,
                                 const std::function<double(double)>& dpsi_dr,
                                 std::int64_t n, int mode_lo, int mode_hi) {
  require(m_r >= 4 && m_theta >= 8, "invalid-range", "grid too small");
  require(int(u.size()) == m_r * m_theta, "dimension-mismatch", "sample count mismatch");
  require(0 < r_in && r_in < r_out, "invalid-range", "need 0 < r_in < r_out");
  double dr = (r_out - r_in) / m_r;
  double dth = kTwoPi / m_theta;

  // angular transform per radius, mode index signed
  std::vector<std::vector<Complex>> hat(m_r, std::vector<Complex>(m_theta));
  for (int i = 0; i < m_r; ++i)
    for (int km = 0; km < m_theta; ++km) {
      Complex acc(0, 0);
      for (int j = 0; j < m_theta; ++j)
        acc += u[i * m_theta + j] * std::polar(1.0, -km * j * dth);
      hat[i][km] = acc / double(m_theta);
    }
  auto signed_mode = [&](int km) { return km <= m_theta / 2 ? km : km - m_theta; };

  double total = 0, modes = 0, outside = 0;
  for (int i = 0; i < m_r; ++i) {
    double w = (r_in + (i + 0.5) * dr) * dr;
    double row = 0;
    for (int j = 0; j < m_theta; ++j) row += std::norm(u[i * m_theta + j]);
    total += row * w * dth;
    for (int km = 0; km < m_theta; ++km) {
      double e = std::norm(hat[i][km]) * w * kTwoPi;
      modes += e;
      int k = signed_mode(km);
      if (k < mode_lo || k > mode_hi) outside += e;
    }
  }
  FourierReport rep;
  rep.parseval_residual = std::abs(total - modes) / std::max(total, 1e-300);
  require(outside <= 1e-8 * std::max(total, 1e-300), "band-limit-violated",
          "energy outside the mode window");

  // direct two-sided derivative form on the polar grid, forward differences
  for (int i = 0; i + 1 < m_r; ++i) {
    double r = r_in + (i + 0.5) * dr;
    double w = r * dr * dth;
    double np = double(n) * dpsi_dr(r);
    for (int j = 0; j < m_theta; ++j) {
      Complex uc = u[i * m_theta + j];
      Complex drad = (u[(i + 1) * m_theta + j] - uc) / dr;
      Complex dang = (u[i * m_theta + (j + 1) % m_theta] - uc) / dth;
      Complex core_m = -drad + Complex(0, 1) * dang / r + np * uc;
      Complex core_p = drad + Complex(0, 1) * dang / r + np * uc;
      rep.direct_form += 0.25 * (std::norm(core_m) + std::norm(core_p)) * w;
    }
  }

  // per-mode radial forms with the exact angular symbol
  for (int km = 0; km < m_theta; ++km) {
    int k = signed_mode(km);
    for (int i = 0; i + 1 < m_r; ++i) {
      double r = r_in + (i + 0.5) * dr;
      double w = r * dr * kTwoPi;
      double np = double(n) * dpsi_dr(r);
      Complex v = hat[i][km];
      Complex dv = (hat[i + 1][km] - v) / dr;
      Complex m_side = -dv - double(k) * v / r + np * v;
      Complex p_side = dv - double(k) * v / r + np * v;
      rep.mode_form += 0.25 * (std::norm(m_side) + std::norm(p_side)) * w;
    }
  }
  rep.form_residual = std::abs(rep.direct_form - rep.mode_form) / std::max(rep.direct_form, 1e-300);
  return rep;
}

}  // namespace abohm::analysis
