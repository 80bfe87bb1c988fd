#include "abohm/discretize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>

#include "abohm/quadrature.hpp"

namespace abohm::discretize {

namespace {

double seg_dist(Complex a, Complex b, Complex c) {
  Complex d = b - a;
  double len2 = std::norm(d);
  if (len2 == 0) return std::abs(c - a);
  double t = std::clamp(((c - a).real() * d.real() + (c - a).imag() * d.imag()) / len2, 0.0, 1.0);
  return std::abs(c - (a + t * d));
}

// angle the segment a->b subtends at c; a segment never wraps past pi seen
// from a point off itself, so the principal branch is the right one
double subtended(Complex a, Complex b, Complex c) {
  return std::arg((b - c) * std::conj(a - c));
}

}  // namespace

double edge_angle_point(Complex a, Complex b, Complex center, double alpha) {
  double len = std::abs(b - a);
  require(seg_dist(a, b, center) > 1e-9 * len, "singular-eval",
          "point flux lies on a grid edge; offset the grid");
  return alpha * subtended(a, b, center);
}

double edge_angle_charge(Complex a, Complex b, Complex center, double rho, double mu,
                         const potential::BumpProfile& bump, bool* used_quad) {
  Complex d = b - a;
  double len2 = std::norm(d);

  // tangential integrand of the full charge field, smooth across the center
  auto charge_part = [&](double t) {
    Complex w = a + t * d - center;
    double r = std::abs(w);
    if (r >= rho) return mu / std::max(std::norm(w), 1e-300) * (w.real() * d.imag() - w.imag() * d.real());
    double f = r > 0 ? mu * bump.mass_fraction(r / rho) / (r * r) : 0.0;
    return f * (w.real() * d.imag() - w.imag() * d.real());
  };

  if (seg_dist(a, b, center) < 1e-6 * rho) {
    // edge essentially through the center: the point/remainder split below
    // degenerates, but the full integrand is smooth here
    if (used_quad) *used_quad = true;
    return gauss64().integrate(0.0, 1.0, charge_part);
  }

  double base = mu * subtended(a, b, center);

  // clip the segment against the support circle
  double pb = (a - center).real() * d.real() + (a - center).imag() * d.imag();
  double pc = std::norm(a - center) - rho * rho;
  double disc = pb * pb - len2 * pc;
  if (disc <= 0 || len2 == 0) return base;
  double s = std::sqrt(disc);
  double t0 = std::max(0.0, (-pb - s) / len2);
  double t1 = std::min(1.0, (-pb + s) / len2);
  if (t0 >= t1) return base;

  // inside the support the field differs from the point flux by a smooth
  // remainder vanishing C^1 at the rim
  auto remainder = [&](double t) {
    Complex w = a + t * d - center;
    double r2 = std::norm(w);
    double r = std::sqrt(r2);
    double f = mu * (bump.mass_fraction(r / rho) - 1.0) / r2;
    return f * (w.real() * d.imag() - w.imag() * d.real());
  };
  if (used_quad) *used_quad = true;
  return base + gauss64().integrate(t0, t1, remainder);
}

LinkPhaseField link_phases(const grid::Grid& g, const potential::PotentialField& field,
                           unsigned threads) {
  LinkPhaseField out;
  out.mesh = &g;
  out.angle_x.assign(g.size(), 0.0);
  out.angle_y.assign(g.size(), 0.0);
  std::atomic<bool> quad{false};

  auto edge_angle = [&](Complex a, Complex b) {
    if (field.extended)
      require(std::abs(a) <= 1.0 + 1e-9 && std::abs(b) <= 1.0 + 1e-9, "unsupported",
              "operators are assembled on the base domain of an extended field");
    double acc = 0.0;
    bool q = false;
    for (const auto& ch : field.charges)
      acc += edge_angle_charge(a, b, ch.center, ch.rho, ch.mu.value(), field.bump, &q);
    for (const auto& pf : field.point_fluxes) acc += edge_angle_point(a, b, pf.center, pf.alpha);
    if (q) quad.store(true, std::memory_order_relaxed);
    return acc;
  };

  parallel_for(g.size(), threads, [&](std::size_t idx) {
    auto [i, j] = g.node_ij[idx];
    Complex za = g.pos(i, j);
    if (g.at(i + 1, j) >= 0) out.angle_x[idx] = edge_angle(za, g.pos(i + 1, j));
    if (g.at(i, j + 1) >= 0) out.angle_y[idx] = edge_angle(za, g.pos(i, j + 1));
  });
  out.used_quadrature = quad.load();
  return out;
}

void HermitianOperator::apply(const std::vector<Complex>& x, std::vector<Complex>& y) const {
  y.assign(dim, Complex(0, 0));
  for (int i = 0; i < dim; ++i) y[i] = diag[i] * x[i];
  for (const auto& e : off) {
    y[e.a] += e.v * x[e.b];
    y[e.b] += std::conj(e.v) * x[e.a];
  }
}

double HermitianOperator::gershgorin_floor() const {
  std::vector<double> radius(dim, 0.0);
  for (const auto& e : off) {
    double m = std::abs(e.v);
    radius[e.a] += m;
    radius[e.b] += m;
  }
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) lo = std::min(lo, diag[i] - radius[i]);
  return lo;
}

namespace {

HermitianOperator assemble_impl(const grid::Grid& g, const LinkPhaseField* phases,
                                const potential::PotentialField& field, std::int64_t n) {
  HermitianOperator op;
  op.dim = int(g.size());
  op.h = g.h();
  op.magnetic = phases != nullptr && n != 0;
  double inv_h2 = 1.0 / (op.h * op.h);
  op.diag.resize(op.dim);
  for (int idx = 0; idx < op.dim; ++idx)
    op.diag[idx] = 4.0 * inv_h2 + double(n) * field.lap(g.nodes[idx]);
  op.off.reserve(2 * g.size());
  for (int idx = 0; idx < op.dim; ++idx) {
    auto [i, j] = g.node_ij[idx];
    int bx = g.at(i + 1, j);
    int by = g.at(i, j + 1);
    if (op.magnetic) {
      if (bx >= 0) op.off.push_back({idx, bx, -std::polar(inv_h2, -double(n) * phases->angle_x[idx])});
      if (by >= 0) op.off.push_back({idx, by, -std::polar(inv_h2, -double(n) * phases->angle_y[idx])});
    } else {
      if (bx >= 0) op.off.push_back({idx, bx, Complex(-inv_h2, 0.0)});
      if (by >= 0) op.off.push_back({idx, by, Complex(-inv_h2, 0.0)});
    }
  }
  return op;
}

}  // namespace

HermitianOperator assemble_magnetic(const grid::Grid& g, const LinkPhaseField& phases,
                                    const potential::PotentialField& field, std::int64_t n) {
  require(phases.mesh == &g || phases.angle_x.size() == g.size(), "dimension-mismatch",
          "link phases were built for a different grid");
  auto op = assemble_impl(g, &phases, field, n);
  op.tag = "magnetic n=" + std::to_string(n);
  return op;
}

HermitianOperator assemble_electric(const grid::Grid& g, const potential::PotentialField& field,
                                    std::int64_t n) {
  auto op = assemble_impl(g, nullptr, field, n);
  op.tag = "electric n=" + std::to_string(n);
  return op;
}

Tridiag assemble_radial(double r_in, double r_out, double nu, int m) {
  return assemble_radial_profile(r_in, r_out, m, [nu](double) { return nu; },
                                 [](double) { return 0.0; });
}

Tridiag assemble_radial_profile(double r_in, double r_out, int m,
                                const std::function<double(double)>& nu_of_r,
                                const std::function<double(double)>& V_of_r) {
  require(r_in >= 0.0 && r_in < r_out, "invalid-range", "need 0 <= r_in < r_out");
  require(m >= 8, "invalid-range", "need at least 8 cells");
  Tridiag t;
  t.dr = (r_out - r_in) / m;
  t.r.resize(m);
  t.diag.resize(m);
  t.off.resize(m - 1);
  for (int i = 0; i < m; ++i) t.r[i] = r_in + (i + 0.5) * t.dr;
  double inv2 = 1.0 / (t.dr * t.dr);
  for (int i = 0; i < m; ++i) {
    double s_lo = r_in + i * t.dr;
    double s_hi = r_in + (i + 1) * t.dr;
    // half-cell Dirichlet doubles the wall flux; the r = 0 interface carries
    // no flux at all (regularity instead of a boundary condition)
    double w_lo = (i == 0) ? (r_in > 0 ? 2.0 * s_lo : 0.0) : s_lo;
    double w_hi = (i == m - 1) ? 2.0 * s_hi : s_hi;
    double nu = nu_of_r(t.r[i]);
    t.diag[i] = (w_lo + w_hi) * inv2 / t.r[i] + nu * nu / (t.r[i] * t.r[i]) + V_of_r(t.r[i]);
    if (i + 1 < m) t.off[i] = -s_hi * inv2 / std::sqrt(t.r[i] * t.r[i + 1]);
  }
  return t;
}

namespace {

// eigenvalues of t strictly below x, by the LDL^T sign count. The pivot
// floor is scaled to the largest off-diagonal square so a breakdown pivot
// divides to something huge but finite; an absolute floor like 1e-300 sends
// the next pivot to infinity and the one after back to zero, and the count
// silently misses everything below a shift that hits a diagonal entry
// exactly (a constant-diagonal matrix makes that collision routine).
int sturm_count(const Tridiag& t, double x) {
  double b2max = 0.0;
  for (double e : t.off) b2max = std::max(b2max, e * e);
  const double safmin = std::numeric_limits<double>::min();
  const double pivmin = std::max(safmin, safmin * b2max);
  int count = 0;
  double d = t.diag[0] - x;
  if (d < 0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    if (std::abs(d) < pivmin) d = -pivmin;
    d = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / d;
    if (d < 0) ++count;
  }
  return count;
}

}  // namespace

double lowest_tridiag(const Tridiag& t, double tol) {
  require(!t.diag.empty(), "invalid-range", "empty tridiagonal");
  double lo = t.diag[0], hi = t.diag[0];
  for (std::size_t i = 0; i < t.diag.size(); ++i) {
    double r = 0;
    if (i > 0) r += std::abs(t.off[i - 1]);
    if (i + 1 < t.diag.size()) r += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(t, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Periodic1D assemble_periodic_1d(const std::vector<double>& h_samples, double rho) {
  require(h_samples.size() >= 2, "invalid-range", "need at least 2 samples");
  require(rho > 0, "invalid-range", "rho must be positive");
  Periodic1D d;
  d.ds = rho / double(h_samples.size());
  d.phase.resize(h_samples.size());
  for (std::size_t i = 0; i < h_samples.size(); ++i) d.phase[i] = h_samples[i] * d.ds;
  return d;
}

double smallest_singular_value(const Periodic1D& d) {
  int m = int(d.phase.size());
  require(m <= 4096, "too-large", "dense singular-value path is capped at 4096 samples");
  // D has -1/ds on the diagonal and e^{i phase_i}/ds one step ahead
  // (cyclically); form D^H D and take the smallest eigenvalue
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, m);
  double inv2 = 1.0 / (d.ds * d.ds);
  for (int j = 0; j < m; ++j) {
    M(j, j) = 2.0 * inv2;
    int k = (j + 1) % m;
    Complex v = -std::polar(inv2, d.phase[j]);
    M(j, k) += Complex(v.real(), v.imag());
    M(k, j) += Complex(v.real(), -v.imag());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

void write_operator(const HermitianOperator& op, const std::string& path,
                    const std::string& tag) {
  std::ofstream f(path);
  require(bool(f), "io-failure", "cannot open " + path);
  f.precision(17);
  for (int i = 0; i < op.dim; ++i) f << i << ' ' << i << ' ' << op.diag[i] << " 0\n";
  for (const auto& e : op.off) f << e.a << ' ' << e.b << ' ' << e.v.real() << ' ' << e.v.imag() << "\n";
  require(bool(f), "io-failure", "short write to " + path);
  std::ofstream meta(path + ".meta");
  require(bool(meta), "io-failure", "cannot open " + path + ".meta");
  meta << "dim " << op.dim << "\nh " << op.h << "\nmagnetic " << (op.magnetic ? 1 : 0) << "\nnnz "
       << (op.dim + op.off.size()) << "\ntag " << tag << "\n";
}

}  // namespace abohm::discretize
