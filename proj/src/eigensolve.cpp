#include "abohm/eigensolve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace abohm::eigensolve {

namespace {

double norm2(const std::vector<Complex>& v) {
  double s = 0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

Complex dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s(0, 0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// CG on (A - sigma I) x = b. Returns false when a search direction has
// nonpositive curvature, i.e. the shift is not below the spectrum.
bool shifted_cg(const discretize::HermitianOperator& op, double sigma,
                const std::vector<Complex>& b, std::vector<Complex>& x, double rel_tol,
                int max_steps) {
  int n = op.dim;
  x.assign(n, Complex(0, 0));
  std::vector<Complex> r = b, p = b, Ap(n);
  double rr = 0;
  for (const auto& v : r) rr += std::norm(v);
  double stop = rel_tol * rel_tol * rr;
  if (rr == 0) return true;
  for (int it = 0; it < max_steps; ++it) {
    op.apply(p, Ap);
    for (int i = 0; i < n; ++i) Ap[i] -= sigma * p[i];
    double pAp = dot(p, Ap).real();
    if (pAp <= 0) return false;
    double alpha = rr / pAp;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    double rr_new = 0;
    for (const auto& v : r) rr_new += std::norm(v);
    if (rr_new <= stop) return true;
    double beta = rr_new / rr;
    rr = rr_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return true;  // ran out of steps; partial solve still advances the outer iteration
}

}  // namespace

double rayleigh_quotient(const discretize::HermitianOperator& op,
                         const std::vector<Complex>& v) {
  require(int(v.size()) == op.dim, "dimension-mismatch", "vector does not match operator");
  double nn = 0;
  for (const auto& x : v) nn += std::norm(x);
  require(nn > 0, "zero-vector", "Rayleigh quotient of the zero vector");
  std::vector<Complex> w(op.dim);
  op.apply(v, w);
  return dot(v, w).real() / nn;
}

EigenResult lowest_eigenpair(const discretize::HermitianOperator& op, double tol, int max_iter,
                             std::uint64_t seed) {
  EigenResult res;
  int n = op.dim;
  require(n >= 1, "invalid-range", "empty operator");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<Complex> v(n);
  for (auto& x : v) x = Complex(uni(rng), uni(rng));
  double nv = norm2(v);
  for (auto& x : v) x /= nv;

  double floor = op.gershgorin_floor();
  double sigma = floor - 1.0;
  bool reshifted = false;
  double margin = 0;

  // one apply already rounds at the scale of the operator norm, so the
  // convergence test carries an additive allowance there; without it a tight
  // tol demands residuals no floating-point iterate can produce
  std::vector<double> rad(n, 0.0);
  for (const auto& e : op.off) {
    rad[e.a] += std::abs(e.v);
    rad[e.b] += std::abs(e.v);
  }
  double opnorm = 0.0;
  for (int i = 0; i < n; ++i) opnorm = std::max(opnorm, std::abs(op.diag[i]) + rad[i]);
  double resid_floor = 8.0 * std::numeric_limits<double>::epsilon() * opnorm;

  std::vector<Complex> w(n), Av(n);
  int cg_cap = std::max(200, 6 * int(std::sqrt(double(n))) + 100);

  double theta = rayleigh_quotient(op, v);
  op.apply(v, Av);
  double resid = 0;
  for (int i = 0; i < n; ++i) resid += std::norm(Av[i] - theta * v[i]);
  resid = std::sqrt(resid);

  for (int it = 1; it <= max_iter; ++it) {
    // the inner solve rides a factor below the outer error: a fixed loose
    // tolerance re-injects error at its own level and stalls the iteration
    // right above it
    double rel = resid / std::max(1.0, std::abs(theta));
    double inner = std::clamp(0.02 * rel, 1e-13, 1e-2);
    if (!shifted_cg(op, sigma, v, w, inner, cg_cap)) {
      // shift crept above the bottom of the spectrum; back off
      margin = margin > 0 ? 4.0 * margin : 1e-3 * std::max(1.0, std::abs(theta));
      sigma = theta - margin;
      if (sigma < floor - 1.0) sigma = floor - 1.0;
      continue;
    }
    double nw = norm2(w);
    if (!(nw > 0) || !std::isfinite(nw)) break;
    for (int i = 0; i < n; ++i) v[i] = w[i] / nw;

    op.apply(v, Av);
    theta = dot(v, Av).real();
    resid = 0;
    for (int i = 0; i < n; ++i) resid += std::norm(Av[i] - theta * v[i]);
    resid = std::sqrt(resid);

    res.lambda = theta;
    res.residual = resid;
    res.iterations = it;
    if (resid <= tol * std::max(1.0, std::abs(theta)) + resid_floor) {
      res.converged = true;
      break;
    }
    if (!reshifted && resid < 1e-3 * std::max(1.0, std::abs(theta))) {
      margin = 10.0 * resid;
      sigma = theta - margin;
      reshifted = true;
    }
  }
  res.vector = std::move(v);
  return res;
}

std::vector<double> dense_spectrum(const discretize::HermitianOperator& op) {
  require(op.dim <= 2000, "too-large", "dense path is capped at dimension 2000");
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(op.dim, op.dim);
  for (int i = 0; i < op.dim; ++i) M(i, i) = op.diag[i];
  for (const auto& e : op.off) {
    M(e.a, e.b) += e.v;
    M(e.b, e.a) += std::conj(e.v);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  std::vector<double> out(op.dim);
  for (int i = 0; i < op.dim; ++i) out[i] = es.eigenvalues()(i);
  return out;
}

}  // namespace abohm::eigensolve
