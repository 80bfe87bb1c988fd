#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "abohm/eigensolve.hpp"
#include "abohm/grid.hpp"
#include "abohm/potential.hpp"

using namespace abohm;
using namespace abohm::eigensolve;
using discretize::HermitianOperator;

static potential::BumpProfile bump = potential::normalize_bump();

namespace {

HermitianOperator path_laplacian(int m, double h) {
  HermitianOperator op;
  op.dim = m;
  op.h = h;
  op.diag.assign(m, 2.0 / (h * h));
  for (int i = 0; i + 1 < m; ++i) op.off.push_back({i, i + 1, Complex(-1.0 / (h * h), 0)});
  return op;
}

}  // namespace

TEST_CASE("interval Laplacian: discrete eigenvalue to machine precision") {
  int m = 200;
  double h = 1.0 / (m + 1);
  auto op = path_laplacian(m, h);
  auto r = lowest_eigenpair(op, 1e-12, 600, 3);
  REQUIRE(r.converged);
  double exact = 4.0 * std::pow(std::sin(kPi * h / 2.0), 2) / (h * h);
  CHECK(r.lambda == doctest::Approx(exact).epsilon(1e-11));
  CHECK(exact == doctest::Approx(kPi * kPi).epsilon(1e-3));  // and it is close to pi^2
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("diagonal matrix: picks the smallest entry and its axis") {
  HermitianOperator op;
  op.dim = 3;
  op.h = 1;
  op.diag = {3.0, 1.0, 2.0};
  auto r = lowest_eigenpair(op, 1e-12, 200, 5);
  REQUIRE(r.converged);
  CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.vector[1]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(r.vector[0]) < 1e-6);
  CHECK(std::abs(r.vector[2]) < 1e-6);
}

TEST_CASE("one dimensional operator degenerates gracefully") {
  HermitianOperator op;
  op.dim = 1;
  op.h = 1;
  op.diag = {4.0};
  auto r = lowest_eigenpair(op);
  REQUIRE(r.converged);
  CHECK(r.lambda == doctest::Approx(4.0));
}

TEST_CASE("disk ground state converges at second order") {
  potential::PotentialField f;
  f.bump = bump;
  double l[2];
  double hs[2] = {2.0 / 64.0, 2.0 / 128.0};
  for (int i = 0; i < 2; ++i) {
    auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, hs[i]));
    auto op = discretize::assemble_electric(g, f, 0);
    auto r = lowest_eigenpair(op, 1e-9, 800, 11);
    REQUIRE(r.converged);
    l[i] = r.lambda;
  }
  double rich = l[1] + (l[1] - l[0]) / 3.0;
  double j01 = 2.404825557695773;
  CHECK(rich == doctest::Approx(j01 * j01).epsilon(0.01));
  // second-order trend: the coarse defect is about 4x the fine one
  CHECK(std::abs(l[0] - rich) > 2.5 * std::abs(l[1] - rich));
}

TEST_CASE("matches the dense solver on a random magnetic operator") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 18.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.11, -0.21), 0.25, Rational(5, 8)});
  f.point_fluxes.push_back({Complex(-0.37, 0.22), 0.35});
  auto ph = discretize::link_phases(g, f);
  auto op = discretize::assemble_magnetic(g, ph, f, 3);
  auto dense = dense_spectrum(op);
  auto r = lowest_eigenpair(op, 1e-10, 800, 17);
  REQUIRE(r.converged);
  CHECK(r.lambda == doctest::Approx(dense.front()).epsilon(1e-8));
}

TEST_CASE("ground state is the variational minimum over random probes") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 20.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.0, 0.0), 0.3, Rational(1, 4)});
  auto ph = discretize::link_phases(g, f);
  auto op = discretize::assemble_magnetic(g, ph, f, 2);
  auto r = lowest_eigenpair(op, 1e-10, 800, 23);
  REQUIRE(r.converged);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  std::vector<Complex> v(op.dim);
  for (int trial = 0; trial < 1000; ++trial) {
    for (auto& x : v) x = Complex(gauss(rng), gauss(rng));
    CHECK(rayleigh_quotient(op, v) >= r.lambda - 1e-9 * std::abs(r.lambda));
  }
}

TEST_CASE("adding a nonnegative potential never lowers the ground state") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 24.0));
  potential::PotentialField f;
  f.bump = bump;
  auto op = discretize::assemble_electric(g, f, 0);
  auto r0 = lowest_eigenpair(op, 1e-10, 600, 31);
  REQUIRE(r0.converged);

  auto shifted = op;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 5.0);
  for (auto& d : shifted.diag) d += uni(rng);
  auto r1 = lowest_eigenpair(shifted, 1e-10, 600, 31);
  REQUIRE(r1.converged);
  CHECK(r1.lambda >= r0.lambda - 1e-8);

  // constant shift moves the eigenvalue exactly
  auto plus = op;
  for (auto& d : plus.diag) d += 3.25;
  auto r2 = lowest_eigenpair(plus, 1e-10, 600, 31);
  REQUIRE(r2.converged);
  CHECK(r2.lambda == doctest::Approx(r0.lambda + 3.25).epsilon(1e-9));
}

TEST_CASE("starved iteration reports failure instead of lying") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 48.0));
  potential::PotentialField f;
  f.bump = bump;
  auto op = discretize::assemble_electric(g, f, 0);
  auto r = lowest_eigenpair(op, 1e-13, 1, 1);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations <= 1);
}

TEST_CASE("determinism: same seed, same answer to the bit") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 20.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.2, 0.0), 0.2, Rational(1, 2)});
  auto ph = discretize::link_phases(g, f);
  auto op = discretize::assemble_magnetic(g, ph, f, 1);
  auto a = lowest_eigenpair(op, 1e-10, 600, 42);
  auto b = lowest_eigenpair(op, 1e-10, 600, 42);
  CHECK(a.lambda == b.lambda);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("dense solver rejects oversized problems") {
  HermitianOperator op;
  op.dim = 2001;
  op.h = 1;
  op.diag.assign(2001, 1.0);
  CHECK_THROWS_AS(dense_spectrum(op), Error);
}
