#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "abohm/discretize.hpp"
#include "abohm/eigensolve.hpp"
#include "abohm/grid.hpp"
#include "abohm/potential.hpp"

using namespace abohm;
using namespace abohm::discretize;

static potential::BumpProfile bump = potential::normalize_bump();

namespace {

grid::GridSpec open_box(double h, double R = 3.0) {
  grid::GridSpec s;  // default [-1,1]^2 box, disk mask wide enough to keep all nodes
  s.kind = grid::MaskKind::Disk;
  s.center = Complex(0, 0);
  s.R = R;
  s.h = h;
  return s;
}

// counterclockwise circulation around the plaquette with lower-left node (i,j)
double circulation(const grid::Grid& g, const LinkPhaseField& ph, int i, int j) {
  int a = g.at(i, j), b = g.at(i + 1, j), c = g.at(i, j + 1);
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  REQUIRE(c >= 0);
  REQUIRE(g.at(i + 1, j + 1) >= 0);
  return ph.angle_x[a] + ph.angle_y[b] - ph.angle_x[c] - ph.angle_y[a];
}

}  // namespace

TEST_CASE("grid enumeration is row major and self consistent") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 32.0));
  CHECK(g.size() > 0);
  int prev = -1;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    auto [i, j] = g.node_ij[idx];
    CHECK(g.at(i, j) == (int)idx);
    CHECK(std::abs(g.nodes[idx]) < 1.0);
    int key = j * g.nx + i;
    CHECK(key > prev);
    prev = key;
  }
  // staggered nodes never sit on the lattice of the box corners
  for (Complex z : g.nodes) {
    CHECK(std::abs(std::remainder(z.real() + 1.0, g.h())) == doctest::Approx(g.h() / 2));
  }
}

TEST_CASE("free field gives zero phases and the plain five point stencil") {
  potential::PotentialField f;
  f.bump = bump;
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 0.25));
  auto ph = link_phases(g, f);
  for (double a : ph.angle_x) CHECK(a == 0.0);
  for (double a : ph.angle_y) CHECK(a == 0.0);
  CHECK_FALSE(ph.used_quadrature);

  auto op = assemble_magnetic(g, ph, f, 5);
  double inv_h2 = 1.0 / (0.25 * 0.25);
  for (double d : op.diag) CHECK(d == doctest::Approx(4.0 * inv_h2).epsilon(1e-15));
  for (const auto& e : op.off) {
    CHECK(e.v.real() == doctest::Approx(-inv_h2).epsilon(1e-15));
    CHECK(e.v.imag() == 0.0);
    CHECK(e.a < e.b);
  }
}

TEST_CASE("smallest possible grid yields the one by one matrix") {
  grid::GridSpec s;
  s.kind = grid::MaskKind::Disk;
  s.center = Complex(-0.5, -0.5);
  s.R = 0.3;
  s.h = 1.0;
  auto g = grid::build_grid(s);
  REQUIRE(g.size() == 1);
  potential::PotentialField f;
  f.bump = bump;
  auto op = assemble_electric(g, f, 0);
  CHECK(op.dim == 1);
  CHECK(op.diag[0] == doctest::Approx(4.0));
  CHECK(op.off.empty());
  auto spec = eigensolve::dense_spectrum(op);
  REQUIRE(spec.size() == 1);
  CHECK(spec[0] == doctest::Approx(4.0));
}

TEST_CASE("plaquette circulation recovers the enclosed flux exactly") {
  auto g = grid::build_grid(open_box(0.5));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.0, 0.0), 0.1, Rational(3, 8)});
  auto ph = link_phases(g, f);
  // support inside the central plaquette: no quadrature needed anywhere
  CHECK_FALSE(ph.used_quadrature);
  CHECK(circulation(g, ph, 1, 1) == doctest::Approx(kTwoPi * 0.375).epsilon(1e-13));
  // distant plaquette encloses nothing
  CHECK(circulation(g, ph, 0, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  // the 2x2 superplaquette sees the same total flux
  double super = 0.0;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) super += circulation(g, ph, i, j);
  CHECK(super == doctest::Approx(kTwoPi * 0.375).epsilon(1e-13));
}

TEST_CASE("point flux circulation is all or nothing") {
  auto g = grid::build_grid(open_box(0.5));
  potential::PotentialField f;
  f.bump = bump;
  f.point_fluxes.push_back({Complex(0.015, -0.02), 0.3});
  auto ph = link_phases(g, f);
  CHECK(circulation(g, ph, 1, 1) == doctest::Approx(kTwoPi * 0.3).epsilon(1e-13));
  CHECK(circulation(g, ph, 0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("charge support crossing edges still sums to the exact flux") {
  auto g = grid::build_grid(open_box(0.5));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.0, 0.0), 0.4, Rational(1, 4)});  // pokes into neighbours
  auto ph = link_phases(g, f);
  CHECK(ph.used_quadrature);
  double total = 0.0;
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j) total += circulation(g, ph, i, j);
  CHECK(total == doctest::Approx(kTwoPi * 0.25).epsilon(1e-11));
}

TEST_CASE("charge centered on an edge splits its flux in half") {
  auto g = grid::build_grid(open_box(0.5));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.0, -0.25), 0.08, Rational(1, 2)});  // on the edge y=-1/4
  auto ph = link_phases(g, f);
  double below = circulation(g, ph, 1, 0);
  double above = circulation(g, ph, 1, 1);
  CHECK(below + above == doctest::Approx(kTwoPi * 0.5).epsilon(1e-9));
  CHECK(below == doctest::Approx(kPi * 0.5).epsilon(1e-7));
}

TEST_CASE("point flux sitting on an edge is rejected") {
  auto g = grid::build_grid(open_box(0.5));
  potential::PotentialField f;
  f.bump = bump;
  f.point_fluxes.push_back({Complex(0.0, -0.25), 0.5});
  try {
    link_phases(g, f);
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.tag() == "singular-eval");
  }
}

TEST_CASE("coupling scales phases linearly and potentials linearly") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 24.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.21, -0.13), 0.15, Rational(1, 8)});
  auto ph = link_phases(g, f);
  auto op1 = assemble_magnetic(g, ph, f, 1);
  auto op3 = assemble_magnetic(g, ph, f, 3);
  double inv_h2 = 1.0 / (g.h() * g.h());
  REQUIRE(op1.off.size() == op3.off.size());
  for (std::size_t k = 0; k < op1.off.size(); ++k) {
    Complex u1 = -op1.off[k].v / inv_h2;
    Complex u3 = -op3.off[k].v / inv_h2;
    CHECK(std::abs(u1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(u3 - u1 * u1 * u1) < 1e-13);
  }
  for (int i = 0; i < op1.dim; ++i)
    CHECK(op3.diag[i] - 4.0 * inv_h2 ==
          doctest::Approx(3.0 * (op1.diag[i] - 4.0 * inv_h2)).epsilon(1e-12));
}

TEST_CASE("electric operator is the entrywise modulus of the magnetic one") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 24.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(-0.3, 0.2), 0.2, Rational(1, 4)});
  auto ph = link_phases(g, f);
  auto m = assemble_magnetic(g, ph, f, 2);
  auto e = assemble_electric(g, f, 2);
  REQUIRE(m.dim == e.dim);
  REQUIRE(m.off.size() == e.off.size());
  for (int i = 0; i < m.dim; ++i) CHECK(m.diag[i] == e.diag[i]);
  for (std::size_t k = 0; k < m.off.size(); ++k) {
    CHECK(m.off[k].a == e.off[k].a);
    CHECK(m.off[k].b == e.off[k].b);
    CHECK(std::abs(m.off[k].v) == doctest::Approx(-e.off[k].v.real()).epsilon(1e-14));
    CHECK(e.off[k].v.imag() == 0.0);
  }
  CHECK(m.magnetic);
  CHECK_FALSE(e.magnetic);
}

TEST_CASE("apply agrees with the hermitian inner product") {
  auto g = grid::build_grid(grid::GridSpec::disk(Complex(0, 0), 1.0, 2.0 / 20.0));
  potential::PotentialField f;
  f.bump = bump;
  f.charges.push_back({Complex(0.1, 0.1), 0.3, Rational(1, 2)});
  auto ph = link_phases(g, f);
  auto op = assemble_magnetic(g, ph, f, 4);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  std::vector<Complex> x(op.dim), y(op.dim), ax(op.dim), ay(op.dim);
  for (auto& v : x) v = Complex(gauss(rng), gauss(rng));
  for (auto& v : y) v = Complex(gauss(rng), gauss(rng));
  op.apply(x, ax);
  op.apply(y, ay);
  Complex xy = 0, yx = 0;
  for (int i = 0; i < op.dim; ++i) {
    xy += std::conj(ax[i]) * y[i];
    yx += std::conj(x[i]) * ay[i];
  }
  CHECK(std::abs(xy - yx) < 1e-9 * std::abs(xy));
  CHECK(op.gershgorin_floor() <= eigensolve::dense_spectrum(op).front() + 1e-9);
}

TEST_CASE("radial reduction hits the Bessel ground state of the disk") {
  auto t = assemble_radial(0.0, 1.0, 0.0, 4096);
  double j01 = 2.404825557695773;
  CHECK(lowest_tridiag(t) == doctest::Approx(j01 * j01).epsilon(1e-5));
  auto t1 = assemble_radial(0.0, 1.0, 1.0, 4096);
  double j11 = 3.831705970207512;
  CHECK(lowest_tridiag(t1) == doctest::Approx(j11 * j11).epsilon(1e-4));
}

TEST_CASE("radial profile variant shifts exactly with a constant potential") {
  auto base = assemble_radial(0.5, 1.0, 2.0, 2000);
  auto prof = assemble_radial_profile(0.5, 1.0, 2000, [](double) { return 2.0; },
                                      [](double) { return 0.0; });
  CHECK(lowest_tridiag(base) == doctest::Approx(lowest_tridiag(prof)).epsilon(1e-12));
  auto shifted = assemble_radial_profile(0.5, 1.0, 2000, [](double) { return 2.0; },
                                         [](double) { return 7.5; });
  CHECK(lowest_tridiag(shifted) ==
        doctest::Approx(lowest_tridiag(base) + 7.5).epsilon(1e-10));
}

TEST_CASE("radial range validation") {
  CHECK_THROWS_AS(assemble_radial(0.8, 0.5, 0.0, 100), Error);
  CHECK_THROWS_AS(assemble_radial(0.0, 1.0, 0.0, 0), Error);
}

TEST_CASE("periodic derivative: exact circulant singular value at constant connection") {
  double rho = 2.0;
  int m = 512;
  double ds = rho / m;
  for (double w : {0.5, 0.3, 0.0, 1.0, 2.0}) {
    std::vector<double> hs(m, kTwoPi * w / rho);
    auto d = assemble_periodic_1d(hs, rho);
    REQUIRE(d.phase.size() == (std::size_t)m);
    CHECK(d.ds == doctest::Approx(ds).epsilon(1e-15));
    double frac = std::min(std::abs(w - std::round(w)), 0.5);
    double expect = 2.0 * std::sin(kPi * frac / m) / ds;
    CHECK(smallest_singular_value(d) == doctest::Approx(expect).epsilon(1e-8).scale(1.0 / rho));
  }
}

TEST_CASE("write_operator emits matching sidecar and triplets") {
  grid::GridSpec s;
  s.kind = grid::MaskKind::Disk;
  s.center = Complex(-0.5, -0.5);
  s.R = 0.75;
  s.h = 1.0;
  auto g = grid::build_grid(s);
  potential::PotentialField f;
  f.bump = bump;
  auto op = assemble_electric(g, f, 0);
  std::string path = "op_dump_test";
  write_operator(op, path, "unit");
  std::ifstream mat(path);
  REQUIRE(mat.good());
  int count = 0;
  std::string line;
  while (std::getline(mat, line))
    if (!line.empty()) ++count;
  CHECK(count == op.dim + (int)op.off.size());
  std::ifstream meta(path + ".meta");
  REQUIRE(meta.good());
  std::string all((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(all.find("tag unit") != std::string::npos);
  CHECK(all.find("dim " + std::to_string(op.dim)) != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());
}
