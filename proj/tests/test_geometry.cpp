#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "abohm/geometry.hpp"

using namespace abohm;
using namespace abohm::geometry;

TEST_CASE("defaults validate and expose the expected scales") {
  auto p = ThickSetParams::with_defaults(8, 2);
  CHECK(p.B == 8);
  CHECK(p.K_max == 2);
  CHECK(p.eps(1) == doctest::Approx(1.0 / 8.0));
  CHECK(p.eps(2) == doctest::Approx(1.0 / 64.0));
  for (int k = 1; k <= 2; ++k) {
    double e = p.eps(k);
    CHECK(p.rho[k - 1] > 0);
    CHECK(p.rho[k - 1] < e * e / 8.0);
  }
  CHECK_THROWS_AS(ThickSetParams::with_defaults(2, 1).validate(), Error);
}

TEST_CASE("bad parameters are rejected with the right tag") {
  auto p = ThickSetParams::with_defaults(4, 1);
  p.rho[0] = p.eps(1) * p.eps(1);  // violates rho < eps^2/8
  try {
    p.validate();
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.tag() == "invalid-params");
  }
}

TEST_CASE("first generation on B=4 is the full admissible sublattice") {
  auto p = ThickSetParams::with_defaults(4, 1);
  auto gens = build_generations(p);
  REQUIRE(gens.size() == 1);
  const auto& g = gens[0];
  CHECK(g.k == 1);
  CHECK(g.eps == doctest::Approx(0.25));

  // brute-force oracle: lattice points with the closed eps-ball inside the disk
  std::vector<Complex> expect;
  for (long a = -4; a <= 4; ++a)
    for (long b = -4; b <= 4; ++b) {
      Complex z(a * 0.25, b * 0.25);
      if (std::abs(z) + 0.25 <= 1.0) expect.push_back(z);
    }
  REQUIRE(g.size() == expect.size());
  CHECK(g.size() == 29);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(g.centers[i].real() == expect[i].real());
    CHECK(g.centers[i].imag() == expect[i].imag());
  }
}

TEST_CASE("second generation keeps clear of first-generation disks") {
  auto p = ThickSetParams::with_defaults(6, 2);
  auto gens = build_generations(p);
  REQUIRE(gens.size() == 2);
  double e2 = p.eps(2);
  for (Complex z : gens[1].centers) {
    CHECK(std::abs(z) + e2 <= 1.0 + 1e-12);
    double clear = 1e300;
    for (Complex c : gens[0].centers) clear = std::min(clear, std::abs(z - c) - gens[0].rho);
    CHECK(clear > e2);
  }
  // and the removed region really bites: some lattice points must be missing
  long admissible = 0;
  for (long a = -36; a <= 36; ++a)
    for (long b = -36; b <= 36; ++b)
      if (std::abs(Complex(a * e2, b * e2)) + e2 <= 1.0) ++admissible;
  CHECK((long)gens[1].size() < admissible);
  CHECK(gens[1].size() > 0);
}

TEST_CASE("counting report certifies cardinality and density at B=16") {
  auto p = ThickSetParams::with_defaults(16, 2);
  auto gens = build_generations(p);
  auto rep = counting_report(gens, p);
  REQUIRE(rep.scales.size() == 2);
  for (const auto& s : rep.scales) {
    CHECK(double(s.m) >= s.m_lower_bound);
    CHECK(s.m_ok);
    CHECK(s.density_ok);
    CHECK_FALSE(s.asymptotic_advisory);
  }
  CHECK(rep.all_ok());
}

TEST_CASE("counting report flags small B as advisory") {
  auto p = ThickSetParams::with_defaults(8, 1);
  auto gens = build_generations(p);
  auto rep = counting_report(gens, p);
  CHECK(rep.scales[0].asymptotic_advisory);
}

TEST_CASE("subfamilies partition the generation") {
  auto p = ThickSetParams::with_defaults(16, 2);
  auto gens = build_generations(p);
  for (int k = 1; k <= 2; ++k) {
    auto part = build_subfamilies(gens, k, p);
    const auto& g = gens[k - 1];
    CHECK(part.k == k);
    CHECK(part.covering_radius == doctest::Approx(8.0 * std::sqrt(g.eps)));
    REQUIRE(part.assignment.size() == g.size());
    std::vector<int> card(part.subfamilies(), 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      int a = part.assignment[j];
      REQUIRE(a >= 0);
      REQUIRE(a < (int)part.subfamilies());
      CHECK(std::abs(g.centers[j] - part.covering_centers[a]) <= part.covering_radius + 1e-12);
      ++card[a];
    }
    for (std::size_t s = 0; s < card.size(); ++s) CHECK(card[s] == part.cardinality[s]);
    CHECK(part.min_cardinality >= 1);
    CHECK(part.half_disjoint);
    // packing property of the covering centers
    for (std::size_t i = 0; i < part.covering_centers.size(); ++i)
      for (std::size_t j = i + 1; j < part.covering_centers.size(); ++j)
        CHECK(std::abs(part.covering_centers[i] - part.covering_centers[j]) >=
              part.covering_radius - 1e-12);
  }
}

TEST_CASE("serialization round trips exactly") {
  auto p = ThickSetParams::with_defaults(8, 2);
  auto gens = build_generations(p);
  std::stringstream ss;
  write_generations(ss, gens, p);
  auto [back, q] = read_generations(ss);
  REQUIRE(back.size() == gens.size());
  CHECK(q.B == p.B);
  CHECK(q.K_max == p.K_max);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    CHECK(back[i].k == gens[i].k);
    CHECK(back[i].eps == gens[i].eps);
    CHECK(back[i].rho == gens[i].rho);
    REQUIRE(back[i].size() == gens[i].size());
    for (std::size_t j = 0; j < gens[i].size(); ++j) {
      CHECK(back[i].centers[j].real() == gens[i].centers[j].real());
      CHECK(back[i].centers[j].imag() == gens[i].centers[j].imag());
    }
  }
}
