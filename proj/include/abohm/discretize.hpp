#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abohm/common.hpp"
#include "abohm/grid.hpp"
#include "abohm/potential.hpp"

namespace abohm::discretize {

// Line integrals of the vector potential A = (-phi_y, phi_x) along grid
// edges, at unit coupling. angle_x[i] is the integral from node i to its +x
// neighbour, angle_y[i] to its +y neighbour; entries for edges leaving the
// domain are kept but unused by the assembler. Coupling n scales angles
// linearly, so one field per grid serves every n.
struct LinkPhaseField {
  const grid::Grid* mesh = nullptr;
  std::vector<double> angle_x;
  std::vector<double> angle_y;
  bool used_quadrature = false;  // some edge needed numerical integration
};

// Computes per-edge phases. Closed forms are used wherever the field allows:
// a point flux contributes alpha times the angle the edge subtends at the
// flux location, and a radial charge with the edge outside its support
// contributes mu times the same subtended angle. Edges meeting a charge
// support fall back to Gauss quadrature of the tangential component.
// Fails singular-on-edge if a point flux sits within ~1e-9 h of an edge.
LinkPhaseField link_phases(const grid::Grid& g, const potential::PotentialField& field,
                           unsigned threads = 1);

// Phase of a single edge against a single source, exposed for reassembly of
// operators with extra correction charges. The charge version reports through
// used_quad (may be null) whether it had to integrate numerically.
double edge_angle_point(Complex a, Complex b, Complex center, double alpha);
double edge_angle_charge(Complex a, Complex b, Complex center, double rho, double mu,
                         const potential::BumpProfile& bump, bool* used_quad);

// Sparse Hermitian operator on the interior nodes of a grid. diag holds the
// real diagonal; off holds the strictly upper triangle (a < b). Magnetic
// operators carry complex off-diagonals exp(-i n theta_edge)/h^2; electric
// ones are real.
struct HermitianOperator {
  int dim = 0;
  double h = 0;
  bool magnetic = false;
  std::string tag;
  std::vector<double> diag;
  struct Off {
    int a;
    int b;
    Complex v;
  };
  std::vector<Off> off;

  void apply(const std::vector<Complex>& x, std::vector<Complex>& y) const;
  double gershgorin_floor() const;
};

// Five-point magnetic Schroedinger operator at coupling n:
//   diag = 4/h^2 + n * lap(node),  off-diagonal = -exp(-i n angle)/h^2.
// Dirichlet outside: edges to exterior nodes contribute only to the diagonal.
HermitianOperator assemble_magnetic(const grid::Grid& g, const LinkPhaseField& phases,
                                    const potential::PotentialField& field, std::int64_t n);

// Electric companion -lap + n * lap(phi): same stencil with unit phases.
HermitianOperator assemble_electric(const grid::Grid& g, const potential::PotentialField& field,
                                    std::int64_t n);

// Symmetric tridiagonal operator from a radial finite-volume discretization.
struct Tridiag {
  std::vector<double> diag;
  std::vector<double> off;  // size dim-1
  double dr = 0;
  std::vector<double> r;  // node radii
};

// Radial reduction of -(d/dr)(r d/dr)/r + nu^2/r^2 on (r_in, r_out) with m
// interior cells, Dirichlet walls (natural at r=0 when r_in = 0). Nodes sit
// at cell centres; the similarity transform u -> u sqrt(r) symmetrizes the
// matrix without changing the spectrum.
Tridiag assemble_radial(double r_in, double r_out, double nu, int m);

// Same finite-volume skeleton with a radius-dependent angular order nu(r)
// and an additional potential V(r).
Tridiag assemble_radial_profile(double r_in, double r_out, int m,
                                const std::function<double(double)>& nu_of_r,
                                const std::function<double(double)>& V_of_r);

// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
double lowest_tridiag(const Tridiag& t, double tol = 1e-12);

// First-order periodic covariant derivative on the boundary circle of
// radius rho: (D u)_i = (exp(i phase_i) u_{i+1} - u_i) / ds.
struct Periodic1D {
  std::vector<double> phase;
  double ds = 0;
};

// phase_i = h((i+1/2) ds) * ds for midpoint samples h of the connection.
Periodic1D assemble_periodic_1d(const std::vector<double>& h_samples, double rho);

// Smallest singular value of the periodic difference operator.
double smallest_singular_value(const Periodic1D& d);

// Writes the operator as coordinate triplets (row col re im, diagonal
// included) plus a small text sidecar with dim, h, and the tag.
void write_operator(const HermitianOperator& op, const std::string& path,
                    const std::string& tag);

}  // namespace abohm::discretize
