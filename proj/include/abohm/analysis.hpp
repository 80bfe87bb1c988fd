#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "abohm/common.hpp"
#include "abohm/discretize.hpp"
#include "abohm/geometry.hpp"
#include "abohm/grid.hpp"
#include "abohm/potential.hpp"

namespace abohm::analysis {

// Distance from x to the nearest integer, in [0, 1/2].
double dist_to_integers(double x);

// Winding number of the field around a circle: (2pi)^-1 line integral of the
// vector potential by trapezoid rule. The circle must avoid charge supports
// and point fluxes (error field-singular-on-circle).
double winding_line(const potential::PotentialField& field, Complex center, double R,
                    int m = 4096);

// Winding number as (2pi)^-1 integral of the field curvature over a disk,
// from cumulative-mass closed forms.
double winding_flux(const potential::PotentialField& field, Complex center, double R);

// Diamagnetic comparison on one node vector: energy of |u| in the free
// Laplacian against the magnetic form of u with the potential removed.
// The per-edge inequality | |a|-|b| | <= |a - e^{i t} b| makes this exact.
struct KatoReport {
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
};
KatoReport kato_check(const discretize::HermitianOperator& op, const std::vector<Complex>& u);

// Weighted boundary-bulk inequalities on the disk and the annulus, checked
// by tensor quadrature of caller-supplied |u| and |grad|u||^2.
struct PoincareReport {
  double lhs = 0;
  double rhs = 0;
  double slack = 0;  // rhs / lhs
  bool pass = false;
};
PoincareReport poincare_disk_check(const std::function<double(Complex)>& abs_u,
                                   const std::function<double(Complex)>& grad_abs_sq,
                                   double R, int m_r = 1024, int m_th = 256);
PoincareReport poincare_annulus_check(const std::function<double(Complex)>& abs_u,
                                      const std::function<double(Complex)>& grad_abs_sq,
                                      double r, double R, int m_r = 1024, int m_th = 256);

// Defect of the weighted first-order identity relating a |Lu|^2 to curvature
// and antiholomorphic terms, with forward differences for the z-derivatives.
// First order in h for smooth data.
struct TwistorReport {
  double residual = 0;  // |lhs - rhs|
  double scale = 0;     // |lhs| for normalizing
};
TwistorReport twistor_residual(const grid::Grid& g, const potential::PotentialField& field,
                               std::int64_t n, const std::vector<Complex>& u,
                               const std::function<double(Complex)>& a,
                               const std::function<Complex(Complex)>& a_z,
                               const std::function<double(Complex)>& lap_a);

// Aharonov-Bohm lower bound on an annulus: the ground state of the magnetic
// operator with point flux alpha at the origin against dist(alpha,Z)^2 /
// r_out^2, plus a radial tridiagonal oracle minimized over angular orders.
struct ABReport {
  double lambda = 0;
  double bound = 0;
  double oracle = 0;  // min over k in [-8, 8] of the radial problem, nu = |k - alpha|
  bool pass = false;  // lambda >= bound - defect_tol
  bool converged = false;
  double residual = 0;
};
ABReport ab_annulus_check(double r_in, double r_out, double alpha, double h,
                          double defect_tol, double solver_tol = 1e-10,
                          std::uint64_t seed = 1);

// Circle-winding spectral gap: smallest singular value of the periodic
// covariant derivative against 4 dist(w,Z)/rho, w = (2pi)^-1 integral of h.
struct WindingGapReport {
  double smin = 0;
  double bound = 0;
  double winding = 0;
  double sharpness = 0;  // smin / bound when bound > 0 (about pi/2 at the exact constant)
  bool pass = false;
};
WindingGapReport periodic_winding_check(const std::vector<double>& h_samples, double rho);

// Connected components of the positive-curvature support on a rectangular
// cell grid, with per-component flux and a danger flag.
struct Component {
  double area = 0;
  double max_lap = 0;
  double flux = 0;
  bool dangerous = false;
};
struct ComponentLabeling {
  int nx = 0;
  int ny = 0;
  std::vector<int> labels;  // -1 where lap <= 0, else component index
  std::vector<Component> components;
  int dangerous_count = 0;
};
ComponentLabeling label_components(const std::vector<double>& lap_cells, int nx, int ny,
                                   double h, double threshold);

struct FluxVector {
  std::vector<double> fluxes;
  std::vector<int> region_ids;
};

FluxVector dangerous_fluxes(const ComponentLabeling& lab);

// Finds a multiplier n <= N (a multiple of step) that brings every n*w_i
// simultaneously within epsilon of an integer: a direct scan for the
// smallest such n, and independently the first cube collision in the torus
// partition at sidelength epsilon. When the counting bound
// (1 + ceil(1/epsilon))^M < N / (2 step) holds, existence is guaranteed and
// a failed scan is an internal error; otherwise a miss is reported as
// not-found.
struct PigeonholeResult {
  std::int64_t n = 0;
  double max_dist = 0;
  std::int64_t candidates_scanned = 0;
  std::int64_t step = 1;
  bool guarantee = false;
  std::int64_t n_collision = 0;  // 0 when no collision occurred within N
  double max_dist_collision = 0;
};
PigeonholeResult pigeonhole_search(const FluxVector& fluxes, std::int64_t N, double epsilon,
                                   std::int64_t step = 1);

// Radial counter-charges cancelling the fractional part of each region's
// flux. Subtracting charge i from the field makes region i's flux the
// nearest integer. Radii are half the region radius, at least 2h.
struct Region {
  Complex center;
  double radius = 0;
};
struct CounterCharge {
  Complex center;
  double radius = 0;
  double flux = 0;  // the defect f_i - round(f_i)
};
struct GaugeCorrection {
  std::vector<CounterCharge> charges;
  double total_l1 = 0;  // 2 pi sum |defect|
};
GaugeCorrection gauge_correction(const FluxVector& fluxes, const std::vector<Region>& regions,
                                 double epsilon_target, double h);

// Magnetic operator for coupling n with the counter-charges subtracted from
// both the link phases and the scalar curvature term.
discretize::HermitianOperator gauge_corrected_operator(
    const grid::Grid& g, const discretize::LinkPhaseField& base,
    const potential::PotentialField& field, std::int64_t n,
    const std::vector<CounterCharge>& correction, const potential::BumpProfile& bump);

// Conjugates the link phases by arbitrary node angles and resolves the
// ground state; the deviation measures how exactly the discrete spectrum is
// gauge invariant (it should sit at solver precision).
struct GaugeReport {
  double lambda = 0;
  double lambda_conjugated = 0;
  double deviation = 0;
  bool pass = false;  // deviation <= 1e-10 max(1, |lambda|)
};
GaugeReport gauge_invariance_check(const discretize::HermitianOperator& op,
                                   const std::vector<double>& theta, double tol = 1e-11,
                                   std::uint64_t seed = 1);

// Ground-state profile n -> (lambda_e, lambda_m, trial bound) over one grid.
struct ProfileRow {
  std::int64_t n = 0;
  double lambda_e = 0;
  double lambda_m = 0;
  double trial_bound = 0;
  bool exceptional = false;
  double resid_e = 0;
  double resid_m = 0;
  bool ok = false;
  std::string note;
};
struct CompactnessProfile {
  std::vector<ProfileRow> rows;
  double h = 0;
  int interior_nodes = 0;
};
struct ProfileParams {
  std::vector<std::int64_t> n_list;
  double tol = 1e-8;
  // near-uniform flux makes the lowest band nearly flat, and the outer
  // iteration contracts slowly through the cluster; rows that converge
  // early stop early, so the high cap only costs time on the hard rows
  int max_iter = 2500;
  double exceptional_eps = 1.0 / 64.0;
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

// Schedule-driven profile: assembles the layered potential, reuses one set
// of link phases for every coupling, and takes the best Rayleigh quotient
// over the trial family F_0..F_K as the upper bound. The exceptional flag
// marks couplings that pull every charge flux near an integer
// simultaneously, by exact rational arithmetic on the schedule.
CompactnessProfile compactness_profile(const std::vector<geometry::Generation>& gens,
                                       const potential::MuSchedule& sched,
                                       const potential::BumpProfile& bump,
                                       const grid::GridSpec& gspec, const ProfileParams& pp);

// Same profile for a hand-built field; the trial function is the bare
// paraboloid cap and exceptionality is tested on the field's own charges
// and point fluxes.
CompactnessProfile compactness_profile(const potential::PotentialField& field,
                                       const grid::GridSpec& gspec, const ProfileParams& pp);

// Max over scheduled charges of dist(n mu, Z), exact in rational arithmetic.
double schedule_max_dist(const potential::MuSchedule& sched, std::int64_t n);

// Boundary-mode reduction on an annulus r_in < |z| < r_out with a radial
// field psi: checks the discrete Parseval identity of the angular transform
// and compares the two-sided derivative form evaluated directly on the polar
// grid against the sum of per-mode radial forms. u is row-major
// u[i * m_theta + j] at radius r_i = r_in + (i + 1/2) dr, angle 2 pi j / m_theta.
struct FourierReport {
  double parseval_residual = 0;
  double form_residual = 0;  // relative
  double direct_form = 0;
  double mode_form = 0;
};
FourierReport fourier_mode_check(const std::vector<Complex>& u, int m_r, int m_theta,
                                 double r_in, double r_out,
                                 const std::function<double(double)>& dpsi_dr,
                                 std::int64_t n, int mode_lo, int mode_hi);

}  // namespace abohm::analysis
