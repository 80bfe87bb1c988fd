#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abohm/common.hpp"
#include "abohm/geometry.hpp"
#include "abohm/grid.hpp"

namespace abohm::potential {

// Normalized radial bump h(t) = c0 exp(-1/(1-t)) on [0,1), zero outside,
// with its cumulative mass F(t) = 2pi int_0^t h(u) u du and the tail
// integral G(t) = int_t^1 F(s)/s ds that the interior potential needs.
// Tables are built once at construction; evaluation is read-only.
struct BumpProfile {
  double c0 = 0.0;
  std::vector<double> F_table;  // F at i/(size-1)
  std::vector<double> G_table;  // G at i/(size-1)

  double density(double t) const;        // h(t)
  double mass_fraction(double t) const;  // F(t), F(t>=1) = F(1) ~ 1
  double tail(double t) const;           // G(t), 0 for t >= 1
};

BumpProfile normalize_bump();

// One smeared flux quantum carrier: density 2*pi*mu*rho^-2*h(|z-c|/rho).
// mu is kept as an exact dyadic rational; flux statements about n*mu
// stay exact integer arithmetic.
struct RadialCharge {
  Complex center;
  double rho = 0.0;
  Rational mu{0, 1};
};

struct PointFlux {
  Complex center;
  double alpha = 0.0;
};

struct FieldEval {
  double phi = 0.0;
  Complex grad{0.0, 0.0};
  double lap = 0.0;
};

// phi, d(phi)/dr (as a gradient vector), and Laplacian of a single charge.
FieldEval charge_eval(const RadialCharge& c, const BumpProfile& bump,
                      Complex z);

// Radial cutoff window: 1 on t <= 4/3, 0 on t >= 3/2, smooth monotone
// in between.
struct CutoffWindow {
  double t_lo = 4.0 / 3.0;
  double t_hi = 1.5;
  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
};

// Convex increasing escort chi2: zero on t <= 1, second derivative equal
// to kappa on [4/3, 3/2], linear plateau after, then a convex blend onto
// -log(4 - t^2)/2 near t = 2. The blend interval [p, q] is located by
// bisection so value and slope match the log form exactly at q.
struct ConvexEscort {
  double kappa = 0.0;
  double s0 = 0.0;                    // plateau slope kappa/3
  double p = 0.0, q = 0.0;            // blend interval
  double two_minus_p = 2.0, two_minus_q = 2.0;  // stored to avoid cancellation
  double val_ramp_end = 0.0;          // chi2(3/2)

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;

  // cumulative tables over the ramp [1, 3/2], filled by make_escort
  std::vector<double> ramp_d1;   // chi2' at equally spaced knots
  std::vector<double> ramp_val;  // chi2 at the same knots
};

ConvexEscort make_escort(double kappa);

// Sum of radial charges and point fluxes, optionally wrapped in the
// window/escort extension: psi = phi * chi1(|z|) + chi2(|z|), defined on
// |z| < 2 when extended.
struct PotentialField {
  std::vector<RadialCharge> charges;
  std::vector<PointFlux> point_fluxes;
  BumpProfile bump;
  bool extended = false;
  CutoffWindow window;
  std::optional<ConvexEscort> escort;

  FieldEval eval(Complex z) const;
  double phi(Complex z) const { return eval(z).phi; }
  Complex grad(Complex z) const { return eval(z).grad; }
  // Laplacian-only path. Agrees with eval(z).lap but skips the log and the
  // gradient division per charge, which dominate assembly when a schedule
  // carries thousands of charges whose supports miss the node.
  double lap(Complex z) const;

  // winding-unit flux: sum of mu plus sum of alpha
  double total_flux() const;
  // exact mass of all charges inside the disk |z - c| < R plus enclosed
  // point fluxes; valid for the unextended sum
  double flux_in_disk(Complex c, double R) const;

  std::string to_json() const;
  static PotentialField from_json(const std::string& text);
};

// Dyadic flux schedule over the generations: one disk per subfamily per
// dyadic block [n_lo, 2*n_lo) gets mu = 1/(4*n_lo); everything else gets
// the generation leftover.
struct MuBlock {
  int k = 0;
  std::int64_t n_lo = 0, n_hi = 0;
  Rational mu{0, 1};
  std::vector<std::size_t> disks;  // one per subfamily, generation-local index
};

struct GenerationMu {
  int k = 0;
  bool pieces_feasible = false;   // N_k = 2^(B^(k-1)) fits an int64
  std::int64_t pieces = 0;        // N_k when feasible
  Rational leftover{0, 1};
  std::vector<Rational> mu;       // per center
  std::vector<std::uint8_t> assigned;
};

struct MuSchedule {
  std::int64_t n_max = 0;
  std::vector<MuBlock> blocks;
  std::vector<GenerationMu> gens;
};

MuSchedule schedule_mu(const std::vector<geometry::Generation>& gens,
                       const std::vector<geometry::SubfamilyPartition>& parts,
                       const geometry::ThickSetParams& params,
                       std::int64_t n_max,
                       std::optional<Rational> leftover_override = {});

// Partial sums over generations l <= truncate_k with the scheduled weights.
PotentialField assemble_phi(const std::vector<geometry::Generation>& gens,
                            const MuSchedule& schedule,
                            const BumpProfile& bump, int truncate_k);

// Trial function F_k = (1-|z|^2) * min over disks of the clamped log cone
// log(|z-c|/rho)/log(eps^2/(4 rho)), sampled on a grid.
struct TrialFunction {
  grid::Grid mesh;
  std::vector<double> samples;  // aligned with mesh.nodes
  double norm_l2 = 0.0;
  double norm_grad_l2 = 0.0;  // sqrt of the Dirichlet energy
  double sup_norm = 0.0;
};

TrialFunction trial_F(const std::vector<geometry::Generation>& gens, int k,
                      const grid::GridSpec& spec);

// Average of phi against the bump rescaled to radius delta.
double mollify(const PotentialField& field, double delta, Complex z);

// Wraps a field supported in the closed unit disk into the subharmonic
// extension on |z| < 2. Samples the Laplacian over the transition annulus
// and refuses when it dips negative.
PotentialField extend_to_psi(const PotentialField& field,
                             const CutoffWindow& window, double kappa);

}  // namespace abohm::potential
