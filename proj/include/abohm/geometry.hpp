#pragma once

#include <iosfwd>
#include <vector>

#include "abohm/common.hpp"

namespace abohm::geometry {

struct Disk {
  Complex center;
  double radius = 0.0;
  bool contains(Complex z) const { return std::abs(z - center) < radius; }
};

// Parameters of the inductive multi-scale construction. Scale k works on the
// lattice B^-k (Z + iZ) and removes disks of radius rho_k around the selected
// centers; sigma/nu are the per-scale weight knobs the flux schedule consults.
struct ThickSetParams {
  int B = 8;
  int K_max = 1;
  std::vector<double> rho;    // rho[k-1] = removed-disk radius at scale k
  std::vector<double> sigma;  // sigma[k-1] >= 1
  std::vector<double> nu;     // nu[k-1] > 0, cap mu <= nu_k eps_k^2
  double domain_radius = 1.0;

  double eps(int k) const;  // B^-k
  void validate() const;

  // rho_k = min(eps_k^3, eps_k^2/16), sigma_k = 1, nu_k = B^2k * 2^-(B^(k-1));
  // the nu default is the tightest cap that still admits the schedule's
  // largest flux.
  static ThickSetParams with_defaults(int B, int K_max,
                                      double domain_radius = 1.0);
};

struct Generation {
  int k = 0;
  double eps = 0.0;
  double rho = 0.0;
  std::vector<Complex> centers;
  std::size_t size() const { return centers.size(); }
  Disk disk(std::size_t j) const { return {centers[j], rho}; }
};

// Scans each lattice B^-k (Z+iZ) in lexicographic (Re, Im) order and keeps
// z when the closed eps_k-ball fits in the domain and z stays more than
// eps_k away from every disk removed at earlier scales. Picks of the same
// scale never test against each other: the whole surviving sublattice is
// removed at once.
std::vector<Generation> build_generations(const ThickSetParams& p);

struct ScaleCount {
  int k = 0;
  std::size_t m = 0;             // selected centers at this scale
  double m_lower_bound = 0.0;    // eps^-2 / 4
  bool m_ok = false;
  long density_min = -1;         // min over samples of nearby-center count
  double density_bound = 0.0;    // eps^-1
  bool density_ok = false;
  std::size_t samples = 0;
  bool asymptotic_advisory = false;  // bounds only promised for B >= 16
};

struct CountingReport {
  std::vector<ScaleCount> scales;
  bool all_ok() const;
};

// Counts per scale, plus the local-density statistic: for sample points of
// Omega_k at pitch eps/2 (staying sqrt(eps) clear of the outer boundary),
// the number of scale-k centers within 4 sqrt(eps).
CountingReport counting_report(const std::vector<Generation>& gens,
                               const ThickSetParams& p);

struct SubfamilyPartition {
  int k = 0;
  double covering_radius = 0.0;  // 8 sqrt(eps_k)
  std::vector<Complex> covering_centers;
  std::vector<int> assignment;     // per scale-k disk: covering index
  std::vector<int> cardinality;    // per covering disk
  int min_cardinality = 0;
  bool half_disjoint = false;      // half-radius covering disks disjoint
  double covering_constant = 0.0;  // max sampled gap / sqrt(eps_k)
  std::size_t subfamilies() const { return covering_centers.size(); }
};

// Greedy maximal packing of the scale-k centers at pairwise distance
// >= 8 sqrt(eps_k) gives the covering disks; every scale-k disk joins the
// subfamily of the nearest covering center that contains it.
SubfamilyPartition build_subfamilies(const std::vector<Generation>& gens,
                                     int k, const ThickSetParams& p);

// Text round trip, 17 significant digits per coordinate (lossless doubles).
void write_generations(std::ostream& os, const std::vector<Generation>& gens,
                       const ThickSetParams& p);
std::pair<std::vector<Generation>, ThickSetParams> read_generations(
    std::istream& is);

}  // namespace abohm::geometry
