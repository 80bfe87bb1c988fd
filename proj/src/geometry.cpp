#include "abohm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace abohm::geometry {

double ThickSetParams::eps(int k) const { return std::pow(double(B), -k); }

void ThickSetParams::validate() const {
  require(B >= 3, "invalid-params", "B must be an integer greater than 2");
  require(K_max >= 0, "invalid-params", "K_max must be nonnegative");
  require(domain_radius > 0, "invalid-params", "domain_radius must be positive");
  require((int)rho.size() >= K_max, "invalid-params",
          "rho schedule shorter than K_max");
  require((int)sigma.size() >= K_max, "invalid-params",
          "sigma shorter than K_max");
  require((int)nu.size() >= K_max, "invalid-params", "nu shorter than K_max");
  for (int k = 1; k <= K_max; ++k) {
    double e = eps(k);
    require(rho[k - 1] > 0 && rho[k - 1] < e * e / 8.0, "invalid-params",
            "rho_k must lie in (0, eps_k^2/8)");
    require(sigma[k - 1] >= 1.0, "invalid-params", "sigma_k must be >= 1");
    require(nu[k - 1] > 0.0, "invalid-params", "nu_k must be positive");
  }
}

ThickSetParams ThickSetParams::with_defaults(int B, int K_max,
                                             double domain_radius) {
  ThickSetParams p;
  p.B = B;
  p.K_max = K_max;
  p.domain_radius = domain_radius;
  for (int k = 1; k <= K_max; ++k) {
    double e = p.eps(k);
    // cube-law radius, clamped so rho < eps^2/8 holds strictly even at
    // small B where the cube collides with the constraint boundary
    p.rho.push_back(std::min(e * e * e, e * e / 16.0));
    p.sigma.push_back(1.0);
    // nu_k = B^2k * 2^-(B^(k-1)), computed in logs to survive large k
    double log2nu = 2.0 * k * std::log2(double(B)) - std::pow(double(B), k - 1);
    p.nu.push_back(std::exp2(log2nu));
  }
  return p;
}

namespace {

// Disks bucketed on a uniform cell grid; lookups ask whether any stored disk
// comes within `clearance` of a point. Cell size and the query ring are
// chosen so the 2D scan below stays linear in the lattice size.
class DiskIndex {
public:
  explicit DiskIndex(double cell) : cell_(cell) {}

  void insert(Complex c, double r) {
    centers_.push_back(c);
    radii_.push_back(r);
    max_radius_ = std::max(max_radius_, r);
    buckets_[key(c)].push_back((int)centers_.size() - 1);
  }

  bool any_within(Complex z, double clearance) const {
    if (centers_.empty()) return false;
    int ring = 1 + (int)std::ceil((clearance + max_radius_) / cell_);
    long cx = (long)std::floor(z.real() / cell_);
    long cy = (long)std::floor(z.imag() / cell_);
    for (long dy = -ring; dy <= ring; ++dy)
      for (long dx = -ring; dx <= ring; ++dx) {
        auto it = buckets_.find(pack(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (int i : it->second)
          if (std::abs(z - centers_[i]) - radii_[i] <= clearance) return true;
      }
    return false;
  }

private:
  static long long pack(long x, long y) {
    return ((long long)x << 32) ^ (unsigned int)y;
  }
  long long key(Complex c) const {
    return pack((long)std::floor(c.real() / cell_),
                (long)std::floor(c.imag() / cell_));
  }
  double cell_;
  double max_radius_ = 0.0;
  std::vector<Complex> centers_;
  std::vector<double> radii_;
  std::unordered_map<long long, std::vector<int>> buckets_;
};

}  // namespace

std::vector<Generation> build_generations(const ThickSetParams& p) {
  p.validate();
  std::vector<Generation> gens;
  if (p.K_max == 0) return gens;

  double R = p.domain_radius;
  for (int k = 1; k <= p.K_max; ++k) {
    double e = p.eps(k);
    Generation g;
    g.k = k;
    g.eps = e;
    g.rho = p.rho[k - 1];

    // disks of generations < k, bucketed at the current lattice pitch
    DiskIndex earlier(e);
    for (const auto& prev : gens)
      for (Complex c : prev.centers) earlier.insert(c, prev.rho);

    long span = (long)std::floor((R - e) / e);
    for (long a = -span; a <= span; ++a) {
      for (long b = -span; b <= span; ++b) {
        Complex z(a * e, b * e);
        if (std::abs(z) + e > R) continue;  // closed eps-ball must fit
        if (earlier.any_within(z, e)) continue;
        g.centers.push_back(z);
      }
    }
    gens.push_back(std::move(g));
  }
  return gens;
}

bool CountingReport::all_ok() const {
  for (const auto& s : scales)
    if (!s.m_ok || !s.density_ok) return false;
  return true;
}

namespace {

// Exact count of scale-k centers within distance < r of z.
long exact_near_count(const std::vector<Complex>& centers, Complex z,
                      double r) {
  long n = 0;
  for (Complex c : centers)
    if (std::abs(c - z) < r) ++n;
  return n;
}

struct BinnedCenters {
  double pitch, origin;
  int n = 0;
  std::vector<int> count;    // n*n cells
  std::vector<long> rowpre;  // per-row prefix sums, n*(n+1)

  BinnedCenters(const std::vector<Complex>& centers, double R, double p) {
    pitch = p;
    origin = -R;
    n = (int)std::ceil(2.0 * R / p) + 2;
    count.assign((std::size_t)n * n, 0);
    for (Complex c : centers) {
      int gx = (int)std::floor((c.real() - origin) / p);
      int gy = (int)std::floor((c.imag() - origin) / p);
      if (gx >= 0 && gy >= 0 && gx < n && gy < n) count[(std::size_t)gy * n + gx]++;
    }
    rowpre.assign((std::size_t)n * (n + 1), 0);
    for (int gy = 0; gy < n; ++gy) {
      long s = 0;
      for (int gx = 0; gx < n; ++gx) {
        rowpre[(std::size_t)gy * (n + 1) + gx] = s;
        s += count[(std::size_t)gy * n + gx];
      }
      rowpre[(std::size_t)gy * (n + 1) + n] = s;
    }
  }

  // number of centers in bins whose center point lies within `radius` of z
  long bin_count(Complex z, double radius) const {
    int sy = (int)std::floor((z.imag() - origin) / pitch);
    int sx = (int)std::floor((z.real() - origin) / pitch);
    int reach = (int)std::ceil(radius / pitch) + 1;
    long total = 0;
    double zx = z.real(), zy = z.imag();
    for (int dy = -reach; dy <= reach; ++dy) {
      int gy = sy + dy;
      if (gy < 0 || gy >= n) continue;
      double by = origin + (gy + 0.5) * pitch;
      double rem = radius * radius - (by - zy) * (by - zy);
      if (rem < 0) continue;
      double w = std::sqrt(rem);
      // bins with |bx - zx| <= w
      int lo = (int)std::ceil((zx - w - origin) / pitch - 0.5);
      int hi = (int)std::floor((zx + w - origin) / pitch - 0.5);
      lo = std::max(lo, 0);
      hi = std::min(hi, n - 1);
      if (lo > hi) continue;
      total += rowpre[(std::size_t)gy * (n + 1) + hi + 1] -
               rowpre[(std::size_t)gy * (n + 1) + lo];
    }
    return total;
  }
};

}  // namespace

CountingReport counting_report(const std::vector<Generation>& gens,
                               const ThickSetParams& p) {
  require(!gens.empty(), "invalid-params", "counting_report needs generations");
  CountingReport rep;
  double R = p.domain_radius;

  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    const Generation& g = gens[gi];
    ScaleCount sc;
    sc.k = g.k;
    sc.m = g.size();
    sc.m_lower_bound = 0.25 / (g.eps * g.eps);
    sc.m_ok = double(sc.m) >= sc.m_lower_bound;
    sc.density_bound = 1.0 / g.eps;
    sc.asymptotic_advisory = p.B < 16;

    double pitch = 0.5 * g.eps;
    double near_r = 4.0 * std::sqrt(g.eps);
    double margin = std::sqrt(g.eps);

    // removed disks up to this scale, for the Omega_k membership test
    DiskIndex removed(std::max(pitch, 1e-9));
    for (std::size_t li = 0; li <= gi; ++li)
      for (Complex c : gens[li].centers) removed.insert(c, gens[li].rho);

    long span = (long)std::floor((R - margin) / pitch);
    std::vector<Complex> samples;
    for (long a = -span; a <= span; ++a)
      for (long b = -span; b <= span; ++b) {
        Complex z(a * pitch, b * pitch);
        if (std::abs(z) > R - margin) continue;
        if (removed.any_within(z, 0.0)) continue;  // inside a closed disk
        samples.push_back(z);
      }
    sc.samples = samples.size();

    if (!samples.empty()) {
      if (samples.size() * g.size() <= 200000000ull) {
        long best = -1;
        for (Complex z : samples) {
          long c = exact_near_count(g.centers, z, near_r);
          if (best < 0 || c < best) best = c;
        }
        sc.density_min = best;
      } else {
        // bin centers at the sample pitch; bin-center counts with radius
        // shrunk/grown by half a cell diagonal bracket the exact count
        // (the shrink gets an extra nudge: the exact test is strict and
        // lattice distances can tie 4*sqrt(eps) exactly)
        BinnedCenters bins(g.centers, R, pitch);
        double half_diag = pitch * std::sqrt(0.5) + 1e-12;
        long best_over = -1;
        std::vector<long> under(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
          under[i] = bins.bin_count(samples[i], near_r - half_diag);
          long over = bins.bin_count(samples[i], near_r + half_diag);
          if (best_over < 0 || over < best_over) best_over = over;
        }
        long best = -1;  // exact min; only candidates can achieve it
        for (std::size_t i = 0; i < samples.size(); ++i) {
          if (under[i] > best_over) continue;
          long c = exact_near_count(g.centers, samples[i], near_r);
          if (best < 0 || c < best) best = c;
        }
        sc.density_min = best;
      }
      sc.density_ok = double(sc.density_min) >= sc.density_bound;
    } else {
      sc.density_min = -1;
      sc.density_ok = true;  // vacuous: nothing to sample at this scale
    }
    rep.scales.push_back(sc);
  }
  return rep;
}

SubfamilyPartition build_subfamilies(const std::vector<Generation>& gens,
                                     int k, const ThickSetParams& p) {
  require(k >= 1 && k <= (int)gens.size(), "invalid-params",
          "subfamily scale out of range");
  const Generation& g = gens[k - 1];
  require(g.size() > 0, "partition-infeasible", "no disks at this scale");

  SubfamilyPartition part;
  part.k = k;
  part.covering_radius = 8.0 * std::sqrt(g.eps);

  // greedy maximal packing: scan order = center index order
  for (Complex c : g.centers) {
    bool blocked = false;
    for (Complex cov : part.covering_centers)
      if (std::abs(c - cov) < part.covering_radius) {
        blocked = true;
        break;
      }
    if (!blocked) part.covering_centers.push_back(c);
  }

  part.assignment.resize(g.size());
  part.cardinality.assign(part.covering_centers.size(), 0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < part.covering_centers.size(); ++i) {
      double d = std::abs(g.centers[j] - part.covering_centers[i]);
      if (best < 0 || d < best_d) {
        best = (int)i;
        best_d = d;
      }
    }
    // the member disk must lie inside its covering disk
    require(best >= 0 && best_d + g.rho <= part.covering_radius,
            "partition-infeasible",
            "disk not contained in any covering disk");
    part.assignment[j] = best;
    part.cardinality[best]++;
  }
  part.min_cardinality =
      *std::min_element(part.cardinality.begin(), part.cardinality.end());

  // half-disjointness: guaranteed by the packing distance, but measured
  part.half_disjoint = true;
  for (std::size_t i = 0; i < part.covering_centers.size(); ++i)
    for (std::size_t j = i + 1; j < part.covering_centers.size(); ++j)
      if (std::abs(part.covering_centers[i] - part.covering_centers[j]) <
          part.covering_radius)
        part.half_disjoint = false;

  // measured covering quality over Omega_{k-1}: worst distance from a sample
  // to the nearest covering center, in units of sqrt(eps_k)
  double R = p.domain_radius;
  double pitch = std::sqrt(g.eps) / 4.0;
  DiskIndex removed(std::max(pitch, 1e-9));
  for (int l = 0; l + 1 < k; ++l)
    for (Complex c : gens[l].centers) removed.insert(c, gens[l].rho);
  double worst = 0.0;
  long span = (long)std::floor(R / pitch);
  for (long a = -span; a <= span; ++a)
    for (long b = -span; b <= span; ++b) {
      Complex z(a * pitch, b * pitch);
      if (std::abs(z) > R - g.eps) continue;
      if (removed.any_within(z, 0.0)) continue;
      double best = 1e300;
      for (Complex cov : part.covering_centers)
        best = std::min(best, std::abs(z - cov));
      worst = std::max(worst, best);
    }
  part.covering_constant = worst / std::sqrt(g.eps);
  return part;
}

void write_generations(std::ostream& os, const std::vector<Generation>& gens,
                       const ThickSetParams& p) {
  char buf[128];
  os << "thickset " << p.B << " " << p.K_max << " ";
  std::snprintf(buf, sizeof buf, "%.17g\n", p.domain_radius);
  os << buf;
  for (const auto& g : gens) {
    std::snprintf(buf, sizeof buf, "gen %d %.17g %.17g %zu\n", g.k, g.eps,
                  g.rho, g.size());
    os << buf;
    for (Complex c : g.centers) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.real(), c.imag());
      os << buf;
    }
  }
}

std::pair<std::vector<Generation>, ThickSetParams> read_generations(
    std::istream& is) {
  std::string tag;
  ThickSetParams p;
  require(bool(is >> tag) && tag == "thickset", "parse-error",
          "missing thickset header");
  require(bool(is >> p.B >> p.K_max >> p.domain_radius), "parse-error",
          "bad thickset header");
  std::vector<Generation> gens;
  for (int i = 0; i < p.K_max; ++i) {
    Generation g;
    std::size_t m = 0;
    require(bool(is >> tag) && tag == "gen", "parse-error",
            "missing gen header");
    require(bool(is >> g.k >> g.eps >> g.rho >> m), "parse-error",
            "bad gen header");
    g.centers.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      double re, im;
      require(bool(is >> re >> im), "parse-error", "truncated center list");
      g.centers[j] = Complex(re, im);
    }
    p.rho.push_back(g.rho);
    p.sigma.push_back(1.0);
    p.nu.push_back(1.0);
    gens.push_back(std::move(g));
  }
  return {std::move(gens), std::move(p)};
}

}  // namespace abohm::geometry
