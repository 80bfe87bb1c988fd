#pragma once

#include <functional>
#include <vector>

namespace abohm {

// Gauss-Legendre rule on [-1, 1]; nodes/weights generated once by Newton
// iteration on the Legendre recurrence (deterministic, ~1e-15 accurate).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussRule(int n);

  double integrate(double a, double b,
                   const std::function<double(double)>& f) const {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * f(mid + half * nodes[i]);
    return s * half;
  }
};

// Shared 64-point rule; radial charge evaluation and the smooth cutoffs all
// integrate profiles that are analytic on the panel, where this rule is
// effectively exact.
const GaussRule& gauss64();

// Adaptive Simpson with absolute/relative stopping, for the one place the
// spec wants an adaptive scheme (bump normalization).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth = 40);

}  // namespace abohm
