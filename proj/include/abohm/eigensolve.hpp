#pragma once

#include <cstdint>
#include <vector>

#include "abohm/common.hpp"
#include "abohm/discretize.hpp"

namespace abohm::eigensolve {

struct EigenResult {
  double lambda = 0;
  std::vector<Complex> vector;
  double residual = 0;  // ||A v - lambda v|| / max(1, |lambda|)
  int iterations = 0;
  bool converged = false;
};

// Lowest eigenpair by shifted inverse iteration with Rayleigh-quotient
// updates; the inner solves use conjugate gradients on the shifted operator.
// Deterministic for a fixed seed. Never claims convergence it did not reach:
// check the converged flag.
EigenResult lowest_eigenpair(const discretize::HermitianOperator& op, double tol = 1e-8,
                             int max_iter = 600, std::uint64_t seed = 1);

double rayleigh_quotient(const discretize::HermitianOperator& op,
                         const std::vector<Complex>& v);

// Full spectrum via a dense solver; guarded to dim <= 2000 (error too-large).
std::vector<double> dense_spectrum(const discretize::HermitianOperator& op);

}  // namespace abohm::eigensolve
