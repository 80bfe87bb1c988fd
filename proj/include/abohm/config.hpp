#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace abohm::config {

struct ChargeSpec {
  double x = 0;
  double y = 0;
  double rho = 0;
  std::int64_t mu_num = 0;
  std::int64_t mu_den = 1;
};

struct FluxSpec {
  double x = 0;
  double y = 0;
  double alpha = 0;
};

// One experiment description. Not every field applies to every kind; parse()
// rejects unknown keys and validate() enforces the per-kind requirements.
struct ExperimentConfig {
  int schema = 1;
  std::string kind;  // disk-baseline | ab-annulus-sweep | counterexample-profile |
                     // pigeonhole-study | inequality-suite | smooth-exceptional
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 1e-8;
  std::string out_dir;  // optional; CLI --out overrides

  // thick-set schedule (counterexample-profile)
  int B = 0;
  int K = 0;
  std::int64_t n_max = 0;

  // grids: nodes per side, one entry per resolution (Richardson wants two)
  std::vector<int> grid_sides;

  std::vector<std::int64_t> n_list;
  double exceptional_eps = 1.0 / 64.0;

  // annulus sweep
  double r_in = 0.5;
  double r_out = 1.0;
  std::vector<double> alphas;
  double defect_tol = 0.05;

  // pigeonhole study
  int M = 0;
  std::int64_t N = 0;
  double epsilon = 0;
  std::vector<std::int64_t> steps;
  int trials = 0;

  // hand-built field (smooth-exceptional)
  std::vector<ChargeSpec> charges;
  std::vector<FluxSpec> fluxes;
  double kappa = 0;  // escort curvature; 0 = derive from the field
  double mollify_delta = 0;

  std::string raw;  // original text, hashed into the manifest
};

// Throws Error("config-invalid", ...) on syntax errors, unknown keys,
// missing seed, or bad per-kind fields.
ExperimentConfig parse(const std::string& json_text);
ExperimentConfig parse_file(const std::string& path);

}  // namespace abohm::config
