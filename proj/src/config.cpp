#include "abohm/config.hpp"

#include <set>

#include "json.hpp"

#include "abohm/common.hpp"
#include "abohm/report.hpp"

namespace abohm::config {

namespace {

using nlohmann::json;

const std::set<std::string> kBaseKeys = {"schema", "kind", "seed", "tol", "out_dir"};

std::set<std::string> kind_keys(const std::string& kind) {
  if (kind == "disk-baseline") return {"grid_sides"};
  if (kind == "ab-annulus-sweep")
    return {"grid_sides", "r_in", "r_out", "alphas", "defect_tol"};
  if (kind == "counterexample-profile")
    return {"B", "K", "n_max", "grid_sides", "n_list", "exceptional_eps"};
  if (kind == "pigeonhole-study") return {"M", "N", "epsilon", "steps", "trials"};
  if (kind == "inequality-suite") return {"trials", "grid_sides"};
  if (kind == "smooth-exceptional")
    return {"charges", "fluxes", "kappa", "mollify_delta", "n_list", "grid_sides",
            "exceptional_eps"};
  fail("config-invalid", "unknown experiment kind '" + kind + "'");
}

}  // namespace

ExperimentConfig parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("config-invalid", std::string("JSON syntax: ") + e.what());
  }
  require(j.is_object(), "config-invalid", "top level must be an object");

  ExperimentConfig cfg;
  cfg.raw = text;
  try {
    require(j.contains("kind") && j["kind"].is_string(), "config-invalid",
            "missing string field 'kind'");
    cfg.kind = j["kind"].get<std::string>();
    auto allowed = kind_keys(cfg.kind);
    allowed.insert(kBaseKeys.begin(), kBaseKeys.end());
    for (const auto& item : j.items())
      require(allowed.count(item.key()) > 0, "config-invalid",
              "unknown key '" + item.key() + "' for kind " + cfg.kind);

    require(j.contains("schema"), "config-invalid", "missing 'schema'");
    cfg.schema = j["schema"].get<int>();
    require(cfg.schema == 1, "config-invalid", "unsupported schema version");
    require(j.contains("seed"), "config-invalid", "missing mandatory 'seed'");
    require(j["seed"].is_number_unsigned(), "config-invalid", "'seed' must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.seed_set = true;
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    require(cfg.tol > 0, "config-invalid", "'tol' must be positive");
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();

    if (j.contains("grid_sides")) {
      cfg.grid_sides = j["grid_sides"].get<std::vector<int>>();
      for (int s : cfg.grid_sides)
        require(s >= 9 && s <= 4097, "config-invalid", "grid side out of range [9, 4097]");
    }
    if (j.contains("n_list")) {
      cfg.n_list = j["n_list"].get<std::vector<std::int64_t>>();
      for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        require(cfg.n_list[i] >= 0, "config-invalid", "'n_list' entries must be nonnegative");
        if (i) require(cfg.n_list[i - 1] <= cfg.n_list[i], "config-invalid", "'n_list' must be ascending");
      }
    }
    if (j.contains("exceptional_eps")) {
      cfg.exceptional_eps = j["exceptional_eps"].get<double>();
      require(cfg.exceptional_eps > 0 && cfg.exceptional_eps < 0.5, "config-invalid",
              "'exceptional_eps' must lie in (0, 1/2)");
    }

    if (cfg.kind == "disk-baseline" || cfg.kind == "ab-annulus-sweep" ||
        cfg.kind == "counterexample-profile" || cfg.kind == "inequality-suite" ||
        cfg.kind == "smooth-exceptional")
      require(!cfg.grid_sides.empty(), "config-invalid", "missing 'grid_sides'");

    if (cfg.kind == "ab-annulus-sweep") {
      require(j.contains("alphas"), "config-invalid", "missing 'alphas'");
      cfg.alphas = j["alphas"].get<std::vector<double>>();
      require(!cfg.alphas.empty(), "config-invalid", "'alphas' must be nonempty");
      if (j.contains("r_in")) cfg.r_in = j["r_in"].get<double>();
      if (j.contains("r_out")) cfg.r_out = j["r_out"].get<double>();
      require(0 < cfg.r_in && cfg.r_in < cfg.r_out, "config-invalid", "need 0 < r_in < r_out");
      if (j.contains("defect_tol")) cfg.defect_tol = j["defect_tol"].get<double>();
      require(cfg.defect_tol > 0, "config-invalid", "'defect_tol' must be positive");
    }
    if (cfg.kind == "counterexample-profile") {
      require(j.contains("B") && j.contains("K") && j.contains("n_max"), "config-invalid",
              "need 'B', 'K', 'n_max'");
      cfg.B = j["B"].get<int>();
      cfg.K = j["K"].get<int>();
      cfg.n_max = j["n_max"].get<std::int64_t>();
      require(cfg.B >= 2 && cfg.K >= 1, "config-invalid", "need B >= 2, K >= 1");
      require(cfg.n_max >= 2, "config-invalid", "need n_max >= 2");
      require(cfg.grid_sides.size() == 1, "config-invalid", "profile runs on one grid");
    }
    if (cfg.kind == "pigeonhole-study") {
      require(j.contains("M") && j.contains("N") && j.contains("epsilon") && j.contains("steps") &&
                  j.contains("trials"),
              "config-invalid", "need 'M', 'N', 'epsilon', 'steps', 'trials'");
      cfg.M = j["M"].get<int>();
      cfg.N = j["N"].get<std::int64_t>();
      cfg.epsilon = j["epsilon"].get<double>();
      cfg.steps = j["steps"].get<std::vector<std::int64_t>>();
      cfg.trials = j["trials"].get<int>();
      require(cfg.M >= 1 && cfg.M <= 16, "config-invalid", "need 1 <= M <= 16");
      require(cfg.epsilon > 0 && cfg.epsilon < 0.5, "config-invalid", "epsilon in (0, 1/2)");
      require(!cfg.steps.empty(), "config-invalid", "'steps' must be nonempty");
      for (auto s : cfg.steps) require(s >= 1 && cfg.N >= 2 * s, "config-invalid", "need N >= 2 step");
      require(cfg.trials >= 1, "config-invalid", "need trials >= 1");
    }
    if (cfg.kind == "inequality-suite") {
      require(j.contains("trials"), "config-invalid", "missing 'trials'");
      cfg.trials = j["trials"].get<int>();
      require(cfg.trials >= 1, "config-invalid", "need trials >= 1");
      require(cfg.grid_sides.size() == 1, "config-invalid", "suite runs on one grid");
    }
    if (cfg.kind == "smooth-exceptional") {
      require(j.contains("charges"), "config-invalid", "missing 'charges'");
      for (const auto& c : j["charges"]) {
        ChargeSpec cs;
        cs.x = c.at("x").get<double>();
        cs.y = c.at("y").get<double>();
        cs.rho = c.at("rho").get<double>();
        auto mu = c.at("mu").get<std::vector<std::int64_t>>();
        require(mu.size() == 2, "config-invalid", "'mu' must be [num, den]");
        cs.mu_num = mu[0];
        cs.mu_den = mu[1];
        require(cs.rho > 0, "config-invalid", "charge radius must be positive");
        require(cs.mu_den > 0, "config-invalid", "'mu' denominator must be positive");
        cfg.charges.push_back(cs);
      }
      require(!cfg.charges.empty(), "config-invalid", "'charges' must be nonempty");
      if (j.contains("fluxes"))
        for (const auto& f : j["fluxes"]) {
          FluxSpec fs;
          fs.x = f.at("x").get<double>();
          fs.y = f.at("y").get<double>();
          fs.alpha = f.at("alpha").get<double>();
          cfg.fluxes.push_back(fs);
        }
      if (j.contains("kappa")) cfg.kappa = j["kappa"].get<double>();
      require(cfg.kappa >= 0, "config-invalid", "'kappa' must be nonnegative");
      if (j.contains("mollify_delta")) cfg.mollify_delta = j["mollify_delta"].get<double>();
      require(cfg.mollify_delta >= 0, "config-invalid", "'mollify_delta' must be nonnegative");
      require(cfg.grid_sides.size() == 1, "config-invalid", "profile runs on one grid");
    }
  } catch (const json::exception& e) {
    fail("config-invalid", std::string("field type: ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_file(const std::string& path) {
  std::string text;
  try {
    text = report::read_file(path);
  } catch (const Error& e) {
    fail("config-invalid", e.what());
  }
  return parse(text);
}

}  // namespace abohm::config
