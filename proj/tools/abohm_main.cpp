#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "abohm/common.hpp"
#include "abohm/config.hpp"
#include "abohm/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for magnetic ground states"};
  app.require_subcommand(1);

  std::string config_path;
  abohm::runner::RunOptions opt;
  bool validate_only = false;

  auto* run_cmd = app.add_subcommand("run", "execute an experiment described by a JSON config");
  run_cmd->add_option("config", config_path, "path to the experiment config")->required();
  run_cmd->add_option("--out", opt.out_dir, "output directory (overrides the config)");
  run_cmd->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 256));
  run_cmd->add_option("--format", opt.format, "csv or csv+svg")
      ->check(CLI::IsMember({"csv", "csv+svg"}));
  run_cmd->add_flag("--validate", validate_only, "parse and validate the config, then exit");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = abohm::config::parse_file(config_path);
    if (validate_only) {
      std::cout << "ok: " << cfg.kind << "\n";
      return 0;
    }
    int code = abohm::runner::run(cfg, opt);
    if (code != 0) std::cerr << "flagged rows present; see output tables\n";
    return code;
  } catch (const abohm::Error& e) {
    std::cerr << "error [" << e.tag() << "] " << e.what() << "\n";
    return e.tag() == "config-invalid" ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error [internal] " << e.what() << "\n";
    return 3;
  }
}
