#pragma once

#include <string>

#include "abohm/config.hpp"

namespace abohm::runner {

struct RunOptions {
  std::string out_dir;  // empty: take the config's, else "out"
  unsigned threads = 1;
  std::string format = "csv";  // csv | csv+svg
};

// Executes one experiment and writes report files plus a manifest into the
// output directory. Returns 0 on a clean run, 1 when some rows are flagged
// (non-converged solves, failed checks). Config and internal errors are
// thrown as Error and mapped to exit codes by the CLI.
int run(const config::ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace abohm::runner
