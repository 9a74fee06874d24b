#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "app/config.hpp"

namespace polydiff::app {

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  // Fewer paths/repetitions/polynomials and a coarser validation grid.
  bool quick = false;
};

struct RunResult {
  // 0 success, 1 validation failure
  int exit_code = 0;
  std::string summary;
  std::vector<std::filesystem::path> artifacts;
};

// Reduced sample sizes used by --quick.
ExperimentConfig quick_variant(ExperimentConfig c);

// "finite d=2, k=2, N=3, d^k=4" style cost description.
std::string describe_cost(const ExperimentConfig& c);

// Throws ConfigError / MemoryGuardError before any artifact is written when
// the config cannot be run.
RunResult run_task(Task task, ExperimentConfig config, const RunOptions& options = {});

}  // namespace polydiff::app
