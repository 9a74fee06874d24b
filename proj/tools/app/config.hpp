#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "polydiff/generator.hpp"
#include "polydiff/space.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff::app {

// Bad config: malformed JSON, wrong field types, missing files. `where` is a
// field path ("generator.alpha") or "file:line:column".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

enum class Task { moments, simulate, validate, kkt };

Task parse_task(const std::string& name);
std::string to_string(Task t);

struct CoefficientConfig {
  // offdiagonal | constant | power | tensor | factor
  std::string kind = "offdiagonal";
  double value = 1.0;
  std::vector<double> h;
  std::optional<std::vector<double>> dh;
  std::vector<double> values;
  std::size_t factors = 0;
  std::vector<double> q;  // factors × factors
};

struct PmpConfig {
  std::size_t polynomials = 100;
  std::size_t max_degree = 3;
  std::size_t restarts = 6;
};

struct ExperimentConfig {
  std::string name = "config";
  Space space = Space::finite(1);
  Mutation mutation = JumpKernel{};
  std::vector<double> alpha;
  CoefficientConfig g;
  std::size_t k = 2;
  std::vector<double> times = {1.0};
  std::vector<double> nu;
  std::size_t paths = 10000;
  std::size_t particles = 200;
  std::size_t repetitions = 200;
  double dt = 1e-3;
  std::optional<double> pide_dt;
  std::uint64_t seed = 1;
  std::vector<std::string> scenarios;
  PmpConfig pmp;
  std::filesystem::path output = "polydiff-out";

  GeneratorSpec generator() const { return GeneratorSpec(space, mutation, alpha); }
  DiscreteMeasure initial_measure() const;
  // Builds the size^k coefficient; call only after the state budget check.
  CoefficientTensor coefficient() const;
};

// Parses a config document; relative CSV paths resolve against base_dir.
// A top-level "preset" key starts from that preset and merge-patches the rest.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& file);
// Text variant used by load_config; `label` prefixes line:column in errors.
ExperimentConfig parse_config_text(const std::string& text, const std::string& label,
                                   const std::filesystem::path& base_dir);

std::vector<std::string> preset_names();
nlohmann::json preset_document(const std::string& name);
ExperimentConfig preset(const std::string& name);

// Hat functions on the grid with equally spaced peaks at x_min ... x_max;
// they sum to one at every node.
std::vector<std::vector<double>> hat_functions(const Space& grid, std::size_t count);

}  // namespace polydiff::app
