#include "app/config.hpp"

namespace polydiff::app {

using nlohmann::json;

std::vector<std::string> preset_names() {
  return {"fleming-viot", "heterozygosity", "fleming-viot-heterozygosity", "common-noise", "factor-model"};
}

json preset_document(const std::string& name) {
  if (name == "fleming-viot") {
    // Two types, no mutation, unit resampling rate.
    return {
        {"name", name},
        {"space", {{"kind", "finite"}, {"d", 2}}},
        {"generator", {{"alpha", 1.0}}},
        {"g", {{"kind", "offdiagonal"}}},
        {"k", 2},
        {"times", {0.25, 0.5, 1.0}},
        {"nu", {0.5, 0.5}},
        {"paths", 10000},
        {"particles", 200},
        {"repetitions", 200},
        {"dt", 1e-3},
        {"seed", 20240101},
        {"scenarios", {"heterozygosity", "tower"}},
        {"pmp", {{"polynomials", 100}, {"max_degree", 3}, {"restarts", 6}}},
        {"output", "out/fleming-viot"},
    };
  }
  if (name == "heterozygosity" || name == "fleming-viot-heterozygosity") {
    json doc = preset_document("fleming-viot");
    doc["name"] = "heterozygosity";
    doc["generator"]["alpha"] = 2.0;
    doc["nu"] = {0.3, 0.7};
    doc["times"] = {0.25, 0.5, 1.0, 2.0};
    doc["scenarios"] = {"heterozygosity", "tower"};
    doc["output"] = "out/heterozygosity";
    return doc;
  }
  if (name == "common-noise") {
    // Particles driven only by one shared Brownian motion; τ ramps to zero
    // over the outer unit of the interval.
    return {
        {"name", name},
        {"space", {{"kind", "grid"}, {"x_min", -4.0}, {"x_max", 4.0}, {"n", 101}}},
        {"generator", {{"b", 0.0}, {"sigma", 0.0}, {"tau", {{"function", "tapered"}, {"value", 0.5}, {"ramp", 1.0}}},
                       {"alpha", 0.0}}},
        {"g", {{"kind", "power"}, {"h", {{"function", "gaussian"}, {"center", 0.0}, {"width", 1.0}}}}},
        {"k", 2},
        {"times", {0.5, 1.0}},
        {"nu", {{"dirac_at", 0.0}}},
        {"paths", 10000},
        {"particles", 500},
        {"repetitions", 200},
        {"dt", 1e-3},
        {"seed", 20240102},
        {"scenarios", {"common-noise"}},
        {"output", "out/common-noise"},
    };
  }
  if (name == "factor-model") {
    // Five hat-function factors on [-3, 3]; q = Σ_i (Z^i)².
    return {
        {"name", name},
        {"space", {{"kind", "grid"}, {"x_min", -3.0}, {"x_max", 3.0}, {"n", 51}}},
        {"generator",
         {{"b", {{"function", "linear"}, {"slope", -0.5}}},
          {"sigma", {{"function", "tapered"}, {"value", 0.4}, {"ramp", 0.75}}},
          {"tau", {{"function", "tapered"}, {"value", 0.3}, {"ramp", 0.75}}},
          {"alpha", 1.0}}},
        {"g", {{"kind", "factor"}, {"functions", 5}, {"q", "identity"}}},
        {"k", 2},
        {"times", {0.25, 0.5, 1.0}},
        {"nu", {{"dirac_at", 0.0}}},
        {"paths", 10000},
        {"particles", 200},
        {"repetitions", 100},
        {"dt", 2e-3},
        {"seed", 20240103},
        {"scenarios", {"martingale"}},
        {"pmp", {{"polynomials", 10}, {"max_degree", 2}, {"restarts", 2}}},
        {"output", "out/factor-model"},
    };
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + name + "' (available: " + list + ")");
}

}  // namespace polydiff::app
