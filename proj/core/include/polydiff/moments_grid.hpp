#pragma once

#include <optional>
#include <span>

#include "polydiff/generator.hpp"
#include "polydiff/moments_finite.hpp"
#include "polydiff/stencil.hpp"

namespace polydiff {

enum class TimeScheme { rk4, euler };

struct PideConfig {
  // Fixed step; when empty, dt = safety / spectral_bound.
  std::optional<double> dt;
  TimeScheme scheme = TimeScheme::rk4;
  double safety = 0.5;
  double monitor_tolerance = 1e-6;
  // Throw InstabilityError once max|u| exceeds max|g| by more than the tolerance.
  bool abort_on_growth = true;
};

// L_k on the n^k grid; requires an admissible spec (boundary tangency).
StencilApplier discretize_dual_grid(const GeneratorSpec& spec, std::size_t k, const DualLimits& limits = {});

// Explicit time stepping of ∂u/∂t = L_k u, u(0) = g, with snapshots at `times`.
// Max-norm contraction and the discrete max principle are monitored each step.
MomentSolution solve_moment_pide(const StencilApplier& applier, const CoefficientTensor& g,
                                 std::span<const double> times, const PideConfig& config = {});
CoefficientTensor solve_moment_pide(const StencilApplier& applier, const CoefficientTensor& g, double T,
                                    const PideConfig& config = {}, SolverDiagnostics* diagnostics = nullptr);

// ⟨u(T), ν^k⟩ with ν atomic on grid nodes.
double moment_grid(const GeneratorSpec& spec, const CoefficientTensor& g, const DiscreteMeasure& nu, double T,
                   const PideConfig& config = {});

}  // namespace polydiff
