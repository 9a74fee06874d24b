#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polydiff/generator.hpp"
#include "polydiff/measure.hpp"
#include "polydiff/random.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

struct SolverDiagnostics {
  std::size_t steps = 0;
  double dt = 0.0;
  // Steps where max|u| grew beyond the previous max|u| + tolerance.
  std::size_t contraction_violations = 0;
  // Largest excursion of u outside [min g, max g].
  double max_principle_excess = 0.0;
};

// u(t) = e^{t L_k} g at a list of increasing output times.
struct MomentSolution {
  std::size_t degree = 0;
  std::vector<double> times;
  std::vector<CoefficientTensor> u;
  SolverDiagnostics diagnostics;
};

// Uniformization: u(t) = Σ_m Pois(m; Λt) P^m g with P = I + L/Λ, truncated
// once the Poisson tail drops below 1e-12. Long horizons are split into
// chunks with Λ·Δt <= 32 to keep the Poisson weights well scaled.
CoefficientTensor propagate(const RateMatrix& dual, const CoefficientTensor& g, double t);

// Snapshots at `times`, each propagated from the previous one.
MomentSolution propagate_snapshots(const RateMatrix& dual, const CoefficientTensor& g, std::span<const double> times);

// ⟨e^{T L_k} g, ν^k⟩.
double moment_finite(const GeneratorSpec& spec, const CoefficientTensor& g, const DiscreteMeasure& nu, double T);

// Monte Carlo estimate of u(T, x0) = E[g(Z_T) | Z_0 = x0] for the k-particle
// dual chain (exponential holding times, jumps drawn from the row).
McEstimate simulate_dual_chain(const RateMatrix& dual, const CoefficientTensor& g,
                               std::span<const std::size_t> x0, double T, std::size_t n_paths, std::uint64_t seed);

}  // namespace polydiff
