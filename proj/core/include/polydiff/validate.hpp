#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polydiff/generator.hpp"
#include "polydiff/measure.hpp"
#include "polydiff/polynomial.hpp"

namespace polydiff {

// First/second order optimality diagnostics of p at a candidate maximizer.
struct KktReport {
  static constexpr double kSupportTolerance = 1e-7;
  static constexpr double kPassTolerance = 1e-6;

  DiscreteMeasure maximizer;
  std::vector<std::size_t> support;
  double value = 0.0;
  // max_{x ∈ supp} |∂_x p(ν*) - max_E ∂p(ν*)|
  double first_order_residual = 0.0;
  // max_{x, y ∈ supp} Ψ(∂²p(ν*))(x, y)
  double second_order_worst = 0.0;
  // max over sampled centered μ on supp of ⟨∂²p(ν*), μ²⟩ / |μ|²
  double centered_worst = 0.0;

  bool passed() const {
    return first_order_residual < kPassTolerance && second_order_worst < kPassTolerance &&
           centered_worst < kPassTolerance;
  }
};

struct MaximizerOptions {
  std::size_t max_iterations = 5000;
  double step_tolerance = 1e-15;
};

// Multi-start projected-gradient ascent over the simplex (Armijo
// backtracking, Dirichlet starts) followed by a Newton polish of the KKT
// system on the detected support face. Returns the best point found.
DiscreteMeasure find_simplex_maximizer(const MeasurePolynomial& p, std::size_t restarts, std::uint64_t seed,
                                       const MaximizerOptions& options = {});

// `samples` random centered signed measures on the support feed centered_worst.
KktReport check_kkt(const MeasurePolynomial& p, const DiscreteMeasure& maximizer, std::uint64_t seed = 0,
                    std::size_t samples = 100);

// Lp(ν*); the positive maximum principle demands <= 0 at maximizers.
double check_pmp(const GeneratorSpec& spec, const MeasurePolynomial& p, const DiscreteMeasure& maximizer);

struct PmpSuiteResult {
  std::vector<double> generator_values;
  std::size_t kkt_failures = 0;
  double worst() const;
};

// Random polynomials of degree <= max_degree, maximized and fed to check_pmp.
PmpSuiteResult run_pmp_suite(const GeneratorSpec& spec, std::size_t polynomials, std::size_t max_degree,
                             std::uint64_t seed, std::size_t restarts = 6);

struct ComparisonRow {
  std::string statistic;
  double engine = 0.0;
  double oracle_mean = 0.0;
  double oracle_se = 0.0;
  // Documented deterministic bias of the oracle (Euler step, V-statistic).
  double bias_allowance = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct ComparisonTable {
  std::string scenario;
  std::vector<ComparisonRow> rows;
  bool passed() const;
  std::string to_json() const;
};

// |engine - oracle| <= z_threshold * se + bias, with z = (oracle - engine) / se.
ComparisonRow compare(std::string statistic, double engine, double oracle_mean, double oracle_se,
                      double bias_allowance = 0.0, double z_threshold = 3.0);

// Scenario ids:
//   "heterozygosity": d = 2, B = 0, α ≡ alpha, g = 1{x≠y}; exact formula vs
//      moment_finite vs simplex SDE (paths, dt) vs Moran (particles, repetitions).
//   "tower": same model; E[⟨u(T - t), X_t²⟩] at t = T/2 from `paths` SDE paths
//      against ⟨u(T), ν²⟩.
//   "common-noise": grid, σ = b = α = 0, τ ≡ tau (tapered to 0 at the ends),
//      g = h ⊗ h with a Gaussian bump h; moment_grid vs particle system
//      (particles, repetitions) vs 1-d Gauss-Hermite quadrature.
//   "martingale": B = 0; five random h, ⟨h, X_T⟩ from all three simulators
//      against ⟨h, ν⟩.
struct CrosscheckScenario {
  std::string id = "heterozygosity";
  double alpha = 1.0;
  double z = 0.5;
  std::vector<double> times = {1.0};
  std::size_t paths = 10000;
  double dt = 1e-3;
  std::size_t particles = 200;
  std::size_t repetitions = 200;
  double tau = 0.5;
  double x0 = 0.0;
  double half_width = 4.0;
  std::size_t grid_n = 101;
  double bump_width = 1.0;
  std::uint64_t seed = 1;
  double z_threshold = 3.0;
};

ComparisonTable crosscheck_moments(const CrosscheckScenario& scenario);

std::string to_json(const KktReport& report);

}  // namespace polydiff
