#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polydiff/generator.hpp"
#include "polydiff/measure.hpp"
#include "polydiff/random.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

// X_t = Σ_i Z^i_t δ_i on a finite space.
struct SimplexPath {
  std::vector<double> times;
  std::vector<std::vector<double>> weights;

  const std::vector<double>& final_weights() const { return weights.back(); }
};

// Drift b_k(z) = Σ_i (ν_B(i, k) z_i - ν_B(k, i) z_k).
std::vector<double> simplex_drift(const GeneratorSpec& spec, std::span<const double> z);
// Diffusion matrix of the simplex process, read off from L with Q = αΨ:
// a_kl = -α(k, l) z_k z_l for k != l and a_kk = Σ_{l≠k} α(k, l) z_k z_l.
std::vector<double> simplex_covariance(const GeneratorSpec& spec, std::span<const double> z);
// d × d(d-1)/2 loading matrix (row-major), one column per pair i < j equal to
// sqrt(α(i, j) z_i z_j) (e_i - e_j); its Gram matrix is simplex_covariance.
std::vector<double> simplex_noise_loadings(const GeneratorSpec& spec, std::span<const double> z);

// Euler-Maruyama on Δ^d with the pairwise noise factorization; after every
// step negative entries are clipped to 0 and the vector renormalized.
// Records the state at t = 0, at each of `record_times` and at T.
SimplexPath simulate_simplex_sde(const GeneratorSpec& spec, std::span<const double> z0, double T, double dt,
                                 std::uint64_t seed, std::span<const double> record_times = {});

struct ParticleEnsemble {
  Space space;
  // Finite spaces use labels, grid spaces use real positions.
  std::vector<std::size_t> labels;
  std::vector<double> positions;
  double time = 0.0;
  std::uint64_t stream = 0;

  std::size_t size() const { return space.is_finite() ? labels.size() : positions.size(); }
};

struct EnsemblePath {
  std::vector<ParticleEnsemble> snapshots;
  std::size_t resampling_events = 0;
  std::size_t mutation_events = 0;

  const ParticleEnsemble& final_state() const { return snapshots.back(); }
};

// N particles placed deterministically so that counts/N matches ν up to
// largest-remainder rounding (grid particles sit on nodes).
ParticleEnsemble allocate_particles(const DiscreteMeasure& nu, std::size_t N);

struct MoranOptions {
  std::span<const double> record_times = {};
  // Mutation sub-step on grid spaces (operator splitting).
  double dt = 1e-3;
};

// Moran-type particle system: mutation along B, and every ordered pair (i, j)
// fires at rate α(Z^i, Z^j) / 2, replacing particle j by a copy of particle i.
// Finite spaces are simulated event by event (thinning against max rates);
// grid spaces alternate an Euler diffusion step (shared common noise τ) with
// the Poisson-thinned resampling events of that step.
EnsemblePath simulate_moran(const GeneratorSpec& spec, const ParticleEnsemble& initial, double T,
                            std::uint64_t seed, const MoranOptions& options = {});
EnsemblePath simulate_moran(const GeneratorSpec& spec, const DiscreteMeasure& initial, std::size_t N, double T,
                            std::uint64_t seed, const MoranOptions& options = {});

// dZ^i = b dt + σ dW^i + τ dW⁰ with one shared W⁰; positions are clamped to
// the grid interval. Requires α = 0 (use simulate_moran otherwise).
EnsemblePath simulate_common_noise(const GeneratorSpec& spec, double x0, std::size_t N, double T, double dt,
                                   std::uint64_t seed, std::span<const double> record_times = {});

// Empirical measure of the ensemble; grid particles are split linearly onto
// their two neighbouring nodes, so ⟨g, result^k⟩ is the V-statistic of the
// multilinear interpolant of g.
DiscreteMeasure empirical_measure(const ParticleEnsemble& ensemble);

// V-statistic ⟨g, X_N^k⟩ = N^{-k} Σ_{i_1..i_k} g(Z^{i_1}, ..., Z^{i_k}).
double empirical_moment(const ParticleEnsemble& ensemble, const CoefficientTensor& g);

// Linear interpolation of node values at x (clamped to the grid interval).
double interpolate(const Space& space, std::span<const double> values, double x);

// E[h(Z_T) | Z_0 = x0] for the single-particle SDE dZ = b dt + sqrt(σ² + τ²) dW,
// Euler-Maruyama with clamping at the ends.
McEstimate feynman_kac_estimate(const GeneratorSpec& spec, std::span<const double> h, double x0, double T,
                                double dt, std::size_t n_paths, std::uint64_t seed);

}  // namespace polydiff
