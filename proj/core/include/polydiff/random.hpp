#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "polydiff/polynomial.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

using Rng = std::mt19937_64;

// Stream seed for worker/path `stream` under `master`: two rounds of the
// splitmix64 finalizer over (master, stream). Streams are stable across runs
// and independent of the thread that consumes them.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) { return Rng(split_seed(master, stream)); }

// Uniform (Dirichlet(1, ..., 1)) point of the simplex Δ^d.
std::vector<double> random_simplex_point(Rng& rng, std::size_t d);
std::vector<double> random_uniform_vector(Rng& rng, std::size_t n, double lo, double hi);
// Symmetric tensor with entries uniform in [lo, hi] before symmetrization.
CoefficientTensor random_symmetric_tensor(Rng& rng, const Space& space, std::size_t k, double lo = -1.0,
                                          double hi = 1.0);
// Polynomial with one random coefficient for every degree 0..max_degree.
MeasurePolynomial random_polynomial(Rng& rng, const Space& space, std::size_t max_degree);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Sample mean and standard error (sample s.d. / sqrt(n)).
McEstimate summarize(std::span<const double> samples);

}  // namespace polydiff
