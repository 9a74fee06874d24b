#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polydiff/space.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

class GeneratorSpec;

// Matrix-free L_k on the n^k tensor grid. At a multi-index x:
//   Σ_i  [up(x_i) (u(x + e_i) - u(x)) + down(x_i) (u(x - e_i) - u(x))]
// + Σ_{i<j} α(x_i, x_j) [½(u(x^{j→i}) + u(x^{i→j})) - u(x)]
// + Σ_{i<j} τ(x_i) τ(x_j) D_i D_j u(x)
// where up/down are the upwind-drift + central-diffusion node rates of B
// (zero-flux ends), x^{j→i} copies coordinate i into slot j, and D is the
// central first difference (one-sided second order at the ends).
//
// apply_range may be called concurrently on disjoint output ranges.
class StencilApplier {
 public:
  StencilApplier(const GeneratorSpec& spec, std::size_t k);

  const Space& space() const { return space_; }
  std::size_t degree() const { return degree_; }
  std::size_t states() const { return states_; }

  void apply(std::span<const double> in, std::span<double> out) const;
  void apply_range(std::span<const double> in, std::span<double> out, std::size_t begin, std::size_t end) const;
  CoefficientTensor apply(const CoefficientTensor& g) const;

  // k (max|b|/h + max a/h²) + max row exchange rate + k(k-1) max|ττ| / h².
  double spectral_bound() const;
  bool has_cross_terms() const { return has_tau_; }

 private:
  Space space_;
  std::size_t degree_;
  std::size_t states_;
  std::vector<double> up_, down_;
  std::vector<double> alpha_;
  std::vector<double> tau_;
  bool has_alpha_ = false;
  bool has_tau_ = false;
  double bound_ = 0.0;
};

}  // namespace polydiff
