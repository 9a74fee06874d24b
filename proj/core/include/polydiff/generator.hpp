#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/SparseCore>

#include "polydiff/measure.hpp"
#include "polydiff/polynomial.hpp"
#include "polydiff/stencil.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

// Mutation kernel ν_B(i, j) on a finite space, d×d row-major; diagonal ignored.
struct JumpKernel {
  std::vector<double> rates;
};

// Spatial motion on a grid: dZ = b dt + σ dW + τ dW⁰, sampled at the nodes.
struct DriftDiffusion {
  std::vector<double> b;
  std::vector<double> sigma;
  std::vector<double> tau;
};

using Mutation = std::variant<JumpKernel, DriftDiffusion>;

// (B, Q) of a measure-valued polynomial diffusion:
//   B = jump kernel (finite) or b ∂ + ½(σ² + τ²) ∂² (grid),
//   Q(g ⊗ g)(x, y) = ½ α(x, y)(g(x) - g(y))² + τ(x) τ(y) g'(x) g'(y).
// Shapes are checked on construction; admissibility (symmetry, signs,
// boundary tangency) is left to validate_spec so that invalid specs can be
// built for negative-control experiments.
class GeneratorSpec {
 public:
  GeneratorSpec(Space space, Mutation mutation, std::vector<double> alpha);

  // Finite space, ν_B = 0, α ≡ alpha off the diagonal.
  static GeneratorSpec fleming_viot(std::size_t d, double alpha);

  const Space& space() const { return space_; }
  const Mutation& mutation() const { return mutation_; }
  bool has_jump_kernel() const { return std::holds_alternative<JumpKernel>(mutation_); }
  const JumpKernel& jump_kernel() const { return std::get<JumpKernel>(mutation_); }
  const DriftDiffusion& drift_diffusion() const { return std::get<DriftDiffusion>(mutation_); }

  std::span<const double> alpha() const { return alpha_; }
  double alpha(std::size_t x, std::size_t y) const { return alpha_[x * space_.size() + y]; }
  double max_alpha() const;
  // ν_B(i, j) for i != j (0 on the diagonal).
  double kernel(std::size_t i, std::size_t j) const;
  // a = σ² + τ² at node i (0 on finite spaces).
  double total_variance(std::size_t i) const;

 private:
  Space space_;
  Mutation mutation_;
  std::vector<double> alpha_;
};

// Off-diagonal constant matrix with zero diagonal.
std::vector<double> constant_alpha(std::size_t n, double value);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const GeneratorSpec& spec);

// B applied to a function on E.
std::vector<double> apply_B(const GeneratorSpec& spec, std::span<const double> h);
// Q applied to a symmetric 2-tensor (bilinear extension of Q(g ⊗ g)).
CoefficientTensor apply_Q(const GeneratorSpec& spec, const CoefficientTensor& G);

// Lp(ν) = ⟨B(∂p(ν)), ν⟩ + ½⟨Q(∂²p(ν)), ν²⟩.
double apply_generator(const GeneratorSpec& spec, const MeasurePolynomial& p, const DiscreteMeasure& nu);
// Γ(p, q) = L(pq) - p Lq - q Lp.
double carre_du_champ(const GeneratorSpec& spec, const MeasurePolynomial& p, const MeasurePolynomial& q,
                      const DiscreteMeasure& nu);

// Explicit generator of the k-particle dual chain on a finite E^k.
class RateMatrix {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  RateMatrix(Space space, std::size_t degree, Matrix matrix);

  const Space& space() const { return space_; }
  std::size_t degree() const { return degree_; }
  std::size_t states() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  // Λ = max_x Σ_{y≠x} L(x, y).
  double max_exit_rate() const;
  // Throws InvariantError unless off-diagonals are >= 0 and rows sum to 0.
  void check_generator(double tol = 1e-10) const;

  void apply(std::span<const double> in, std::span<double> out) const;
  CoefficientTensor apply(const CoefficientTensor& g) const;

 private:
  Space space_;
  std::size_t degree_;
  Matrix matrix_;
};

// L_k realized as a rate matrix (finite E) or a matrix-free stencil (grid E).
class DualOperator {
 public:
  explicit DualOperator(RateMatrix m) : impl_(std::move(m)) {}
  explicit DualOperator(StencilApplier s) : impl_(std::move(s)) {}

  std::size_t degree() const;
  const Space& space() const;
  bool is_rate_matrix() const { return std::holds_alternative<RateMatrix>(impl_); }
  const RateMatrix& rate_matrix() const { return std::get<RateMatrix>(impl_); }
  const StencilApplier& stencil() const { return std::get<StencilApplier>(impl_); }

  CoefficientTensor apply(const CoefficientTensor& g) const;

 private:
  std::variant<RateMatrix, StencilApplier> impl_;
};

struct DualLimits {
  std::size_t max_degree = 4;
  // Cap on the dense state count size^k.
  double max_states = 1.6e7;
};

// Throws MemoryGuardError when size^k exceeds the cap; the message reports
// size^k and the symmetric basis size binom(k + size - 1, k).
void check_state_budget(std::size_t size, std::size_t k, const DualLimits& limits = {});

// L_k = Σ_i B^{(i)} + ½ Σ_{i≠j} Q^{(ij)}.
DualOperator build_dual(const GeneratorSpec& spec, std::size_t k, const DualLimits& limits = {});

}  // namespace polydiff
