#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "polydiff/measure.hpp"
#include "polydiff/tensor.hpp"

namespace polydiff {

// p(ν) = Σ_k ⟨g_k, ν^k⟩ with at most one coefficient per degree.
class MeasurePolynomial {
 public:
  explicit MeasurePolynomial(Space space) : space_(space) {}

  static MeasurePolynomial constant(Space space, double c);
  static MeasurePolynomial monomial(CoefficientTensor g);

  // Adds g into the coefficient of its degree.
  MeasurePolynomial& add_term(const CoefficientTensor& g);

  const Space& space() const { return space_; }
  const std::map<std::size_t, CoefficientTensor>& terms() const { return terms_; }
  // Highest degree with a nonzero coefficient; 0 for the zero polynomial.
  std::size_t degree() const;

  MeasurePolynomial& operator*=(double s);

 private:
  Space space_;
  std::map<std::size_t, CoefficientTensor> terms_;
};

// ⟨g, ν^k⟩.
double eval_monomial(const CoefficientTensor& g, const DiscreteMeasure& nu);
double eval_polynomial(const MeasurePolynomial& p, const DiscreteMeasure& nu);

// ⟨g(x_1, ..., x_{k-m}, ·), ν^m⟩ as a tensor of degree k - m.
CoefficientTensor contract_trailing(const CoefficientTensor& g, const DiscreteMeasure& nu, std::size_t m);

// Symmetric tensor product g ⊗ h of degree k + l.
CoefficientTensor sym_tensor(const CoefficientTensor& g, const CoefficientTensor& h);
MeasurePolynomial poly_product(const MeasurePolynomial& p, const MeasurePolynomial& q);

// ℓ-th derivative tensor x ↦ ∂^ℓ_{x_1...x_ℓ} p(ν); the ℓ = 0 case is p(ν).
CoefficientTensor derivative_tensor(const MeasurePolynomial& p, const DiscreteMeasure& nu, std::size_t order);
// x ↦ ∂_x p(ν).
std::vector<double> partial_derivative(const MeasurePolynomial& p, const DiscreteMeasure& nu);
CoefficientTensor second_derivative(const MeasurePolynomial& p, const DiscreteMeasure& nu);

// Unique degree-m homogeneous coefficient agreeing with p on probability
// measures: Σ_k g_k ⊗ 1^{⊗(m-k)}.
CoefficientTensor homogenize(const MeasurePolynomial& p, std::size_t m);

// Ψ(g)(x, y) = ½(g(x,x) + g(y,y) - 2 g(x,y)).
CoefficientTensor psi(const CoefficientTensor& g);

// Σ_ℓ (1/ℓ!) ⟨∂^ℓ p(ν), μ^ℓ⟩; equals p(ν + μ).
double taylor_eval(const MeasurePolynomial& p, const DiscreteMeasure& nu, const DiscreteMeasure& mu);

}  // namespace polydiff
