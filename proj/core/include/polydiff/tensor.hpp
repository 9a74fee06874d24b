#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polydiff/space.hpp"

namespace polydiff {

// Symmetric real function on E^k stored densely (size^k entries, row-major
// mixed radix). Degree 0 stores a single scalar.
//
// Construction validates symmetry: entries that differ from their permuted
// counterparts by more than 1e-9 raise InvariantError; smaller deviations are
// averaged away so that every stored tensor is exactly permutation invariant.
class CoefficientTensor {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;

  CoefficientTensor(Space space, std::size_t degree, std::vector<double> values);

  static CoefficientTensor scalar(Space space, double value);
  static CoefficientTensor constant(Space space, std::size_t degree, double value);
  // k = 1 coefficient from an array over the points.
  static CoefficientTensor from_function(Space space, std::vector<double> h);
  // h ⊗ h ⊗ ... ⊗ h (k factors).
  static CoefficientTensor power(Space space, std::span<const double> h, std::size_t k);
  // Averages `values` over all slot permutations (no tolerance check).
  static CoefficientTensor symmetrize(Space space, std::size_t degree, std::vector<double> values);
  // Caller guarantees symmetry; used for solver iterates.
  static CoefficientTensor unchecked(Space space, std::size_t degree, std::vector<double> values);

  const Space& space() const { return space_; }
  std::size_t degree() const { return degree_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double at(std::span<const std::size_t> idx) const;

  double max_abs() const;
  bool is_zero(double tol = 0.0) const;
  // max |g(x) - g(x_σ)| over all entries and slot permutations σ.
  double symmetry_deviation() const;

  // Optional analytic derivative in the first slot (grid spaces only), same
  // shape as values(); symmetric tensors determine the other slots.
  CoefficientTensor with_slot_derivative(std::vector<double> d1) const;
  const std::optional<std::vector<double>>& slot_derivative() const { return slot_derivative_; }

  CoefficientTensor& operator+=(const CoefficientTensor& other);
  CoefficientTensor& operator*=(double s);
  friend CoefficientTensor operator+(CoefficientTensor a, const CoefficientTensor& b) { return a += b; }
  friend CoefficientTensor operator*(double s, CoefficientTensor a) { return a *= s; }

 private:
  struct Trusted {};
  CoefficientTensor(Space space, std::size_t degree, std::vector<double> values, Trusted);

  Space space_;
  std::size_t degree_;
  std::vector<double> values_;
  std::optional<std::vector<double>> slot_derivative_;
};

// Average of `values` over all permutations of its `degree` slots.
std::vector<double> symmetrized_values(std::span<const double> values, std::size_t n, std::size_t degree);

}  // namespace polydiff
