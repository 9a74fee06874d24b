#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polydiff/space.hpp"

namespace polydiff {

// Atomic measure on the points of a finite space or the nodes of a grid.
// Probability measures clamp weights >= -1e-12 to zero and require unit mass
// within 1e-10; signed measures (Taylor expansions, KKT perturbations) skip
// both checks but still report their total mass.
class DiscreteMeasure {
 public:
  static DiscreteMeasure probability(Space space, std::vector<double> weights);
  static DiscreteMeasure signed_measure(Space space, std::vector<double> weights);
  static DiscreteMeasure dirac(Space space, std::size_t point);
  static DiscreteMeasure uniform(Space space);

  const Space& space() const { return space_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }
  bool is_signed() const { return signed_; }
  double total_mass() const;

  // Always signed: the sum of two probability measures is not one.
  friend DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  DiscreteMeasure(Space space, std::vector<double> weights, bool is_signed)
      : space_(space), weights_(std::move(weights)), signed_(is_signed) {}

  Space space_;
  std::vector<double> weights_;
  bool signed_;
};

}  // namespace polydiff
