#include "polydiff/measure.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "polydiff/errors.hpp"

namespace polydiff {

DiscreteMeasure DiscreteMeasure::probability(Space space, std::vector<double> weights) {
  if (weights.size() != space.size()) throw ArgumentError("measure weights have wrong length");
  double mass = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w)) throw ArgumentError("measure weight is not finite");
    if (w < 0.0) {
      if (w < -1e-12) {
        std::ostringstream os;
        os << "probability measure has negative weight " << w;
        throw ArgumentError(os.str());
      }
      w = 0.0;
    }
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "probability measure has total mass " << mass;
    throw ArgumentError(os.str());
  }
  return DiscreteMeasure(space, std::move(weights), false);
}

DiscreteMeasure DiscreteMeasure::signed_measure(Space space, std::vector<double> weights) {
  if (weights.size() != space.size()) throw ArgumentError("measure weights have wrong length");
  return DiscreteMeasure(space, std::move(weights), true);
}

DiscreteMeasure DiscreteMeasure::dirac(Space space, std::size_t point) {
  if (point >= space.size()) throw ArgumentError("dirac point out of range");
  std::vector<double> w(space.size(), 0.0);
  w[point] = 1.0;
  return DiscreteMeasure(space, std::move(w), false);
}

DiscreteMeasure DiscreteMeasure::uniform(Space space) {
  return DiscreteMeasure(space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())), false);
}

double DiscreteMeasure::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

DiscreteMeasure operator+(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!(a.space() == b.space())) throw ArgumentError("cannot add measures on different spaces");
  std::vector<double> w(a.weights_);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += b.weights_[i];
  return DiscreteMeasure(a.space(), std::move(w), true);
}

}  // namespace polydiff
