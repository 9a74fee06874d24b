#include "polydiff/space.hpp"

#include <cmath>
#include <sstream>

#include "polydiff/errors.hpp"

namespace polydiff {

Space Space::finite(std::size_t d) {
  if (d < 1) throw ArgumentError("finite space needs d >= 1");
  return Space(Kind::finite, d, 0.0, static_cast<double>(d - 1));
}

Space Space::grid(double x_min, double x_max, std::size_t n) {
  if (n < 3) throw ArgumentError("grid needs n >= 3 nodes");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max))
    throw ArgumentError("grid needs finite x_min < x_max");
  return Space(Kind::grid, n, x_min, x_max);
}

double Space::spacing() const {
  if (is_finite()) return 1.0;
  return (x_max_ - x_min_) / static_cast<double>(size_ - 1);
}

double Space::node(std::size_t i) const {
  if (is_finite()) return static_cast<double>(i);
  // Pin the last node to x_max exactly.
  if (i + 1 == size_) return x_max_;
  return x_min_ + static_cast<double>(i) * spacing();
}

std::string Space::describe() const {
  std::ostringstream os;
  if (is_finite())
    os << "finite(d=" << size_ << ")";
  else
    os << "grid([" << x_min_ << ", " << x_max_ << "], n=" << size_ << ")";
  return os.str();
}

}  // namespace polydiff
