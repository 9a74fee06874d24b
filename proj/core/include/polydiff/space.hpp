#pragma once

#include <cstddef>
#include <string>

namespace polydiff {

// The underlying space E: either the finite set {0, ..., d-1} or a uniform
// grid on [x_min, x_max] with n >= 3 nodes (a compact truncation of the line).
class Space {
 public:
  enum class Kind { finite, grid };

  static Space finite(std::size_t d);
  static Space grid(double x_min, double x_max, std::size_t n);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::finite; }
  bool is_grid() const { return kind_ == Kind::grid; }

  // Number of points (d) or nodes (n).
  std::size_t size() const { return size_; }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double spacing() const;
  // Grid node coordinate; for finite spaces the label itself.
  double node(std::size_t i) const;

  std::string describe() const;

  friend bool operator==(const Space&, const Space&) = default;

 private:
  Space(Kind kind, std::size_t size, double x_min, double x_max)
      : kind_(kind), size_(size), x_min_(x_min), x_max_(x_max) {}

  Kind kind_;
  std::size_t size_;
  double x_min_;
  double x_max_;
};

}  // namespace polydiff
