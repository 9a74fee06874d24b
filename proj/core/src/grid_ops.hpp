#pragma once

// Discrete building blocks shared by the grid versions of B, Q and L_k.

#include <cstddef>
#include <span>
#include <vector>

namespace polydiff::detail {

// Jump rates of the node chain realizing B = b ∂ + ½ a ∂²: upwind drift plus
// central diffusion. Ends are zero-flux: outward drift is dropped and
// diffusion reflects (ghost node mirrored).
struct NodeRates {
  std::vector<double> up;
  std::vector<double> down;
};

inline NodeRates node_rates(std::span<const double> b, std::span<const double> a, double h) {
  const std::size_t n = b.size();
  NodeRates r{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = 0.5 * a[i] / (h * h);
    double up = diff + (b[i] > 0.0 ? b[i] / h : 0.0);
    double down = diff + (b[i] < 0.0 ? -b[i] / h : 0.0);
    if (i == 0) {
      up += diff;
      down = 0.0;
    }
    if (i + 1 == n) {
      down += diff;
      up = 0.0;
    }
    r.up[i] = up;
    r.down[i] = down;
  }
  return r;
}

// Weights (w_minus, w_center, w_plus) with offsets for the first-derivative
// stencil at node i: central in the interior, one-sided second order at ends.
struct DerivativeStencil {
  std::ptrdiff_t offset[3];
  double weight[3];
};

inline DerivativeStencil derivative_stencil(std::size_t i, std::size_t n, double h) {
  const double inv = 1.0 / (2.0 * h);
  if (i == 0) return {{0, 1, 2}, {-3.0 * inv, 4.0 * inv, -1.0 * inv}};
  if (i + 1 == n) return {{0, -1, -2}, {3.0 * inv, -4.0 * inv, 1.0 * inv}};
  return {{-1, 0, 1}, {-inv, 0.0, inv}};
}

inline std::vector<double> first_derivative(std::span<const double> u, double h) {
  const std::size_t n = u.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto st = derivative_stencil(i, n, h);
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) acc += st.weight[m] * u[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + st.offset[m])];
    out[i] = acc;
  }
  return out;
}

}  // namespace polydiff::detail
