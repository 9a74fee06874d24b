#include "polydiff/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "grid_ops.hpp"
#include "parallel.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/generator.hpp"
#include "polydiff/index.hpp"

namespace polydiff {

StencilApplier::StencilApplier(const GeneratorSpec& spec, std::size_t k)
    : space_(spec.space()), degree_(k), states_(checked_pow(spec.space().size(), k)) {
  if (!space_.is_grid()) throw ArgumentError("stencil applier needs a grid space");
  if (k < 1) throw ArgumentError("stencil applier needs k >= 1");
  const std::size_t n = space_.size();
  const double h = space_.spacing();
  const auto& dd = spec.drift_diffusion();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = spec.total_variance(i);
  auto rates = detail::node_rates(dd.b, a, h);
  up_ = std::move(rates.up);
  down_ = std::move(rates.down);
  alpha_.assign(spec.alpha().begin(), spec.alpha().end());
  tau_ = dd.tau;
  has_alpha_ = std::any_of(alpha_.begin(), alpha_.end(), [](double v) { return v != 0.0; });
  has_tau_ = k >= 2 && std::any_of(tau_.begin(), tau_.end(), [](double v) { return v != 0.0; });

  double max_b = 0.0, max_a = 0.0, max_tt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_b = std::max(max_b, std::abs(dd.b[i]));
    max_a = std::max(max_a, a[i]);
    max_tt = std::max(max_tt, tau_[i] * tau_[i]);
  }
  double max_row_alpha = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) max_row_alpha = std::max(max_row_alpha, std::abs(alpha_[x * n + y]));
  const double kk = static_cast<double>(k);
  bound_ = kk * (max_b / h + max_a / (h * h)) + 0.5 * kk * (kk - 1.0) * max_row_alpha +
           kk * (kk - 1.0) * max_tt / (h * h);
}

double StencilApplier::spectral_bound() const { return bound_; }

void StencilApplier::apply_range(std::span<const double> in, std::span<double> out, std::size_t begin,
                                 std::size_t end) const {
  const std::size_t n = space_.size(), k = degree_;
  const double h = space_.spacing();
  std::vector<std::size_t> stride(k), idx(k);
  for (std::size_t i = 0; i < k; ++i) stride[i] = checked_pow(n, k - 1 - i);

  for (std::size_t s = begin; s < end; ++s) {
    decode_index(s, n, idx);
    const double u0 = in[s];
    double val = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t x = idx[i];
      if (x + 1 < n) val += up_[x] * (in[s + stride[i]] - u0);
      if (x > 0) val += down_[x] * (in[s - stride[i]] - u0);
    }
    if (has_alpha_) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
          const std::size_t xi = idx[i], xj = idx[j];
          if (xi == xj) continue;
          const double a = alpha_[xi * n + xj];
          if (a == 0.0) continue;
          // slot j takes x_i / slot i takes x_j
          const std::size_t to_i = s - xj * stride[j] + xi * stride[j];
          const std::size_t to_j = s - xi * stride[i] + xj * stride[i];
          val += a * (0.5 * (in[to_i] + in[to_j]) - u0);
        }
    }
    if (has_tau_) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
          const double c = tau_[idx[i]] * tau_[idx[j]];
          if (c == 0.0) continue;
          const auto si = detail::derivative_stencil(idx[i], n, h);
          const auto sj = detail::derivative_stencil(idx[j], n, h);
          double acc = 0.0;
          for (int a = 0; a < 3; ++a) {
            if (si.weight[a] == 0.0) continue;
            for (int b = 0; b < 3; ++b) {
              if (sj.weight[b] == 0.0) continue;
              const std::ptrdiff_t off = si.offset[a] * static_cast<std::ptrdiff_t>(stride[i]) +
                                         sj.offset[b] * static_cast<std::ptrdiff_t>(stride[j]);
              acc += si.weight[a] * sj.weight[b] * in[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s) + off)];
            }
          }
          val += c * acc;
        }
    }
    out[s] = val;
  }
}

void StencilApplier::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != states_ || out.size() != states_) throw ArgumentError("stencil apply: wrong vector length");
  detail::parallel_for(states_, 1 << 15, [&](std::size_t b, std::size_t e) { apply_range(in, out, b, e); });
}

CoefficientTensor StencilApplier::apply(const CoefficientTensor& g) const {
  if (!(g.space() == space_) || g.degree() != degree_) throw ArgumentError("stencil apply: tensor mismatch");
  std::vector<double> out(states_);
  apply(g.values(), out);
  return CoefficientTensor::unchecked(space_, degree_, std::move(out));
}

}  // namespace polydiff
