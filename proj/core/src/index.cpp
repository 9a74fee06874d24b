#include "polydiff/index.hpp"

#include <cmath>
#include <limits>

#include "polydiff/errors.hpp"

namespace polydiff {

double dense_state_count(std::size_t size, std::size_t k) {
  return std::pow(static_cast<double>(size), static_cast<double>(k));
}

std::size_t checked_pow(std::size_t size, std::size_t k) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (size != 0 && out > std::numeric_limits<std::size_t>::max() / size)
      throw ArgumentError("size^k overflows");
    out *= size;
  }
  return out;
}

double symmetric_basis_size(std::size_t d, std::size_t k) {
  // binom(k + d - 1, k), accumulated as a product of ratios.
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    out = out * static_cast<double>(d - 1 + i) / static_cast<double>(i);
  return std::round(out);
}

std::vector<std::vector<std::size_t>> symmetric_basis(std::size_t d, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (d == 0) return out;
  std::vector<std::size_t> idx(k, 0);
  while (true) {
    out.push_back(idx);
    // Advance to the next nondecreasing tuple.
    std::size_t j = k;
    while (j > 0 && idx[j - 1] == d - 1) --j;
    if (j == 0) break;
    const std::size_t v = idx[j - 1] + 1;
    for (std::size_t i = j - 1; i < k; ++i) idx[i] = v;
  }
  return out;
}

}  // namespace polydiff
