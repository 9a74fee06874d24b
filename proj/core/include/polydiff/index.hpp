#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace polydiff {

// size^k as a double, so callers can compare against budgets without overflow.
double dense_state_count(std::size_t size, std::size_t k);

// size^k; throws ArgumentError if it does not fit in std::size_t.
std::size_t checked_pow(std::size_t size, std::size_t k);

// binom(k + d - 1, k): dimension of the symmetric k-tensors over d points.
double symmetric_basis_size(std::size_t d, std::size_t k);

// Nondecreasing multi-indices (i_1 <= ... <= i_k), one per symmetric basis
// element, in lexicographic order.
std::vector<std::vector<std::size_t>> symmetric_basis(std::size_t d, std::size_t k);

// Row-major mixed radix: (i_1, ..., i_k) -> sum_j i_j d^(k-j).
inline std::size_t encode_index(std::span<const std::size_t> idx, std::size_t d) {
  std::size_t flat = 0;
  for (std::size_t i : idx) flat = flat * d + i;
  return flat;
}

inline void decode_index(std::size_t flat, std::size_t d, std::span<std::size_t> idx) {
  for (std::size_t j = idx.size(); j-- > 0;) {
    idx[j] = flat % d;
    flat /= d;
  }
}

}  // namespace polydiff
