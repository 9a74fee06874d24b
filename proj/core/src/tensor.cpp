#include "polydiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "polydiff/errors.hpp"
#include "polydiff/index.hpp"

namespace polydiff {

namespace {

// Largest |g(x) - g(x with slots j, j+1 swapped)|; adjacent transpositions
// generate the symmetric group, so zero here means fully symmetric.
double adjacent_swap_deviation(std::span<const double> values, std::size_t n, std::size_t k) {
  if (k < 2) return 0.0;
  std::vector<std::size_t> idx(k);
  double worst = 0.0;
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    decode_index(flat, n, idx);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      if (idx[j] == idx[j + 1]) continue;
      std::swap(idx[j], idx[j + 1]);
      worst = std::max(worst, std::abs(values[flat] - values[encode_index(idx, n)]));
      std::swap(idx[j], idx[j + 1]);
    }
  }
  return worst;
}

}  // namespace

std::vector<double> symmetrized_values(std::span<const double> values, std::size_t n, std::size_t degree) {
  std::vector<double> out(values.begin(), values.end());
  if (degree < 2) return out;
  std::vector<std::size_t> perm(degree);
  std::iota(perm.begin(), perm.end(), 0);
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<std::size_t> idx(degree), permuted(degree);
  std::size_t count = 0;
  do {
    ++count;
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
      decode_index(flat, n, idx);
      for (std::size_t j = 0; j < degree; ++j) permuted[j] = idx[perm[j]];
      out[flat] += values[encode_index(permuted, n)];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& v : out) v /= static_cast<double>(count);
  // Summation order differs across an orbit; copy the sorted representative so
  // the result is symmetric bit for bit.
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    decode_index(flat, n, idx);
    std::sort(idx.begin(), idx.end());
    out[flat] = out[encode_index(idx, n)];
  }
  return out;
}

CoefficientTensor::CoefficientTensor(Space space, std::size_t degree, std::vector<double> values, Trusted)
    : space_(space), degree_(degree), values_(std::move(values)) {
  if (values_.size() != checked_pow(space_.size(), degree_)) {
    std::ostringstream os;
    os << "coefficient tensor of degree " << degree_ << " on " << space_.describe() << " needs "
       << checked_pow(space_.size(), degree_) << " values, got " << values_.size();
    throw ArgumentError(os.str());
  }
}

CoefficientTensor::CoefficientTensor(Space space, std::size_t degree, std::vector<double> values)
    : CoefficientTensor(space, degree, std::move(values), Trusted{}) {
  const double dev = adjacent_swap_deviation(values_, space_.size(), degree_);
  if (dev > kSymmetryTolerance) {
    std::ostringstream os;
    os << "coefficient tensor is not symmetric (deviation " << dev << " > " << kSymmetryTolerance << ")";
    throw InvariantError(os.str());
  }
  if (dev > 0.0) values_ = symmetrized_values(values_, space_.size(), degree_);
}

CoefficientTensor CoefficientTensor::scalar(Space space, double value) {
  return CoefficientTensor(space, 0, {value}, Trusted{});
}

CoefficientTensor CoefficientTensor::constant(Space space, std::size_t degree, double value) {
  return CoefficientTensor(space, degree, std::vector<double>(checked_pow(space.size(), degree), value), Trusted{});
}

CoefficientTensor CoefficientTensor::from_function(Space space, std::vector<double> h) {
  return CoefficientTensor(space, 1, std::move(h), Trusted{});
}

CoefficientTensor CoefficientTensor::power(Space space, std::span<const double> h, std::size_t k) {
  if (h.size() != space.size()) throw ArgumentError("power: h has wrong length");
  const std::size_t n = space.size();
  std::vector<double> values(checked_pow(n, k), 1.0);
  std::vector<std::size_t> idx(k);
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    decode_index(flat, n, idx);
    double prod = 1.0;
    for (std::size_t i : idx) prod *= h[i];
    values[flat] = prod;
  }
  return CoefficientTensor(space, k, std::move(values), Trusted{});
}

CoefficientTensor CoefficientTensor::symmetrize(Space space, std::size_t degree, std::vector<double> values) {
  CoefficientTensor t(space, degree, std::move(values), Trusted{});
  t.values_ = symmetrized_values(t.values_, space.size(), degree);
  return t;
}

CoefficientTensor CoefficientTensor::unchecked(Space space, std::size_t degree, std::vector<double> values) {
  return CoefficientTensor(space, degree, std::move(values), Trusted{});
}

double CoefficientTensor::at(std::span<const std::size_t> idx) const {
  if (idx.size() != degree_) throw ArgumentError("tensor index has wrong arity");
  return values_[encode_index(idx, space_.size())];
}

double CoefficientTensor::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool CoefficientTensor::is_zero(double tol) const { return max_abs() <= tol; }

double CoefficientTensor::symmetry_deviation() const {
  return adjacent_swap_deviation(values_, space_.size(), degree_);
}

CoefficientTensor CoefficientTensor::with_slot_derivative(std::vector<double> d1) const {
  if (!space_.is_grid()) throw ArgumentError("slot derivatives are only meaningful on grid spaces");
  if (d1.size() != values_.size()) throw ArgumentError("slot derivative has wrong shape");
  CoefficientTensor out = *this;
  out.slot_derivative_ = std::move(d1);
  return out;
}

CoefficientTensor& CoefficientTensor::operator+=(const CoefficientTensor& other) {
  if (!(space_ == other.space_) || degree_ != other.degree_)
    throw ArgumentError("tensor addition needs matching space and degree");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  slot_derivative_.reset();
  return *this;
}

CoefficientTensor& CoefficientTensor::operator*=(double s) {
  for (double& v : values_) v *= s;
  if (slot_derivative_)
    for (double& v : *slot_derivative_) v *= s;
  return *this;
}

}  // namespace polydiff
