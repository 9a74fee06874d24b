#include "polydiff/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polydiff/errors.hpp"
#include "polydiff/index.hpp"

namespace polydiff {

namespace {

void require_same_space(const Space& a, const Space& b, const char* op) {
  if (!(a == b)) throw ArgumentError(std::string(op) + ": space mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

double falling_factorial(std::size_t k, std::size_t l) {
  double out = 1.0;
  for (std::size_t i = 0; i < l; ++i) out *= static_cast<double>(k - i);
  return out;
}

// All size-`k` subsets of {0, ..., total-1}, as membership masks.
std::vector<std::vector<bool>> subsets_of_size(std::size_t total, std::size_t k) {
  std::vector<std::vector<bool>> out;
  std::vector<bool> mask(total, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  // prev_permutation over a sorted-descending mask enumerates every subset once.
  do {
    out.push_back(mask);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

}  // namespace

MeasurePolynomial MeasurePolynomial::constant(Space space, double c) {
  MeasurePolynomial p(space);
  p.add_term(CoefficientTensor::scalar(space, c));
  return p;
}

MeasurePolynomial MeasurePolynomial::monomial(CoefficientTensor g) {
  MeasurePolynomial p(g.space());
  p.add_term(g);
  return p;
}

MeasurePolynomial& MeasurePolynomial::add_term(const CoefficientTensor& g) {
  require_same_space(space_, g.space(), "add_term");
  auto it = terms_.find(g.degree());
  if (it == terms_.end())
    terms_.emplace(g.degree(), g);
  else
    it->second += g;
  return *this;
}

std::size_t MeasurePolynomial::degree() const {
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it)
    if (!it->second.is_zero()) return it->first;
  return 0;
}

MeasurePolynomial& MeasurePolynomial::operator*=(double s) {
  for (auto& [k, g] : terms_) g *= s;
  return *this;
}

CoefficientTensor contract_trailing(const CoefficientTensor& g, const DiscreteMeasure& nu, std::size_t m) {
  require_same_space(g.space(), nu.space(), "contract");
  if (m > g.degree()) throw ArgumentError("contract: more slots than the tensor degree");
  const std::size_t n = nu.size();
  const auto w = nu.weights();
  std::vector<double> cur(g.values().begin(), g.values().end());
  for (std::size_t step = 0; step < m; ++step) {
    std::vector<double> next(cur.size() / n, 0.0);
    for (std::size_t r = 0; r < next.size(); ++r) {
      const double* row = cur.data() + r * n;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += row[i] * w[i];
      next[r] = acc;
    }
    cur = std::move(next);
  }
  return CoefficientTensor::unchecked(g.space(), g.degree() - m, std::move(cur));
}

double eval_monomial(const CoefficientTensor& g, const DiscreteMeasure& nu) {
  return contract_trailing(g, nu, g.degree())[0];
}

double eval_polynomial(const MeasurePolynomial& p, const DiscreteMeasure& nu) {
  require_same_space(p.space(), nu.space(), "eval_polynomial");
  double out = 0.0;
  for (const auto& [k, g] : p.terms()) out += eval_monomial(g, nu);
  return out;
}

CoefficientTensor sym_tensor(const CoefficientTensor& g, const CoefficientTensor& h) {
  require_same_space(g.space(), h.space(), "sym_tensor");
  const std::size_t k = g.degree(), l = h.degree(), total = k + l;
  const std::size_t n = g.space().size();
  const auto subsets = subsets_of_size(total, k);
  std::vector<double> values(checked_pow(n, total), 0.0);
  std::vector<std::size_t> idx(total), gi(k), hi(l);
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    decode_index(flat, n, idx);
    double acc = 0.0;
    for (const auto& mask : subsets) {
      std::size_t a = 0, b = 0;
      for (std::size_t j = 0; j < total; ++j) {
        if (mask[j])
          gi[a++] = idx[j];
        else
          hi[b++] = idx[j];
      }
      acc += g.values()[encode_index(gi, n)] * h.values()[encode_index(hi, n)];
    }
    values[flat] = acc / static_cast<double>(subsets.size());
  }
  return CoefficientTensor::unchecked(g.space(), total, std::move(values));
}

MeasurePolynomial poly_product(const MeasurePolynomial& p, const MeasurePolynomial& q) {
  require_same_space(p.space(), q.space(), "poly_product");
  MeasurePolynomial out(p.space());
  for (const auto& [k, g] : p.terms())
    for (const auto& [l, h] : q.terms()) out.add_term(sym_tensor(g, h));
  return out;
}

CoefficientTensor derivative_tensor(const MeasurePolynomial& p, const DiscreteMeasure& nu, std::size_t order) {
  require_same_space(p.space(), nu.space(), "derivative");
  auto out = CoefficientTensor::constant(p.space(), order, 0.0);
  for (const auto& [k, g] : p.terms()) {
    if (k < order) continue;
    auto part = contract_trailing(g, nu, k - order);
    part *= falling_factorial(k, order);
    out += part;
  }
  return out;
}

std::vector<double> partial_derivative(const MeasurePolynomial& p, const DiscreteMeasure& nu) {
  auto d = derivative_tensor(p, nu, 1);
  return {d.values().begin(), d.values().end()};
}

CoefficientTensor second_derivative(const MeasurePolynomial& p, const DiscreteMeasure& nu) {
  return derivative_tensor(p, nu, 2);
}

CoefficientTensor homogenize(const MeasurePolynomial& p, std::size_t m) {
  if (m < p.degree()) throw ArgumentError("homogenize: target degree below the polynomial degree");
  auto out = CoefficientTensor::constant(p.space(), m, 0.0);
  for (const auto& [k, g] : p.terms()) {
    if (k > m) {
      // Only reachable for vanishing high-degree terms.
      continue;
    }
    out += sym_tensor(g, CoefficientTensor::constant(p.space(), m - k, 1.0));
  }
  return out;
}

CoefficientTensor psi(const CoefficientTensor& g) {
  if (g.degree() != 2) throw ArgumentError("psi expects a degree-2 tensor");
  const std::size_t n = g.space().size();
  std::vector<double> out(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      out[x * n + y] = 0.5 * (g[x * n + x] + g[y * n + y] - 2.0 * g[x * n + y]);
  return CoefficientTensor::unchecked(g.space(), 2, std::move(out));
}

double taylor_eval(const MeasurePolynomial& p, const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
  require_same_space(p.space(), mu.space(), "taylor_eval");
  const std::size_t deg = p.terms().empty() ? 0 : p.terms().rbegin()->first;
  double out = 0.0, factorial = 1.0;
  for (std::size_t l = 0; l <= deg; ++l) {
    if (l > 0) factorial *= static_cast<double>(l);
    out += eval_monomial(derivative_tensor(p, nu, l), mu) / factorial;
  }
  return out;
}

}  // namespace polydiff
