#include "polydiff/moments_finite.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/index.hpp"
#include "polydiff/polynomial.hpp"

namespace polydiff {

namespace {

constexpr double kPoissonTail = 1e-12;
constexpr double kMaxChunkIntensity = 32.0;

// One uniformization chunk: e^{λ (P - I)} applied to v, λ = Λ dt.
std::vector<double> uniformize_chunk(const RateMatrix& dual, std::vector<double> v, double lambda, double rate) {
  const std::size_t n = v.size();
  std::vector<double> acc(n, 0.0), lv(n);
  double weight = std::exp(-lambda), cumulative = 0.0;
  const auto max_terms = static_cast<std::size_t>(lambda + 20.0 * std::sqrt(lambda) + 60.0);
  for (std::size_t m = 0;; ++m) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += weight * v[i];
    cumulative += weight;
    if ((1.0 - cumulative < kPoissonTail && static_cast<double>(m) >= lambda) || m >= max_terms) break;
    // v <- P v = v + L v / Λ
    dual.apply(v, lv);
    for (std::size_t i = 0; i < n; ++i) v[i] += lv[i] / rate;
    weight *= lambda / static_cast<double>(m + 1);
  }
  return acc;
}

}  // namespace

CoefficientTensor propagate(const RateMatrix& dual, const CoefficientTensor& g, double t) {
  if (!(t >= 0.0)) throw ArgumentError("propagate: time must be >= 0");
  if (g.degree() != dual.degree() || !(g.space() == dual.space()))
    throw ArgumentError("propagate: tensor does not match the dual operator");
  dual.check_generator();
  const double rate = dual.max_exit_rate();
  std::vector<double> v(g.values().begin(), g.values().end());
  if (t == 0.0 || rate == 0.0) return CoefficientTensor::unchecked(g.space(), g.degree(), std::move(v));

  const double total = rate * t;
  const auto chunks = static_cast<std::size_t>(std::ceil(total / kMaxChunkIntensity));
  const double lambda = total / static_cast<double>(chunks);
  for (std::size_t c = 0; c < chunks; ++c) v = uniformize_chunk(dual, std::move(v), lambda, rate);
  return CoefficientTensor::unchecked(g.space(), g.degree(), std::move(v));
}

MomentSolution propagate_snapshots(const RateMatrix& dual, const CoefficientTensor& g, std::span<const double> times) {
  MomentSolution sol;
  sol.degree = g.degree();
  double prev_t = 0.0;
  CoefficientTensor cur = g;
  for (double t : times) {
    if (t < prev_t) throw ArgumentError("snapshot times must be nondecreasing and >= 0");
    cur = propagate(dual, cur, t - prev_t);
    prev_t = t;
    sol.times.push_back(t);
    sol.u.push_back(cur);
  }
  return sol;
}

double moment_finite(const GeneratorSpec& spec, const CoefficientTensor& g, const DiscreteMeasure& nu, double T) {
  if (!spec.space().is_finite()) throw ArgumentError("moment_finite needs a finite space");
  if (g.degree() == 0) return g[0];
  const auto dual = build_dual(spec, g.degree());
  return eval_monomial(propagate(dual.rate_matrix(), g, T), nu);
}

McEstimate simulate_dual_chain(const RateMatrix& dual, const CoefficientTensor& g,
                               std::span<const std::size_t> x0, double T, std::size_t n_paths, std::uint64_t seed) {
  if (x0.size() != dual.degree()) throw ArgumentError("dual chain start has wrong arity");
  const auto& m = dual.matrix();
  const std::size_t start = encode_index(x0, dual.space().size());
  std::vector<double> out(n_paths);

  detail::parallel_for(n_paths, 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_rng(seed, p);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::size_t state = start;
      double t = 0.0;
      while (true) {
        double exit = 0.0;
        for (RateMatrix::Matrix::InnerIterator it(m, static_cast<Eigen::Index>(state)); it; ++it)
          if (static_cast<std::size_t>(it.col()) != state) exit += it.value();
        if (exit <= 0.0) break;
        t += std::exponential_distribution<double>(exit)(rng);
        if (t > T) break;
        double pick = unif(rng) * exit;
        std::size_t next = state;
        for (RateMatrix::Matrix::InnerIterator it(m, static_cast<Eigen::Index>(state)); it; ++it) {
          if (static_cast<std::size_t>(it.col()) == state) continue;
          next = static_cast<std::size_t>(it.col());
          pick -= it.value();
          if (pick <= 0.0) break;
        }
        state = next;
      }
      out[p] = g[state];
    }
  });
  return summarize(out);
}

}  // namespace polydiff
