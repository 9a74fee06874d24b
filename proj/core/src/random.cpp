#include "polydiff/random.hpp"

#include <cmath>
#include <numeric>

namespace polydiff {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

std::vector<double> random_simplex_point(Rng& rng, std::size_t d) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> z(d);
  double sum = 0.0;
  for (double& v : z) sum += (v = expo(rng));
  for (double& v : z) v /= sum;
  return z;
}

std::vector<double> random_uniform_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

CoefficientTensor random_symmetric_tensor(Rng& rng, const Space& space, std::size_t k, double lo, double hi) {
  std::size_t size = 1;
  for (std::size_t i = 0; i < k; ++i) size *= space.size();
  return CoefficientTensor::symmetrize(space, k, random_uniform_vector(rng, size, lo, hi));
}

MeasurePolynomial random_polynomial(Rng& rng, const Space& space, std::size_t max_degree) {
  MeasurePolynomial p(space);
  for (std::size_t k = 0; k <= max_degree; ++k) p.add_term(random_symmetric_tensor(rng, space, k));
  return p;
}

McEstimate summarize(std::span<const double> samples) {
  McEstimate out;
  out.samples = samples.size();
  if (samples.empty()) return out;
  const double n = static_cast<double>(samples.size());
  out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - out.mean) * (s - out.mean);
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace polydiff
