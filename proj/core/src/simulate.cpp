#include "polydiff/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/polynomial.hpp"

namespace polydiff {

namespace {

// Splits [0, T] at the record times; every interval is stepped with the
// largest step <= dt that lands on its end point.
std::vector<double> checkpoints(double T, std::span<const double> record_times) {
  std::vector<double> out;
  for (double t : record_times) {
    if (!(t >= 0.0 && t <= T)) throw ArgumentError("record times must lie in [0, T]");
    out.push_back(t);
  }
  out.push_back(T);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.front() == 0.0) out.erase(out.begin());
  return out;
}

std::size_t steps_for(double span, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
}

struct Bracket {
  std::size_t i;
  double w;  // weight of node i + 1
};

Bracket bracket(const Space& s, double x) {
  const double h = s.spacing();
  const double r = std::clamp((x - s.x_min()) / h, 0.0, static_cast<double>(s.size() - 1));
  auto i = static_cast<std::size_t>(std::floor(r));
  if (i + 1 >= s.size()) i = s.size() - 2;
  return {i, r - static_cast<double>(i)};
}

}  // namespace

std::vector<double> simplex_drift(const GeneratorSpec& spec, std::span<const double> z) {
  const std::size_t d = spec.space().size();
  std::vector<double> b(d, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i) b[k] += spec.kernel(i, k) * z[i] - spec.kernel(k, i) * z[k];
  return b;
}

std::vector<double> simplex_covariance(const GeneratorSpec& spec, std::span<const double> z) {
  const std::size_t d = spec.space().size();
  std::vector<double> a(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) {
      if (k == l) continue;
      const double c = spec.alpha(k, l) * z[k] * z[l];
      a[k * d + l] = -c;
      a[k * d + k] += c;
    }
  return a;
}

std::vector<double> simplex_noise_loadings(const GeneratorSpec& spec, std::span<const double> z) {
  const std::size_t d = spec.space().size();
  const std::size_t pairs = d * (d - 1) / 2;
  std::vector<double> m(d * pairs, 0.0);
  std::size_t col = 0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j, ++col) {
      const double c = std::sqrt(std::max(0.0, spec.alpha(i, j) * z[i] * z[j]));
      m[i * pairs + col] = c;
      m[j * pairs + col] = -c;
    }
  return m;
}

SimplexPath simulate_simplex_sde(const GeneratorSpec& spec, std::span<const double> z0, double T, double dt,
                                 std::uint64_t seed, std::span<const double> record_times) {
  if (!spec.space().is_finite()) throw ArgumentError("simplex SDE needs a finite space");
  if (!(dt > 0.0)) throw ArgumentError("simplex SDE: dt must be positive");
  if (!(T >= 0.0)) throw ArgumentError("simplex SDE: T must be >= 0");
  const std::size_t d = spec.space().size();
  if (z0.size() != d) throw ArgumentError("simplex SDE: z0 has wrong length");
  double mass = 0.0;
  for (double v : z0) {
    if (v < -1e-9) throw ArgumentError("simplex SDE: z0 is off the simplex");
    mass += v;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw ArgumentError("simplex SDE: z0 is off the simplex");

  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(z0.begin(), z0.end());
  SimplexPath path;
  path.times.push_back(0.0);
  path.weights.push_back(z);
  std::vector<double> noise(d);

  double t = 0.0;
  for (double target : checkpoints(T, record_times)) {
    const std::size_t steps = steps_for(target - t, dt);
    const double h = (target - t) / static_cast<double>(steps), sq = std::sqrt(h);
    for (std::size_t s = 0; s < steps; ++s) {
      const auto b = simplex_drift(spec, z);
      std::fill(noise.begin(), noise.end(), 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
          const double c = std::sqrt(std::max(0.0, spec.alpha(i, j) * z[i] * z[j]));
          const double dw = sq * normal(rng);
          noise[i] += c * dw;
          noise[j] -= c * dw;
        }
      double sum = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        z[i] = std::max(0.0, z[i] + b[i] * h + noise[i]);
        sum += z[i];
      }
      for (double& v : z) v /= sum;
    }
    t = target;
    path.times.push_back(t);
    path.weights.push_back(z);
  }
  return path;
}

ParticleEnsemble allocate_particles(const DiscreteMeasure& nu, std::size_t N) {
  if (N == 0) throw ArgumentError("need at least one particle");
  const std::size_t n = nu.size();
  std::vector<std::size_t> counts(n);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = nu[i] * static_cast<double>(N);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < N; ++r, ++assigned) ++counts[remainders[r % n].second];
  while (assigned > N) {
    // Only possible through the +1e-9 guard; take from the largest count.
    --counts[static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin())];
    --assigned;
  }

  ParticleEnsemble e{nu.space(), {}, {}, 0.0, 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < counts[i]; ++c) {
      if (nu.space().is_finite())
        e.labels.push_back(i);
      else
        e.positions.push_back(nu.space().node(i));
    }
  return e;
}

double interpolate(const Space& space, std::span<const double> values, double x) {
  const auto br = bracket(space, x);
  return (1.0 - br.w) * values[br.i] + br.w * values[br.i + 1];
}

DiscreteMeasure empirical_measure(const ParticleEnsemble& ensemble) {
  const std::size_t n = ensemble.space.size();
  std::vector<double> w(n, 0.0);
  const double inv = 1.0 / static_cast<double>(ensemble.size());
  if (ensemble.space.is_finite()) {
    for (std::size_t l : ensemble.labels) w[l] += inv;
  } else {
    for (double x : ensemble.positions) {
      const auto br = bracket(ensemble.space, x);
      w[br.i] += (1.0 - br.w) * inv;
      w[br.i + 1] += br.w * inv;
    }
  }
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return DiscreteMeasure::probability(ensemble.space, std::move(w));
}

double empirical_moment(const ParticleEnsemble& ensemble, const CoefficientTensor& g) {
  if (!(g.space() == ensemble.space)) throw ArgumentError("empirical_moment: space mismatch");
  return eval_monomial(g, empirical_measure(ensemble));
}

namespace {

void moran_finite(const GeneratorSpec& spec, ParticleEnsemble& e, double T_end, Rng& rng, EnsemblePath& path) {
  const std::size_t d = spec.space().size();
  const std::size_t N = e.labels.size();
  std::vector<double> exit(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) exit[i] += spec.kernel(i, j);
  const double max_exit = *std::max_element(exit.begin(), exit.end());
  const double max_alpha = spec.max_alpha();
  const double mut_rate = static_cast<double>(N) * max_exit;
  const double res_rate = 0.5 * max_alpha * static_cast<double>(N) * static_cast<double>(N - 1);
  const double total = mut_rate + res_rate;
  if (total <= 0.0) {
    e.time = T_end;
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> clock(total);
  std::uniform_int_distribution<std::size_t> pick(0, N - 1), pick_other(0, N - 2);
  while (true) {
    const double t = e.time + clock(rng);
    if (t > T_end) break;
    e.time = t;
    if (unif(rng) * total < mut_rate) {
      const std::size_t p = pick(rng);
      const std::size_t from = e.labels[p];
      double u = unif(rng) * max_exit;
      if (u >= exit[from]) continue;  // thinned
      for (std::size_t j = 0; j < d; ++j) {
        u -= spec.kernel(from, j);
        if (u < 0.0) {
          e.labels[p] = j;
          break;
        }
      }
      ++path.mutation_events;
    } else {
      const std::size_t i = pick(rng);
      std::size_t j = pick_other(rng);
      if (j >= i) ++j;
      if (unif(rng) * max_alpha >= spec.alpha(e.labels[i], e.labels[j])) continue;
      e.labels[j] = e.labels[i];
      ++path.resampling_events;
    }
  }
  e.time = T_end;
}

double interp_alpha(const GeneratorSpec& spec, double x, double y) {
  const auto& s = spec.space();
  const std::size_t n = s.size();
  const auto bx = bracket(s, x), by = bracket(s, y);
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double w = (a ? bx.w : 1.0 - bx.w) * (b ? by.w : 1.0 - by.w);
      if (w != 0.0) acc += w * spec.alpha(bx.i + static_cast<std::size_t>(a), by.i + static_cast<std::size_t>(b));
    }
  (void)n;
  return acc;
}

void diffuse_step(const GeneratorSpec& spec, std::vector<double>& x, double h, Rng& rng,
                  std::normal_distribution<double>& normal) {
  const auto& s = spec.space();
  const auto& dd = spec.drift_diffusion();
  const double sq = std::sqrt(h);
  const double common = sq * normal(rng);
  for (double& xi : x) {
    const double b = interpolate(s, dd.b, xi);
    const double sig = interpolate(s, dd.sigma, xi);
    const double tau = interpolate(s, dd.tau, xi);
    xi = std::clamp(xi + b * h + sig * sq * normal(rng) + tau * common, s.x_min(), s.x_max());
  }
}

void moran_grid(const GeneratorSpec& spec, ParticleEnsemble& e, double T_end, double dt, Rng& rng,
                EnsemblePath& path) {
  const std::size_t N = e.positions.size();
  const double max_alpha = spec.max_alpha();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, N - 1), pick_other(0, N - 2);
  const std::size_t steps = steps_for(T_end - e.time, dt);
  const double h = (T_end - e.time) / static_cast<double>(steps);
  std::poisson_distribution<std::size_t> proposals(0.5 * max_alpha * static_cast<double>(N) *
                                                   static_cast<double>(N - 1) * h);
  for (std::size_t s = 0; s < steps; ++s) {
    diffuse_step(spec, e.positions, h, rng, normal);
    if (max_alpha <= 0.0) continue;
    const std::size_t m = proposals(rng);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = pick(rng);
      std::size_t j = pick_other(rng);
      if (j >= i) ++j;
      if (unif(rng) * max_alpha >= interp_alpha(spec, e.positions[i], e.positions[j])) continue;
      e.positions[j] = e.positions[i];
      ++path.resampling_events;
    }
  }
  e.time = T_end;
}

}  // namespace

EnsemblePath simulate_moran(const GeneratorSpec& spec, const ParticleEnsemble& initial, double T,
                            std::uint64_t seed, const MoranOptions& options) {
  if (initial.size() < 2) throw ArgumentError("Moran simulation needs N >= 2");
  if (!(initial.space == spec.space())) throw ArgumentError("Moran simulation: space mismatch");
  if (!(T >= 0.0)) throw ArgumentError("Moran simulation: T must be >= 0");
  const auto report = validate_spec(spec);
  if (!report.ok()) throw ArgumentError("Moran simulation needs an admissible spec: " + report.violations.front());
  if (spec.space().is_grid() && !(options.dt > 0.0)) throw ArgumentError("Moran simulation: dt must be positive");

  Rng rng = make_rng(seed, 0);
  EnsemblePath path;
  ParticleEnsemble e = initial;
  e.time = 0.0;
  e.stream = seed;
  path.snapshots.push_back(e);
  for (double target : checkpoints(T, options.record_times)) {
    if (spec.space().is_finite())
      moran_finite(spec, e, target, rng, path);
    else
      moran_grid(spec, e, target, options.dt, rng, path);
    path.snapshots.push_back(e);
  }
  return path;
}

EnsemblePath simulate_moran(const GeneratorSpec& spec, const DiscreteMeasure& initial, std::size_t N, double T,
                            std::uint64_t seed, const MoranOptions& options) {
  if (N < 2) throw ArgumentError("Moran simulation needs N >= 2");
  return simulate_moran(spec, allocate_particles(initial, N), T, seed, options);
}

EnsemblePath simulate_common_noise(const GeneratorSpec& spec, double x0, std::size_t N, double T, double dt,
                                   std::uint64_t seed, std::span<const double> record_times) {
  if (!spec.space().is_grid()) throw ArgumentError("common-noise particle system needs a grid space");
  if (spec.max_alpha() != 0.0 || std::any_of(spec.alpha().begin(), spec.alpha().end(), [](double a) { return a != 0.0; }))
    throw ArgumentError("common-noise particle system requires α = 0; use simulate_moran for α > 0");
  if (N < 1) throw ArgumentError("need at least one particle");
  if (!(dt > 0.0)) throw ArgumentError("common-noise particle system: dt must be positive");
  const auto& s = spec.space();
  if (x0 < s.x_min() || x0 > s.x_max()) throw ArgumentError("x0 outside the grid interval");

  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  EnsemblePath path;
  ParticleEnsemble e{s, {}, std::vector<double>(N, x0), 0.0, seed};
  path.snapshots.push_back(e);
  for (double target : checkpoints(T, record_times)) {
    const std::size_t steps = steps_for(target - e.time, dt);
    const double h = (target - e.time) / static_cast<double>(steps);
    for (std::size_t st = 0; st < steps; ++st) diffuse_step(spec, e.positions, h, rng, normal);
    e.time = target;
    path.snapshots.push_back(e);
  }
  return path;
}

McEstimate feynman_kac_estimate(const GeneratorSpec& spec, std::span<const double> h, double x0, double T,
                                double dt, std::size_t n_paths, std::uint64_t seed) {
  const auto& s = spec.space();
  if (!s.is_grid()) throw ArgumentError("Feynman-Kac estimate needs a grid space");
  if (h.size() != s.size()) throw ArgumentError("Feynman-Kac estimate: h has wrong length");
  if (!(dt > 0.0)) throw ArgumentError("Feynman-Kac estimate: dt must be positive");
  const auto& dd = spec.drift_diffusion();
  std::vector<double> vol(s.size());
  for (std::size_t i = 0; i < vol.size(); ++i) vol[i] = std::sqrt(spec.total_variance(i));
  const std::size_t steps = steps_for(T, dt);
  const double step = T / static_cast<double>(steps), sq = std::sqrt(step);
  std::vector<double> out(n_paths);
  detail::parallel_for(n_paths, 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Rng rng = make_rng(seed, p);
      std::normal_distribution<double> normal(0.0, 1.0);
      double x = x0;
      for (std::size_t k = 0; k < steps; ++k)
        x = std::clamp(x + interpolate(s, dd.b, x) * step + interpolate(s, vol, x) * sq * normal(rng), s.x_min(),
                       s.x_max());
      out[p] = interpolate(s, h, x);
    }
  });
  return summarize(out);
}

}  // namespace polydiff
