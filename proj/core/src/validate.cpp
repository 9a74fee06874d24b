#include "polydiff/validate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include "json.hpp"
#include <numeric>

#include "parallel.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/moments_finite.hpp"
#include "polydiff/moments_grid.hpp"
#include "polydiff/random.hpp"
#include "polydiff/simulate.hpp"

namespace polydiff {

namespace {

using Vec = std::vector<double>;

DiscreteMeasure as_measure(const Space& s, const Vec& z) { return DiscreteMeasure::signed_measure(s, z); }

double objective(const MeasurePolynomial& p, const Vec& z) { return eval_polynomial(p, as_measure(p.space(), z)); }

Vec gradient(const MeasurePolynomial& p, const Vec& z) { return partial_derivative(p, as_measure(p.space(), z)); }

// Euclidean projection onto the simplex (sort and threshold).
Vec project_simplex(const Vec& v) {
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vec x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = std::max(v[i] - theta, 0.0);
  return x;
}

Vec gradient_ascent(const MeasurePolynomial& p, Vec z, const MaximizerOptions& opt) {
  double step = 1.0;
  double fz = objective(p, z);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    const Vec g = gradient(p, z);
    bool moved = false;
    for (int bt = 0; bt < 80; ++bt) {
      Vec cand(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) cand[i] = z[i] + step * g[i];
      cand = project_simplex(cand);
      double slope = 0.0, dmax = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        slope += g[i] * (cand[i] - z[i]);
        dmax = std::max(dmax, std::abs(cand[i] - z[i]));
      }
      if (dmax < opt.step_tolerance) break;
      const double fc = objective(p, cand);
      if (fc >= fz + 1e-4 * slope) {
        z = std::move(cand);
        fz = fc;
        step = std::min(step * 2.0, 1e6);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return z;
}

std::vector<std::size_t> support_of(const Vec& z) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] > KktReport::kSupportTolerance) s.push_back(i);
  return s;
}

Eigen::MatrixXd hessian(const MeasurePolynomial& p, const Vec& z) {
  const std::size_t d = z.size();
  const CoefficientTensor H = second_derivative(p, as_measure(p.space(), z));
  Eigen::MatrixXd m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = H[i * d + j];
  return m;
}

// Newton iteration on ∂_i p = λ (i ∈ S), Σ_S z = 1. Stops when the face
// would be left or the residual stops shrinking.
Vec polish_face(const MeasurePolynomial& p, Vec z) {
  const auto S = support_of(z);
  if (S.empty()) return z;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (std::find(S.begin(), S.end(), i) == S.end()) z[i] = 0.0;
  const double mass = std::accumulate(z.begin(), z.end(), 0.0);
  for (double& v : z) v /= mass;
  if (S.size() == 1) return z;

  const std::size_t m = S.size();
  auto residual = [&](const Vec& x, double lambda) {
    const Vec g = gradient(p, x);
    Eigen::VectorXd F(m + 1);
    double sum = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      F(a) = g[S[a]] - lambda;
      sum += x[S[a]];
    }
    F(m) = sum - 1.0;
    return F;
  };
  double lambda = 0.0;
  {
    const Vec g = gradient(p, z);
    for (std::size_t i : S) lambda += g[i] / static_cast<double>(m);
  }
  Eigen::VectorXd F = residual(z, lambda);
  for (int it = 0; it < 40 && F.lpNorm<Eigen::Infinity>() > 1e-15; ++it) {
    const Eigen::MatrixXd H = hessian(p, z);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) J(a, b) = H(S[a], S[b]);
      J(a, m) = -1.0;
      J(m, a) = 1.0;
    }
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-F);
    Vec cand = z;
    bool inside = true;
    for (std::size_t a = 0; a < m; ++a) {
      cand[S[a]] += step(a);
      if (cand[S[a]] <= 0.0) inside = false;
    }
    if (!inside) break;
    const double cand_lambda = lambda + step(m);
    const Eigen::VectorXd Fc = residual(cand, cand_lambda);
    if (!(Fc.lpNorm<Eigen::Infinity>() < F.lpNorm<Eigen::Infinity>())) break;
    z = std::move(cand);
    lambda = cand_lambda;
    F = Fc;
  }
  const double total = std::accumulate(z.begin(), z.end(), 0.0);
  for (double& v : z) v /= total;
  return z;
}

Vec maximize_from(const MeasurePolynomial& p, Vec z, const MaximizerOptions& opt) {
  for (int round = 0; round < 8; ++round) {
    z = gradient_ascent(p, std::move(z), opt);
    const Vec polished = polish_face(p, z);
    if (objective(p, polished) >= objective(p, z) - 1e-12) z = polished;
    const Vec g = gradient(p, z);
    const auto S = support_of(z);
    double top_in = -std::numeric_limits<double>::infinity(), top_out = top_in;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (std::find(S.begin(), S.end(), i) != S.end())
        top_in = std::max(top_in, g[i]);
      else
        top_out = std::max(top_out, g[i]);
    }
    if (top_out <= top_in + 1e-9) break;
  }
  return z;
}

}  // namespace

DiscreteMeasure find_simplex_maximizer(const MeasurePolynomial& p, std::size_t restarts, std::uint64_t seed,
                                       const MaximizerOptions& options) {
  const std::size_t d = p.space().size();
  Vec best;
  double best_value = -std::numeric_limits<double>::infinity();
  const std::size_t starts = std::max<std::size_t>(restarts, 1);
  for (std::size_t r = 0; r < starts + d; ++r) {
    Vec z0;
    if (r < starts) {
      Rng rng = make_rng(seed, r);
      z0 = random_simplex_point(rng, d);
    } else {
      z0.assign(d, 0.0);  // vertices too: maximizers often sit there
      z0[r - starts] = 1.0;
    }
    Vec z = maximize_from(p, std::move(z0), options);
    const double v = objective(p, z);
    if (v > best_value) {
      best_value = v;
      best = std::move(z);
    }
  }
  return DiscreteMeasure::probability(p.space(), best);
}

KktReport check_kkt(const MeasurePolynomial& p, const DiscreteMeasure& maximizer, std::uint64_t seed,
                    std::size_t samples) {
  if (maximizer.space() != p.space()) throw ArgumentError("maximizer lives on a different space");
  KktReport r{maximizer, {}, 0.0, 0.0, 0.0, 0.0};
  const Vec z(maximizer.weights().begin(), maximizer.weights().end());
  r.support = support_of(z);
  r.value = eval_polynomial(p, maximizer);
  const Vec g = partial_derivative(p, maximizer);
  const double top = *std::max_element(g.begin(), g.end());
  for (std::size_t i : r.support) r.first_order_residual = std::max(r.first_order_residual, std::abs(g[i] - top));

  const Eigen::MatrixXd H = hessian(p, z);
  const auto& S = r.support;
  for (std::size_t a = 0; a < S.size(); ++a)
    for (std::size_t b = a + 1; b < S.size(); ++b)
      r.second_order_worst =
          std::max(r.second_order_worst, 0.5 * (H(S[a], S[a]) + H(S[b], S[b]) - 2.0 * H(S[a], S[b])));

  if (S.size() > 1) {
    Rng rng = make_rng(seed, 0x6b6b74);
    std::normal_distribution<double> normal;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
      Eigen::VectorXd mu(S.size());
      for (auto& v : mu) v = normal(rng);
      mu.array() -= mu.mean();
      const double nrm = mu.squaredNorm();
      if (nrm == 0.0) continue;
      double q = 0.0;
      for (std::size_t a = 0; a < S.size(); ++a)
        for (std::size_t b = 0; b < S.size(); ++b) q += H(S[a], S[b]) * mu(a) * mu(b);
      worst = std::max(worst, q / nrm);
    }
    r.centered_worst = std::isfinite(worst) ? worst : 0.0;
  }
  return r;
}

double check_pmp(const GeneratorSpec& spec, const MeasurePolynomial& p, const DiscreteMeasure& maximizer) {
  return apply_generator(spec, p, maximizer);
}

double PmpSuiteResult::worst() const {
  double w = -std::numeric_limits<double>::infinity();
  for (double v : generator_values) w = std::max(w, v);
  return w;
}

PmpSuiteResult run_pmp_suite(const GeneratorSpec& spec, std::size_t polynomials, std::size_t max_degree,
                             std::uint64_t seed, std::size_t restarts) {
  PmpSuiteResult out;
  for (std::size_t i = 0; i < polynomials; ++i) {
    Rng rng = make_rng(seed, i);
    const MeasurePolynomial p = random_polynomial(rng, spec.space(), max_degree);
    const DiscreteMeasure star = find_simplex_maximizer(p, restarts, split_seed(seed, i));
    if (!check_kkt(p, star, i).passed()) ++out.kkt_failures;
    out.generator_values.push_back(check_pmp(spec, p, star));
  }
  return out;
}

ComparisonRow compare(std::string statistic, double engine, double oracle_mean, double oracle_se,
                      double bias_allowance, double z_threshold) {
  ComparisonRow row{std::move(statistic), engine, oracle_mean, oracle_se, bias_allowance};
  const double diff = oracle_mean - engine;
  if (oracle_se > 0.0)
    row.z = diff / oracle_se;
  else
    row.z = std::abs(diff) <= bias_allowance ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  row.pass = std::abs(diff) <= z_threshold * oracle_se + bias_allowance;
  return row;
}

bool ComparisonTable::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string ComparisonTable::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["passed"] = passed();
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"statistic", r.statistic},
                         {"engine", r.engine},
                         {"oracle_mean", r.oracle_mean},
                         {"oracle_se", r.oracle_se},
                         {"bias_allowance", r.bias_allowance},
                         {"z", finite_or_null(r.z)},
                         {"pass", r.pass}});
  return j.dump(2);
}

std::string to_json(const KktReport& report) {
  nlohmann::json j;
  j["maximizer"] = std::vector<double>(report.maximizer.weights().begin(), report.maximizer.weights().end());
  j["support"] = report.support;
  j["value"] = report.value;
  j["first_order_residual"] = report.first_order_residual;
  j["second_order_worst"] = report.second_order_worst;
  j["centered_worst"] = report.centered_worst;
  j["passed"] = report.passed();
  return j.dump(2);
}

namespace {

// Euler bias of the simplex SDE: twice the leading term α² T dt / 2 of the
// heterozygosity decay, relative to the value.
double euler_allowance(double alpha, double T, double dt, double value) {
  return alpha * alpha * T * dt * std::abs(value);
}

CoefficientTensor offdiagonal(const Space& s) {
  const std::size_t d = s.size();
  Vec v(d * d, 1.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 0.0;
  return CoefficientTensor(s, 2, std::move(v));
}

// Smooth ramp to zero over the outer `width` of the interval.
double taper(const Space& s, double x, double width) {
  const double dist = std::min(x - s.x_min(), s.x_max() - x);
  if (dist >= width) return 1.0;
  if (dist <= 0.0) return 0.0;
  const double c = std::sin(0.5 * M_PI * dist / width);
  return c * c;
}

Vec sde_samples(const GeneratorSpec& spec, const Vec& z0, const Vec& times, double dt, std::size_t paths,
                std::uint64_t seed, const std::function<double(const Vec&, std::size_t)>& stat) {
  const std::size_t nt = times.size();
  Vec out(paths * nt);
  detail::parallel_for(paths, 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const SimplexPath path = simulate_simplex_sde(spec, z0, times.back(), dt, split_seed(seed, p), times);
      for (std::size_t t = 0; t < nt; ++t) {
        const auto it = std::find_if(path.times.begin(), path.times.end(),
                                     [&](double s) { return std::abs(s - times[t]) < 1e-12; });
        out[t * paths + p] = stat(path.weights[static_cast<std::size_t>(it - path.times.begin())], t);
      }
    }
  });
  return out;
}

ComparisonTable heterozygosity(const CrosscheckScenario& sc) {
  ComparisonTable table{sc.id, {}};
  const GeneratorSpec spec = GeneratorSpec::fleming_viot(2, sc.alpha);
  const Space s = spec.space();
  const CoefficientTensor g = offdiagonal(s);
  const Vec z0{sc.z, 1.0 - sc.z};
  const DiscreteMeasure nu = DiscreteMeasure::probability(s, z0);
  const DualOperator dual = build_dual(spec, 2);
  const MomentSolution sol = propagate_snapshots(dual.rate_matrix(), g, sc.times);

  const Vec sde = sde_samples(spec, z0, sc.times, sc.dt, sc.paths, split_seed(sc.seed, 1),
                              [](const Vec& z, std::size_t) { return 2.0 * z[0] * z[1]; });
  Vec moran(sc.repetitions * sc.times.size());
  detail::parallel_for(sc.repetitions, 4, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      MoranOptions opt;
      opt.record_times = sc.times;
      const EnsemblePath path =
          simulate_moran(spec, nu, sc.particles, sc.times.back(), split_seed(split_seed(sc.seed, 2), r), opt);
      for (std::size_t t = 0; t < sc.times.size(); ++t)
        moran[t * sc.repetitions + r] = empirical_moment(path.snapshots[t + 1], g);
    }
  });

  for (std::size_t t = 0; t < sc.times.size(); ++t) {
    const double T = sc.times[t];
    const double exact = 2.0 * sc.z * (1.0 - sc.z) * std::exp(-sc.alpha * T);
    const double engine = eval_monomial(sol.u[t], nu);
    const std::string at = "T=" + nlohmann::json(T).dump();
    table.rows.push_back(compare("exact " + at, engine, exact, 0.0, 1e-10, sc.z_threshold));
    const McEstimate se = summarize(std::span(sde).subspan(t * sc.paths, sc.paths));
    table.rows.push_back(compare("simplex-sde " + at, engine, se.mean, se.std_error,
                                 euler_allowance(sc.alpha, T, sc.dt, engine), sc.z_threshold));
    // The V-statistic decays at exactly rate α for this g: no finite-N bias.
    const McEstimate me = summarize(std::span(moran).subspan(t * sc.repetitions, sc.repetitions));
    table.rows.push_back(compare("moran " + at, engine, me.mean, me.std_error, 0.0, sc.z_threshold));
  }
  return table;
}

ComparisonTable tower(const CrosscheckScenario& sc) {
  ComparisonTable table{sc.id, {}};
  const GeneratorSpec spec = GeneratorSpec::fleming_viot(2, sc.alpha);
  const Space s = spec.space();
  const CoefficientTensor g = offdiagonal(s);
  const Vec z0{sc.z, 1.0 - sc.z};
  const DiscreteMeasure nu = DiscreteMeasure::probability(s, z0);
  const DualOperator op = build_dual(spec, 2);
  const RateMatrix& dual = op.rate_matrix();
  for (double T : sc.times) {
    const double t = 0.5 * T;
    const CoefficientTensor uT = propagate(dual, g, T);
    const CoefficientTensor rest = propagate(dual, g, T - t);
    const double engine = eval_monomial(uT, nu);
    const Vec at_t{t};
    const Vec samples = sde_samples(spec, z0, at_t, sc.dt, sc.paths, split_seed(sc.seed, 3),
                                    [&](const Vec& z, std::size_t) { return eval_monomial(rest, as_measure(s, z)); });
    const McEstimate e = summarize(samples);
    table.rows.push_back(compare("tower T=" + nlohmann::json(T).dump() + " t=" + nlohmann::json(t).dump(), engine,
                                 e.mean, e.std_error, euler_allowance(sc.alpha, t, sc.dt, engine), sc.z_threshold));
  }
  return table;
}

ComparisonTable common_noise(const CrosscheckScenario& sc) {
  ComparisonTable table{sc.id, {}};
  const double L = sc.half_width;
  const double ramp = std::min(1.0, 0.25 * L);
  auto build = [&](std::size_t n) {
    const Space s = Space::grid(sc.x0 - L, sc.x0 + L, n);
    DriftDiffusion dd{Vec(n, 0.0), Vec(n, 0.0), Vec(n)};
    for (std::size_t i = 0; i < n; ++i) dd.tau[i] = sc.tau * taper(s, s.node(i), ramp);
    return GeneratorSpec(s, dd, Vec(n * n, 0.0));
  };
  auto bump = [&](double x) { return std::exp(-0.5 * (x - sc.x0) * (x - sc.x0) / (sc.bump_width * sc.bump_width)); };
  auto moment = [&](const GeneratorSpec& spec) {
    const Space& s = spec.space();
    const std::size_t n = s.size();
    Vec h(n), dh(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = s.node(i);
      h[i] = bump(x);
      dh[i] = -(x - sc.x0) / (sc.bump_width * sc.bump_width) * h[i];
    }
    Vec d1(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d1[i * n + j] = dh[i] * h[j];
    const CoefficientTensor g = CoefficientTensor::power(s, h, 2).with_slot_derivative(std::move(d1));
    Vec out;
    const StencilApplier op = discretize_dual_grid(spec, 2);
    const MomentSolution sol = solve_moment_pide(op, g, sc.times);
    const DiscreteMeasure nu = DiscreteMeasure::dirac(s, (n - 1) / 2);
    for (const auto& u : sol.u) out.push_back(eval_monomial(u, nu));
    return std::pair{out, g};
  };
  const GeneratorSpec spec = build(sc.grid_n);
  const GeneratorSpec fine = build(2 * sc.grid_n - 1);
  const auto [coarse, g] = moment(spec);
  const Vec refined = moment(fine).first;

  Vec particle(sc.repetitions * sc.times.size());
  detail::parallel_for(sc.repetitions, 4, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const EnsemblePath path = simulate_common_noise(spec, sc.x0, sc.particles, sc.times.back(), sc.dt,
                                                      split_seed(split_seed(sc.seed, 4), r), sc.times);
      for (std::size_t t = 0; t < sc.times.size(); ++t)
        particle[t * sc.repetitions + r] = empirical_moment(path.snapshots[t + 1], g);
    }
  });

  const double h2 = spec.space().spacing() * spec.space().spacing();
  for (std::size_t t = 0; t < sc.times.size(); ++t) {
    const double T = sc.times[t];
    const std::string at = "T=" + nlohmann::json(T).dump();
    // Richardson: the fine grid halves h, so the coarse error is ~4/3 of the gap.
    const double disc = 4.0 / 3.0 * std::abs(coarse[t] - refined[t]);
    // E[h(x0 + τ√T ξ)²] by composite Simpson on ξ ∈ [-10, 10].
    const double sd = sc.tau * std::sqrt(T);
    const std::size_t m = 4000;
    double quad = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      const double xi = -10.0 + 20.0 * static_cast<double>(i) / m;
      const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double hv = bump(sc.x0 + sd * xi);
      quad += w * hv * hv * std::exp(-0.5 * xi * xi);
    }
    quad *= 20.0 / m / 3.0 / std::sqrt(2.0 * M_PI);
    table.rows.push_back(compare("quadrature " + at, coarse[t], quad, 0.0, 2.0 * disc + 1e-9, sc.z_threshold));
    // Interpolating h² between nodes overshoots by at most h² max|(h²)''| / 8.
    const double interp = h2 / (4.0 * sc.bump_width * sc.bump_width);
    const McEstimate e = summarize(std::span(particle).subspan(t * sc.repetitions, sc.repetitions));
    table.rows.push_back(
        compare("particles " + at, coarse[t], e.mean, e.std_error, 2.0 * disc + interp, sc.z_threshold));
  }
  return table;
}

ComparisonTable martingale(const CrosscheckScenario& sc) {
  ComparisonTable table{sc.id, {}};
  const std::size_t d = 5;
  Rng rng = make_rng(sc.seed, 5);
  const Space s = Space::finite(d);
  Vec alpha(d * d, 0.0);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) alpha[i * d + j] = alpha[j * d + i] = sc.alpha * unif(rng);
  const GeneratorSpec spec(s, JumpKernel{Vec(d * d, 0.0)}, alpha);
  const Vec z0 = random_simplex_point(rng, d);
  const DiscreteMeasure nu = DiscreteMeasure::probability(s, z0);
  const double T = sc.times.back();

  std::vector<Vec> hs;
  for (int i = 0; i < 5; ++i) hs.push_back(random_uniform_vector(rng, d, -1.0, 1.0));
  auto pair = [](const Vec& h, std::span<const double> w) {
    return std::inner_product(h.begin(), h.end(), w.begin(), 0.0);
  };
  // One set of paths serves all five h.
  std::vector<Vec> sde_final(sc.paths), moran_final(sc.repetitions);
  detail::parallel_for(sc.paths, 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p)
      sde_final[p] = simulate_simplex_sde(spec, z0, T, sc.dt, split_seed(split_seed(sc.seed, 6), p)).final_weights();
  });
  detail::parallel_for(sc.repetitions, 4, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const EnsemblePath path = simulate_moran(spec, nu, sc.particles, T, split_seed(split_seed(sc.seed, 20), r));
      const auto w = empirical_measure(path.final_state()).weights();
      moran_final[r].assign(w.begin(), w.end());
    }
  });
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double engine = pair(hs[k], z0);
    Vec sde(sc.paths), moran(sc.repetitions);
    for (std::size_t p = 0; p < sc.paths; ++p) sde[p] = pair(hs[k], sde_final[p]);
    for (std::size_t r = 0; r < sc.repetitions; ++r) moran[r] = pair(hs[k], moran_final[r]);
    const McEstimate e = summarize(sde);
    table.rows.push_back(compare("simplex-sde h" + std::to_string(k), engine, e.mean, e.std_error, 0.0, sc.z_threshold));
    const McEstimate m = summarize(moran);
    table.rows.push_back(compare("moran h" + std::to_string(k), engine, m.mean, m.std_error, 0.0, sc.z_threshold));
  }

  // Grid: affine h is B-harmonic away from the ends.
  const std::size_t n = sc.grid_n;
  const Space gs = Space::grid(sc.x0 - sc.half_width, sc.x0 + sc.half_width, n);
  DriftDiffusion dd{Vec(n, 0.0), Vec(n), Vec(n)};
  const double ramp = std::min(1.0, 0.25 * sc.half_width);
  for (std::size_t i = 0; i < n; ++i) {
    dd.sigma[i] = sc.tau * taper(gs, gs.node(i), ramp);
    dd.tau[i] = sc.tau * taper(gs, gs.node(i), ramp);
  }
  const GeneratorSpec grid_spec(gs, dd, Vec(n * n, 0.0));
  std::vector<Vec> grid_final(sc.repetitions);
  detail::parallel_for(sc.repetitions, 4, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const EnsemblePath path =
          simulate_common_noise(grid_spec, sc.x0, sc.particles, T, sc.dt, split_seed(split_seed(sc.seed, 40), r));
      const auto w = empirical_measure(path.final_state()).weights();
      grid_final[r].assign(w.begin(), w.end());
    }
  });
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const double a = hs[k][0], b = hs[k][1];
    Vec h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = a + b * gs.node(i);
    Vec vals(sc.repetitions);
    for (std::size_t r = 0; r < sc.repetitions; ++r) vals[r] = pair(h, grid_final[r]);
    const McEstimate e = summarize(vals);
    table.rows.push_back(
        compare("common-noise h" + std::to_string(k), a + b * sc.x0, e.mean, e.std_error, 0.0, sc.z_threshold));
  }
  return table;
}

}  // namespace

ComparisonTable crosscheck_moments(const CrosscheckScenario& sc) {
  if (sc.times.empty() || !std::is_sorted(sc.times.begin(), sc.times.end()) || sc.times.front() <= 0.0)
    throw ArgumentError("crosscheck times must be positive and increasing");
  if (!(sc.z > 0.0 && sc.z < 1.0)) throw ArgumentError("z must lie in (0, 1)");
  if (sc.id == "heterozygosity") return heterozygosity(sc);
  if (sc.id == "tower") return tower(sc);
  if (sc.id == "common-noise") {
    if (sc.grid_n % 2 == 0) throw ArgumentError("common-noise grid needs an odd node count (x0 at the centre)");
    return common_noise(sc);
  }
  if (sc.id == "martingale") return martingale(sc);
  throw ArgumentError("unknown crosscheck scenario '" + sc.id +
                      "' (available: heterozygosity, tower, common-noise, martingale)");
}

}  // namespace polydiff
