#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/generator.hpp"
#include "polydiff/moments_grid.hpp"
#include "polydiff/polynomial.hpp"
#include "polydiff/random.hpp"

using namespace polydiff;
using oracle::Vec;

namespace {

bool has_violation(const ValidationReport& r, const std::string& needle) {
  for (const auto& v : r.violations)
    if (v.find(needle) != std::string::npos) return true;
  return false;
}

GeneratorSpec grid_spec(std::size_t n, double b, double sigma, double tau, double alpha, double lo = -1.0, double hi = 1.0) {
  DriftDiffusion dd{Vec(n, b), Vec(n, sigma), Vec(n, tau)};
  dd.sigma.front() = dd.sigma.back() = 0.0;
  dd.tau.front() = dd.tau.back() = 0.0;
  return GeneratorSpec(Space::grid(lo, hi, n), dd, constant_alpha(n, alpha));
}

DiscreteMeasure random_prob(Rng& rng, const Space& s) { return DiscreteMeasure::probability(s, random_simplex_point(rng, s.size())); }

// Lf(z) for f(z) = p(Σ z_i δ_i) read as a diffusion on the simplex:
// drift b_k(z) = Σ_i (ν_B(i,k) z_i - ν_B(k,i) z_k), covariance
// a_kl = -α z_k z_l (k≠l), a_kk = Σ_{l≠k} α z_k z_l; derivatives of f by
// central differences in the weights.
double simplex_generator_fd(const GeneratorSpec& spec, const MeasurePolynomial& p, const Vec& z) {
  const std::size_t d = z.size();
  const Space& s = spec.space();
  auto f = [&](const Vec& w) { return eval_polynomial(p, DiscreteMeasure::signed_measure(s, w)); };
  const double e = 1e-4;
  double total = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double bk = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (i != k) bk += spec.kernel(i, k) * z[i] - spec.kernel(k, i) * z[k];
    Vec up = z, dn = z;
    up[k] += e;
    dn[k] -= e;
    total += bk * (f(up) - f(dn)) / (2 * e);
  }
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) {
      double a = 0.0;
      if (k == l) {
        for (std::size_t m = 0; m < d; ++m)
          if (m != k) a += spec.alpha(k, m) * z[k] * z[m];
      } else {
        a = -spec.alpha(k, l) * z[k] * z[l];
      }
      auto shifted = [&](double sk, double sl) {
        Vec w = z;
        w[k] += sk;
        w[l] += sl;
        return f(w);
      };
      const double second = (shifted(e, e) - shifted(e, -e) - shifted(-e, e) + shifted(-e, -e)) / (4 * e * e);
      total += 0.5 * a * second;
    }
  return total;
}

}  // namespace

TEST(ValidateSpec, FlemingViotIsAdmissible) {
  EXPECT_TRUE(validate_spec(GeneratorSpec::fleming_viot(3, 1.5)).ok());
  Rng rng = make_rng(1, 0);
  EXPECT_TRUE(validate_spec(oracle::random_finite_spec(rng, 4)).ok());
}

TEST(ValidateSpec, ReportsEachViolation) {
  Vec alpha = constant_alpha(3, 1.0);
  alpha[1 * 3 + 2] = 2.0;
  const GeneratorSpec asym(Space::finite(3), JumpKernel{Vec(9, 0.0)}, alpha);
  EXPECT_TRUE(has_violation(validate_spec(asym), "α not symmetric"));

  Vec neg = constant_alpha(3, 1.0);
  neg[1] = neg[3] = -0.5;
  EXPECT_TRUE(has_violation(validate_spec(GeneratorSpec(Space::finite(3), JumpKernel{Vec(9, 0.0)}, neg)), "negative"));

  Vec kernel(9, 0.0);
  kernel[1] = -1.0;
  EXPECT_FALSE(validate_spec(GeneratorSpec(Space::finite(3), JumpKernel{kernel}, constant_alpha(3, 1.0))).ok());

  DriftDiffusion dd{Vec(7, 0.0), Vec(7, 0.0), Vec(7, 0.0)};
  dd.tau.back() = 0.3;
  const GeneratorSpec g(Space::grid(0.0, 1.0, 7), dd, Vec(49, 0.0));
  EXPECT_TRUE(has_violation(validate_spec(g), "boundary tangency"));
  EXPECT_THROW(discretize_dual_grid(g, 2), ArgumentError);
}

TEST(ValidateSpec, DiagonalOfAlphaIsIgnored) {
  Vec alpha(4, 3.0);
  const GeneratorSpec spec(Space::finite(2), JumpKernel{Vec(4, 0.0)}, alpha);
  EXPECT_EQ(spec.alpha(0, 0), 0.0);
  EXPECT_EQ(spec.alpha(0, 1), 3.0);
}

TEST(ApplyB, Examples) {
  Rng rng = make_rng(2, 0);
  const auto spec = oracle::random_finite_spec(rng, 4);
  for (double v : apply_B(spec, Vec(4, 2.5))) EXPECT_EQ(v, 0.0);

  const double lambda = 0.7, mu = 1.9;
  const GeneratorSpec two(Space::finite(2), JumpKernel{{0.0, lambda, mu, 0.0}}, Vec(4, 0.0));
  const Vec bh = apply_B(two, Vec{1.0, 0.0});
  EXPECT_DOUBLE_EQ(bh[0], -lambda);
  EXPECT_DOUBLE_EQ(bh[1], mu);

  const auto g = grid_spec(21, 0.1, 0.4, 0.3, 0.0);
  for (double v : apply_B(g, Vec(21, -1.0))) EXPECT_NEAR(v, 0.0, 1e-12);
  Vec x(21);
  for (std::size_t i = 0; i < 21; ++i) x[i] = g.space().node(i);
  const Vec bx = apply_B(g, x);
  for (std::size_t i = 1; i + 1 < 21; ++i) EXPECT_NEAR(bx[i], 0.1, 1e-12);
}

TEST(ApplyQ, Examples) {
  const GeneratorSpec two(Space::finite(2), JumpKernel{Vec(4, 0.0)}, constant_alpha(2, 2.0));
  const auto q = apply_Q(two, CoefficientTensor::power(two.space(), Vec{1.0, 0.0}, 2));
  EXPECT_DOUBLE_EQ(q[0 * 2 + 1], 1.0);
  EXPECT_TRUE(apply_Q(two, CoefficientTensor::constant(two.space(), 2, 3.0)).is_zero(1e-15));

  DriftDiffusion dd{Vec(11, 0.0), Vec(11, 0.0), Vec(11, 1.0)};
  const GeneratorSpec g(Space::grid(-1.0, 1.0, 11), dd, Vec(121, 0.0));
  Vec x(11);
  for (std::size_t i = 0; i < 11; ++i) x[i] = g.space().node(i);
  const auto qg = apply_Q(g, CoefficientTensor::power(g.space(), x, 2));
  for (std::size_t i = 1; i + 1 < 11; ++i)
    for (std::size_t j = 1; j + 1 < 11; ++j) EXPECT_NEAR(qg[i * 11 + j], 1.0, 1e-12);
}

TEST(ApplyGenerator, Examples) {
  Rng rng = make_rng(3, 0);
  const auto spec = oracle::random_finite_spec(rng, 3);
  EXPECT_NEAR(apply_generator(spec, MeasurePolynomial::constant(spec.space(), 4.0), random_prob(rng, spec.space())), 0.0,
              1e-15);

  const auto fv = GeneratorSpec::fleming_viot(3, 1.3);
  const auto lin = MeasurePolynomial::monomial(CoefficientTensor::from_function(fv.space(), random_uniform_vector(rng, 3, -1, 1)));
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(apply_generator(fv, lin, random_prob(rng, fv.space())), 0.0, 1e-15);

  const auto two = GeneratorSpec::fleming_viot(2, 2.0);
  const auto sq = MeasurePolynomial::monomial(CoefficientTensor::power(two.space(), Vec{1.0, 0.0}, 2));
  EXPECT_NEAR(apply_generator(two, sq, DiscreteMeasure::uniform(two.space())), 0.5, 1e-15);
}

TEST(ApplyGenerator, MatchesSimplexDiffusionGenerator) {
  Rng rng = make_rng(4, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = oracle::random_finite_spec(rng, 3);
    const auto p = random_polynomial(rng, spec.space(), 3);
    const Vec z = random_simplex_point(rng, 3);
    EXPECT_NEAR(apply_generator(spec, p, DiscreteMeasure::probability(spec.space(), z)),
                simplex_generator_fd(spec, p, z), 1e-6);
  }
}

TEST(ApplyGenerator, DegreeIsPreserved) {
  // Along a segment ν(t) in the simplex, t ↦ Lp(ν(t)) is a polynomial of
  // degree <= deg p, so its (deg p + 1)-th finite difference vanishes.
  Rng rng = make_rng(5, 0);
  for (std::size_t deg = 1; deg <= 3; ++deg)
    for (int rep = 0; rep < 5; ++rep) {
      const auto spec = oracle::random_finite_spec(rng, 4);
      const auto p = random_polynomial(rng, spec.space(), deg);
      const Vec a = random_simplex_point(rng, 4), b = random_simplex_point(rng, 4);
      Vec vals;
      for (std::size_t m = 0; m <= deg + 1; ++m) {
        const double t = static_cast<double>(m) / static_cast<double>(deg + 1);
        Vec w(4);
        for (std::size_t i = 0; i < 4; ++i) w[i] = (1 - t) * a[i] + t * b[i];
        vals.push_back(apply_generator(spec, p, DiscreteMeasure::probability(spec.space(), w)));
      }
      for (std::size_t order = 0; order <= deg; ++order)
        for (std::size_t i = 0; i + 1 < vals.size() - order; ++i) vals[i] = vals[i + 1] - vals[i];
      EXPECT_NEAR(vals[0], 0.0, 1e-10) << "deg " << deg;
    }
}

TEST(BuildDual, DegreeOneIsB) {
  Rng rng = make_rng(6, 0);
  const auto spec = oracle::random_finite_spec(rng, 4);
  const auto dual = build_dual(spec, 1);
  const Vec h = random_uniform_vector(rng, 4, -1, 1);
  const auto lh = dual.apply(CoefficientTensor::from_function(spec.space(), h));
  const Vec bh = apply_B(spec, h);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(lh[i], bh[i], 1e-15);

  const auto g = grid_spec(15, 0.2, 0.5, 0.4, 0.0);
  const Vec hg = random_uniform_vector(rng, 15, -1, 1);
  const auto lg = discretize_dual_grid(g, 1).apply(CoefficientTensor::from_function(g.space(), hg));
  const Vec bg = apply_B(g, hg);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(lg[i], bg[i], 1e-12);
}

TEST(BuildDual, TwoPointExchangeRates) {
  const GeneratorSpec spec(Space::finite(2), JumpKernel{Vec(4, 0.0)}, constant_alpha(2, 2.0));
  const auto m = build_dual(spec, 2).rate_matrix().matrix();
  const Eigen::MatrixXd dense(m);
  // state (0,1) has flat index 1; (0,0) = 0, (1,1) = 3
  EXPECT_DOUBLE_EQ(dense(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(dense(1, 3), 1.0);
  EXPECT_DOUBLE_EQ(dense(1, 1), -2.0);
  EXPECT_DOUBLE_EQ(dense(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(dense.row(0).cwiseAbs().sum(), 0.0);
}

TEST(BuildDual, MatchesDirectJumpDescription) {
  Rng rng = make_rng(7, 0);
  for (std::size_t d = 2; d <= 4; ++d)
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto spec = oracle::random_finite_spec(rng, d);
      const auto dual = build_dual(spec, k);
      const Eigen::MatrixXd mine(dual.rate_matrix().matrix());
      const Eigen::MatrixXd ref = oracle::dual_matrix(spec, k);
      EXPECT_LE((mine - ref).cwiseAbs().maxCoeff(), 1e-14) << "d=" << d << " k=" << k;
      EXPECT_NO_THROW(dual.rate_matrix().check_generator());
      for (Eigen::Index r = 0; r < mine.rows(); ++r) {
        EXPECT_NEAR(mine.row(r).sum(), 0.0, 1e-12);
        for (Eigen::Index c = 0; c < mine.cols(); ++c)
          if (c != r) EXPECT_GE(mine(r, c), 0.0);
      }
    }
}

TEST(BuildDual, DualityIdentityFinite) {
  Rng rng = make_rng(8, 0);
  for (int rep = 0; rep < 10; ++rep)
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto spec = oracle::random_finite_spec(rng, 2 + rep % 3);
      const auto g = random_symmetric_tensor(rng, spec.space(), k);
      const auto lg = build_dual(spec, k).apply(g);
      const auto p = MeasurePolynomial::monomial(g);
      for (int i = 0; i < 20; ++i) {
        const auto nu = random_prob(rng, spec.space());
        EXPECT_NEAR(apply_generator(spec, p, nu), eval_monomial(lg, nu), 1e-10);
      }
    }
}

TEST(BuildDual, LimitsAndMemoryGuard) {
  const auto spec = GeneratorSpec::fleming_viot(3, 1.0);
  EXPECT_THROW(build_dual(spec, 0), ArgumentError);
  EXPECT_THROW(build_dual(spec, 5), ArgumentError);
  try {
    check_state_budget(1000, 3);
    FAIL() << "expected the memory guard";
  } catch (const MemoryGuardError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1000^3 = 1000000000"), std::string::npos) << msg;
    EXPECT_NE(msg.find("binom(1002, 3) = 167167000"), std::string::npos) << msg;
    EXPECT_DOUBLE_EQ(e.dense_states(), 1e9);
    EXPECT_DOUBLE_EQ(e.symmetric_states(), 167167000.0);
  }
}

TEST(StencilApplier, AnnihilatesConstantsAndMatchesTermwiseForm) {
  const auto spec = grid_spec(17, 0.3, 0.6, 0.0, 1.7);
  const auto op = discretize_dual_grid(spec, 2);
  EXPECT_LE(op.apply(CoefficientTensor::constant(spec.space(), 2, 1.0)).max_abs(), 1e-12);

  Rng rng = make_rng(9, 0);
  const std::size_t n = 17;
  const Vec h = random_uniform_vector(rng, n, -1, 1);
  const auto hh = CoefficientTensor::power(spec.space(), h, 2);
  const auto out = op.apply(hh);
  const Vec bh = apply_B(spec, h);
  const auto ps = psi(hh);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double expect = bh[x] * h[y] + h[x] * bh[y] + spec.alpha(x, y) * ps[x * n + y];
      EXPECT_NEAR(out[x * n + y], expect, 1e-12);
    }

  const auto with_tau = grid_spec(17, 0.3, 0.6, 0.5, 1.0);
  EXPECT_LE(discretize_dual_grid(with_tau, 3).apply(CoefficientTensor::constant(with_tau.space(), 3, 1.0)).max_abs(),
            1e-12);
}

TEST(StencilApplier, DualityIdentityOnGrid) {
  // The stencil, apply_B and apply_Q share the same discrete operators, so
  // the identity holds to rounding on the grid.
  Rng rng = make_rng(10, 0);
  const auto spec = grid_spec(13, -0.2, 0.5, 0.4, 0.8);
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto g = random_symmetric_tensor(rng, spec.space(), k);
    const auto lg = discretize_dual_grid(spec, k).apply(g);
    const auto p = MeasurePolynomial::monomial(g);
    for (int i = 0; i < 10; ++i) {
      const auto nu = random_prob(rng, spec.space());
      EXPECT_NEAR(apply_generator(spec, p, nu), eval_monomial(lg, nu), 1e-9) << "k=" << k;
    }
  }
}

TEST(CarreDuChamp, Examples) {
  Rng rng = make_rng(11, 0);
  const auto spec = oracle::random_finite_spec(rng, 3);
  const Space& s = spec.space();
  const auto one = MeasurePolynomial::constant(s, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_polynomial(rng, s, 2);
    const auto nu = random_prob(rng, s);
    EXPECT_NEAR(carre_du_champ(spec, one, p, nu), 0.0, 1e-12);
    EXPECT_GE(carre_du_champ(spec, p, p, nu), -1e-12);
  }
  const Vec h = random_uniform_vector(rng, 3, -1, 1);
  const auto lin = MeasurePolynomial::monomial(CoefficientTensor::from_function(s, h));
  const auto q = apply_Q(spec, CoefficientTensor::power(s, h, 2));
  for (int i = 0; i < 10; ++i) {
    const auto nu = random_prob(rng, s);
    EXPECT_NEAR(carre_du_champ(spec, lin, lin, nu), eval_monomial(q, nu), 1e-11);
  }
}

TEST(CarreDuChamp, SymmetricAndLeibniz) {
  Rng rng = make_rng(12, 0);
  const auto spec = oracle::random_finite_spec(rng, 3);
  const Space& s = spec.space();
  for (int i = 0; i < 10; ++i) {
    const auto p = random_polynomial(rng, s, 1), q = random_polynomial(rng, s, 2), r = random_polynomial(rng, s, 1);
    const auto nu = random_prob(rng, s);
    EXPECT_NEAR(carre_du_champ(spec, p, q, nu), carre_du_champ(spec, q, p, nu), 1e-11);
    const double lhs = carre_du_champ(spec, poly_product(p, q), r, nu);
    const double rhs = eval_polynomial(p, nu) * carre_du_champ(spec, q, r, nu) +
                       eval_polynomial(q, nu) * carre_du_champ(spec, p, r, nu);
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}
