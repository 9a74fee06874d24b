#include "polydiff/generator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "grid_ops.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/index.hpp"

namespace polydiff {

namespace {

void require_same_space(const Space& a, const Space& b, const char* op) {
  if (!(a == b)) throw ArgumentError(std::string(op) + ": space mismatch (" + a.describe() + " vs " + b.describe() + ")");
}

std::vector<double> total_variance_array(const GeneratorSpec& spec) {
  std::vector<double> a(spec.space().size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = spec.total_variance(i);
  return a;
}

}  // namespace

GeneratorSpec::GeneratorSpec(Space space, Mutation mutation, std::vector<double> alpha)
    : space_(space), mutation_(std::move(mutation)), alpha_(std::move(alpha)) {
  const std::size_t n = space_.size();
  if (alpha_.size() != n * n) throw ArgumentError("alpha must be an n×n matrix over the space");
  if (auto* jk = std::get_if<JumpKernel>(&mutation_)) {
    if (!space_.is_finite()) throw ArgumentError("jump kernels are only supported on finite spaces");
    if (jk->rates.empty()) jk->rates.assign(n * n, 0.0);
    if (jk->rates.size() != n * n) throw ArgumentError("jump kernel must be d×d");
    for (std::size_t i = 0; i < n; ++i) jk->rates[i * n + i] = 0.0;
  } else {
    auto& dd = std::get<DriftDiffusion>(mutation_);
    if (!space_.is_grid()) throw ArgumentError("drift-diffusion mutation needs a grid space");
    for (auto* v : {&dd.b, &dd.sigma, &dd.tau}) {
      if (v->empty()) v->assign(n, 0.0);
      if (v->size() != n) throw ArgumentError("drift/volatility arrays must have one value per grid node");
    }
  }
  for (std::size_t i = 0; i < n; ++i) alpha_[i * n + i] = 0.0;
}

GeneratorSpec GeneratorSpec::fleming_viot(std::size_t d, double alpha) {
  return GeneratorSpec(Space::finite(d), JumpKernel{}, constant_alpha(d, alpha));
}

double GeneratorSpec::max_alpha() const {
  double m = 0.0;
  for (double a : alpha_) m = std::max(m, a);
  return m;
}

double GeneratorSpec::kernel(std::size_t i, std::size_t j) const {
  if (!has_jump_kernel() || i == j) return 0.0;
  return jump_kernel().rates[i * space_.size() + j];
}

double GeneratorSpec::total_variance(std::size_t i) const {
  if (has_jump_kernel()) return 0.0;
  const auto& dd = drift_diffusion();
  return dd.sigma[i] * dd.sigma[i] + dd.tau[i] * dd.tau[i];
}

std::vector<double> constant_alpha(std::size_t n, double value) {
  std::vector<double> a(n * n, value);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 0.0;
  return a;
}

ValidationReport validate_spec(const GeneratorSpec& spec) {
  ValidationReport report;
  auto add = [&](const std::string& msg) { report.violations.push_back(msg); };
  const std::size_t n = spec.space().size();

  bool asym = false, negative = false, nonfinite = false;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double a = spec.alpha(x, y);
      if (!std::isfinite(a)) nonfinite = true;
      if (a < 0.0) negative = true;
      if (std::abs(a - spec.alpha(y, x)) > 1e-12 * std::max(1.0, std::abs(a))) asym = true;
    }
  if (nonfinite) add("α has non-finite entries");
  if (asym) add("α not symmetric");
  if (negative) add("α has negative entries");

  if (spec.has_jump_kernel()) {
    bool neg = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!(spec.kernel(i, j) >= 0.0)) neg = true;
    if (neg) add("ν_B has negative or non-finite entries");
  } else {
    const auto& dd = spec.drift_diffusion();
    for (const auto* v : {&dd.b, &dd.sigma, &dd.tau})
      for (double x : *v)
        if (!std::isfinite(x)) {
          add("drift/volatility arrays have non-finite entries");
          goto done_finite;
        }
  done_finite:
    if (dd.tau.front() != 0.0) add("boundary tangency: τ(x_min) != 0");
    if (dd.tau.back() != 0.0) add("boundary tangency: τ(x_max) != 0");
    if (dd.sigma.front() != 0.0) add("boundary conservativity: σ(x_min) != 0");
    if (dd.sigma.back() != 0.0) add("boundary conservativity: σ(x_max) != 0");
  }
  return report;
}

std::vector<double> apply_B(const GeneratorSpec& spec, std::span<const double> h) {
  const std::size_t n = spec.space().size();
  if (h.size() != n) throw ArgumentError("apply_B: function has wrong length");
  std::vector<double> out(n, 0.0);
  if (spec.has_jump_kernel()) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) acc += spec.kernel(i, j) * (h[j] - h[i]);
      out[i] = acc;
    }
    return out;
  }
  const auto rates = detail::node_rates(spec.drift_diffusion().b, total_variance_array(spec), spec.space().spacing());
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    if (i + 1 < n) acc += rates.up[i] * (h[i + 1] - h[i]);
    if (i > 0) acc += rates.down[i] * (h[i - 1] - h[i]);
    out[i] = acc;
  }
  return out;
}

CoefficientTensor apply_Q(const GeneratorSpec& spec, const CoefficientTensor& G) {
  require_same_space(spec.space(), G.space(), "apply_Q");
  if (G.degree() != 2) throw ArgumentError("apply_Q expects a degree-2 tensor");
  const std::size_t n = spec.space().size();
  auto exchange = psi(G);
  std::vector<double> out(exchange.values().begin(), exchange.values().end());
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) out[x * n + y] *= spec.alpha(x, y);

  if (!spec.has_jump_kernel()) {
    const auto& tau = spec.drift_diffusion().tau;
    const double h = spec.space().spacing();
    // Rows of ∂_x G: analytic when supplied, otherwise differenced in slot 1.
    std::vector<double> dx(n * n);
    if (G.slot_derivative()) {
      dx = *G.slot_derivative();
    } else {
      std::vector<double> col(n);
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) col[x] = G[x * n + y];
        const auto d = detail::first_derivative(col, h);
        for (std::size_t x = 0; x < n; ++x) dx[x * n + y] = d[x];
      }
    }
    std::vector<double> mixed(n * n);
    for (std::size_t x = 0; x < n; ++x) {
      const auto d = detail::first_derivative(std::span<const double>(dx.data() + x * n, n), h);
      std::copy(d.begin(), d.end(), mixed.begin() + static_cast<std::ptrdiff_t>(x * n));
    }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const double m = 0.5 * (mixed[x * n + y] + mixed[y * n + x]);
        out[x * n + y] += tau[x] * tau[y] * m;
      }
  }
  return CoefficientTensor::unchecked(G.space(), 2, std::move(out));
}

double apply_generator(const GeneratorSpec& spec, const MeasurePolynomial& p, const DiscreteMeasure& nu) {
  require_same_space(spec.space(), p.space(), "apply_generator");
  require_same_space(spec.space(), nu.space(), "apply_generator");
  const auto dp = partial_derivative(p, nu);
  const auto bdp = apply_B(spec, dp);
  double drift = 0.0;
  for (std::size_t i = 0; i < bdp.size(); ++i) drift += bdp[i] * nu[i];
  const auto q = apply_Q(spec, second_derivative(p, nu));
  return drift + 0.5 * eval_monomial(q, nu);
}

double carre_du_champ(const GeneratorSpec& spec, const MeasurePolynomial& p, const MeasurePolynomial& q,
                      const DiscreteMeasure& nu) {
  const double lpq = apply_generator(spec, poly_product(p, q), nu);
  const double lp = apply_generator(spec, p, nu);
  const double lq = apply_generator(spec, q, nu);
  return lpq - eval_polynomial(p, nu) * lq - eval_polynomial(q, nu) * lp;
}

RateMatrix::RateMatrix(Space space, std::size_t degree, Matrix matrix)
    : space_(space), degree_(degree), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.rows()) != checked_pow(space_.size(), degree_) || matrix_.rows() != matrix_.cols())
    throw ArgumentError("rate matrix has wrong shape for E^k");
  matrix_.makeCompressed();
}

double RateMatrix::max_exit_rate() const {
  double m = 0.0;
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r)
    for (Matrix::InnerIterator it(matrix_, r); it; ++it)
      if (it.col() == r) m = std::max(m, -it.value());
  return m;
}

void RateMatrix::check_generator(double tol) const {
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    double sum = 0.0, scale = 0.0;
    for (Matrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.col() != r && it.value() < 0.0) {
        std::ostringstream os;
        os << "rate matrix has negative off-diagonal entry " << it.value() << " at (" << r << ", " << it.col() << ")";
        throw InvariantError(os.str());
      }
      sum += it.value();
      scale = std::max(scale, std::abs(it.value()));
    }
    if (std::abs(sum) > tol * std::max(1.0, scale)) {
      std::ostringstream os;
      os << "rate matrix row " << r << " sums to " << sum << " (not a Markov generator)";
      throw InvariantError(os.str());
    }
  }
}

void RateMatrix::apply(std::span<const double> in, std::span<double> out) const {
  if (in.size() != states() || out.size() != states()) throw ArgumentError("rate matrix apply: wrong vector length");
  Eigen::Map<const Eigen::VectorXd> x(in.data(), static_cast<Eigen::Index>(in.size()));
  Eigen::Map<Eigen::VectorXd> y(out.data(), static_cast<Eigen::Index>(out.size()));
  y.noalias() = matrix_ * x;
}

CoefficientTensor RateMatrix::apply(const CoefficientTensor& g) const {
  require_same_space(space_, g.space(), "rate matrix apply");
  if (g.degree() != degree_) throw ArgumentError("rate matrix apply: degree mismatch");
  std::vector<double> out(states());
  apply(g.values(), out);
  return CoefficientTensor::unchecked(space_, degree_, std::move(out));
}

std::size_t DualOperator::degree() const {
  return std::visit([](const auto& op) { return op.degree(); }, impl_);
}

const Space& DualOperator::space() const {
  return std::visit([](const auto& op) -> const Space& { return op.space(); }, impl_);
}

CoefficientTensor DualOperator::apply(const CoefficientTensor& g) const {
  return std::visit([&](const auto& op) { return op.apply(g); }, impl_);
}

void check_state_budget(std::size_t size, std::size_t k, const DualLimits& limits) {
  const double dense = dense_state_count(size, k);
  if (dense > limits.max_states) {
    const double sym = symmetric_basis_size(size, k);
    std::ostringstream os;
    os << std::fixed << std::setprecision(0);
    os << "memory guard: dense state space size^k = " << size << "^" << k << " = " << dense
       << " exceeds the cap of " << limits.max_states << " states (symmetric basis N = binom(" << (k + size - 1)
       << ", " << k << ") = " << sym << ")";
    throw MemoryGuardError(os.str(), dense, sym);
  }
}

namespace {

RateMatrix build_rate_matrix(const GeneratorSpec& spec, std::size_t k) {
  const std::size_t d = spec.space().size();
  const std::size_t states = checked_pow(d, k);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::size_t> idx(k), moved(k);
  for (std::size_t s = 0; s < states; ++s) {
    decode_index(s, d, idx);
    double exit = 0.0;
    auto add = [&](std::size_t target, double rate) {
      if (rate == 0.0 || target == s) return;
      triplets.emplace_back(static_cast<int>(s), static_cast<int>(target), rate);
      exit += rate;
    };
    // B^{(i)}: slot i mutates along ν_B.
    for (std::size_t i = 0; i < k; ++i) {
      moved = idx;
      for (std::size_t j = 0; j < d; ++j) {
        if (j == idx[i]) continue;
        moved[i] = j;
        add(encode_index(moved, d), spec.kernel(idx[i], j));
      }
    }
    // Q^{(ij)} = αΨ on the pair: slot j copies slot i or vice versa, α/2 each.
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        if (idx[i] == idx[j]) continue;
        const double rate = 0.5 * spec.alpha(idx[i], idx[j]);
        moved = idx;
        moved[j] = idx[i];
        add(encode_index(moved, d), rate);
        moved = idx;
        moved[i] = idx[j];
        add(encode_index(moved, d), rate);
      }
    triplets.emplace_back(static_cast<int>(s), static_cast<int>(s), -exit);
  }
  RateMatrix::Matrix m(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return RateMatrix(spec.space(), k, std::move(m));
}

}  // namespace

DualOperator build_dual(const GeneratorSpec& spec, std::size_t k, const DualLimits& limits) {
  if (k < 1 || k > limits.max_degree) {
    std::ostringstream os;
    os << "dual degree k = " << k << " outside [1, " << limits.max_degree << "]";
    throw ArgumentError(os.str());
  }
  check_state_budget(spec.space().size(), k, limits);
  if (spec.space().is_finite()) return DualOperator(build_rate_matrix(spec, k));
  return DualOperator(StencilApplier(spec, k));
}

}  // namespace polydiff
