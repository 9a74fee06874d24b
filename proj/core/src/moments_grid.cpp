#include "polydiff/moments_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polydiff/errors.hpp"
#include "polydiff/polynomial.hpp"

namespace polydiff {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class Stepper {
 public:
  Stepper(const StencilApplier& op, TimeScheme scheme) : op_(op), scheme_(scheme), n_(op.states()) {
    k1_.resize(n_);
    if (scheme_ == TimeScheme::rk4) {
      k2_.resize(n_);
      k3_.resize(n_);
      k4_.resize(n_);
      tmp_.resize(n_);
    }
  }

  void step(std::vector<double>& u, double dt) {
    op_.apply(u, k1_);
    if (scheme_ == TimeScheme::euler) {
      for (std::size_t i = 0; i < n_; ++i) u[i] += dt * k1_[i];
      return;
    }
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + 0.5 * dt * k1_[i];
    op_.apply(tmp_, k2_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + 0.5 * dt * k2_[i];
    op_.apply(tmp_, k3_);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = u[i] + dt * k3_[i];
    op_.apply(tmp_, k4_);
    for (std::size_t i = 0; i < n_; ++i) u[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  const StencilApplier& op_;
  TimeScheme scheme_;
  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace

StencilApplier discretize_dual_grid(const GeneratorSpec& spec, std::size_t k, const DualLimits& limits) {
  if (!spec.space().is_grid()) throw ArgumentError("discretize_dual_grid needs a grid space");
  const auto report = validate_spec(spec);
  if (!report.ok()) throw ArgumentError("generator spec is not admissible: " + report.violations.front());
  if (k < 1 || k > limits.max_degree) throw ArgumentError("dual degree out of range");
  check_state_budget(spec.space().size(), k, limits);
  return StencilApplier(spec, k);
}

MomentSolution solve_moment_pide(const StencilApplier& applier, const CoefficientTensor& g,
                                 std::span<const double> times, const PideConfig& config) {
  if (!(g.space() == applier.space()) || g.degree() != applier.degree())
    throw ArgumentError("solve_moment_pide: tensor does not match the stencil");
  const double bound = applier.spectral_bound();
  double dt = config.dt.value_or(bound > 0.0 ? config.safety / bound : 0.0);
  if (config.dt && !(*config.dt > 0.0)) throw ArgumentError("solve_moment_pide: dt must be positive");

  // L1 = 0 makes every linear one-step scheme conserve constants exactly.
  {
    std::vector<double> ones(applier.states(), 1.0), l1(applier.states());
    applier.apply(ones, l1);
    const double defect = max_abs(l1);
    if (defect > 1e-10 * std::max(1.0, bound)) {
      std::ostringstream os;
      os << "stencil does not annihilate constants (max |L1| = " << defect << ")";
      throw InvariantError(os.str());
    }
  }

  MomentSolution sol;
  sol.degree = g.degree();
  std::vector<double> u(g.values().begin(), g.values().end());
  const double g_max = max_abs(u);
  const double g_lo = *std::min_element(u.begin(), u.end());
  const double g_hi = *std::max_element(u.begin(), u.end());
  const double tol = config.monitor_tolerance;
  Stepper stepper(applier, config.scheme);
  double t = 0.0, norm = g_max;

  for (double target : times) {
    if (!(target >= t)) throw ArgumentError("snapshot times must be nondecreasing and >= 0");
    const double span = target - t;
    if (span > 0.0 && dt > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
      const double h = span / static_cast<double>(steps);
      sol.diagnostics.dt = h;
      for (std::size_t s = 0; s < steps; ++s) {
        stepper.step(u, h);
        ++sol.diagnostics.steps;
        const double next = max_abs(u);
        if (!std::isfinite(next) || next > norm + tol) ++sol.diagnostics.contraction_violations;
        norm = next;
        for (double v : u)
          sol.diagnostics.max_principle_excess =
              std::max(sol.diagnostics.max_principle_excess, std::max(v - g_hi, g_lo - v));
        if (config.abort_on_growth && !(next <= g_max + tol)) {
          std::ostringstream os;
          os << "explicit PIDE step is unstable: max|u| grew from " << g_max << " to " << next << " at t = "
             << t + h * static_cast<double>(s + 1) << " with dt = " << h << " (CFL bound: dt <= c / "
             << bound << ", c = " << config.safety << ")";
          throw InstabilityError(os.str());
        }
      }
    }
    t = target;
    sol.times.push_back(t);
    sol.u.push_back(CoefficientTensor::unchecked(g.space(), g.degree(), u));
  }
  return sol;
}

CoefficientTensor solve_moment_pide(const StencilApplier& applier, const CoefficientTensor& g, double T,
                                    const PideConfig& config, SolverDiagnostics* diagnostics) {
  if (!(T >= 0.0)) throw ArgumentError("solve_moment_pide: T must be >= 0");
  const double times[] = {T};
  auto sol = solve_moment_pide(applier, g, times, config);
  if (diagnostics) *diagnostics = sol.diagnostics;
  return std::move(sol.u.back());
}

double moment_grid(const GeneratorSpec& spec, const CoefficientTensor& g, const DiscreteMeasure& nu, double T,
                   const PideConfig& config) {
  if (g.degree() == 0) return g[0];
  const auto applier = discretize_dual_grid(spec, g.degree());
  return eval_monomial(solve_moment_pide(applier, g, T, config), nu);
}

}  // namespace polydiff
