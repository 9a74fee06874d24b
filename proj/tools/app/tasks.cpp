#include "app/tasks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "app/csv.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/index.hpp"
#include "polydiff/moments_finite.hpp"
#include "polydiff/moments_grid.hpp"
#include "polydiff/random.hpp"
#include "polydiff/simulate.hpp"
#include "polydiff/tensor_io.hpp"
#include "polydiff/validate.hpp"

namespace polydiff::app {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig quick_variant(ExperimentConfig c) {
  c.paths = std::max<std::size_t>(500, c.paths / 10);
  c.repetitions = std::max<std::size_t>(40, c.repetitions / 4);
  c.pmp.polynomials = std::max<std::size_t>(5, c.pmp.polynomials / 5);
  return c;
}

namespace {

std::string count_string(double v) {
  if (v < 1e15) return std::to_string(static_cast<unsigned long long>(std::llround(v)));
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string describe_cost(const ExperimentConfig& c) {
  const std::size_t n = c.space.size();
  std::ostringstream os;
  if (c.space.is_finite()) {
    os << "finite d=" << n << ", k=" << c.k << ", N=" << count_string(symmetric_basis_size(n, c.k))
       << ", d^k=" << count_string(dense_state_count(n, c.k));
  } else {
    os << "grid n=" << n << " on [" << format_number(c.space.x_min()) << ", " << format_number(c.space.x_max())
       << "], k=" << c.k << ", n^k=" << count_string(dense_state_count(n, c.k));
    if (c.g.kind == "factor") {
      const std::size_t d = c.g.factors;
      os << "; simplex cost d^k=" << count_string(dense_state_count(d, c.k)) << " (d=" << d
         << " factors, N=" << count_string(symmetric_basis_size(d, c.k)) << ")";
    }
  }
  return os.str();
}

namespace {

struct Output {
  fs::path dir;
  std::vector<fs::path> files;

  fs::path prepare(const std::string& name) {
    fs::create_directories(dir);
    files.push_back(dir / name);
    return files.back();
  }
  void text(const std::string& name, const std::string& body) {
    std::ofstream out(prepare(name), std::ios::binary);
    out << body;
  }
};

json diagnostics_json(const SolverDiagnostics& d) {
  return {{"steps", d.steps},
          {"dt", d.dt},
          {"contraction_violations", d.contraction_violations},
          {"max_principle_excess", d.max_principle_excess}};
}

MomentSolution solve(const ExperimentConfig& c, const GeneratorSpec& spec, const CoefficientTensor& g) {
  if (c.space.is_finite()) {
    const DualOperator dual = build_dual(spec, c.k);
    return propagate_snapshots(dual.rate_matrix(), g, c.times);
  }
  const StencilApplier op = discretize_dual_grid(spec, c.k);
  PideConfig pc;
  pc.dt = c.pide_dt;
  return solve_moment_pide(op, g, c.times, pc);
}

RunResult run_moments(const ExperimentConfig& c, Output& out) {
  const GeneratorSpec spec = c.generator();
  const CoefficientTensor g = c.coefficient();
  const DiscreteMeasure nu = c.initial_measure();
  const MomentSolution sol = solve(c, spec, g);

  CsvWriter csv({"T", "moment"});
  json rows = json::array();
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double m = eval_monomial(sol.u[i], nu);
    csv.row({sol.times[i], m});
    rows.push_back({{"T", sol.times[i]}, {"moment", m}});
  }
  json report = {{"config", c.name},
                 {"space", c.space.describe()},
                 {"k", c.k},
                 {"cost", describe_cost(c)},
                 {"engine", c.space.is_finite() ? "uniformization" : "pide-rk4"},
                 {"moments", rows},
                 {"diagnostics", diagnostics_json(sol.diagnostics)}};
  csv.save(out.prepare("moments.csv"));
  out.text("moments.json", report.dump(2) + "\n");
  write_tensor(sol.u.back(), out.prepare("u_T"));
  out.files.back() += ".json";
  if (c.k <= 2) write_tensor_csv(sol.u.back(), out.prepare("u_T.csv"));

  std::ostringstream s;
  s << "moments " << c.name << ": " << describe_cost(c) << "; <u(T), nu^k> = "
    << format_number(eval_monomial(sol.u.back(), nu)) << " at T=" << format_number(sol.times.back());
  if (c.space.is_grid())
    s << " (" << sol.diagnostics.steps << " steps, " << sol.diagnostics.contraction_violations
      << " contraction violations)";
  return {0, s.str(), {}};
}

RunResult run_simulate(const ExperimentConfig& c, Output& out) {
  const GeneratorSpec spec = c.generator();
  const CoefficientTensor g = c.coefficient();
  const DiscreteMeasure nu = c.initial_measure();
  const MomentSolution sol = solve(c, spec, g);
  const std::size_t nt = c.times.size();

  std::vector<std::vector<double>> particle(nt, std::vector<double>(c.repetitions));
  MoranOptions opt;
  opt.record_times = c.times;
  opt.dt = c.dt;
  for (std::size_t r = 0; r < c.repetitions; ++r) {
    const EnsemblePath path =
        simulate_moran(spec, nu, c.particles, c.times.back(), split_seed(split_seed(c.seed, 2), r), opt);
    for (std::size_t t = 0; t < nt; ++t) particle[t][r] = empirical_moment(path.snapshots[t + 1], g);
  }

  std::ostringstream s;
  s << "simulate " << c.name << ": " << describe_cost(c) << "; ";
  if (c.space.is_finite()) {
    std::vector<std::vector<double>> sde(nt, std::vector<double>(c.paths));
    for (std::size_t p = 0; p < c.paths; ++p) {
      const SimplexPath path = simulate_simplex_sde(spec, nu.weights(), c.times.back(), c.dt,
                                                    split_seed(split_seed(c.seed, 1), p), c.times);
      for (std::size_t t = 0; t < nt; ++t)
        sde[t][p] = eval_monomial(g, DiscreteMeasure::signed_measure(c.space, path.weights[t + 1]));
    }
    CsvWriter csv({"T", "exact", "sde_mean", "sde_se", "moran_mean", "moran_se"});
    for (std::size_t t = 0; t < nt; ++t) {
      const McEstimate a = summarize(sde[t]), b = summarize(particle[t]);
      csv.row({c.times[t], eval_monomial(sol.u[t], nu), a.mean, a.std_error, b.mean, b.std_error});
    }
    csv.save(out.prepare("simulate.csv"));
    s << c.paths << " SDE paths, " << c.repetitions << " Moran runs of N=" << c.particles;
  } else {
    CsvWriter csv({"T", "engine", "particle_mean", "particle_se"});
    for (std::size_t t = 0; t < nt; ++t) {
      const McEstimate b = summarize(particle[t]);
      csv.row({c.times[t], eval_monomial(sol.u[t], nu), b.mean, b.std_error});
    }
    csv.save(out.prepare("simulate.csv"));
    s << c.repetitions << " particle runs of N=" << c.particles;
  }
  return {0, s.str(), {}};
}

CrosscheckScenario scenario_for(const ExperimentConfig& c, const std::string& id, bool quick) {
  CrosscheckScenario sc;
  sc.id = id;
  sc.times = c.times;
  sc.paths = c.paths;
  sc.particles = c.particles;
  sc.repetitions = c.repetitions;
  sc.dt = c.dt;
  sc.seed = c.seed;
  const GeneratorSpec spec = c.generator();
  if (id == "heterozygosity" || id == "tower") {
    if (!c.space.is_finite() || c.space.size() != 2 || spec.kernel(0, 1) != 0.0 || spec.kernel(1, 0) != 0.0)
      throw ConfigError("scenarios", id + " needs a two-point space without mutation");
    sc.alpha = spec.alpha(0, 1);
    sc.z = c.nu[0];
  } else if (id == "common-noise") {
    if (!c.space.is_grid()) throw ConfigError("scenarios", "common-noise needs a grid space");
    double tau = 0.0;
    for (double t : spec.drift_diffusion().tau) tau = std::max(tau, t);
    sc.tau = tau;
    sc.x0 = 0.5 * (c.space.x_min() + c.space.x_max());
    sc.half_width = 0.5 * (c.space.x_max() - c.space.x_min());
    sc.grid_n = c.space.size() | 1;
    if (quick) sc.grid_n = (sc.grid_n / 2) | 1;
  } else if (id == "martingale") {
    sc.alpha = spec.max_alpha() > 0.0 ? spec.max_alpha() : 1.0;
    if (c.space.is_grid()) {
      double tau = 0.0;
      for (double t : spec.drift_diffusion().tau) tau = std::max(tau, t);
      if (tau > 0.0) sc.tau = tau;
      sc.x0 = 0.5 * (c.space.x_min() + c.space.x_max());
      sc.half_width = 0.5 * (c.space.x_max() - c.space.x_min());
      sc.grid_n = c.space.size();
    }
  }
  return sc;
}

RunResult run_validate(const ExperimentConfig& c, Output& out, bool quick) {
  const GeneratorSpec spec = c.generator();
  const ValidationReport report = validate_spec(spec);
  json doc = {{"config", c.name}, {"spec_violations", report.violations}, {"scenarios", json::array()}};
  CsvWriter csv({"scenario", "statistic", "engine", "oracle_mean", "oracle_se", "bias_allowance", "z", "pass"});
  bool ok = report.ok();
  std::size_t rows = 0, failed = 0;
  if (report.ok()) {
    std::vector<std::string> ids = c.scenarios;
    if (ids.empty()) ids = {c.space.is_finite() ? "heterozygosity" : "common-noise"};
    std::vector<CrosscheckScenario> scenarios;
    for (const auto& id : ids) scenarios.push_back(scenario_for(c, id, quick));
    for (const auto& sc : scenarios) {
      const ComparisonTable table = crosscheck_moments(sc);
      doc["scenarios"].push_back(json::parse(table.to_json()));
      for (const auto& r : table.rows) {
        csv.row({sc.id, r.statistic, format_number(r.engine), format_number(r.oracle_mean),
                 format_number(r.oracle_se), format_number(r.bias_allowance), format_number(r.z),
                 r.pass ? "1" : "0"});
        ++rows;
        if (!r.pass) ++failed;
      }
      ok = ok && table.passed();
    }
  }
  doc["passed"] = ok;
  out.text("validate.json", doc.dump(2) + "\n");
  csv.save(out.prepare("validate.csv"));
  std::ostringstream s;
  s << "validate " << c.name << ": " << describe_cost(c) << "; ";
  if (!report.ok()) {
    s << "spec rejected:";
    for (const auto& v : report.violations) s << " " << v << ";";
  } else {
    s << rows - failed << "/" << rows << " comparisons within tolerance";
  }
  s << (ok ? " [pass]" : " [FAIL]");
  return {ok ? 0 : 1, s.str(), {}};
}

RunResult run_kkt(const ExperimentConfig& c, Output& out) {
  const GeneratorSpec spec = c.generator();
  const ValidationReport report = validate_spec(spec);
  const PmpSuiteResult res = run_pmp_suite(spec, c.pmp.polynomials, c.pmp.max_degree, c.seed, c.pmp.restarts);
  CsvWriter csv({"polynomial", "generator_value"});
  for (std::size_t i = 0; i < res.generator_values.size(); ++i)
    csv.row({static_cast<double>(i), res.generator_values[i]});
  const double worst = res.generator_values.empty() ? 0.0 : res.worst();
  const bool ok = report.ok() && worst <= 1e-8 && res.kkt_failures == 0;
  json doc = {{"config", c.name},
              {"spec_violations", report.violations},
              {"polynomials", c.pmp.polynomials},
              {"max_degree", c.pmp.max_degree},
              {"kkt_failures", res.kkt_failures},
              {"worst_generator_value", worst},
              {"generator_values", res.generator_values},
              {"passed", ok}};
  csv.save(out.prepare("kkt.csv"));
  out.text("kkt.json", doc.dump(2) + "\n");
  std::ostringstream s;
  s << "kkt " << c.name << ": " << describe_cost(c) << "; " << c.pmp.polynomials
    << " random polynomials, max Lp(nu*) = " << format_number(worst) << ", " << res.kkt_failures
    << " KKT failures" << (ok ? " [pass]" : " [FAIL]");
  return {ok ? 0 : 1, s.str(), {}};
}

}  // namespace

RunResult run_task(Task task, ExperimentConfig c, const RunOptions& options) {
  if (options.seed) c.seed = *options.seed;
  if (options.out) c.output = *options.out;
  if (options.quick) c = quick_variant(std::move(c));
  const std::size_t budget_k = task == Task::kkt ? c.pmp.max_degree : c.k;
  check_state_budget(c.space.size(), budget_k);
  if (task == Task::kkt && !c.space.is_finite() && c.space.size() > 64)
    throw ConfigError("space", "kkt maximizes over the node simplex; use at most 64 nodes");

  Output out{c.output, {}};
  RunResult r;
  switch (task) {
    case Task::moments: r = run_moments(c, out); break;
    case Task::simulate: r = run_simulate(c, out); break;
    case Task::validate: r = run_validate(c, out, options.quick); break;
    case Task::kkt: r = run_kkt(c, out); break;
  }
  r.artifacts = out.files;
  r.summary += " -> " + out.dir.string();
  return r;
}

}  // namespace polydiff::app
