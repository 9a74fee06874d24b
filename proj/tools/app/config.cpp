#include "app/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "app/csv.hpp"
#include "polydiff/errors.hpp"
#include "polydiff/polynomial.hpp"

namespace polydiff::app {

using nlohmann::json;
namespace fs = std::filesystem;

Task parse_task(const std::string& name) {
  if (name == "moments") return Task::moments;
  if (name == "simulate") return Task::simulate;
  if (name == "validate") return Task::validate;
  if (name == "kkt") return Task::kkt;
  throw ConfigError("task", "unknown task '" + name + "' (moments, simulate, validate, kkt)");
}

std::string to_string(Task t) {
  switch (t) {
    case Task::moments: return "moments";
    case Task::simulate: return "simulate";
    case Task::validate: return "validate";
    case Task::kkt: return "kkt";
  }
  return "?";
}

namespace {

const std::vector<std::string> kTopLevel = {"preset", "name", "space", "generator", "g", "k", "times", "nu",
                                            "paths", "particles", "repetitions", "dt", "pide", "seed",
                                            "scenarios", "pmp", "output"};

class Reader {
 public:
  explicit Reader(fs::path base) : base_(std::move(base)) {}

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + "." + key, "missing");
    return obj.at(key);
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) throw ConfigError(path, "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "not finite");
    return x;
  }

  std::size_t count(const json& v, const std::string& path) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(path, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::uint64_t seed(const json& v, const std::string& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      std::uint64_t out = 0;
      std::istringstream is(s);
      if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos && (is >> out) && is.eof())
        return out;
    }
    throw ConfigError(path, "seed must be an unsigned 64-bit integer");
  }

  fs::path file(const json& v, const std::string& path) const {
    if (!v.is_string()) throw ConfigError(path, "expected a file name");
    fs::path p = v.get<std::string>();
    if (p.is_relative()) p = base_ / p;
    if (!fs::exists(p)) throw ConfigError(path, "referenced file does not exist: " + p.string());
    return p;
  }

  std::vector<std::vector<double>> csv(const json& v, const std::string& path) const {
    const fs::path p = file(v, path);
    try {
      return read_csv(p);
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
  }

  std::vector<double> vector(const json& v, const std::string& path) const {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  // Node function: number, array, {"csv": file, "column": c}, or a named
  // function of the node coordinate.
  std::vector<double> field_values(const json& v, const Space& s, const std::string& path,
                                   std::vector<double>* derivative = nullptr) const {
    const std::size_t n = s.size();
    if (v.is_number()) return std::vector<double>(n, number(v, path));
    if (v.is_array()) {
      auto out = vector(v, path);
      if (out.size() != n) throw ConfigError(path, "expected " + std::to_string(n) + " values, got " +
                                                       std::to_string(out.size()));
      return out;
    }
    if (!v.is_object()) throw ConfigError(path, "expected a number, array or object");
    if (v.contains("csv")) {
      const auto rows = csv(v["csv"], path + ".csv");
      const std::size_t col = v.contains("column") ? count(v["column"], path + ".column") : 0;
      std::vector<double> out;
      for (const auto& r : rows) {
        if (col >= r.size()) throw ConfigError(path + ".csv", "row without column " + std::to_string(col));
        out.push_back(r[col]);
      }
      if (out.size() != n) throw ConfigError(path + ".csv", "expected " + std::to_string(n) + " rows");
      return out;
    }
    const std::string fn = v.contains("function") && v["function"].is_string() ? v["function"].get<std::string>() : "";
    std::vector<double> out(n), d(n);
    if (fn == "gaussian") {
      const double c = v.contains("center") ? number(v["center"], path + ".center") : 0.0;
      const double w = number(field(v, "width", path), path + ".width");
      const double a = v.contains("scale") ? number(v["scale"], path + ".scale") : 1.0;
      if (w <= 0.0) throw ConfigError(path + ".width", "must be positive");
      for (std::size_t i = 0; i < n; ++i) {
        const double x = s.node(i);
        out[i] = a * std::exp(-0.5 * (x - c) * (x - c) / (w * w));
        d[i] = -(x - c) / (w * w) * out[i];
      }
    } else if (fn == "linear") {
      const double a = v.contains("intercept") ? number(v["intercept"], path + ".intercept") : 0.0;
      const double b = v.contains("slope") ? number(v["slope"], path + ".slope") : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = a + b * s.node(i);
        d[i] = b;
      }
    } else if (fn == "tapered") {
      // value in the interior, sin² ramp down to 0 over `ramp` at both ends
      if (!s.is_grid()) throw ConfigError(path, "tapered needs a grid space");
      const double val = number(field(v, "value", path), path + ".value");
      const double ramp = number(field(v, "ramp", path), path + ".ramp");
      if (ramp <= 0.0) throw ConfigError(path + ".ramp", "must be positive");
      for (std::size_t i = 0; i < n; ++i) {
        const double dist = std::min(s.node(i) - s.x_min(), s.x_max() - s.node(i));
        const double r = dist >= ramp ? 1.0 : std::pow(std::sin(0.5 * M_PI * std::max(dist, 0.0) / ramp), 2);
        out[i] = val * r;
      }
    } else {
      throw ConfigError(path, "unknown function '" + fn + "' (gaussian, linear, tapered)");
    }
    if (derivative) *derivative = d;
    return out;
  }

  // d×d matrix: number (constant off the diagonal), nested array or csv.
  std::vector<double> matrix(const json& v, std::size_t d, const std::string& path) const {
    if (v.is_number()) return constant_alpha(d, number(v, path));
    std::vector<std::vector<double>> rows;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) rows.push_back(vector(v[i], path + "[" + std::to_string(i) + "]"));
    } else if (v.is_object() && v.contains("csv")) {
      rows = csv(v["csv"], path + ".csv");
    } else {
      throw ConfigError(path, "expected a number, a nested array or {\"csv\": file}");
    }
    if (rows.size() != d) throw ConfigError(path, "expected " + std::to_string(d) + " rows");
    std::vector<double> out;
    for (std::size_t i = 0; i < d; ++i) {
      if (rows[i].size() != d) throw ConfigError(path, "row " + std::to_string(i) + " has the wrong length");
      out.insert(out.end(), rows[i].begin(), rows[i].end());
    }
    return out;
  }

 private:
  fs::path base_;
};

Space parse_space(const Reader& r, const json& v) {
  const std::string path = "space";
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  const json& kind = r.field(v, "kind", path);
  if (kind == "finite") {
    const std::size_t d = r.count(r.field(v, "d", path), path + ".d");
    if (d < 1) throw ConfigError(path + ".d", "must be >= 1");
    return Space::finite(d);
  }
  if (kind == "grid") {
    const double lo = r.number(r.field(v, "x_min", path), path + ".x_min");
    const double hi = r.number(r.field(v, "x_max", path), path + ".x_max");
    const std::size_t n = r.count(r.field(v, "n", path), path + ".n");
    if (n < 3) throw ConfigError(path + ".n", "must be >= 3");
    if (!(lo < hi)) throw ConfigError(path, "x_min must be below x_max");
    return Space::grid(lo, hi, n);
  }
  throw ConfigError(path + ".kind", "expected \"finite\" or \"grid\"");
}

}  // namespace

std::vector<std::vector<double>> hat_functions(const Space& grid, std::size_t count) {
  if (!grid.is_grid() || count < 2) throw ArgumentError("hat functions need a grid and at least two peaks");
  const double width = (grid.x_max() - grid.x_min()) / static_cast<double>(count - 1);
  std::vector<std::vector<double>> out(count, std::vector<double>(grid.size(), 0.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = std::clamp((grid.node(i) - grid.x_min()) / width, 0.0, static_cast<double>(count - 1));
    const std::size_t j = std::min(static_cast<std::size_t>(t), count - 2);
    const double w = t - static_cast<double>(j);
    out[j][i] = 1.0 - w;
    out[j + 1][i] = w;
  }
  return out;
}

ExperimentConfig parse_config(const json& input, const fs::path& base_dir) {
  if (!input.is_object()) throw ConfigError("config", "top level must be an object");
  json doc = input;
  std::string name = "config";
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("preset", "expected a preset name");
    name = doc["preset"].get<std::string>();
    json base = preset_document(name);
    json patch = doc;
    patch.erase("preset");
    base.merge_patch(patch);
    doc = std::move(base);
  }
  for (const auto& [key, _] : doc.items())
    if (std::find(kTopLevel.begin(), kTopLevel.end(), key) == kTopLevel.end())
      throw ConfigError(key, "unknown field");

  const Reader r(base_dir);
  ExperimentConfig c;
  c.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : name;
  c.space = parse_space(r, r.field(doc, "space", "config"));
  const std::size_t n = c.space.size();

  const json gen = doc.contains("generator") ? doc["generator"] : json::object();
  if (!gen.is_object()) throw ConfigError("generator", "expected an object");
  if (c.space.is_finite()) {
    for (const char* key : {"b", "sigma", "tau"})
      if (gen.contains(key)) throw ConfigError(std::string("generator.") + key, "only valid on grid spaces");
    c.mutation = JumpKernel{gen.contains("kernel") ? r.matrix(gen["kernel"], n, "generator.kernel")
                                                   : std::vector<double>(n * n, 0.0)};
  } else {
    if (gen.contains("kernel")) throw ConfigError("generator.kernel", "only valid on finite spaces");
    DriftDiffusion dd;
    dd.b = gen.contains("b") ? r.field_values(gen["b"], c.space, "generator.b") : std::vector<double>(n, 0.0);
    dd.sigma = gen.contains("sigma") ? r.field_values(gen["sigma"], c.space, "generator.sigma")
                                     : std::vector<double>(n, 0.0);
    dd.tau = gen.contains("tau") ? r.field_values(gen["tau"], c.space, "generator.tau") : std::vector<double>(n, 0.0);
    c.mutation = std::move(dd);
  }
  c.alpha = gen.contains("alpha") ? r.matrix(gen["alpha"], n, "generator.alpha") : std::vector<double>(n * n, 0.0);

  if (doc.contains("k")) c.k = r.count(doc["k"], "k");
  if (c.k < 1 || c.k > 4) throw ConfigError("k", "degree must be between 1 and 4");

  const json g = doc.contains("g") ? doc["g"] : json{{"kind", "offdiagonal"}};
  if (!g.is_object()) throw ConfigError("g", "expected an object");
  c.g.kind = g.contains("kind") && g["kind"].is_string() ? g["kind"].get<std::string>() : "";
  if (c.g.kind == "offdiagonal") {
    if (c.k != 2) throw ConfigError("g.kind", "offdiagonal needs k = 2");
  } else if (c.g.kind == "constant") {
    if (g.contains("value")) c.g.value = r.number(g["value"], "g.value");
  } else if (c.g.kind == "power") {
    std::vector<double> d;
    c.g.h = r.field_values(r.field(g, "h", "g"), c.space, "g.h", &d);
    if (g["h"].is_object() && g["h"].contains("function") && c.space.is_grid()) c.g.dh = d;
  } else if (c.g.kind == "tensor") {
    const json& vals = r.field(g, "values", "g");
    if (vals.is_object() && vals.contains("csv")) {
      for (const auto& row : r.csv(vals["csv"], "g.values.csv")) c.g.values.insert(c.g.values.end(), row.begin(), row.end());
    } else {
      c.g.values = r.vector(vals, "g.values");
    }
    double expect = 1.0;
    for (std::size_t i = 0; i < c.k; ++i) expect *= static_cast<double>(n);
    if (static_cast<double>(c.g.values.size()) != expect)
      throw ConfigError("g.values", "expected size^k = " + std::to_string(static_cast<std::size_t>(expect)) +
                                        " entries, got " + std::to_string(c.g.values.size()));
  } else if (c.g.kind == "factor") {
    if (!c.space.is_grid()) throw ConfigError("g.kind", "factor coefficients need a grid space");
    if (c.k != 2) throw ConfigError("g.kind", "factor coefficients are quadratic (k = 2)");
    c.g.factors = r.count(r.field(g, "functions", "g"), "g.functions");
    if (c.g.factors < 2 || c.g.factors > n) throw ConfigError("g.functions", "need 2 <= functions <= n");
    const std::size_t m = c.g.factors;
    if (!g.contains("q") || g["q"] == "identity") {
      c.g.q.assign(m * m, 0.0);
      for (std::size_t i = 0; i < m; ++i) c.g.q[i * m + i] = 1.0;
    } else {
      c.g.q = r.matrix(g["q"], m, "g.q");
    }
  } else {
    throw ConfigError("g.kind", "expected offdiagonal, constant, power, tensor or factor");
  }

  if (doc.contains("times")) c.times = r.vector(doc["times"], "times");
  if (c.times.empty()) throw ConfigError("times", "at least one time is required");
  for (std::size_t i = 0; i < c.times.size(); ++i)
    if (!(c.times[i] > 0.0) || (i && !(c.times[i] > c.times[i - 1])))
      throw ConfigError("times", "times must be positive and strictly increasing");

  const json nu = doc.contains("nu") ? doc["nu"] : json("uniform");
  if (nu == "uniform") {
    c.nu.assign(n, 1.0 / static_cast<double>(n));
  } else if (nu.is_object() && nu.contains("dirac")) {
    const std::size_t i = r.count(nu["dirac"], "nu.dirac");
    if (i >= n) throw ConfigError("nu.dirac", "index out of range");
    c.nu.assign(n, 0.0);
    c.nu[i] = 1.0;
  } else if (nu.is_object() && nu.contains("dirac_at")) {
    if (!c.space.is_grid()) throw ConfigError("nu.dirac_at", "needs a grid space");
    const double x = r.number(nu["dirac_at"], "nu.dirac_at");
    const double t = std::round((x - c.space.x_min()) / c.space.spacing());
    if (t < 0.0 || t > static_cast<double>(n - 1)) throw ConfigError("nu.dirac_at", "outside the grid");
    c.nu.assign(n, 0.0);
    c.nu[static_cast<std::size_t>(t)] = 1.0;
  } else {
    c.nu = r.field_values(nu, c.space, "nu");
  }
  double mass = 0.0;
  for (double w : c.nu) {
    if (w < -1e-12) throw ConfigError("nu", "weights must be nonnegative");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-10) throw ConfigError("nu", "weights must sum to 1");

  if (doc.contains("paths")) c.paths = r.count(doc["paths"], "paths");
  if (doc.contains("particles")) c.particles = r.count(doc["particles"], "particles");
  if (doc.contains("repetitions")) c.repetitions = r.count(doc["repetitions"], "repetitions");
  if (c.paths < 2 || c.particles < 1 || c.repetitions < 2)
    throw ConfigError("paths", "need paths >= 2, particles >= 1, repetitions >= 2");
  if (doc.contains("dt")) c.dt = r.number(doc["dt"], "dt");
  if (!(c.dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (doc.contains("pide")) {
    const json& p = doc["pide"];
    if (!p.is_object()) throw ConfigError("pide", "expected an object");
    if (p.contains("dt")) {
      c.pide_dt = r.number(p["dt"], "pide.dt");
      if (!(*c.pide_dt > 0.0)) throw ConfigError("pide.dt", "must be positive");
    }
  }
  if (doc.contains("seed")) c.seed = r.seed(doc["seed"], "seed");
  if (doc.contains("scenarios")) {
    const json& s = doc["scenarios"];
    if (!s.is_array()) throw ConfigError("scenarios", "expected an array of names");
    for (const auto& e : s) {
      if (!e.is_string()) throw ConfigError("scenarios", "expected scenario names");
      c.scenarios.push_back(e.get<std::string>());
    }
  }
  if (doc.contains("pmp")) {
    const json& p = doc["pmp"];
    if (!p.is_object()) throw ConfigError("pmp", "expected an object");
    if (p.contains("polynomials")) c.pmp.polynomials = r.count(p["polynomials"], "pmp.polynomials");
    if (p.contains("max_degree")) c.pmp.max_degree = r.count(p["max_degree"], "pmp.max_degree");
    if (p.contains("restarts")) c.pmp.restarts = r.count(p["restarts"], "pmp.restarts");
    if (c.pmp.max_degree > 4) throw ConfigError("pmp.max_degree", "must be <= 4");
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output", "expected a directory name");
    c.output = doc["output"].get<std::string>();
  }
  return c;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& label, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(label + ":" + std::to_string(line) + ":" + std::to_string(col), msg);
  }
  return parse_config(doc, base_dir);
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), file.string(), file.parent_path());
}

ExperimentConfig preset(const std::string& name) { return parse_config(json{{"preset", name}}, fs::current_path()); }

DiscreteMeasure ExperimentConfig::initial_measure() const { return DiscreteMeasure::probability(space, nu); }

CoefficientTensor ExperimentConfig::coefficient() const {
  const std::size_t n = space.size();
  if (g.kind == "offdiagonal") {
    std::vector<double> v(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 0.0;
    return CoefficientTensor(space, 2, std::move(v));
  }
  if (g.kind == "constant") return CoefficientTensor::constant(space, k, g.value);
  if (g.kind == "power") {
    CoefficientTensor t = CoefficientTensor::power(space, g.h, k);
    if (g.dh) {
      // ∂_1 (h ⊗ ... ⊗ h) = h' ⊗ h ⊗ ... ⊗ h
      std::vector<double> d1(t.size());
      const std::size_t rest = t.size() / n;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < rest; ++j) {
          double prod = (*g.dh)[i];
          std::size_t idx = j;
          for (std::size_t s = 1; s < k; ++s) {
            prod *= g.h[idx % n];
            idx /= n;
          }
          d1[i * rest + j] = prod;
        }
      t = t.with_slot_derivative(std::move(d1));
    }
    return t;
  }
  if (g.kind == "tensor") return CoefficientTensor(space, k, g.values);
  // factor: Σ_ij q_ij g_i ⊗ g_j
  const auto hats = hat_functions(space, g.factors);
  const std::size_t m = g.factors;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      const double q = 0.5 * (g.q[a * m + b] + g.q[b * m + a]);
      if (q == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i * n + j] += q * hats[a][i] * hats[b][j];
    }
  return CoefficientTensor(space, 2, std::move(v));
}

}  // namespace polydiff::app
