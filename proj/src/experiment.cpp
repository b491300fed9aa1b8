#include "stablab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "stablab/errors.hpp"
#include "stablab/field_io.hpp"
#include "stablab/grid.hpp"
#include "stablab/levelset.hpp"
#include "stablab/liouville.hpp"
#include "stablab/numeric.hpp"
#include "stablab/poincare.hpp"
#include "stablab/stability.hpp"
#include "stablab/test_fields.hpp"

namespace stablab {

using nlohmann::json;

std::vector<std::string> check_names() {
  return {"identities", "stability", "gf", "levelsets", "liouville"};
}

// ---- config parsing -------------------------------------------------------------

namespace {

// Reads typed values out of a JSON object, collecting diagnostics instead of
// throwing so validate() can report everything at once.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& diags) : diags_(diags) {}

  void error(const std::string& msg) { diags_.push_back(msg); }

  bool object(const json& j, const std::string& path, const std::set<std::string>& keys) {
    if (!j.is_object()) {
      error(path + ": expected an object");
      return false;
    }
    for (const auto& [k, v] : j.items())
      if (!keys.contains(k)) error(path + ": unknown key '" + k + "'");
    return true;
  }

  void number(const json& j, const char* key, const std::string& path, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number()) return error(path + "." + key + ": expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) error(path + "." + key + ": must be finite");
  }

  void integer(const json& j, const char* key, const std::string& path, int& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_number_integer()) return error(path + "." + key + ": expected an integer");
    out = v.get<int>();
  }

  void boolean(const json& j, const char* key, const std::string& path, bool& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_boolean()) return error(path + "." + key + ": expected true or false");
    out = v.get<bool>();
  }

  void string(const json& j, const char* key, const std::string& path, std::string& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_string()) return error(path + "." + key + ": expected a string");
    out = v.get<std::string>();
  }

  void numbers(const json& j, const char* key, const std::string& path,
               std::vector<double>& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (!v.is_array()) return error(path + "." + key + ": expected an array of numbers");
    out.clear();
    for (const json& x : v) {
      if (!x.is_number()) return error(path + "." + key + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  void vec(const json& j, const char* key, const std::string& path, Vec& out) {
    std::vector<double> xs;
    numbers(j, key, path, xs);
    if (!j.contains(key) || xs.empty()) return;
    if (xs.size() != static_cast<std::size_t>(kDim))
      return error(path + "." + key + ": expected " + std::to_string(kDim) + " numbers");
    std::copy(xs.begin(), xs.end(), out.begin());
  }

  bool node_counts(const json& j, const char* key, const std::string& path,
                   std::vector<int>& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_array()) {
      error(path + "." + key + ": expected an array of integers");
      return false;
    }
    out.clear();
    for (const json& x : v) {
      if (!x.is_number_integer()) {
        error(path + "." + key + ": expected an array of integers");
        return false;
      }
      out.push_back(x.get<int>());
    }
    return true;
  }

 private:
  std::vector<std::string>& diags_;
};

void read_chart(Reader& rd, const json& j, const std::string& path, ChartSpec& spec) {
  if (!rd.object(j, path, {"name", "half_width", "circumference", "periods", "radius", "band",
                           "r_min", "r_max"}))
    return;
  if (!j.contains("name")) rd.error(path + ".name: required");
  rd.string(j, "name", path, spec.name);
  rd.number(j, "half_width", path, spec.params.half_width);
  rd.number(j, "circumference", path, spec.params.circumference);
  std::vector<double> periods;
  rd.numbers(j, "periods", path, periods);
  if (j.contains("periods")) {
    if (periods.size() != 2) rd.error(path + ".periods: expected 2 numbers");
    else spec.params.periods = {periods[0], periods[1]};
  }
  rd.number(j, "radius", path, spec.params.radius);
  rd.number(j, "band", path, spec.params.band);
  rd.number(j, "r_min", path, spec.params.r_min);
  rd.number(j, "r_max", path, spec.params.r_max);
  if (spec.name.empty()) return;
  try {
    make_chart(spec.name, spec.params);
  } catch (const ConfigError& e) {
    rd.error(path + ": " + std::string(e.what()).substr(std::string("ConfigError: ").size()));
  }
}

void read_resolution(Reader& rd, const json& j, const char* key, const std::string& path,
                     std::array<int, kDim>& out) {
  std::vector<int> n;
  if (!rd.node_counts(j, key, path, n)) return;
  if (n.size() != static_cast<std::size_t>(kDim))
    return rd.error(path + "." + key + ": expected " + std::to_string(kDim) + " node counts");
  for (int a = 0; a < kDim; ++a) {
    if (n[a] < kMinResolution) rd.error("resolution below minimum " + std::to_string(kMinResolution));
    out[a] = n[a];
  }
}

ExperimentConfig read_config(const json& j, std::vector<std::string>& diags) {
  Reader rd(diags);
  ExperimentConfig c;
  if (!rd.object(j, "config",
                 {"schema", "name", "chart", "grid", "nonlinearity", "initial", "solver", "checks",
                  "seed", "output", "tol_scale", "identities", "stability", "gf", "levelsets",
                  "liouville"}))
    return c;

  if (!j.contains("schema") || !j.at("schema").is_string() ||
      j.at("schema").get<std::string>() != kConfigSchema)
    rd.error(std::string("schema: expected \"") + kConfigSchema + "\"");
  rd.string(j, "name", "config", c.name);
  rd.string(j, "output", "config", c.output);
  rd.number(j, "tol_scale", "config", c.tol_scale);
  if (!(c.tol_scale > 0.0)) rd.error("tol_scale: must be positive");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      rd.error("seed: expected a nonnegative integer");
    else c.seed = s.get<std::uint64_t>();
  }

  if (!j.contains("chart")) rd.error("chart: required");
  else read_chart(rd, j.at("chart"), "chart", c.chart);
  const bool have_chart = !c.chart.name.empty();

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    if (rd.object(g, "grid", {"discretization", "nodes"})) {
      rd.string(g, "discretization", "grid", c.discretization);
      if (c.discretization == "structured") {
        read_resolution(rd, g, "nodes", "grid", c.nodes);
      } else if (c.discretization == "axisymmetric") {
        std::vector<int> n;
        if (rd.node_counts(g, "nodes", "grid", n)) {
          if (n.size() != 1) rd.error("grid.nodes: axisymmetric grids take one node count");
          else if (n[0] < kMinResolution)
            rd.error("resolution below minimum " + std::to_string(kMinResolution));
          else c.nodes = {n[0], 1};
        }
      } else {
        rd.error("grid.discretization: unknown '" + c.discretization + "'");
      }
    }
  } else {
    rd.error("grid: required");
  }
  const bool axisym = c.discretization == "axisymmetric";
  if (axisym && have_chart && (c.chart.name != "sphere" || c.chart.params.band != 0.0))
    rd.error("grid.discretization: axisymmetric needs the full sphere chart");
  if (!axisym && have_chart && c.chart.name == "sphere" && c.chart.params.band == 0.0 &&
      c.nodes[1] % 2 != 0)
    rd.error("grid.nodes: the full sphere needs an even longitude count");

  if (j.contains("nonlinearity")) {
    const json& n = j.at("nonlinearity");
    if (rd.object(n, "nonlinearity", {"name", "lambda", "shift"})) {
      rd.string(n, "name", "nonlinearity", c.nonlinearity);
      rd.number(n, "lambda", "nonlinearity", c.lambda);
      rd.number(n, "shift", "nonlinearity", c.shift);
    }
  }
  {
    const auto names = nonlinearity_names();
    if (std::find(names.begin(), names.end(), c.nonlinearity) == names.end())
      rd.error("nonlinearity.name: unknown nonlinearity '" + c.nonlinearity + "'");
  }

  if (j.contains("initial")) {
    const json& i = j.at("initial");
    if (rd.object(i, "initial", {"kind", "value", "axis", "offset", "width", "amplitude"})) {
      InitialGuess& g = c.initial;
      rd.string(i, "kind", "initial", g.kind);
      rd.number(i, "value", "initial", g.value);
      rd.integer(i, "axis", "initial", g.axis);
      rd.number(i, "offset", "initial", g.offset);
      rd.number(i, "width", "initial", g.width);
      rd.number(i, "amplitude", "initial", g.amplitude);
    }
  }
  {
    const std::set<std::string> any{"zero", "constant"};
    const std::set<std::string> grid_only{"tanh", "linear", "random-trig"};
    const std::string& k = c.initial.kind;
    if (!any.contains(k) && !grid_only.contains(k) && k != "odd-cos")
      rd.error("initial.kind: unknown '" + k + "'");
    if (axisym && grid_only.contains(k))
      rd.error("initial.kind: '" + k + "' needs a structured grid");
    if (!axisym && k == "odd-cos") rd.error("initial.kind: 'odd-cos' needs an axisymmetric grid");
    if (c.initial.axis < 0 || c.initial.axis >= kDim) rd.error("initial.axis: out of range");
    if (!(c.initial.width > 0.0)) rd.error("initial.width: must be positive");
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (rd.object(s, "solver",
                  {"solve", "max_iterations", "tolerance", "min_damping", "flow_step",
                   "flow_batch", "max_flow_steps", "linear_tolerance", "linear_max_iterations",
                   "continuation", "residual_factor"})) {
      SolveConfig& sc = c.solver;
      rd.boolean(s, "solve", "solver", c.solve);
      rd.integer(s, "max_iterations", "solver", sc.max_iterations);
      rd.number(s, "tolerance", "solver", sc.tolerance);
      rd.number(s, "min_damping", "solver", sc.min_damping);
      rd.number(s, "flow_step", "solver", sc.flow_step);
      rd.integer(s, "flow_batch", "solver", sc.flow_batch);
      rd.integer(s, "max_flow_steps", "solver", sc.max_flow_steps);
      rd.number(s, "linear_tolerance", "solver", sc.linear_tolerance);
      rd.integer(s, "linear_max_iterations", "solver", sc.linear_max_iterations);
      rd.numbers(s, "continuation", "solver", c.continuation);
      rd.number(s, "residual_factor", "solver", c.residual_factor);
      if (!(sc.tolerance > 0.0)) rd.error("solver.tolerance: must be positive");
      if (!(sc.min_damping > 0.0 && sc.min_damping <= 1.0))
        rd.error("solver.min_damping: must lie in (0, 1]");
      if (sc.flow_step < 0.0) rd.error("solver.flow_step: must be nonnegative");
      if (sc.max_iterations < 0 || sc.flow_batch < 1 || sc.max_flow_steps < 0 ||
          sc.linear_max_iterations < 1)
        rd.error("solver: iteration counts out of range");
    }
  }
  if (!c.continuation.empty() && c.nonlinearity != "scaled-allen-cahn")
    rd.error("solver.continuation: needs the scaled-allen-cahn family");

  if (j.contains("checks")) {
    const json& ch = j.at("checks");
    if (!ch.is_array()) {
      rd.error("checks: expected an array of names");
    } else {
      const auto known = check_names();
      for (const json& x : ch) {
        if (!x.is_string()) {
          rd.error("checks: expected an array of names");
          continue;
        }
        const std::string name = x.get<std::string>();
        if (std::find(known.begin(), known.end(), name) == known.end())
          rd.error("checks: unknown check '" + name + "'");
        else if (std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end())
          rd.error("checks: '" + name + "' listed twice");
        else c.checks.push_back(name);
      }
    }
  }
  const auto enabled = [&](const char* n) {
    return std::find(c.checks.begin(), c.checks.end(), n) != c.checks.end();
  };
  for (const char* n : {"gf", "levelsets", "liouville"})
    if (axisym && enabled(n)) rd.error(std::string("checks: '") + n + "' needs a structured grid");

  if (j.contains("identities")) {
    const json& s = j.at("identities");
    IdentityOptions& o = c.identities;
    if (rd.object(s, "identities",
                  {"charts", "fields", "step", "sample_nodes", "ibp_nodes", "ratio_range",
                   "kato_floor", "kato_tolerance", "ibp_tolerance"})) {
      if (s.contains("charts")) {
        if (!s.at("charts").is_array()) rd.error("identities.charts: expected an array");
        else
          for (std::size_t k = 0; k < s.at("charts").size(); ++k) {
            ChartSpec spec;
            read_chart(rd, s.at("charts")[k], "identities.charts[" + std::to_string(k) + "]", spec);
            o.charts.push_back(spec);
          }
      }
      rd.integer(s, "fields", "identities", o.fields);
      rd.number(s, "step", "identities", o.step);
      rd.integer(s, "sample_nodes", "identities", o.sample_nodes);
      read_resolution(rd, s, "ibp_nodes", "identities", o.ibp_nodes);
      std::vector<double> range;
      rd.numbers(s, "ratio_range", "identities", range);
      if (s.contains("ratio_range")) {
        if (range.size() != 2 || !(range[0] < range[1]))
          rd.error("identities.ratio_range: expected [lo, hi] with lo < hi");
        else o.ratio_lo = range[0], o.ratio_hi = range[1];
      }
      rd.number(s, "kato_floor", "identities", o.kato_floor);
      rd.number(s, "kato_tolerance", "identities", o.kato_tolerance);
      rd.number(s, "ibp_tolerance", "identities", o.ibp_tolerance);
      if (o.fields < 1) rd.error("identities.fields: must be at least 1");
      if (!(o.step > 0.0)) rd.error("identities.step: must be positive");
      if (o.sample_nodes < kMinResolution)
        rd.error("resolution below minimum " + std::to_string(kMinResolution));
    }
  }

  if (j.contains("stability")) {
    const json& s = j.at("stability");
    StabilityOptions& o = c.stability;
    if (rd.object(s, "stability", {"expect", "modes", "constant_states", "constant_tolerance"})) {
      rd.string(s, "expect", "stability", o.expect);
      if (o.expect != "stable" && o.expect != "unstable" && o.expect != "any")
        rd.error("stability.expect: one of stable, unstable, any");
      std::vector<int> modes;
      if (rd.node_counts(s, "modes", "stability", modes)) {
        if (modes.empty() || std::any_of(modes.begin(), modes.end(), [](int m) { return m < 0; }))
          rd.error("stability.modes: expected nonnegative integers");
        else o.modes = modes;
      }
      rd.numbers(s, "constant_states", "stability", o.constant_states);
      rd.number(s, "constant_tolerance", "stability", o.constant_tolerance);
    }
    if (!o.constant_states.empty() && !axisym && have_chart) {
      try {
        if (!make_chart(c.chart.name, c.chart.params).compact())
          rd.error("stability.constant_states: needs a compact chart");
      } catch (const ConfigError&) {
      }
    }
  }

  if (j.contains("gf")) {
    const json& s = j.at("gf");
    if (rd.object(s, "gf", {"cutoffs", "grad_floor"})) {
      rd.number(s, "grad_floor", "gf", c.gf.grad_floor);
      if (s.contains("cutoffs")) {
        const json& cs = s.at("cutoffs");
        if (!cs.is_array()) rd.error("gf.cutoffs: expected an array");
        else
          for (std::size_t k = 0; k < cs.size(); ++k) {
            const std::string path = "gf.cutoffs[" + std::to_string(k) + "]";
            CutoffSpec spec;
            if (!rd.object(cs[k], path, {"center", "radius"})) continue;
            rd.vec(cs[k], "center", path, spec.center);
            rd.number(cs[k], "radius", path, spec.radius);
            if (!(spec.radius > 0.0)) rd.error(path + ".radius: must be positive");
            c.gf.cutoffs.push_back(spec);
          }
      }
    }
  }

  if (j.contains("levelsets")) {
    const json& s = j.at("levelsets");
    LevelSetOptions& o = c.levelsets;
    if (rd.object(s, "levelsets", {"levels", "grad_floor", "defect_factor"})) {
      rd.numbers(s, "levels", "levelsets", o.levels);
      rd.number(s, "grad_floor", "levelsets", o.grad_floor);
      rd.number(s, "defect_factor", "levelsets", o.defect_factor);
      if (o.levels.empty()) rd.error("levelsets.levels: must not be empty");
    }
  }

  if (j.contains("liouville")) {
    const json& s = j.at("liouville");
    LiouvilleOptions& o = c.liouville;
    if (rd.object(s, "liouville",
                  {"center", "radii", "cutoff_radii", "parabolicity_outer", "r_inner",
                   "caccioppoli_radii", "caccioppoli_nodes", "flat_reference", "volume_tolerance",
                   "parabolicity_tolerance", "cutoff_allowance"})) {
      rd.vec(s, "center", "liouville", o.center);
      rd.numbers(s, "radii", "liouville", o.radii);
      rd.numbers(s, "cutoff_radii", "liouville", o.cutoff_radii);
      rd.numbers(s, "parabolicity_outer", "liouville", o.parabolicity_outer);
      rd.number(s, "r_inner", "liouville", o.r_inner);
      rd.numbers(s, "caccioppoli_radii", "liouville", o.caccioppoli_radii);
      if (s.contains("caccioppoli_nodes")) {
        std::array<int, kDim> n{};
        read_resolution(rd, s, "caccioppoli_nodes", "liouville", n);
        o.caccioppoli_nodes = n;
      }
      rd.boolean(s, "flat_reference", "liouville", o.flat_reference);
      rd.number(s, "volume_tolerance", "liouville", o.volume_tolerance);
      rd.number(s, "parabolicity_tolerance", "liouville", o.parabolicity_tolerance);
      rd.number(s, "cutoff_allowance", "liouville", o.cutoff_allowance);
      for (const auto* list : {&o.radii, &o.cutoff_radii, &o.caccioppoli_radii})
        if (std::any_of(list->begin(), list->end(), [](double r) { return !(r > 0.0); }))
          rd.error("liouville: radii must be positive");
      if (!(o.r_inner > 0.0)) rd.error("liouville.r_inner: must be positive");
      for (double r : o.parabolicity_outer)
        if (!(r > o.r_inner)) rd.error("liouville.parabolicity_outer: must exceed r_inner");
    }
  }
  return c;
}

}  // namespace

std::vector<std::string> validate_config(const json& config) {
  std::vector<std::string> diags;
  read_config(config, diags);
  return diags;
}

ExperimentConfig parse_config(const json& config) {
  std::vector<std::string> diags;
  ExperimentConfig c = read_config(config, diags);
  if (!diags.empty()) {
    std::string msg = diags.front();
    for (std::size_t k = 1; k < diags.size(); ++k) msg += "; " + diags[k];
    throw ConfigError(msg);
  }
  return c;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string report_fingerprint(const json& report) {
  json r = report;
  r.erase("wall_times");
  return r.dump();
}

// ---- running ----------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json failure(const std::string& metric, double value, double tolerance) {
  return {{"metric", metric}, {"value", value}, {"tolerance", tolerance}};
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

Nonlinearity build_nonlinearity(const ExperimentConfig& c, double lambda) {
  Nonlinearity nl = make_nonlinearity(c.nonlinearity, lambda);
  return c.shift != 0.0 ? with_shift(nl, c.shift) : nl;
}

struct Context {
  const ExperimentConfig& cfg;
  std::unique_ptr<StructuredGrid> grid;
  std::unique_ptr<AxisymmetricSphere> sphere;
  Nonlinearity nl;
  Field u;
  std::filesystem::path out;  // empty: no files
  std::string stability_verdict;

  const Discretization& disc() const {
    return grid ? static_cast<const Discretization&>(*grid) : *sphere;
  }

  GridScalarField field(Field values) const {
    return grid ? make_field(*grid, std::move(values)) : make_field(*sphere, std::move(values));
  }

  void write(const std::string& name, const std::string& text) const {
    if (out.empty()) return;
    std::ofstream os(out / name);
    if (!os) throw ConfigError("cannot write '" + (out / name).string() + "'");
    os << text;
  }
};

Field initial_field(const Context& ctx) {
  const InitialGuess& g = ctx.cfg.initial;
  if (ctx.sphere) {
    const AxisymmetricSphere& s = *ctx.sphere;
    const std::size_t n = s.size();
    Field u(n, g.kind == "constant" ? g.value : 0.0);
    if (g.kind == "odd-cos")
      // Built antisymmetric about the equator to the last bit.
      for (std::size_t j = 0; j < n; ++j)
        u[j] = 0.5 * g.amplitude * (std::cos(s.theta(j)) - std::cos(s.theta(n - 1 - j)));
    return u;
  }
  const StructuredGrid& grid = *ctx.grid;
  if (g.kind == "zero") return Field(grid.size(), 0.0);
  if (g.kind == "constant") return Field(grid.size(), g.value);
  if (g.kind == "tanh")
    return grid.sample([&](const Vec& x) { return std::tanh((x[g.axis] - g.offset) / g.width); });
  if (g.kind == "linear") return grid.sample([&](const Vec& x) { return x[g.axis]; });
  Pcg32 rng(ctx.cfg.seed, 7);
  const TrigField tf = random_trig_field(grid.chart(), rng);
  return grid.sample([&](const Vec& x) { return g.amplitude * tf.value(x); });
}

json run_solution(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const Discretization& disc = ctx.disc();
  const double h = disc.spacing_scale();
  json sec;
  Field u0 = initial_field(ctx);
  if (!c.continuation.empty()) {
    const auto family = [&](double lam) { return build_nonlinearity(c, lam); };
    const auto results = continuation(disc, family, c.continuation, u0, c.solver);
    json steps = json::array();
    bool ok = true;
    for (std::size_t k = 0; k < results.size(); ++k) {
      json s = results[k].report.to_json();
      s["lambda"] = c.continuation[k];
      steps.push_back(s);
      ok = ok && results[k].report.converged;
    }
    ctx.u = results.back().u;
    ctx.nl = family(c.continuation.back());
    sec["mode"] = "continuation";
    sec["steps"] = steps;
    sec["residual_sup"] = results.back().report.residual;
    sec["tolerance"] = c.solver.tolerance;
    sec["verdict"] = ok ? "pass" : "fail";
    if (!ok) sec["failures"] = {failure("solve_residual", results.back().report.residual, c.solver.tolerance)};
  } else if (c.solve) {
    const SolveResult r = solve_semilinear(disc, ctx.nl, u0, c.solver);
    ctx.u = r.u;
    sec["mode"] = "solved";
    sec["solve"] = r.report.to_json();
    sec["residual_sup"] = r.report.residual;
    sec["tolerance"] = c.solver.tolerance;
    sec["verdict"] = r.report.converged ? "pass" : "fail";
    if (!r.report.converged)
      sec["failures"] = {failure("solve_residual", r.report.residual, c.solver.tolerance)};
  } else {
    ctx.u = std::move(u0);
    const double res = sup_residual(disc, ctx.nl, ctx.u);
    sec["mode"] = "sampled";
    sec["residual_sup"] = res;
    if (c.residual_factor > 0.0) {
      const double tol = c.residual_factor * h * h * c.tol_scale;
      sec["tolerance"] = tol;
      sec["verdict"] = res <= tol ? "pass" : "fail";
      if (res > tol) sec["failures"] = {failure("pde_residual_sup", res, tol)};
    } else {
      sec["tolerance"] = nullptr;
      sec["verdict"] = "not-checked";
    }
  }
  sec["energy"] = energy(disc, ctx.nl, ctx.u);
  const auto [lo, hi] = std::minmax_element(ctx.u.begin(), ctx.u.end());
  sec["min"] = *lo;
  sec["max"] = *hi;
  return sec;
}

// -- identities

json check_identities(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const IdentityOptions& o = c.identities;
  std::vector<ChartSpec> charts = o.charts;
  if (charts.empty()) charts.push_back(c.chart);

  json rows = json::array();
  json failures = json::array();
  for (std::size_t ci = 0; ci < charts.size(); ++ci) {
    const MetricChart chart = make_chart(charts[ci].name, charts[ci].params);
    Pcg32 rng(c.seed, 100 + ci);
    std::vector<TrigField> fields;
    for (int k = 0; k < o.fields; ++k) fields.push_back(random_trig_field(chart, rng));

    const StructuredGrid probe(chart, {o.sample_nodes, o.sample_nodes});
    std::vector<Vec> points;
    for (std::size_t p = 0; p < probe.size(); ++p) {
      const Vec x = probe.coord(p);
      try {
        check_reach(chart, x, 3.0 * o.step);
      } catch (const EdgeProximity&) {
        continue;
      }
      points.push_back(x);
    }

    json frows = json::array();
    double ratio_min = INFINITY, ratio_max = -INFINITY, kato_min = INFINITY;
    long kato_checked = 0, kato_violations = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const ScalarFunction f = fields[k].function();
      double s1 = 0.0, s2 = 0.0;
      for (const Vec& x : points) {
        s1 = std::max(s1, std::abs(bochner_residual(chart, f, x, o.step)));
        s2 = std::max(s2, std::abs(bochner_residual(chart, f, x, 0.5 * o.step)));
        try {
          const double gap = kato_gap(chart, f, x, o.kato_floor, o.step);
          ++kato_checked;
          kato_min = std::min(kato_min, gap);
          if (gap < -o.kato_tolerance) ++kato_violations;
        } catch (const BelowGradientFloor&) {
        }
      }
      json row{{"field", k}, {"sup_residual", s1}, {"sup_residual_half_step", s2}};
      if (s2 > 0.0) {
        const double ratio = s1 / s2;
        row["ratio"] = ratio;
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
        if (ratio < o.ratio_lo || ratio > o.ratio_hi)
          failures.push_back(failure(charts[ci].name + ".field" + std::to_string(k) + ".ratio",
                                     ratio, ratio < o.ratio_lo ? o.ratio_lo : o.ratio_hi));
      } else {
        row["ratio"] = nullptr;  // exact at both steps
      }
      frows.push_back(row);
    }
    json r{{"chart", charts[ci].name},
           {"points", points.size()},
           {"fields", frows},
           {"ratio_min", std::isfinite(ratio_min) ? json(ratio_min) : json(nullptr)},
           {"ratio_max", std::isfinite(ratio_max) ? json(ratio_max) : json(nullptr)},
           {"kato_min", std::isfinite(kato_min) ? json(kato_min) : json(nullptr)},
           {"kato_checked", kato_checked},
           {"kato_violations", kato_violations}};
    if (kato_violations > 0)
      failures.push_back(failure(charts[ci].name + ".kato_min", kato_min, -o.kato_tolerance));

    if (chart.compact()) {
      const StructuredGrid g(chart, o.ibp_nodes);
      std::vector<Field> samples;
      for (const TrigField& tf : fields)
        samples.push_back(g.sample([&](const Vec& x) { return tf.value(x); }));
      double worst = 0.0;
      for (const Field& a : samples)
        for (const Field& b : samples) worst = std::max(worst, integration_by_parts_residual(g, a, b));
      r["ibp_max"] = worst;
      if (worst > o.ibp_tolerance)
        failures.push_back(failure(charts[ci].name + ".ibp_max", worst, o.ibp_tolerance));
    } else {
      r["ibp_max"] = nullptr;
    }
    rows.push_back(r);
  }
  return {{"charts", rows},
          {"ratio_range", {o.ratio_lo, o.ratio_hi}},
          {"kato_tolerance", o.kato_tolerance},
          {"ibp_tolerance", o.ibp_tolerance},
          {"verdict", failures.empty() ? "pass" : "fail"},
          {"failures", failures}};
}

// -- stability

json check_stability(Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const StabilityOptions& o = c.stability;
  StabilityConfig sc;
  sc.seed = c.seed;
  sc.tol_scale = c.tol_scale;
  const StabilityReport rep =
      ctx.grid ? assess_stability(*ctx.grid, ctx.nl, ctx.u, sc)
               : assess_sphere_stability(ctx.sphere->size(), ctx.sphere->radius(), ctx.nl, ctx.u,
                                         sc, o.modes);
  json sec = rep.to_json();
  sec["expect"] = o.expect;
  json failures = json::array();
  std::string verdict;
  if (rep.verdict == "inconclusive") {
    verdict = "inconclusive";
  } else if (o.expect == "any" || rep.verdict == o.expect) {
    verdict = "pass";
  } else {
    verdict = "fail";
    // Both verdicts are decided against the same threshold λ = −tol.
    failures.push_back(failure("lambda_min", rep.lambda_min, -rep.tolerance));
  }

  json states = json::array();
  for (double v : o.constant_states) {
    const Field u(ctx.disc().size(), v);
    const double predicted = -ctx.nl.f_prime(v);
    double lam = 0.0;
    if (ctx.sphere) {
      lam = assess_sphere_stability(ctx.sphere->size(), ctx.sphere->radius(), ctx.nl, u, sc,
                                    o.modes)
                .lambda_min;
    } else {
      lam = principal_eigenvalue(*ctx.grid, ctx.nl, u, sc).lambda_min;
    }
    const double err = std::abs(lam - predicted);
    states.push_back({{"value", v}, {"lambda_min", lam}, {"predicted", predicted}, {"error", err}});
    if (err > o.constant_tolerance) {
      failures.push_back(failure("constant_state_lambda_error", err, o.constant_tolerance));
      if (verdict != "inconclusive") verdict = "fail";
    }
  }
  if (!states.empty()) {
    sec["constant_states"] = states;
    sec["constant_tolerance"] = o.constant_tolerance;
  }
  sec["solver_verdict"] = rep.verdict;
  sec["verdict"] = verdict;
  sec["failures"] = failures;
  ctx.stability_verdict = rep.verdict;
  if (!ctx.out.empty())
    save_field_csv((ctx.out / "eigenvector.csv").string(), ctx.field(rep.eigenvector));
  return sec;
}

// -- gf

std::vector<CutoffSpec> default_cutoffs(const StructuredGrid& grid) {
  const MetricChart& chart = grid.chart();
  Vec center{};
  double len = INFINITY;
  for (int a = 0; a < kDim; ++a) {
    center[a] = 0.5 * (chart.axes[a].lo + chart.axes[a].hi);
    len = std::min(len, chart.axes[a].length());
  }
  std::vector<CutoffSpec> out;
  for (double f : {0.1, 0.15, 0.2, 0.25, 0.3}) out.push_back({center, f * len});
  return out;
}

json check_gf(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const StructuredGrid& grid = *ctx.grid;
  const auto cutoffs = c.gf.cutoffs.empty() ? default_cutoffs(grid) : c.gf.cutoffs;
  json rows = json::array();
  json failures = json::array();
  std::string csv = GFReport::csv_header() + "\n";
  double min_slack = INFINITY;
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    const Field phi = local_bump(grid, cutoffs[k].center, cutoffs[k].radius);
    GFReport r = gf_report(grid, ctx.u, phi, c.gf.grad_floor, "bump" + std::to_string(k));
    r.tolerance *= c.tol_scale;
    r.pass = r.slack >= -r.tolerance;
    json row = r.to_json();
    row["center"] = cutoffs[k].center;
    row["radius"] = cutoffs[k].radius;
    rows.push_back(row);
    csv += r.csv_row() + "\n";
    min_slack = std::min(min_slack, r.slack);
    if (!r.pass) failures.push_back(failure(r.cutoff_id + ".slack", r.slack, -r.tolerance));
  }
  ctx.write("gf.csv", csv);
  return {{"cutoffs", rows},
          {"min_slack", min_slack},
          {"verdict", failures.empty() ? "pass" : "fail"},
          {"failures", failures}};
}

// -- levelsets

json check_levelsets(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LevelSetOptions& o = c.levelsets;
  const StructuredGrid& grid = *ctx.grid;
  const double tol = o.defect_factor * grid.spacing_scale() * c.tol_scale;
  json levels = json::array();
  json failures = json::array();
  bool inconclusive = false;
  double worst = 0.0;
  for (std::size_t li = 0; li < o.levels.size(); ++li) {
    const double level = o.levels[li];
    json entry{{"level", level}};
    std::vector<LevelCurve> curves;
    try {
      curves = extract_level_set(grid, ctx.u, level, o.grad_floor);
    } catch (const EmptyLevelSet& e) {
      entry["note"] = e.what();
      entry["curves"] = json::array();
      levels.push_back(entry);
      inconclusive = true;
      continue;
    }
    json cs = json::array();
    for (std::size_t k = 0; k < curves.size(); ++k) {
      const LevelCurve& cv = curves[k];
      json row{{"vertices", cv.vertices.size()}, {"closed", cv.closed}};
      try {
        const double d = geodesic_defect(grid.chart(), cv);
        row["defect"] = d;
        worst = std::max(worst, d);
        if (d > tol)
          failures.push_back(failure("level" + std::to_string(li) + ".curve" + std::to_string(k) +
                                         ".defect",
                                     d, tol));
      } catch (const TooFewVertices&) {
        row["defect"] = nullptr;
        row["note"] = "too few vertices";
      }
      cs.push_back(row);
      if (!ctx.out.empty()) {
        std::ostringstream os;
        cv.write_csv(os, grid.chart());
        ctx.write("level_" + std::to_string(li) + "_" + std::to_string(k) + ".csv", os.str());
      }
    }
    if (curves.empty()) inconclusive = true;
    entry["curves"] = cs;
    levels.push_back(entry);
  }
  std::string verdict = !failures.empty() ? "fail" : inconclusive ? "inconclusive" : "pass";
  return {{"levels", levels},
          {"max_defect", worst},
          {"tolerance", tol},
          {"verdict", verdict},
          {"failures", failures}};
}

// -- liouville

json check_liouville(const Context& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const LiouvilleOptions& o = c.liouville;
  const StructuredGrid& grid = *ctx.grid;
  json failures = json::array();
  json sec;

  const Field dist = geodesic_distance(grid, o.center);
  const auto volumes = volume_growth_scan(grid, dist, o.radii);
  json vrows = json::array();
  bool r4_decreasing = true;
  for (std::size_t k = 0; k < volumes.size(); ++k) {
    const VolumeRow& v = volumes[k];
    vrows.push_back({{"R", v.R}, {"volume", v.volume}, {"r2", optional_number(v.r2)},
                     {"r4", optional_number(v.r4)}});
    if (k > 0 && v.r4 && volumes[k - 1].r4 && !(*v.r4 < *volumes[k - 1].r4)) r4_decreasing = false;
    if (o.flat_reference && v.r2) {
      const double rel = std::abs(*v.r2 / std::numbers::pi - 1.0);
      if (rel > o.volume_tolerance)
        failures.push_back(failure("volume.R" + std::to_string(k) + ".relative_error", rel,
                                   o.volume_tolerance));
    }
  }
  if (!r4_decreasing) failures.push_back(failure("volume.r4_decreasing", 0.0, 1.0));
  sec["volume"] = vrows;
  sec["r4_decreasing"] = r4_decreasing;

  const double bound = kCutoffLipschitz + o.cutoff_allowance;
  json crow = json::array();
  for (double R : o.cutoff_radii.empty() ? o.radii : o.cutoff_radii) {
    const Field tau = make_cutoff(grid, dist, R);
    const double scaled = R * max_abs(grad_norm_field(grid, tau));
    crow.push_back({{"R", R}, {"scaled_max_gradient", scaled}});
    if (scaled > bound) failures.push_back(failure("cutoff.R_max_gradient", scaled, bound));
  }
  sec["cutoff"] = {{"rows", crow}, {"bound", bound}};

  const auto zac = zac_energy(grid, ctx.u, dist, o.radii);
  json zrows = json::array();
  bool zac_ok = true;
  for (const ZacRow& z : zac) {
    zrows.push_back({{"R", z.R}, {"energy", z.energy}, {"sup_grad", z.sup_grad},
                     {"cutoff_energy", z.cutoff_energy}, {"volume_2r", z.volume_2r},
                     {"link1", z.link1}, {"majorant", z.majorant}, {"link1_ok", z.link1_ok},
                     {"link2_ok", z.link2_ok}});
    if (!z.link1_ok) failures.push_back(failure("zac.link1", z.energy, z.link1));
    if (!z.link2_ok) failures.push_back(failure("zac.link2", z.link1, 1.1 * z.majorant));
    zac_ok = zac_ok && z.link1_ok && z.link2_ok;
  }
  sec["zac"] = zrows;
  ctx.write("scan.csv", scan_csv(volumes, zac));

  json prow = json::array();
  bool par_monotone = true;
  double prev = INFINITY;
  for (double Ro : o.parabolicity_outer) {
    const double e = parabolicity_probe(grid, dist, Ro, o.r_inner);
    json row{{"R_outer", Ro}, {"energy", e}};
    if (o.flat_reference) {
      const double ref = 2.0 * std::numbers::pi / std::log(Ro / o.r_inner);
      const double rel = std::abs(e / ref - 1.0);
      row["reference"] = ref;
      row["relative_error"] = rel;
      if (rel > o.parabolicity_tolerance)
        failures.push_back(failure("parabolicity.relative_error", rel, o.parabolicity_tolerance));
    }
    if (e > prev) par_monotone = false;
    prev = e;
    prow.push_back(row);
  }
  sec["parabolicity"] = {{"rows", prow}, {"r_inner", o.r_inner}, {"non_increasing", par_monotone},
                         {"family", "logarithmic cutoff about the centre only"}};

  // Caccioppoli needs a bounded solution; it is solved on its own grid when one is given.
  json cac;
  bool sign_ok = true;
  try {
    std::unique_ptr<StructuredGrid> own;
    const StructuredGrid* g = &grid;
    Field u = ctx.u;
    if (o.caccioppoli_nodes) {
      own = std::make_unique<StructuredGrid>(grid.chart(), *o.caccioppoli_nodes);
      g = own.get();
      const SolveResult r = solve_semilinear(*g, ctx.nl, Field(g->size(), 0.0), c.solver);
      cac["solve"] = r.report.to_json();
      if (!r.report.converged)
        failures.push_back(failure("caccioppoli.solve_residual", r.report.residual, c.solver.tolerance));
      u = r.u;
    }
    const Field d = o.caccioppoli_nodes ? geodesic_distance(*g, o.center) : dist;
    json rows = json::array();
    for (double R : o.caccioppoli_radii) {
      const CaccioppoliReport r = caccioppoli_check(*g, ctx.nl, u, d, R);
      rows.push_back(r.to_json());
      if (!r.pass) failures.push_back(failure("caccioppoli.lhs", r.lhs, r.rhs));
    }
    cac["rows"] = rows;
  } catch (const SignConditionViolated& e) {
    sign_ok = false;
    cac["note"] = e.what();
  }
  sec["caccioppoli"] = cac;

  const bool hypotheses = sign_ok && r4_decreasing && zac_ok && par_monotone;
  const auto [lo, hi] = std::minmax_element(ctx.u.begin(), ctx.u.end());
  const bool nonconstant = *hi - *lo > 1e-8;
  sec["hypotheses"] = {{"sign_condition", sign_ok},
                       {"volume_growth", r4_decreasing},
                       {"cutoff_energy", zac_ok},
                       {"parabolic", par_monotone}};
  // A stable nonconstant field with every hypothesis met points at a discretization artifact.
  sec["artifact_suspected"] = hypotheses && nonconstant && ctx.stability_verdict == "stable";
  sec["verdict"] = !failures.empty() ? "fail" : sign_ok ? "pass" : "inconclusive";
  sec["failures"] = failures;
  return sec;
}

}  // namespace

ExperimentResult run_experiment(const json& config, const RunOptions& options) {
  ExperimentConfig c = parse_config(config);
  if (options.tol_scale) {
    if (!(*options.tol_scale > 0.0)) throw ConfigError("tol-scale must be positive");
    c.tol_scale = *options.tol_scale;
  }
  const std::string out_dir = options.output.value_or(c.output);

  json wall = json::object();
  auto t0 = Clock::now();
  Context ctx{c, nullptr, nullptr, build_nonlinearity(c, c.lambda), {}, {}, {}};
  if (c.discretization == "axisymmetric")
    ctx.sphere = std::make_unique<AxisymmetricSphere>(c.nodes[0], c.chart.params.radius, 0);
  else
    ctx.grid = std::make_unique<StructuredGrid>(make_chart(c.chart.name, c.chart.params), c.nodes);
  if (options.write_files && !out_dir.empty()) {
    ctx.out = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
  }
  wall["build"] = seconds_since(t0);

  json report;
  report["schema"] = kReportSchema;
  report["name"] = c.name;
  report["provenance"] = {{"config_hash", config_hash(config)},
                          {"code_version", kCodeVersion},
                          {"seed", c.seed}};
  report["config"] = config;
  report["tol_scale"] = c.tol_scale;
  report["discretization"] = ctx.disc().describe();
  report["spacing"] = ctx.disc().spacing_scale();
  report["nonlinearity"] = {{"name", ctx.nl.name}, {"lambda", c.lambda}, {"shift", c.shift}};

  t0 = Clock::now();
  json solution = run_solution(ctx);
  wall["solution"] = seconds_since(t0);
  report["solution"] = solution;
  if (!ctx.out.empty()) save_field_csv((ctx.out / "u.csv").string(), ctx.field(ctx.u));

  json checks = json::array();
  int n_pass = 0, n_fail = 0, n_inconclusive = 0;
  for (const std::string& name : c.checks) {
    t0 = Clock::now();
    json sec;
    try {
      if (name == "identities") sec = check_identities(ctx);
      else if (name == "stability") sec = check_stability(ctx);
      else if (name == "gf") sec = check_gf(ctx);
      else if (name == "levelsets") sec = check_levelsets(ctx);
      else sec = check_liouville(ctx);
    } catch (const Error& e) {
      sec = {{"verdict", "inconclusive"}, {"reason", e.what()}, {"failures", json::array()}};
    }
    sec["check"] = name;
    wall[name] = seconds_since(t0);
    const std::string v = sec["verdict"];
    (v == "pass" ? n_pass : v == "fail" ? n_fail : n_inconclusive) += 1;
    checks.push_back(sec);
  }
  report["checks"] = checks;

  const bool solution_failed = solution["verdict"] == "fail";
  const bool failed = n_fail > 0 || solution_failed;
  report["summary"] = {{"pass", n_pass},
                       {"fail", n_fail},
                       {"inconclusive", n_inconclusive},
                       {"solution", solution["verdict"]},
                       {"status", failed ? "fail" : "pass"}};
  report["wall_times"] = wall;
  if (!ctx.out.empty()) ctx.write("report.json", report.dump(2) + "\n");
  return {report, failed};
}

}  // namespace stablab
