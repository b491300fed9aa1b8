#include <algorithm>
#include <string>

#include "doctest.h"
#include "stablab/errors.hpp"
#include "stablab/experiment.hpp"
#include "stablab/numeric.hpp"

using namespace stablab;
using nlohmann::json;

namespace {

RunOptions in_memory() {
  RunOptions o;
  o.write_files = false;
  return o;
}

json small_plane(const json& checks) {
  return {{"schema", kConfigSchema},
          {"name", "small-plane"},
          {"chart", {{"name", "flat-plane"}, {"half_width", 4.0}}},
          {"grid", {{"discretization", "structured"}, {"nodes", {33, 33}}}},
          {"nonlinearity", {{"name", "positive"}}},
          {"initial", {{"kind", "tanh"}, {"axis", 0}}},
          {"solver", {{"solve", false}, {"residual_factor", 0.0}}},
          {"checks", checks}};
}

bool has_diagnostic(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(),
                     [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("bundled recipes validate") {
  const auto names = recipe_names();
  CHECK(names == std::vector<std::string>{"flat-plane-liouville", "identity-sweep",
                                          "sphere-bifurcation", "tanh-cylinder"});
  for (const auto& n : names) CHECK(validate_config(recipe(n)).empty());
  CHECK_THROWS_AS(recipe("nope"), ConfigError);
}

TEST_CASE("validation diagnostics") {
  json c = recipe("tanh-cylinder");
  c["grid"]["nodes"] = {4, 16};
  CHECK(has_diagnostic(validate_config(c), "resolution below minimum 8"));

  c = recipe("tanh-cylinder");
  c["chart"]["name"] = "hyperbolic-disc";
  CHECK(has_diagnostic(validate_config(c), "unknown chart 'hyperbolic-disc'"));
  CHECK_THROWS_AS(parse_config(c), ConfigError);

  c = recipe("tanh-cylinder");
  c["colour"] = "blue";
  CHECK(has_diagnostic(validate_config(c), "unknown key 'colour'"));

  c = recipe("tanh-cylinder");
  c["seed"] = -3;
  CHECK_FALSE(validate_config(c).empty());

  c = recipe("sphere-bifurcation");
  c["checks"] = {"stability", "gf"};
  CHECK_FALSE(validate_config(c).empty());

  c = recipe("tanh-cylinder");
  c["nonlinearity"]["name"] = "sine-gordon";
  c["checks"] = json::array({"bogus"});
  CHECK(validate_config(c).size() >= 2);

  json missing = recipe("identity-sweep");
  missing.erase("chart");
  CHECK_FALSE(validate_config(missing).empty());
}

TEST_CASE("config hash tracks the config") {
  const json a = recipe("identity-sweep");
  json b = a;
  CHECK(config_hash(a) == config_hash(b));
  b["seed"] = 2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("identity sweep passes and reports provenance") {
  const ExperimentResult r = run_experiment(recipe("identity-sweep"), in_memory());
  CHECK_FALSE(r.failed);
  const json& rep = r.report;
  CHECK(rep.at("schema") == kReportSchema);
  CHECK(rep.at("provenance").at("code_version") == kCodeVersion);
  CHECK(rep.at("provenance").at("config_hash") == config_hash(recipe("identity-sweep")));
  CHECK(rep.at("summary").at("status") == "pass");
  const json& sec = rep.at("checks").at(0);
  CHECK(sec.at("check") == "identities");
  CHECK(sec.at("charts").size() == 3);
}

TEST_CASE("reports do not depend on the thread count") {
  set_thread_count(1);
  const std::string a = report_fingerprint(run_experiment(recipe("identity-sweep"), in_memory()).report);
  set_thread_count(8);
  const std::string b = report_fingerprint(run_experiment(recipe("identity-sweep"), in_memory()).report);
  set_thread_count(1);
  CHECK(a == b);
  CHECK(a.find("wall_times") == std::string::npos);
}

TEST_CASE("sphere branch is reported unstable as expected") {
  json c = recipe("sphere-bifurcation");
  c["grid"]["nodes"] = json::array({64});
  const ExperimentResult r = run_experiment(c, in_memory());
  CHECK_FALSE(r.failed);
  const json& sec = r.report.at("checks").at(0);
  CHECK(sec.at("verdict") == "pass");
  CHECK(sec.at("solver_verdict") == "unstable");
  CHECK(sec.at("lambda_min").get<double>() < -0.1);
  CHECK(r.report.at("solution").at("mode") == "continuation");

  c["stability"]["expect"] = "stable";
  const ExperimentResult f = run_experiment(c, in_memory());
  CHECK(f.failed);
  CHECK(f.report.at("checks").at(0).at("failures").at(0).at("metric") == "lambda_min");
}

TEST_CASE("a check that raises becomes inconclusive with a reason") {
  json c = small_plane({"liouville"});
  c["liouville"] = {{"radii", {0.05}}, {"parabolicity_outer", {2.0}}, {"caccioppoli_radii", {1.0}}};
  const ExperimentResult r = run_experiment(c, in_memory());
  const json& sec = r.report.at("checks").at(0);
  CHECK(sec.at("verdict") == "inconclusive");
  CHECK(sec.at("reason").get<std::string>().rfind("RadiusTooSmall: ", 0) == 0);
  CHECK(r.report.at("summary").at("inconclusive") == 1);
  CHECK_FALSE(r.failed);
}

TEST_CASE("tolerance scale is recorded and applied") {
  json c = recipe("tanh-cylinder");
  c["grid"]["nodes"] = {64, 16};
  c["checks"] = json::array({"levelsets"});
  RunOptions o = in_memory();
  o.tol_scale = 1e-12;
  const ExperimentResult r = run_experiment(c, o);
  CHECK(r.report.at("tol_scale") == 1e-12);
  CHECK(r.failed);
  const ExperimentResult ok = run_experiment(c, in_memory());
  CHECK(ok.report.at("tol_scale") == 1.0);
  CHECK_FALSE(ok.failed);
}
