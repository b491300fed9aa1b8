#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "stablab/errors.hpp"
#include "stablab/experiment.hpp"
#include "stablab/field_io.hpp"
#include "stablab/numeric.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

// A path that does not exist but names a bundled recipe selects the recipe.
nlohmann::json resolve_config(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    const auto names = stablab::recipe_names();
    if (std::find(names.begin(), names.end(), arg) != names.end()) return stablab::recipe(arg);
  }
  return stablab::load_config_file(arg);
}

void print_summary(const nlohmann::json& report) {
  std::printf("%s: solution %s\n", report["name"].get<std::string>().c_str(),
              report["solution"]["verdict"].get<std::string>().c_str());
  for (const auto& sec : report["checks"]) {
    std::printf("  %-11s %s", sec["check"].get<std::string>().c_str(),
                sec["verdict"].get<std::string>().c_str());
    if (sec.contains("reason")) std::printf("  (%s)", sec["reason"].get<std::string>().c_str());
    std::printf("\n");
    for (const auto& f : sec["failures"])
      std::printf("      %s = %.6g (tolerance %.6g)\n", f["metric"].get<std::string>().c_str(),
                  f["value"].get<double>(), f["tolerance"].get<double>());
  }
  std::printf("status: %s\n", report["summary"]["status"].get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for stable solutions of semilinear equations on surfaces"};
  app.require_subcommand(1);

  int threads = 0;
  std::string out_dir;
  double tol_scale = 0.0;
  app.add_option("--threads", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a config file or a bundled recipe");
  run->add_option("config", config_path, "Config JSON path or recipe name")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--tol-scale", tol_scale, "Multiply verdict tolerances")
      ->check(CLI::PositiveNumber);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Only print the status line");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Config JSON path or recipe name")->required();

  auto* recipes = app.add_subcommand("recipes", "List bundled recipes");
  std::string dump_name;
  recipes->add_option("--show", dump_name, "Print the config of one recipe");

  std::string field_path;
  auto* dump = app.add_subcommand("dump-field", "Print a field CSV as JSON with statistics");
  dump->add_option("field", field_path, "Field CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  if (threads > 0) stablab::set_thread_count(threads);

  try {
    if (*run) {
      stablab::RunOptions opts;
      if (!out_dir.empty()) opts.output = out_dir;
      if (tol_scale > 0.0) opts.tol_scale = tol_scale;
      const auto result = stablab::run_experiment(resolve_config(config_path), opts);
      if (quiet)
        std::printf("status: %s\n", result.report["summary"]["status"].get<std::string>().c_str());
      else
        print_summary(result.report);
      return result.failed ? kExitFail : kExitPass;
    }
    if (*validate) {
      const auto diags = stablab::validate_config(resolve_config(config_path));
      for (const auto& d : diags) std::printf("%s\n", d.c_str());
      if (diags.empty()) std::printf("ok\n");
      return diags.empty() ? kExitPass : kExitConfig;
    }
    if (*recipes) {
      if (!dump_name.empty()) {
        std::printf("%s\n", stablab::recipe(dump_name).dump(2).c_str());
        return kExitPass;
      }
      for (const auto& name : stablab::recipe_names()) std::printf("%s\n", name.c_str());
      return kExitPass;
    }
    const auto field = stablab::load_field_csv(field_path);
    double lo = 0.0, hi = 0.0;
    if (!field.values.empty()) {
      const auto [a, b] = std::minmax_element(field.values.begin(), field.values.end());
      lo = *a;
      hi = *b;
    }
    auto j = nlohmann::json::parse(stablab::field_to_json(field));
    j["min"] = lo;
    j["max"] = hi;
    j["count"] = field.values.size();
    std::printf("%s\n", j.dump(2).c_str());
    return kExitPass;
  } catch (const stablab::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const stablab::FormatError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const stablab::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitFail;
  }
}
