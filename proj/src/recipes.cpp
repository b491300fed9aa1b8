#include <map>

#include "stablab/errors.hpp"
#include "stablab/experiment.hpp"

namespace stablab {

using nlohmann::json;

namespace {

const std::map<std::string, json>& registry() {
  static const std::map<std::string, json> recipes = [] {
    std::map<std::string, json> r;

    // Sampled one-dimensional profile on a 16 × 8 cylinder.
    r["tanh-cylinder"] = {
        {"schema", kConfigSchema},
        {"name", "tanh-cylinder"},
        {"chart", {{"name", "flat-cylinder"}, {"half_width", 8.0}, {"circumference", 8.0}}},
        {"grid", {{"discretization", "structured"}, {"nodes", {256, 64}}}},
        {"nonlinearity", {{"name", "allen-cahn"}}},
        {"initial", {{"kind", "tanh"}, {"axis", 0}}},
        {"solver", {{"solve", false}, {"residual_factor", 5.0}}},
        {"checks", {"identities", "stability", "gf", "levelsets"}},
        {"seed", 1},
        {"stability", {{"expect", "stable"}}},
        {"gf",
         {{"grad_floor", 1e-3},
          {"cutoffs",
           {{{"center", {0.0, 4.0}}, {"radius", 1.5}},
            {{"center", {0.0, 4.0}}, {"radius", 2.5}},
            {{"center", {0.0, 4.0}}, {"radius", 3.5}},
            {{"center", {1.0, 2.0}}, {"radius", 2.0}},
            {{"center", {-2.0, 6.0}}, {"radius", 3.0}}}}}},
        {"levelsets", {{"levels", {-0.5, 0.0, 0.5}}, {"defect_factor", 2.0}}},
    };

    // Odd branch of λ(u − u³) on the unit sphere, continued from near λ = 2.
    r["sphere-bifurcation"] = {
        {"schema", kConfigSchema},
        {"name", "sphere-bifurcation"},
        {"chart", {{"name", "sphere"}, {"radius", 1.0}}},
        {"grid", {{"discretization", "axisymmetric"}, {"nodes", json::array({256})}}},
        {"nonlinearity", {{"name", "scaled-allen-cahn"}, {"lambda", 3.0}}},
        {"initial", {{"kind", "odd-cos"}, {"amplitude", 0.3}}},
        {"solver", {{"solve", true}, {"continuation", {2.2, 2.4, 2.6, 2.8, 3.0}}}},
        {"checks", json::array({"stability"})},
        {"seed", 1},
        {"stability",
         {{"expect", "unstable"}, {"modes", {0, 1, 2}}, {"constant_states", {1.0, -1.0, 0.0}}}},
    };

    r["flat-plane-liouville"] = {
        {"schema", kConfigSchema},
        {"name", "flat-plane-liouville"},
        {"chart", {{"name", "flat-plane"}, {"half_width", 34.0}}},
        {"grid", {{"discretization", "structured"}, {"nodes", {1024, 1024}}}},
        {"nonlinearity", {{"name", "positive"}}},
        {"initial", {{"kind", "tanh"}, {"axis", 0}}},
        {"solver", {{"solve", false}, {"residual_factor", 0.0}}},
        {"checks", json::array({"liouville"})},
        {"seed", 1},
        {"liouville",
         {{"center", {0.0, 0.0}},
          {"radii", {4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}},
          {"parabolicity_outer", {4, 8, 16, 30}},
          {"r_inner", 1.0},
          {"caccioppoli_radii", {2, 4, 8}},
          {"caccioppoli_nodes", {257, 257}},
          {"flat_reference", true}}},
    };

    r["identity-sweep"] = {
        {"schema", kConfigSchema},
        {"name", "identity-sweep"},
        {"chart", {{"name", "flat-torus"}, {"periods", {1.0, 1.0}}}},
        {"grid", {{"discretization", "structured"}, {"nodes", {64, 64}}}},
        {"nonlinearity", {{"name", "allen-cahn"}}},
        {"initial", {{"kind", "random-trig"}, {"amplitude", 1.0}}},
        {"solver", {{"solve", false}, {"residual_factor", 0.0}}},
        {"checks", json::array({"identities"})},
        {"seed", 1},
        {"identities",
         {{"charts",
           {{{"name", "flat-torus"}, {"periods", {1.0, 1.0}}},
            {{"name", "sphere"}, {"radius", 1.0}, {"band", 0.3}},
            {{"name", "polar-plane"}, {"r_min", 0.5}, {"r_max", 2.0}}}},
          {"fields", 10},
          {"step", 1.0 / 64},
          {"ibp_nodes", {64, 64}}}},
    };
    return r;
  }();
  return recipes;
}

}  // namespace

std::vector<std::string> recipe_names() {
  std::vector<std::string> names;
  for (const auto& [name, cfg] : registry()) names.push_back(name);
  return names;
}

json recipe(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) throw ConfigError("unknown recipe '" + name + "'");
  return it->second;
}

}  // namespace stablab
