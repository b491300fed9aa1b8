#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stablab/metric.hpp"
#include "stablab/solver.hpp"

namespace stablab {

inline constexpr const char* kConfigSchema = "stablab-config/1";
inline constexpr const char* kReportSchema = "stablab-report/1";
inline constexpr const char* kCodeVersion = "stablab 0.3.0";
inline constexpr int kMinResolution = 8;

struct ChartSpec {
  std::string name;
  ChartParams params;
};

struct InitialGuess {
  // zero | constant | tanh | linear | odd-cos | random-trig
  std::string kind = "zero";
  double value = 0.0;      // constant
  int axis = 0;            // tanh, linear
  double offset = 0.0;     // tanh: tanh((x_axis − offset) / width)
  double width = 1.4142135623730951;
  double amplitude = 1.0;  // odd-cos, random-trig
};

struct IdentityOptions {
  std::vector<ChartSpec> charts;  // empty: the experiment chart
  int fields = 10;
  double step = 1.0 / 64;         // compared against step / 2
  int sample_nodes = 24;          // per axis
  std::array<int, kDim> ibp_nodes{64, 64};
  double ratio_lo = 3.5;
  double ratio_hi = 4.5;
  double kato_floor = 1e-3;       // |∇φ| threshold
  double kato_tolerance = 1e-6;
  double ibp_tolerance = 1e-10;
};

struct StabilityOptions {
  std::string expect = "stable";  // stable | unstable | any
  std::vector<int> modes{0, 1, 2};
  std::vector<double> constant_states;  // compared with the λ_min = −f′(c) oracle
  double constant_tolerance = 1e-3;
};

struct CutoffSpec {
  Vec center{};
  double radius = 1.0;
};

struct GFOptions {
  std::vector<CutoffSpec> cutoffs;  // empty: five bumps about the chart centre
  double grad_floor = 1e-3;
};

struct LevelSetOptions {
  std::vector<double> levels{-0.5, 0.0, 0.5};
  double grad_floor = -1.0;
  double defect_factor = 2.0;  // pass when defect ≤ factor · h
};

struct LiouvilleOptions {
  Vec center{};
  std::vector<double> radii{4, 6, 8, 10, 12, 14, 16};
  std::vector<double> cutoff_radii;  // empty: same as radii
  std::vector<double> parabolicity_outer{4, 8, 16, 30};
  double r_inner = 1.0;
  std::vector<double> caccioppoli_radii{2, 4, 8};
  std::optional<std::array<int, kDim>> caccioppoli_nodes;  // separate solve grid
  bool flat_reference = false;  // compare against the Euclidean-plane oracles
  double volume_tolerance = 0.05;
  double parabolicity_tolerance = 0.10;
  double cutoff_allowance = 0.1;
};

struct ExperimentConfig {
  std::string name;
  ChartSpec chart;
  std::string discretization = "structured";  // structured | axisymmetric
  std::array<int, kDim> nodes{64, 64};        // axisymmetric: nodes[0] = n_theta
  std::string nonlinearity = "allen-cahn";
  double lambda = 1.0;
  double shift = 0.0;
  InitialGuess initial;
  bool solve = true;
  SolveConfig solver;
  std::vector<double> continuation;  // λ values, solved in order
  double residual_factor = 5.0;      // unsolved fields: sup residual ≤ factor · h²
  std::vector<std::string> checks;
  std::uint64_t seed = 1;
  std::string output;
  double tol_scale = 1.0;

  IdentityOptions identities;
  StabilityOptions stability;
  GFOptions gf;
  LevelSetOptions levelsets;
  LiouvilleOptions liouville;
};

std::vector<std::string> check_names();

/// Empty when the config is valid. Unknown keys, unknown names and ranges are
/// all reported; nothing is thrown.
std::vector<std::string> validate_config(const nlohmann::json& config);
/// Throws ConfigError carrying every diagnostic.
ExperimentConfig parse_config(const nlohmann::json& config);
nlohmann::json load_config_file(const std::string& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON text, in hex.
std::string config_hash(const nlohmann::json& config);

struct RunOptions {
  std::optional<std::string> output;  // overrides config.output
  std::optional<double> tol_scale;
  bool write_files = true;
};

struct ExperimentResult {
  nlohmann::json report;
  bool failed = false;
};

/// Runs the config: build, solve, then each check in declared order. A check
/// that throws is recorded as inconclusive with the reason.
ExperimentResult run_experiment(const nlohmann::json& config, const RunOptions& options = {});

/// The report without its wall_times entries, serialized for comparisons.
std::string report_fingerprint(const nlohmann::json& report);

std::vector<std::string> recipe_names();
/// Throws ConfigError for unknown names.
nlohmann::json recipe(const std::string& name);

}  // namespace stablab
