// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <string>
#include <thread>

#include "json.hpp"
#include "stablab/experiment.hpp"
#include "stablab/geodesic.hpp"
#include "stablab/numeric.hpp"
#include "stablab/stability.hpp"

using namespace stablab;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct RecipeRun {
  json report;
  double seconds = 0.0;
  bool reproducible = false;
};

// Timed run at 8 threads, then a second run at 1 thread for the fingerprint comparison.
RecipeRun run_recipe(const std::string& name) {
  RunOptions opts;
  opts.write_files = false;
  RecipeRun out;
  set_thread_count(8);
  const auto t0 = std::chrono::steady_clock::now();
  out.report = run_experiment(recipe(name), opts).report;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  set_thread_count(1);
  const json single = run_experiment(recipe(name), opts).report;
  out.reproducible = report_fingerprint(out.report) == report_fingerprint(single);
  return out;
}

const json& section(const json& report, const std::string& check) {
  for (const json& s : report.at("checks"))
    if (s.at("check") == check) return s;
  throw std::runtime_error("report has no '" + check + "' section");
}

double num(const json& j) { return j.is_number() ? j.get<double>() : NAN; }

class Suite {
 public:
  void record(int n, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }

 private:
  bool failed_ = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

}  // namespace

int main() {
  Suite suite;
  std::map<std::string, RecipeRun> runs;
  for (const auto& name : recipe_names()) {
    try {
      runs[name] = run_recipe(name);
    } catch (const std::exception& e) {
      std::printf("error running recipe %s: %s\n", name.c_str(), e.what());
    }
  }
  const auto have = [&](const std::string& n) { return runs.count(n) > 0; };

  // 1. Bochner residual ratios under step halving.
  if (have("identity-sweep")) {
    const RecipeRun& r = runs["identity-sweep"];
    const json& sec = section(r.report, "identities");
    bool ok = sec.at("charts").size() == 3;
    double lo = INFINITY, hi = -INFINITY;
    for (const json& c : sec.at("charts")) {
      const double a = num(c.at("ratio_min")), b = num(c.at("ratio_max"));
      ok = ok && c.at("fields").size() == 10 && a >= 3.5 && b <= 4.5;
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    ok = ok && r.seconds < 30.0;
    suite.record(1, ok, fmt("Bochner ratio range [%.4f, %.4f] over 3 charts x 10 fields, %.2f s", lo,
                            hi, r.seconds));

    // 2. Kato inequality on the same corpus.
    long violations = 0, checked = 0;
    double kmin = INFINITY;
    for (const json& c : sec.at("charts")) {
      violations += c.at("kato_violations").get<long>();
      checked += c.at("kato_checked").get<long>();
      kmin = std::min(kmin, num(c.at("kato_min")));
    }
    suite.record(2, violations == 0 && checked > 0,
                 fmt("%ld violations below -1e-6 at %ld checked points (min gap %.3e)", violations,
                     checked, kmin));

    // 3. Summation by parts on the periodic grids.
    double worst = 0.0;
    int periodic = 0;
    for (const json& c : sec.at("charts"))
      if (c.at("ibp_max").is_number()) {
        worst = std::max(worst, num(c.at("ibp_max")));
        ++periodic;
      }
    suite.record(3, periodic > 0 && worst <= 1e-10,
                 fmt("max |sum w phi Lap psi + D(phi, psi)| = %.3e over %d periodic grid(s)", worst,
                     periodic));
  } else {
    for (int n : {1, 2, 3}) suite.record(n, false, "identity-sweep did not run");
  }

  // 4. Sampled kink on the cylinder.
  if (have("tanh-cylinder")) {
    const RecipeRun& r = runs["tanh-cylinder"];
    const json& rep = r.report;
    const double h = num(rep.at("spacing"));
    const double res = num(rep.at("solution").at("residual_sup"));
    const json& st = section(rep, "stability");
    const double lam = num(st.at("lambda_min")), tol = num(st.at("tolerance"));
    const json& gf = section(rep, "gf");
    int gf_pass = 0;
    for (const json& c : gf.at("cutoffs")) gf_pass += c.at("pass").get<bool>() ? 1 : 0;
    const json& ls = section(rep, "levelsets");
    int curves = 0;
    bool each_level = true;
    for (const json& l : ls.at("levels")) {
      curves += static_cast<int>(l.at("curves").size());
      each_level = each_level && !l.at("curves").empty();
    }
    const double defect = num(ls.at("max_defect"));
    const bool ok = res <= 5 * h * h && st.at("solver_verdict") == "stable" && lam >= -tol &&
                    gf.at("cutoffs").size() == 5 && gf_pass == 5 &&
                    ls.at("verdict") == "pass" && each_level && defect <= 2 * h &&
                    section(rep, "identities").at("verdict") == "pass" && r.seconds < 60.0;
    suite.record(4, ok,
                 fmt("residual %.3e <= %.3e; lambda_min %.3e >= %.3e; GF %d/5 pass (min slack "
                     "%.3e); %d level curves, max defect %.3e <= %.3e; %.2f s",
                     res, 5 * h * h, lam, -tol, gf_pass, num(gf.at("min_slack")), curves, defect,
                     2 * h, r.seconds));
  } else {
    suite.record(4, false, "tanh-cylinder did not run");
  }

  // 5. Constants and the nonconstant branch on the unit sphere at lambda = 3.
  if (have("sphere-bifurcation")) {
    const RecipeRun& r = runs["sphere-bifurcation"];
    const json& st = section(r.report, "stability");
    double err_pm = 0.0;
    int found = 0;
    for (const json& s : st.at("constant_states")) {
      const double v = num(s.at("value"));
      if (std::abs(std::abs(v) - 1.0) == 0.0) {
        err_pm = std::max(err_pm, std::abs(num(s.at("lambda_min")) - 6.0));
        ++found;
      }
    }
    const double lam = num(st.at("lambda_min"));
    const double amp = std::max(std::abs(num(r.report.at("solution").at("min"))),
                                std::abs(num(r.report.at("solution").at("max"))));
    const bool ok = found == 2 && err_pm <= 1e-3 && lam <= -0.1 && amp > 0.1 &&
                    r.report.at("solution").at("verdict") == "pass" && r.seconds < 120.0;
    suite.record(5, ok,
                 fmt("|lambda_min(+-1) - 6| = %.3e; branch max|u| %.6f with lambda_min %.6f; %.2f s",
                     err_pm, amp, lam, r.seconds));
  } else {
    suite.record(5, false, "sphere-bifurcation did not run");
  }

  // 6. Eigenvalue oracles.
  {
    set_thread_count(8);
    const int n = 256;
    const Field zero(n, 0.0);
    const StabilityReport s0 = assess_sphere_stability(n, 1.0, allen_cahn(), zero, {});
    const double e0 = std::abs(s0.lambda_min + 1.0);
    const StructuredGrid t(flat_torus(2 * kPi, 2 * kPi), {64, 64});
    const Field u = t.sample([](const Vec& x) { return 0.7 * std::cos(x[0]) * std::sin(2 * x[1]); });
    double shift_err = 0.0;
    const StabilityReport base = principal_eigenvalue(t, allen_cahn(), u, {});
    for (double c : {-0.5, 0.25, 1.5}) {
      const StabilityReport sh = principal_eigenvalue(t, with_shift(allen_cahn(), c), u, {});
      shift_err = std::max(shift_err, std::abs(sh.lambda_min - (base.lambda_min - c)));
    }
    suite.record(6, e0 <= 1e-4 && shift_err <= 1e-8,
                 fmt("|lambda_min(S^2, u=0) + 1| = %.3e; shift law error %.3e", e0, shift_err));
  }

  // 7. Geodesic integration.
  {
    const MetricChart s2 = sphere(1.0, 0.0);
    double closure = 0.0, drift = 0.0;
    for (double a : {0.0, 0.3, 0.7, 1.2}) {
      const Vec x0{kPi / 2, 0.0};
      const GeodesicPath p = integrate_geodesic(s2, x0, {-std::sin(a), std::cos(a)}, 2 * kPi, 1e-3);
      const Vec xe = p.samples.back().x;
      closure = std::max({closure, std::abs(xe[0] - x0[0]), std::abs(xe[1] - 2 * kPi)});
      if (p.domain_exit) closure = INFINITY;
      drift = std::max(drift, p.speed_drift(s2));
    }
    double straight = 0.0;
    for (const MetricChart& c : {flat_plane(20), flat_torus(3, 5), flat_cylinder(20, 4)}) {
      const Vec x0{0.25, -0.5}, v0{0.6, -0.8};
      const GeodesicPath p = integrate_geodesic(c, x0, v0, 10.0, 1e-2);
      for (const auto& s : p.samples)
        for (int k = 0; k < 2; ++k) straight = std::max(straight, std::abs(s.x[k] - (x0[k] + v0[k] * s.t)));
      drift = std::max(drift, p.speed_drift(c));
    }
    suite.record(7, closure <= 1e-6 && straight <= 1e-10 && drift <= 1e-6,
                 fmt("great-circle closure %.3e; straight-line error %.3e; speed drift %.3e",
                     closure, straight, drift));
  }

  // 8. Liouville scans on the flat plane.
  if (have("flat-plane-liouville")) {
    const RecipeRun& r = runs["flat-plane-liouville"];
    const json& sec = section(r.report, "liouville");
    double vol_err = 0.0;
    int vol_rows = 0;
    for (const json& v : sec.at("volume")) {
      const double R = num(v.at("R"));
      if (R < 4.0 || R > 16.0) continue;
      vol_err = std::max(vol_err, std::abs(num(v.at("r2")) / kPi - 1.0));
      ++vol_rows;
    }
    double cut = 0.0;
    for (const json& c : sec.at("cutoff").at("rows")) cut = std::max(cut, num(c.at("scaled_max_gradient")));
    bool cac = sec.at("caccioppoli").contains("rows") && !sec.at("caccioppoli").at("rows").empty();
    if (cac)
      for (const json& c : sec.at("caccioppoli").at("rows")) cac = cac && c.at("pass").get<bool>();
    double par = 0.0;
    for (const json& p : sec.at("parabolicity").at("rows")) par = std::max(par, num(p.at("relative_error")));
    const bool dec = sec.at("r4_decreasing").get<bool>();
    const bool ok = vol_rows == 13 && vol_err <= 0.05 && dec && cut <= 15.0 / 8 + 0.1 && cac &&
                    par <= 0.10 && sec.at("verdict") == "pass" && r.seconds < 60.0;
    suite.record(8, ok,
                 fmt("volume error %.4f over %d radii; R^-4 V_R decreasing: %s; cutoff %.4f <= "
                     "%.4f; caccioppoli %s; parabolicity error %.4f; %.2f s",
                     vol_err, vol_rows, dec ? "yes" : "no", cut, 15.0 / 8 + 0.1,
                     cac ? "pass" : "fail", par, r.seconds));
  } else {
    suite.record(8, false, "flat-plane-liouville did not run");
  }

  // 9. Thread-count independence of every recipe report.
  {
    bool ok = runs.size() == recipe_names().size();
    std::string detail;
    for (const auto& [name, r] : runs) {
      ok = ok && r.reproducible;
      detail += name + (r.reproducible ? " identical; " : " DIFFERS; ");
    }
    suite.record(9, ok, detail + "threads 1 vs 8");
  }
  return suite.failed() ? 1 : 0;
}
