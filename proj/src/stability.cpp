#include "stablab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"
#include "stablab/numeric.hpp"
#include "stablab/test_fields.hpp"

namespace stablab {

nlohmann::json StabilityReport::to_json() const {
  nlohmann::json j;
  j["lambda_min"] = lambda_min;
  j["eigen_residual"] = eigen_residual;
  j["method"] = method;
  j["iterations"] = iterations;
  j["verdict"] = verdict;
  j["tolerance"] = tolerance;
  nlohmann::json qs = nlohmann::json::array();
  for (const QSample& s : q_samples)
    qs.push_back({{"id", s.id}, {"q", s.q}, {"norm_sq", s.norm_sq}});
  j["q_samples"] = qs;
  if (!mode_lambdas.empty()) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [mode, lam] : mode_lambdas) m[std::to_string(mode)] = lam;
    j["mode_lambdas"] = m;
  }
  j["note"] = note;
  return j;
}

Field apply_linearized(const Discretization& disc, const Nonlinearity& nl,
                       std::span<const double> u, std::span<const double> v) {
  Field out(disc.size());
  disc.stiffness(v, out);
  const auto w = disc.weights();
  const auto fixed = disc.fixed();
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = fixed[p] ? 0.0 : out[p] / w[p] - nl.f_prime(u[p]) * v[p];
  return out;
}

double stability_form(const Discretization& disc, const Nonlinearity& nl,
                      std::span<const double> u, std::span<const double> xi) {
  check_support(disc, xi, 2);
  const auto w = disc.weights();
  ExactSum s;
  s.add(disc.dirichlet_form(xi, xi));
  for (std::size_t p = 0; p < xi.size(); ++p) s.add(-w[p] * nl.f_prime(u[p]) * xi[p] * xi[p]);
  return s.value();
}

double stability_tolerance(const Discretization& disc, const Nonlinearity& nl,
                           std::span<const double> u, double tol_scale) {
  double fmax = 1.0;
  for (double v : u) fmax = std::max(fmax, std::abs(nl.f_prime(v)));
  const double h = disc.spacing_scale();
  return tol_scale * std::max(1e-6, 10.0 * h * h * fmax);
}

namespace {

double w_norm(std::span<const double> w, std::span<const double> x) {
  return std::sqrt(exact_dot(w, x, x));
}

struct EigenState {
  double mu = 0.0;
  double residual = 0.0;
};

// Rayleigh quotient and W-norm residual of a W-normalized vector.
EigenState rayleigh(const Discretization& disc, const Nonlinearity& nl,
                    std::span<const double> u, std::span<const double> x) {
  const auto w = disc.weights();
  const Field lx = apply_linearized(disc, nl, u, x);
  EigenState st;
  st.mu = exact_dot(w, x, lx);
  Field r(x.size());
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = lx[p] - st.mu * x[p];
  st.residual = w_norm(w, r);
  return st;
}

void set_verdict(StabilityReport& rep) {
  const bool converged = rep.eigen_residual <= 1e-6;
  bool negative_sample = false;
  for (const QSample& s : rep.q_samples)
    if (s.q < -rep.tolerance * s.norm_sq) negative_sample = true;
  if (converged && rep.lambda_min >= -rep.tolerance && !negative_sample)
    rep.verdict = "stable";
  else if (converged && rep.lambda_min < -rep.tolerance)
    rep.verdict = "unstable";
  else
    rep.verdict = "inconclusive";
}

}  // namespace

StabilityReport principal_eigenvalue(const Discretization& disc, const Nonlinearity& nl,
                                     std::span<const double> u, const StabilityConfig& cfg) {
  const std::size_t n = disc.size();
  const auto w = disc.weights();
  const auto fixed = disc.fixed();
  const auto kdiag = disc.stiffness_diagonal();
  StabilityReport rep;
  rep.method = "shifted-inverse-iteration";
  rep.tolerance = stability_tolerance(disc, nl, u, cfg.tol_scale);

  Field v(n);
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    v[p] = nl.f_prime(u[p]);
    if (!fixed[p]) vmax = std::max(vmax, v[p]);
  }
  // K ≥ 0, so −max f′ bounds the spectrum from below.
  const double sigma = -vmax - cfg.shift_margin;
  Field inv_diag(n, 1.0);
  for (std::size_t p = 0; p < n; ++p)
    if (!fixed[p]) inv_diag[p] = 1.0 / (kdiag[p] + w[p] * (-v[p] - sigma));
  const LinearOp shifted = [&](std::span<const double> x, std::span<double> y) {
    disc.stiffness(x, y);
    for (std::size_t p = 0; p < n; ++p)
      y[p] = fixed[p] ? 0.0 : y[p] + w[p] * (-v[p] - sigma) * x[p];
  };

  Pcg32 rng(cfg.seed, 7u);
  Field x(n, 0.0);
  for (std::size_t p = 0; p < n; ++p)
    if (!fixed[p]) x[p] = 1.0 + 0.1 * (rng.uniform() - 0.5);
  double nx = w_norm(w, x);
  for (double& e : x) e /= nx;

  EigenState st = rayleigh(disc, nl, u, x);
  Field b(n), y(n);
  int it = 0;
  for (; it < cfg.max_iterations && st.residual > cfg.eigen_tolerance; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      b[p] = fixed[p] ? 0.0 : w[p] * x[p];
      y[p] = x[p] / std::max(st.mu - sigma, cfg.shift_margin);
    }
    const IterativeResult lin = conjugate_gradient(shifted, b, y, inv_diag,
                                                   cfg.linear_tolerance, 20000);
    if (!(lin.residual < 1e-6)) break;
    nx = w_norm(w, y);
    for (std::size_t p = 0; p < n; ++p) x[p] = y[p] / nx;
    st = rayleigh(disc, nl, u, x);
  }

  // Rayleigh-quotient refinement; kept only while it stays on the same eigenpair.
  for (int k = 0; k < 5 && st.residual > cfg.eigen_tolerance; ++k) {
    const double mu = st.mu;
    const LinearOp op = [&](std::span<const double> xx, std::span<double> yy) {
      disc.stiffness(xx, yy);
      for (std::size_t p = 0; p < n; ++p)
        yy[p] = fixed[p] ? 0.0 : yy[p] - w[p] * (v[p] + mu) * xx[p];
    };
    for (std::size_t p = 0; p < n; ++p) {
      b[p] = fixed[p] ? 0.0 : w[p] * x[p];
      y[p] = 0.0;
    }
    minres(op, b, y, inv_diag, 1e-12, 20000);
    nx = w_norm(w, y);
    if (!(nx > 0.0) || !std::isfinite(nx)) break;
    Field xr(n);
    for (std::size_t p = 0; p < n; ++p) xr[p] = y[p] / nx;
    const EigenState sr = rayleigh(disc, nl, u, xr);
    if (!(sr.residual < st.residual) || std::abs(sr.mu - st.mu) > 10.0 * st.residual) break;
    x = std::move(xr);
    st = sr;
    rep.method = "shifted-inverse-iteration+rayleigh-quotient";
  }

  rep.lambda_min = st.mu;
  rep.eigen_residual = st.residual;
  rep.iterations = it;
  rep.eigenvector = x;
  set_verdict(rep);
  if (rep.eigen_residual > 1e-6)
    rep.note = "EigenNonConvergence: residual " + std::to_string(rep.eigen_residual) +
               " after " + std::to_string(it) + " iterations";
  return rep;
}

namespace {

void add_sample(StabilityReport& rep, const Discretization& disc, const Nonlinearity& nl,
                std::span<const double> u, const std::string& id, const Field& xi) {
  const double ns = exact_dot(disc.weights(), xi, xi);
  if (!(ns > 0.0)) return;
  rep.q_samples.push_back({id, stability_form(disc, nl, u, xi), ns});
}

}  // namespace

StabilityReport assess_stability(const StructuredGrid& grid, const Nonlinearity& nl,
                                 std::span<const double> u, const StabilityConfig& cfg) {
  StabilityReport rep = principal_eigenvalue(grid, nl, u, cfg);
  const MetricChart& chart = grid.chart();

  // Bumps stay three nodes clear of truncation edges.
  double fraction = 0.8;
  double radius = std::numeric_limits<double>::infinity();
  Vec center{}, offset{};
  for (int a = 0; a < kDim; ++a) {
    const Axis& ax = chart.axes[a];
    center[a] = 0.5 * (ax.lo + ax.hi);
    if (ax.kind == AxisKind::Bounded) {
      fraction = std::min(fraction, 1.0 - 6.0 / (grid.nodes()[a] - 1));
      radius = std::min(radius, 0.25 * ax.length());
      offset[a] = center[a] + 0.125 * ax.length();
    } else {
      radius = std::min(radius, 0.25 * ax.length());
      offset[a] = center[a] + 0.25 * ax.length();
    }
  }

  if (!grid.has_fixed()) add_sample(rep, grid, nl, u, "constant", Field(grid.size(), 1.0));
  if (fraction > 0.0) {
    add_sample(rep, grid, nl, u, "bump-center", local_bump(grid, center, radius));
    add_sample(rep, grid, nl, u, "bump-offset", local_bump(grid, offset, 0.5 * radius));
    const Field cut = interior_bump(grid, fraction);
    Field gb = grad_norm_field(grid, u);
    for (std::size_t p = 0; p < gb.size(); ++p) gb[p] *= cut[p];
    add_sample(rep, grid, nl, u, "grad-u-bump", gb);
    Pcg32 rng(cfg.seed, 11u);
    for (int k = 1; k <= 5; ++k) {
      const TrigField tf = random_trig_field(chart, rng);
      Field xi = grid.sample([&](const Vec& x) { return tf.value(x); });
      for (std::size_t p = 0; p < xi.size(); ++p) xi[p] *= cut[p];
      add_sample(rep, grid, nl, u, "random-" + std::to_string(k), xi);
    }
  }
  set_verdict(rep);
  return rep;
}

StabilityReport assess_sphere_stability(int n_theta, double radius, const Nonlinearity& nl,
                                        std::span<const double> u, const StabilityConfig& cfg,
                                        const std::vector<int>& modes) {
  if (modes.empty()) throw ConfigError("at least one azimuthal mode is required");
  StabilityReport best;
  bool first = true;
  for (int m : modes) {
    const AxisymmetricSphere disc(n_theta, radius, m);
    StabilityReport rep = principal_eigenvalue(disc, nl, u, cfg);
    const double lam = rep.lambda_min;
    const auto lambdas = best.mode_lambdas;
    if (first || lam < best.lambda_min) {
      best = std::move(rep);
      best.mode_lambdas = lambdas;
    }
    best.mode_lambdas[m] = lam;
    first = false;
  }
  best.method += " over azimuthal modes";

  // Battery on the m = 0 reduction.
  const AxisymmetricSphere disc(n_theta, radius, 0);
  best.q_samples.clear();
  add_sample(best, disc, nl, u, "constant", Field(disc.size(), 1.0));
  add_sample(best, disc, nl, u, "cos-theta", disc.sample([](double t) { return std::cos(t); }));
  Field gu(disc.size());
  for (std::size_t j = 0; j < gu.size(); ++j) {
    // Even reflection across each pole.
    const double up = j + 1 < gu.size() ? u[j + 1] : u[j];
    const double um = j > 0 ? u[j - 1] : u[j];
    gu[j] = std::abs(up - um) / (2.0 * radius * disc.dtheta());
  }
  add_sample(best, disc, nl, u, "grad-u", gu);
  Pcg32 rng(cfg.seed, 13u);
  for (int k = 1; k <= 5; ++k) {
    std::array<double, 4> a{};
    for (double& c : a) c = rng.uniform(-1.0, 1.0);
    add_sample(best, disc, nl, u, "random-" + std::to_string(k), disc.sample([&](double t) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::cos(static_cast<double>(i) * t);
      return s;
    }));
  }
  set_verdict(best);
  return best;
}

TranslationResidual translation_mode_residual(const StructuredGrid& grid, const Nonlinearity& nl,
                                              std::span<const double> u, int direction) {
  if (direction < 0 || direction >= kDim) throw ConfigError("direction out of range");
  const std::size_t n = grid.size();
  Field d(n);
  for (std::size_t p = 0; p < n; ++p) d[p] = node_partials(grid, u, p)[direction];
  const Field ld = apply_linearized(grid, nl, u, d);
  const auto w = grid.weights();
  ExactSum num, den;
  for (std::size_t p = 0; p < n; ++p) {
    if (grid.edge_distance(p) < 3) continue;
    num.add(w[p] * ld[p] * ld[p]);
    den.add(w[p] * d[p] * d[p]);
  }
  TranslationResidual out;
  const double dn = den.value();
  if (!(dn > 1e-28)) {
    out.degenerate = true;
    return out;
  }
  out.residual = std::sqrt(num.value() / dn);
  return out;
}

}  // namespace stablab
