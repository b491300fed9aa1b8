#include "stablab/solver.hpp"

#include <algorithm>
#include <cmath>

#include "stablab/errors.hpp"
#include "stablab/linalg.hpp"
#include "stablab/numeric.hpp"

namespace stablab {

// ---- nonlinearities ---------------------------------------------------------

Nonlinearity allen_cahn() {
  Nonlinearity nl = scaled_allen_cahn(1.0);
  nl.name = "allen-cahn";
  return nl;
}

Nonlinearity scaled_allen_cahn(double lambda) {
  Nonlinearity nl;
  nl.name = "scaled-allen-cahn";
  nl.lambda = lambda;
  nl.f = [lambda](double u) { return lambda * (u - u * u * u); };
  nl.f_prime = [lambda](double u) { return lambda * (1.0 - 3.0 * u * u); };
  nl.primitive = [lambda](double u) {
    const double u2 = u * u;
    return lambda * (0.5 * u2 - 0.25 * u2 * u2);
  };
  return nl;
}

Nonlinearity positive_tanh() {
  Nonlinearity nl;
  nl.name = "positive";
  nl.f = [](double u) { return 0.5 * (1.0 - std::tanh(u)); };
  nl.f_prime = [](double u) {
    const double t = std::tanh(u);
    return -0.5 * (1.0 - t * t);
  };
  // F(u) = (u − ln cosh u)/2, with ln cosh written to avoid overflow.
  nl.primitive = [](double u) {
    const double a = std::abs(u);
    const double log_cosh = a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
    return 0.5 * (u - log_cosh);
  };
  return nl;
}

Nonlinearity with_shift(const Nonlinearity& base, double c) {
  Nonlinearity nl = base;
  nl.shift = base.shift + c;
  nl.f = [f = base.f, c](double u) { return f(u) + c * u; };
  nl.f_prime = [fp = base.f_prime, c](double u) { return fp(u) + c; };
  nl.primitive = [F = base.primitive, c](double u) { return F(u) + 0.5 * c * u * u; };
  return nl;
}

std::vector<std::string> nonlinearity_names() {
  return {"allen-cahn", "scaled-allen-cahn", "positive"};
}

Nonlinearity make_nonlinearity(std::string_view name, double lambda) {
  if (name == "allen-cahn") return allen_cahn();
  if (name == "scaled-allen-cahn") return scaled_allen_cahn(lambda);
  if (name == "positive") return positive_tanh();
  throw ConfigError("unknown nonlinearity '" + std::string(name) + "'");
}

double nonlinearity_consistency(const Nonlinearity& nl, double lo, double hi, int samples) {
  constexpr double delta = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = lo + (hi - lo) * (k + 0.5) / samples;
    const double dF = (nl.primitive(t + delta) - nl.primitive(t - delta)) / (2.0 * delta);
    const double df = (nl.f(t + delta) - nl.f(t - delta)) / (2.0 * delta);
    worst = std::max({worst, std::abs(dF - nl.f(t)), std::abs(df - nl.f_prime(t))});
  }
  return worst;
}

// ---- residual and energy ----------------------------------------------------

Field pde_residual(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u) {
  Field r(disc.size());
  disc.stiffness(u, r);
  const auto w = disc.weights();
  const auto fixed = disc.fixed();
  for (std::size_t p = 0; p < r.size(); ++p) r[p] = fixed[p] ? 0.0 : r[p] / w[p] - nl.f(u[p]);
  return r;
}

double sup_residual(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u) {
  return max_abs(pde_residual(disc, nl, u));
}

double energy(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u) {
  const auto w = disc.weights();
  ExactSum s;
  s.add(0.5 * disc.dirichlet_form(u, u));
  for (std::size_t p = 0; p < u.size(); ++p) s.add(-w[p] * nl.primitive(u[p]));
  return s.value();
}

nlohmann::json SolveReport::to_json() const {
  nlohmann::json j;
  j["iterations"] = iterations;
  j["flow_steps"] = flow_steps;
  j["residual"] = residual;
  j["energy"] = energy;
  j["converged"] = converged;
  j["residual_history"] = residual_history;
  j["energy_history"] = energy_history;
  j["step_kinds"] = step_kinds;
  j["branch"] = branch;
  j["message"] = message;
  return j;
}

// ---- solver -------------------------------------------------------------------

namespace {

class Solver {
 public:
  Solver(const Discretization& disc, const Nonlinearity& nl, const SolveConfig& cfg)
      : disc_(disc), nl_(nl), cfg_(cfg), w_(disc.weights()), fixed_(disc.fixed()),
        kdiag_(disc.stiffness_diagonal()) {}

  SolveResult run(std::span<const double> u0) {
    SolveResult out;
    out.u.assign(u0.begin(), u0.end());
    for (double v : out.u)
      if (!std::isfinite(v)) throw ConfigError("initial guess contains a non-finite value");
    Field& u = out.u;
    SolveReport& rep = out.report;
    double res = sup_residual(disc_, nl_, u);
    double en = energy(disc_, nl_, u);

    int newton_tries = 0;
    while (res > cfg_.tolerance && newton_tries < cfg_.max_iterations) {
      ++newton_tries;
      if (newton_step(u, res, en)) {
        ++rep.iterations;
        record(rep, "newton", res, en);
        continue;
      }
      // Newton stalled: descend the energy for a while before retrying.
      int batch = 0;
      while (batch < cfg_.flow_batch && rep.flow_steps < cfg_.max_flow_steps &&
             res > cfg_.tolerance) {
        if (!flow_step(u, res, en)) break;
        ++batch;
        ++rep.flow_steps;
        record(rep, "flow", res, en);
      }
      if (batch == 0) {
        rep.message = "neither Newton nor gradient flow could reduce the residual";
        break;
      }
    }
    rep.residual = res;
    rep.energy = en;
    rep.converged = res <= cfg_.tolerance;
    if (!rep.converged && rep.message.empty())
      rep.message = "iteration budget exhausted";
    return out;
  }

 private:
  static void record(SolveReport& rep, const char* kind, double res, double en) {
    rep.step_kinds.emplace_back(kind);
    rep.residual_history.push_back(res);
    rep.energy_history.push_back(en);
  }

  double energy_slack(double en) const { return 1e-12 * (1.0 + std::abs(en)); }

  bool newton_step(Field& u, double& res, double& en) {
    const std::size_t n = u.size();
    Field r = pde_residual(disc_, nl_, u);
    Field rhs(n), fp(n), inv_diag(n, 1.0);
    for (std::size_t p = 0; p < n; ++p) {
      fp[p] = nl_.f_prime(u[p]);
      rhs[p] = fixed_[p] ? 0.0 : -w_[p] * r[p];
      if (!fixed_[p]) {
        const double d = std::abs(kdiag_[p] - w_[p] * fp[p]);
        inv_diag[p] = d > 0.0 ? 1.0 / d : 1.0 / std::max(kdiag_[p], w_[p]);
      }
    }
    const LinearOp jac = [&](std::span<const double> x, std::span<double> y) {
      disc_.stiffness(x, y);
      for (std::size_t p = 0; p < n; ++p) y[p] = fixed_[p] ? 0.0 : y[p] - w_[p] * fp[p] * x[p];
    };
    Field delta(n, 0.0);
    const IterativeResult lin =
        minres(jac, rhs, delta, inv_diag, cfg_.linear_tolerance, cfg_.linear_max_iterations);
    if (!(lin.residual < 1e-2)) return false;  // LinearSolveFailure: leave it to the flow

    Field trial(n);
    for (double alpha = 1.0; alpha >= cfg_.min_damping; alpha *= 0.5) {
      for (std::size_t p = 0; p < n; ++p) trial[p] = u[p] + alpha * delta[p];
      const double res_t = sup_residual(disc_, nl_, trial);
      if (!(res_t < res)) continue;
      const double en_t = energy(disc_, nl_, trial);
      if (en_t > en + energy_slack(en)) continue;
      u.swap(trial);
      res = res_t;
      en = en_t;
      return true;
    }
    return false;
  }

  // Semi-implicit step (W + δK) u⁺ = W (u + δ f(u)); δ ≤ 1/max f′ keeps the
  // energy non-increasing, and δ is halved if rounding says otherwise.
  bool flow_step(Field& u, double& res, double& en) {
    const std::size_t n = u.size();
    double fmax = 0.0;
    for (std::size_t p = 0; p < n; ++p) fmax = std::max(fmax, nl_.f_prime(u[p]));
    double dt = cfg_.flow_step > 0.0 ? cfg_.flow_step : 1.0 / std::max(1.0, fmax);
    if (fmax > 0.0) dt = std::min(dt, 1.0 / fmax);

    // Dirichlet values enter the right-hand side.
    Field ub(n, 0.0), kub(n);
    for (std::size_t p = 0; p < n; ++p) ub[p] = fixed_[p] ? u[p] : 0.0;
    disc_.stiffness(ub, kub);

    Field trial(n), rhs(n), inv_diag(n, 1.0), x(n);
    for (int halving = 0; halving < 30; ++halving, dt *= 0.5) {
      for (std::size_t p = 0; p < n; ++p) {
        if (fixed_[p]) {
          rhs[p] = 0.0;
          x[p] = 0.0;
          continue;
        }
        rhs[p] = w_[p] * (u[p] + dt * nl_.f(u[p])) - dt * kub[p];
        inv_diag[p] = 1.0 / (w_[p] + dt * kdiag_[p]);
        x[p] = u[p];
      }
      const LinearOp op = [&](std::span<const double> v, std::span<double> y) {
        disc_.stiffness(v, y);
        for (std::size_t p = 0; p < n; ++p) y[p] = fixed_[p] ? 0.0 : w_[p] * v[p] + dt * y[p];
      };
      const IterativeResult lin =
          conjugate_gradient(op, rhs, x, inv_diag, cfg_.linear_tolerance, cfg_.linear_max_iterations);
      if (!lin.converged && !(lin.residual < 1e-8)) continue;
      for (std::size_t p = 0; p < n; ++p) trial[p] = fixed_[p] ? u[p] : x[p];
      const double en_t = energy(disc_, nl_, trial);
      if (en_t > en + energy_slack(en)) continue;
      u.swap(trial);
      en = en_t;
      res = sup_residual(disc_, nl_, u);
      return true;
    }
    return false;
  }

  const Discretization& disc_;
  const Nonlinearity& nl_;
  const SolveConfig& cfg_;
  std::span<const double> w_;
  std::span<const std::uint8_t> fixed_;
  std::span<const double> kdiag_;
};

}  // namespace

SolveResult solve_semilinear(const Discretization& disc, const Nonlinearity& nl,
                             std::span<const double> u0, const SolveConfig& cfg) {
  if (u0.size() != disc.size()) throw ConfigError("initial guess has the wrong length");
  if (!(cfg.tolerance > 0.0) || !(cfg.min_damping > 0.0) || cfg.max_iterations < 0)
    throw ConfigError("solver tolerances must be positive");
  return Solver(disc, nl, cfg).run(u0);
}

std::vector<SolveResult> continuation(const Discretization& disc,
                                      const std::function<Nonlinearity(double)>& family,
                                      std::span<const double> params,
                                      std::span<const double> u0, const SolveConfig& cfg) {
  std::vector<SolveResult> out;
  Field seed(u0.begin(), u0.end());
  for (double lam : params) {
    const Nonlinearity nl = family(lam);
    SolveResult r = solve_semilinear(disc, nl, seed, cfg);
    r.report.branch["lambda"] = lam;
    seed = r.u;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stablab
