#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stablab/errors.hpp"
#include "stablab/numeric.hpp"
#include "stablab/solver.hpp"
#include "stablab/test_fields.hpp"

using namespace stablab;

namespace {

Field odd_cos(const AxisymmetricSphere& s, double amplitude) {
  const std::size_t n = s.size();
  Field u(n);
  for (std::size_t j = 0; j < n; ++j)
    u[j] = 0.5 * amplitude * (std::cos(s.theta(j)) - std::cos(s.theta(n - 1 - j)));
  return u;
}

}  // namespace

TEST_CASE("nonlinearity triples are consistent") {
  for (const auto& name : nonlinearity_names())
    CHECK(nonlinearity_consistency(make_nonlinearity(name, 2.5)) <= 1e-6);
  CHECK(nonlinearity_consistency(with_shift(allen_cahn(), 0.7)) <= 1e-6);
  CHECK(nonlinearity_consistency(positive_tanh(), -40, 40) <= 1e-6);
  CHECK_THROWS_AS(make_nonlinearity("sine-gordon"), ConfigError);

  const Nonlinearity p = positive_tanh();
  for (double u : {-10.0, -1.0, 0.0, 1.0, 10.0}) CHECK(p.f(u) > 0.0);
  const Nonlinearity s = with_shift(scaled_allen_cahn(3.0), 0.5);
  CHECK(s.shift == 0.5);
  CHECK(s.f(0.4) == doctest::Approx(3.0 * (0.4 - 0.064) + 0.2));
}

TEST_CASE("constant roots have exactly zero residual") {
  const StructuredGrid t(flat_torus(1, 1), {16, 16});
  const Nonlinearity ac = allen_cahn();
  for (double c : {-1.0, 0.0, 1.0}) CHECK(sup_residual(t, ac, Field(t.size(), c)) == 0.0);
  const AxisymmetricSphere s(32);
  CHECK(sup_residual(s, scaled_allen_cahn(3), Field(32, 1.0)) == 0.0);
}

TEST_CASE("energy of a constant state on the unit torus") {
  const StructuredGrid t(flat_torus(1, 1), {16, 16});
  CHECK(energy(t, allen_cahn(), Field(t.size(), 1.0)) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("residual is the gradient of the energy") {
  const StructuredGrid t(flat_torus(1, 1), {24, 24});
  const Nonlinearity ac = allen_cahn();
  Pcg32 rng(5);
  const TrigField a = random_trig_field(t.chart(), rng), b = random_trig_field(t.chart(), rng);
  const Field u = t.sample([&](const Vec& x) { return 0.3 * a.value(x); });
  const Field v = t.sample([&](const Vec& x) { return b.value(x); });
  const Field r = pde_residual(t, ac, u);
  const double exact = exact_dot(t.weights(), r, v);
  const double eps = 1e-5;
  Field up = u, um = u;
  for (std::size_t p = 0; p < u.size(); ++p) up[p] += eps * v[p], um[p] -= eps * v[p];
  const double fd = (energy(t, ac, up) - energy(t, ac, um)) / (2 * eps);
  CHECK(std::abs(fd - exact) <= 1e-5 * std::abs(exact));
}

TEST_CASE("newton converges to the stable constant") {
  const StructuredGrid t(flat_torus(1, 1), {16, 16});
  const SolveResult r = solve_semilinear(t, allen_cahn(), Field(t.size(), 0.9), {});
  CHECK(r.report.converged);
  for (double x : r.u) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.report.residual <= 1e-9);
  CHECK(r.report.step_kinds.size() == r.report.residual_history.size());

  const SolveResult z = solve_semilinear(t, allen_cahn(), Field(t.size(), -1.0), {});
  CHECK(z.report.converged);
  CHECK(z.report.iterations == 0);
}

TEST_CASE("accepted steps never raise the energy") {
  const StructuredGrid t(flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi), {32, 32});
  Pcg32 rng(2);
  const TrigField a = random_trig_field(t.chart(), rng);
  const Field u0 = t.sample([&](const Vec& x) { return 0.5 * a.value(x); });
  const SolveResult r = solve_semilinear(t, allen_cahn(), u0, {});
  CHECK(r.report.converged);
  const auto& e = r.report.energy_history;
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] <= e[k - 1] + 1e-12 * std::abs(e[k - 1]));
}

TEST_CASE("solver rejects bad inputs") {
  const StructuredGrid t(flat_torus(1, 1), {16, 16});
  CHECK_THROWS_AS(solve_semilinear(t, allen_cahn(), Field(3, 0.0), {}), ConfigError);
  SolveConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(solve_semilinear(t, allen_cahn(), Field(t.size(), 0.0), bad), ConfigError);
}

TEST_CASE("dirichlet values are kept") {
  const StructuredGrid g(flat_plane(4), {33, 33});
  Field u0 = g.sample([](const Vec& x) { return std::tanh(x[0] / std::sqrt(2.0)); });
  const SolveResult r = solve_semilinear(g, allen_cahn(), u0, {});
  CHECK(r.report.converged);
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.fixed()[p]) CHECK(r.u[p] == u0[p]);
}

TEST_CASE("sphere branch at lambda = 3") {
  const AxisymmetricSphere s(128);
  const SolveResult r = solve_semilinear(s, scaled_allen_cahn(3.0), odd_cos(s, 0.1), {});
  CHECK(r.report.converged);
  CHECK(max_abs(r.u) == doctest::Approx(0.72).epsilon(2e-3));
  for (std::size_t j = 0; j < s.size(); ++j) CHECK(r.u[j] == -r.u[s.size() - 1 - j]);
}

TEST_CASE("continuation records the branch parameter") {
  const AxisymmetricSphere s(64);
  const std::vector<double> lams{2.2, 2.6, 3.0};
  const auto rs = continuation(s, scaled_allen_cahn, lams, odd_cos(s, 0.3), {});
  REQUIRE(rs.size() == 3);
  double prev = 0.0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    CHECK(rs[k].report.converged);
    CHECK(rs[k].report.branch.at("lambda") == lams[k]);
    CHECK(max_abs(rs[k].u) > prev);
    prev = max_abs(rs[k].u);
  }
}

TEST_CASE("solutions are translation equivariant on the torus") {
  const int n = 32;
  const StructuredGrid t(flat_torus(2 * std::numbers::pi, 2 * std::numbers::pi), {n, n});
  Pcg32 rng(6);
  const TrigField a = random_trig_field(t.chart(), rng);
  const Field u0 = t.sample([&](const Vec& x) { return 0.5 * a.value(x); });
  Field shifted(u0.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) shifted[t.index({(i + 3) % n, j})] = u0[t.index({i, j})];
  const SolveResult r1 = solve_semilinear(t, allen_cahn(), u0, {});
  const SolveResult r2 = solve_semilinear(t, allen_cahn(), shifted, {});
  CHECK(r1.report.iterations == r2.report.iterations);
  bool same = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) same = same && r2.u[t.index({(i + 3) % n, j})] == r1.u[t.index({i, j})];
  CHECK(same);
}

TEST_CASE("solutions do not depend on the thread count") {
  const StructuredGrid g(flat_cylinder(8, 8), {256, 64});
  const Field u0 = g.sample([](const Vec& x) { return std::tanh(x[0]); });
  set_thread_count(1);
  const SolveResult a = solve_semilinear(g, allen_cahn(), u0, {});
  set_thread_count(8);
  const SolveResult b = solve_semilinear(g, allen_cahn(), u0, {});
  set_thread_count(1);
  CHECK(a.u == b.u);
  CHECK(a.report.residual_history == b.report.residual_history);
}

TEST_CASE("report serialisation") {
  const StructuredGrid t(flat_torus(1, 1), {8, 8});
  const auto j = solve_semilinear(t, allen_cahn(), Field(t.size(), 0.9), {}).report.to_json();
  CHECK(j.at("converged").get<bool>());
  CHECK(j.contains("residual_history"));
}
