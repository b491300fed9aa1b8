#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stablab/errors.hpp"
#include "stablab/grid.hpp"
#include "stablab/numeric.hpp"
#include "stablab/test_fields.hpp"

using namespace stablab;

namespace {

constexpr double kPi = std::numbers::pi;

double sup_interior_error(const StructuredGrid& g, const Field& a,
                          const std::function<double(const Vec&)>& exact, int margin) {
  double e = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.edge_distance(p) >= margin) e = std::max(e, std::abs(a[p] - exact(g.coord(p))));
  return e;
}

}  // namespace

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(StructuredGrid(flat_torus(1, 1), {4, 16}), ConfigError);
  CHECK_THROWS_AS(StructuredGrid(sphere(1, 0), {16, 15}), ConfigError);
  const StructuredGrid g(flat_plane(1), {11, 21});
  CHECK(g.spacing()[0] == doctest::Approx(0.2));
  CHECK(g.spacing()[1] == doctest::Approx(0.1));
  CHECK(g.coord(g.index({10, 20}))[0] == doctest::Approx(1.0));
  CHECK(g.fixed()[g.index({0, 5})] == 1);
  CHECK(g.fixed()[g.index({5, 5})] == 0);
  CHECK(g.edge_distance(g.index({2, 7})) == 2);
  const StructuredGrid t(flat_torus(1, 1), {16, 16});
  CHECK_FALSE(t.has_fixed());
  CHECK(t.edge_distance(0) >= kNoEdge);
  CHECK(t.neighbor(t.index({15, 3}), 0, 1) == t.index({0, 3}));
}

TEST_CASE("quadrature weights") {
  const StructuredGrid t(flat_torus(1, 1), {32, 48});
  CHECK(std::abs(exact_sum(t.weights()) - 1.0) <= 1e-12);
  for (double w : t.weights()) CHECK(w > 0.0);
  const Field ones(t.size(), 1.0);
  CHECK(integrate(t, ones) == doctest::Approx(1.0).epsilon(1e-12));
  const Field s = t.sample([](const Vec& x) { return std::sin(2 * kPi * x[0]); });
  CHECK(std::abs(integrate(t, s)) <= 1e-12);
}

TEST_CASE("sphere areas") {
  for (int n : {64, 128}) {
    const AxisymmetricSphere s(n);
    const double err = std::abs(integrate(s, Field(n, 1.0)) - 4 * kPi);
    CHECK(err <= 20.0 / (n * n));
  }
  const StructuredGrid full(sphere(1, 0), {64, 64});
  CHECK(integrate(full, Field(full.size(), 1.0)) == doctest::Approx(4 * kPi).epsilon(1e-3));
}

TEST_CASE("laplacian of constants is exactly zero") {
  const StructuredGrid t(flat_torus(1, 2), {20, 24});
  const Field lap = discrete_laplace_beltrami(t, Field(t.size(), 3.7));
  for (double v : lap) CHECK(v == 0.0);
  const AxisymmetricSphere s(40, 1.0, 0);
  const Field ls = discrete_laplace_beltrami(s, Field(40, -1.5));
  for (double v : ls) CHECK(v == 0.0);
}

TEST_CASE("laplacian of a Fourier mode converges at second order") {
  const auto f = [](const Vec& x) { return std::sin(2 * kPi * x[0]); };
  const auto lf = [](const Vec& x) { return -4 * kPi * kPi * std::sin(2 * kPi * x[0]); };
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const StructuredGrid t(flat_torus(1, 1), {n, 8});
    const double e = sup_interior_error(t, discrete_laplace_beltrami(t, t.sample(f)), lf, 0);
    if (prev > 0.0) {
      CHECK(prev / e >= 3.5);
      CHECK(prev / e <= 4.5);
    }
    prev = e;
  }
}

TEST_CASE("laplacian of cos theta on a sphere band") {
  const auto exact = [](const Vec& x) { return -2.0 * std::cos(x[0]); };
  double prev = 0.0;
  for (int n : {32, 64}) {
    const StructuredGrid g(sphere(1, 0.3), {n, 2 * n});
    const Field u = g.sample([](const Vec& x) { return std::cos(x[0]); });
    const Field lap = discrete_laplace_beltrami(g, u, EdgePolicy::DirichletCaps);
    const double e = sup_interior_error(g, lap, exact, 1);
    if (prev > 0.0) CHECK(prev / e >= 3.5);
    prev = e;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("full sphere grid reproduces the l = 1 eigenvalue across the poles") {
  const StructuredGrid g(sphere(1, 0), {64, 64});
  const Field u = g.sample([](const Vec& x) { return std::sin(x[0]) * std::cos(x[1]); });
  const Field lap = discrete_laplace_beltrami(g, u);
  double e = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) e = std::max(e, std::abs(lap[p] + 2.0 * u[p]));
  CHECK(e < 5e-2);
}

TEST_CASE("compact support is enforced on truncated charts") {
  const StructuredGrid g(flat_plane(1), {21, 21});
  const Field ones(g.size(), 1.0);
  CHECK_THROWS_AS(discrete_laplace_beltrami(g, ones), SupportViolation);
  CHECK_NOTHROW(discrete_laplace_beltrami(g, ones, EdgePolicy::DirichletCaps));
  const Field bump = local_bump(g, {0.0, 0.0}, 0.5);
  CHECK_NOTHROW(check_support(g, bump));
}

TEST_CASE("summation by parts is exact on periodic grids") {
  for (const MetricChart& c : {flat_torus(1, 1), flat_torus(2, 3)}) {
    const StructuredGrid t(c, {24, 40});
    Pcg32 rng(31);
    std::vector<Field> fs;
    for (int k = 0; k < 4; ++k) {
      const TrigField tf = random_trig_field(c, rng);
      fs.push_back(t.sample([&](const Vec& x) { return tf.value(x); }));
    }
    Field noise(t.size());
    for (double& v : noise) v = rng.uniform(-1, 1);
    fs.push_back(noise);
    for (const Field& a : fs)
      for (const Field& b : fs) CHECK(integration_by_parts_residual(t, a, b) <= 1e-10);

    // φ ≡ 1: the discrete divergence theorem.
    Field lap = discrete_laplace_beltrami(t, fs[0]);
    CHECK(std::abs(integrate(t, lap)) <= 1e-10);
    // φ = ψ: Σ w φ Δ_h φ = −D(φ, φ).
    Field lp = discrete_laplace_beltrami(t, fs[1]);
    CHECK(std::abs(exact_dot(t.weights(), fs[1], lp) + t.dirichlet_form(fs[1], fs[1])) <= 1e-10);
  }
}

TEST_CASE("summation by parts on the full sphere and the axisymmetric reduction") {
  const StructuredGrid g(sphere(1, 0), {32, 32});
  Pcg32 rng(4);
  Field a(g.size()), b(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) a[p] = rng.uniform(-1, 1), b[p] = rng.uniform(-1, 1);
  CHECK(integration_by_parts_residual(g, a, b) <= 1e-10);

  const AxisymmetricSphere s(50, 1.0, 2);
  Field c(50), d(50);
  for (int j = 0; j < 50; ++j) c[j] = rng.uniform(-1, 1), d[j] = rng.uniform(-1, 1);
  CHECK(integration_by_parts_residual(s, c, d) <= 1e-10);
}

TEST_CASE("eigenvalues of the axisymmetric sphere") {
  // −Δ cos θ = 2 cos θ for m = 0; sin θ e^{iφ} has eigenvalue 2 in mode m = 1.
  const int n = 128;
  const AxisymmetricSphere s0(n, 1.0, 0), s1(n, 1.0, 1);
  const Field c = s0.sample([](double t) { return std::cos(t); });
  const Field si = s1.sample([](double t) { return std::sin(t); });
  const Field l0 = discrete_laplace_beltrami(s0, c);
  const Field l1 = discrete_laplace_beltrami(s1, si);
  for (int j = 0; j < n; ++j) CHECK(l0[j] == doctest::Approx(-2 * c[j]).epsilon(1e-3).scale(1.0));
  // The m²/sin²θ term is only first order next to the poles; test the Rayleigh quotient.
  CHECK(s1.dirichlet_form(si, si) / exact_dot(s1.weights(), si, si) ==
        doctest::Approx(2.0).epsilon(1e-3));
  double interior = 0.0;
  for (int j = n / 4; j < 3 * n / 4; ++j) interior = std::max(interior, std::abs(l1[j] + 2 * si[j]));
  CHECK(interior <= 1e-3);
}

TEST_CASE("axisymmetric coefficients are mirror symmetric") {
  const AxisymmetricSphere s(64, 1.0, 1);
  const auto w = s.weights();
  for (int j = 0; j < 64; ++j) CHECK(w[j] == w[63 - j]);
  // An exactly odd field stays exactly odd under the operator.
  Field u(64);
  for (int j = 0; j < 64; ++j) u[j] = 0.5 * (std::cos(s.theta(j)) - std::cos(s.theta(63 - j)));
  const Field l = discrete_laplace_beltrami(s, u);
  for (int j = 0; j < 64; ++j) CHECK(l[j] == -l[63 - j]);
}

TEST_CASE("geodesic distance on the flat plane") {
  const StructuredGrid g(flat_plane(4), {161, 161});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  const double h = g.spacing()[0];
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    CHECK(d[p] >= 0.0);
    const Vec x = g.coord(p);
    err = std::max(err, std::abs(d[p] - std::hypot(x[0], x[1])));
  }
  CHECK(d[g.index({80, 80})] <= h);
  CHECK(err <= 10 * h);
}

TEST_CASE("geodesic distance is first order") {
  double prev = 0.0;
  for (int n : {41, 81, 161}) {
    const StructuredGrid g(flat_plane(2), {n, n});
    const Field d = geodesic_distance(g, {0.0, 0.0});
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Vec x = g.coord(p);
      err = std::max(err, std::abs(d[p] - std::hypot(x[0], x[1])));
    }
    if (prev > 0.0) CHECK(prev / err > 1.3);
    prev = err;
  }
}

TEST_CASE("geodesic distance on the sphere from the north pole") {
  const StructuredGrid g(sphere(1, 0), {128, 64});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) err = std::max(err, std::abs(d[p] - g.coord(p)[0]));
  CHECK(err <= 5 * g.spacing()[0]);
}

TEST_CASE("geodesic distance on the cylinder takes the shorter winding") {
  const double L = 4.0;
  const StructuredGrid g(flat_cylinder(3, L), {121, 80});
  const Field d = geodesic_distance(g, {0.0, 0.5});
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec x = g.coord(p);
    double dy = std::abs(x[1] - 0.5);
    dy = std::min(dy, L - dy);
    err = std::max(err, std::abs(d[p] - std::hypot(x[0], dy)));
  }
  CHECK(err <= 10 * g.spacing()[0]);
}

TEST_CASE("ball volumes") {
  const StructuredGrid g(flat_plane(2), {201, 201});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  CHECK(ball_volume(g, d, 0.0) == 0.0);
  CHECK(ball_volume(g, d, 1.0) == doctest::Approx(kPi).epsilon(0.03));
  double prev = 0.0;
  for (double R = 0.1; R < 1.9; R += 0.1) {
    const double v = ball_volume(g, d, R);
    CHECK(v >= prev);
    CHECK(ball_volume(g, d, 2 * R) >= v);
    prev = v;
  }
  const StructuredGrid s(sphere(1, 0), {64, 64});
  const Field ds = geodesic_distance(s, {0.0, 0.0});
  CHECK(ball_volume(s, ds, kPi + 0.1) == doctest::Approx(4 * kPi).epsilon(1e-3));
}

TEST_CASE("eikonal rejects non-diagonal metrics") {
  MetricChart c = flat_torus(1, 1);
  c.metric = [](const Vec&) { return Mat{Vec{1.0, 0.3}, Vec{0.3, 1.0}}; };
  c.analytic_christoffel = nullptr;
  const StructuredGrid g(c, {16, 16});
  CHECK_FALSE(g.diagonal_metric());
  CHECK_THROWS_AS(geodesic_distance(g, {0.5, 0.5}), ConfigError);
}

TEST_CASE("off-diagonal metrics keep summation by parts") {
  MetricChart c = flat_torus(1, 1);
  c.metric = [](const Vec& x) {
    const double s = 0.3 * std::sin(2 * kPi * x[0]);
    return Mat{Vec{1.5, s}, Vec{s, 1.0}};
  };
  c.analytic_christoffel = nullptr;
  c.analytic_ricci = nullptr;
  const StructuredGrid g(c, {24, 24});
  Pcg32 rng(8);
  Field a(g.size()), b(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) a[p] = rng.uniform(-1, 1), b[p] = rng.uniform(-1, 1);
  CHECK(integration_by_parts_residual(g, a, b) <= 1e-10);
  const Field lap = discrete_laplace_beltrami(g, Field(g.size(), 2.0));
  for (double v : lap) CHECK(v == 0.0);
}

TEST_CASE("laplacian is independent of the thread count") {
  const StructuredGrid g(flat_torus(1, 1), {300, 300});
  Pcg32 rng(1);
  const TrigField tf = random_trig_field(g.chart(), rng);
  const Field u = g.sample([&](const Vec& x) { return tf.value(x); });
  set_thread_count(1);
  const Field a = discrete_laplace_beltrami(g, u);
  const double ia = integrate(g, u);
  set_thread_count(8);
  const Field b = discrete_laplace_beltrami(g, u);
  const double ib = integrate(g, u);
  set_thread_count(1);
  CHECK(a == b);
  CHECK(ia == ib);
}
