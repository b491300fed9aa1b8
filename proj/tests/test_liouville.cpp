#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stablab/errors.hpp"
#include "stablab/liouville.hpp"

using namespace stablab;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("cutoff profile") {
  CHECK(cutoff_profile(0.0) == 1.0);
  CHECK(cutoff_profile(1.0) == 1.0);
  CHECK(cutoff_profile(-1.0) == 1.0);
  CHECK(cutoff_profile(1.5) == doctest::Approx(0.5));
  CHECK(cutoff_profile(2.0) == 0.0);
  CHECK(cutoff_profile(7.0) == 0.0);
  CHECK(cutoff_profile_slope(1.5) == doctest::Approx(-kCutoffLipschitz));
  CHECK(cutoff_profile_slope(-1.5) == doctest::Approx(kCutoffLipschitz));
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = 0.5 + 2.0 * k / 2000.0;
    const double v = cutoff_profile(t);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    worst = std::max(worst, std::abs(cutoff_profile_slope(t)));
    const double fd = (cutoff_profile(t + 1e-6) - cutoff_profile(t - 1e-6)) / 2e-6;
    CHECK(fd == doctest::Approx(cutoff_profile_slope(t)).epsilon(1e-5).scale(1.0));
  }
  CHECK(worst <= kCutoffLipschitz);
}

TEST_CASE("cutoff functions on a grid") {
  const StructuredGrid g(flat_plane(10), {401, 401});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  for (double R : {1.0, 2.0, 4.0}) {
    const Field tau = make_cutoff(g, d, R);
    const Field gt = grad_norm_field(g, tau);
    double sup = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (d[p] <= R) CHECK(tau[p] == 1.0);
      if (d[p] >= 2 * R) CHECK(tau[p] == 0.0);
      sup = std::max(sup, gt[p]);
    }
    CHECK(R * sup <= kCutoffLipschitz + 0.1);
  }
  CHECK_THROWS_AS(make_cutoff(g, d, 0.2), RadiusTooSmall);
  CHECK_THROWS_AS(make_cutoff(g, d, 5.5), SupportViolation);
}

TEST_CASE("volume scan") {
  const StructuredGrid g(flat_plane(10), {201, 201});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  const std::vector<double> radii{0.0, 1.0, 2.0, 4.0, 8.0};
  const auto rows = volume_growth_scan(g, d, radii);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].volume == 0.0);
  CHECK_FALSE(rows[0].r2.has_value());
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(*rows[k].r2 / kPi == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rows[k].volume > rows[k - 1].volume);
    if (k > 1) CHECK(*rows[k].r4 < *rows[k - 1].r4);
  }
  CHECK_THROWS_AS(volume_growth_scan(g, d, std::vector<double>{-1.0}), ConfigError);

  const StructuredGrid s(sphere(1, 0), {64, 64});
  const Field ds = geodesic_distance(s, {0.0, 0.0});
  const auto srows = volume_growth_scan(s, ds, std::vector<double>{4.0, 8.0});
  CHECK(srows[0].volume == doctest::Approx(4 * kPi).epsilon(1e-3));
  CHECK(srows[1].volume == srows[0].volume);
}

TEST_CASE("caccioppoli bound") {
  const StructuredGrid g(flat_plane(20), {161, 161});
  const Field d = geodesic_distance(g, {0.0, 0.0});

  const CaccioppoliReport c = caccioppoli_check(g, positive_tanh(), Field(g.size(), 0.3), d, 2.0);
  CHECK(c.lhs == 0.0);
  CHECK(c.c_star == 0.0);
  CHECK(c.pass);

  const Field kink = g.sample([](const Vec& x) { return std::tanh(x[0]); });
  CHECK_THROWS_AS(caccioppoli_check(g, allen_cahn(), kink, d, 2.0), SignConditionViolated);

  const SolveResult sol = solve_semilinear(g, positive_tanh(), kink, {});
  REQUIRE(sol.report.converged);
  for (double R : {2.0, 4.0}) {
    const CaccioppoliReport r = caccioppoli_check(g, positive_tanh(), sol.u, d, R);
    CHECK(r.pass);
    CHECK(r.lhs > 0.0);
    const double osc = r.m_plus - r.m_minus;
    CHECK(r.c_bar == doctest::Approx(4 * osc * osc * kCutoffLipschitz * kCutoffLipschitz));
    CHECK(r.to_json().at("pass").get<bool>());
  }
}

TEST_CASE("cutoff energy of a linear field") {
  const StructuredGrid g(flat_plane(10), {401, 401});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  const Field zero(g.size(), 2.0);
  for (const ZacRow& r : zac_energy(g, zero, d, std::vector<double>{2.0})) {
    CHECK(r.energy == 0.0);
    CHECK(r.link1_ok);
  }
  const Field lin = g.sample([](const Vec& x) { return x[0]; });
  const auto rows = zac_energy(g, lin, d, std::vector<double>{1.5, 3.0});
  for (const ZacRow& r : rows) {
    CHECK(r.energy == doctest::Approx(2 * kPi * 15.0 / 7.0).epsilon(0.02));
    CHECK(r.sup_grad == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.link1_ok);
    CHECK(r.link2_ok);
  }
}

TEST_CASE("logarithmic cutoff capacity") {
  const StructuredGrid g(flat_plane(60), {481, 481});
  const Field d = geodesic_distance(g, {0.0, 0.0});
  const Field phi = log_cutoff(g, d, 1.0, 10.0);
  for (double v : phi) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(parabolicity_probe(g, d, std::exp(1.0)) == doctest::Approx(2 * kPi).epsilon(0.05));
  CHECK(parabolicity_probe(g, d, std::exp(4.0)) == doctest::Approx(2 * kPi / 4).epsilon(0.05));
  double prev = 1e300;
  for (double Ro : {4.0, 8.0, 16.0, 32.0}) {
    const double e = parabolicity_probe(g, d, Ro);
    CHECK(e < prev);
    prev = e;
  }
  CHECK_THROWS_AS(log_cutoff(g, d, 2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(log_cutoff(g, d, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(parabolicity_probe(g, d, 70.0), SupportViolation);
}

TEST_CASE("scan csv") {
  std::vector<VolumeRow> v(2);
  v[0].R = 0.0;
  v[1].R = 2.0;
  v[1].volume = 12.0;
  v[1].r2 = 3.0;
  v[1].r4 = 0.75;
  std::vector<ZacRow> z(1);
  z[0].R = 0.0;
  z[0].energy = 1.5;
  z[0].majorant = 2.0;
  CHECK(scan_csv(v, z) == "R,V_R,R^-2V_R,R^-4V_R,zac_energy,majorant\n0,0,,,1.5,2\n2,12,3,0.75,,\n");
}
