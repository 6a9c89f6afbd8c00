#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cellpop/stationary.hpp"
#include "support/oracles.hpp"

using namespace cellpop;

TEST_CASE("alpha recursion and closed-form partial sums") {
  const AlphaSeries a0 = alpha_coefficients(0);
  REQUIRE(a0.coefficients.size() == 1);
  CHECK(a0.coefficients[0] == 1.0);

  const AlphaSeries a2 = alpha_coefficients(2);
  CHECK(a2.coefficients[1] == doctest::Approx(2.0));
  CHECK(a2.coefficients[2] == doctest::Approx(4.0 / 3.0));

  // partial sums: sum_{n=0}^k (-1)^n alpha_n = (-1)^k / prod_{j<=k} (2^j - 1)
  const AlphaSeries a = alpha_coefficients(20);
  double prod = 1.0;
  double partial = 0.0, sign = 1.0;
  for (int k = 0; k <= 20; ++k, sign = -sign) {
    partial += sign * a.coefficients[k];
    if (k >= 1) prod *= std::pow(2.0, k) - 1.0;
    const double closed = (k % 2 == 0 ? 1.0 : -1.0) / prod;
    CHECK(partial == doctest::Approx(closed).epsilon(1e-12));
  }
  CHECK(partial + 1.0 / 21.0 != partial);  // k=3 value is -1/21
  double p3 = 0.0;
  sign = 1.0;
  for (int k = 0; k <= 3; ++k, sign = -sign) p3 += sign * a.coefficients[k];
  CHECK(p3 == doctest::Approx(-1.0 / 21.0).epsilon(1e-14));
}

TEST_CASE("N0 boundary values and positivity") {
  for (double R : {0.7, 1.0, 2.5}) {
    CHECK(std::fabs(eval_N0(0.0, R)) < 1e-10);
    CHECK(std::fabs(eval_N0(50.0 / R, R)) < 1e-12);
    for (double x : {0.05, 0.2, 0.5, 1.0, 2.0}) CHECK(eval_N0(x / R, R) > 0.0);
  }
  CHECK_THROWS_AS((void)eval_N0(-0.1, 1.0), std::domain_error);
}

TEST_CASE("N0 against extended-precision summation and quadrature mass") {
  const double v = eval_N0(0.5, 1.0);
  const long double oracle = oracles::n0_series_long(0.5, 1.0);
  CHECK(v == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-12));

  const double mass =
      oracles::simpson([](double x) { return eval_N0(x, 1.0); }, 0.0, 30.0, 60000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalization constant values and scaling law") {
  // Table 5 anchor values
  CHECK(normalize_N0(1.4234) == doctest::Approx(9.9032).epsilon(0.01));
  CHECK(normalize_N0(1.732) == doctest::Approx(11.993).epsilon(0.01));
  const double c = 3.7;
  CHECK(normalize_N0(c * 1.1) == doctest::Approx(c * normalize_N0(1.1)).epsilon(1e-12));
}

TEST_CASE("closed-form L2 norm of N0 matches quadrature") {
  for (double R : {1.0, 1.4234}) {
    const double closed = n0_l2_norm_sq(R);
    const double quad = oracles::simpson(
        [R](double x) { const double v = eval_N0(x, R); return v * v; }, 0.0, 30.0 / R, 60000);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-6));
  }
}

TEST_CASE("lifetime density integrates to one") {
  for (double eta : {1.0, 2.0}) {
    const double mass =
        oracles::simpson([eta](double a) { return lifetime_density(a, eta); }, 0.0,
                         lifetime_a_max(eta) + 2.0, 40000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("gamma=1 fixed point: positivity, mass, and simulation oracle") {
  const KernelSpec uniform(KernelVariant::Uniform);
  const double eta = 1.0;
  const double s_max = suggest_birth_s_max(eta, uniform);
  const BirthSizeDensity bsd = birth_fixed_point_gamma1(eta, uniform, s_max, 600);
  CHECK(bsd.residual < 1e-8);
  for (double v : bsd.values) CHECK(v >= 0.0);
  double mass = 0.0;
  for (int i = 0; i < bsd.n_s; ++i)
    mass += bsd.values[i] * ((i == 0 || i == bsd.n_s - 1) ? 0.5 : 1.0);
  CHECK(mass * bsd.ds() == doctest::Approx(1.0).epsilon(1e-9));

  const auto births = oracles::simulate_birth_sizes_gamma1(eta, uniform, 100000, 2024);
  REQUIRE(births.size() == 100000);
  const double ks = oracles::kolmogorov_distance(births, bsd.birth_density());
  CHECK(ks < 0.02);
}

TEST_CASE("general fixed point recovers the gamma=1 limit and lambda=1") {
  const KernelSpec uniform(KernelVariant::Uniform);
  const double eta = 2.0;
  const double s_max = suggest_birth_s_max(eta, uniform);
  const BirthSizeDensity ref = birth_fixed_point_gamma1(eta, uniform, s_max, 500);
  const BirthSizeDensity gen = birth_fixed_point_general(1.001, eta, uniform, s_max, 500);
  CHECK(gen.lambda == doctest::Approx(1.0).epsilon(0.02));
  const DensityGrid1D bref = ref.birth_density();
  const DensityGrid1D bgen = gen.birth_density();
  CHECK(l1_dist(bref, bgen) < 0.02);
}

TEST_CASE("damping factor of the general operator stays in (0,1]") {
  // exp(-lambda (u^{1-g} - a^{1-g})/(1-g)) for a <= u, both signs of 1-g
  for (double gamma : {0.5, 2.0, 6.0}) {
    const double omg = 1.0 - gamma;
    for (double u : {0.5, 1.0, 3.0}) {
      for (double frac : {0.1, 0.5, 0.99}) {
        const double a = frac * u;
        const double d = std::exp(-(std::pow(u, omg) - std::pow(a, omg)) / omg);
        CHECK(d >= 0.0);  // may underflow to zero for strong damping
        CHECK(d <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("reconstruction: support, mass, and finite division moment") {
  const KernelSpec uniform(KernelVariant::Uniform);
  const double eta = 2.0;
  const double s_max = suggest_birth_s_max(eta, uniform);
  const BirthSizeDensity bsd = birth_fixed_point_gamma1(eta, uniform, s_max, 500);
  const double a_cut = lifetime_a_max(eta);
  const DensityGrid2D N = reconstruct_N_from_birth(bsd, a_cut, s_max + a_cut, 240, 360);
  CHECK(N.mass() == doctest::Approx(1.0).epsilon(1e-6));
  for (int i = 0; i < N.n_a; ++i)
    for (int j = 0; j < N.n_x; ++j)
      if (N.x(j) < N.a(i)) CHECK(N.at(i, j) == 0.0);

  // the division-rate integral stabilizes when the domain is extended at
  // fixed spacing, so truncation alone drives the difference
  const double da = a_cut / 240, dx = (s_max + a_cut) / 360;
  const int n_a2 = static_cast<int>(std::lround((a_cut + 1.0) / da));
  const int n_x2 = static_cast<int>(std::lround((s_max + a_cut + 2.0) / dx));
  const DensityGrid2D Nbig =
      reconstruct_N_from_birth(bsd, n_a2 * da, n_x2 * dx, n_a2, n_x2);
  const double m1 = division_rate_integral(N, 1.0, eta);
  const double m2 = division_rate_integral(Nbig, 1.0, eta);
  CHECK(std::fabs(m1 - m2) < 1e-4);
  // with r = 1 and gamma = 1 this integral is the growth eigenvalue, 1
  CHECK(m1 == doctest::Approx(1.0).epsilon(0.02));
}
