#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cellpop/grid.hpp"
#include "cellpop/parallel.hpp"
#include "cellpop/rng.hpp"

using namespace cellpop;

TEST_CASE("philox streams are deterministic and distinct") {
  PhiloxRng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va > 0.0);
    CHECK(va < 1.0);
  }
  CHECK(PhiloxRng(42, 0).uniform() != c.uniform());
  CHECK(PhiloxRng(42, 0).uniform() != d.uniform());
}

TEST_CASE("philox output looks uniform") {
  PhiloxRng rng(7, 3);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += rng.uniform();
  mean /= n;
  CHECK(std::fabs(mean - 0.5) < 0.005);
}

TEST_CASE("deterministic sum matches serial sum") {
  std::vector<double> v(12345);
  PhiloxRng rng(1, 0);
  for (double& x : v) x = rng.uniform() - 0.3;
  const double serial = par::sum_serial(v.data(), v.size());
  const double det = par::sum_deterministic(v.data(), v.size());
  CHECK(det == doctest::Approx(serial).epsilon(1e-13));
}

TEST_CASE("grid mass, normalization and interpolation") {
  DensityGrid1D d(2.0, 200);
  for (int i = 0; i < d.n_x; ++i) d.values[i] = 1.0 + d.x(i);
  d.normalize();
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.value_at(-0.1) == 0.0);
  CHECK(d.value_at(3.0) == 0.0);
  const double mid = d.value_at(0.505);
  CHECK(mid == doctest::Approx(0.5 * (d.values[50] + d.values[51])).epsilon(1e-12));
}

TEST_CASE("l2 norms and distances") {
  DensityGrid1D ones(1.0, 100);
  for (double& v : ones.values) v = 1.0;
  CHECK(l2_norm_sq(ones) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l2_dist_sq(ones, ones) == 0.0);

  DensityGrid2D sq(1.0, 1.0, 64, 64);
  for (double& v : sq.values) v = 1.0;
  CHECK(l2_norm_sq(sq) == doctest::Approx(1.0).epsilon(1e-12));

  DensityGrid1D other(2.0, 100);
  CHECK_THROWS_AS((void)l2_dist_sq(ones, other), std::invalid_argument);
}

TEST_CASE("marginal of a uniform triangle density is linear in x") {
  // density proportional to 1{x >= a} on the unit square
  DensityGrid2D d(1.0, 1.0, 200, 200);
  for (int i = 0; i < d.n_a; ++i)
    for (int j = 0; j < d.n_x; ++j)
      if (d.x(j) >= d.a(i)) d.at(i, j) = 1.0;
  d.normalize();
  const DensityGrid1D m = marginal_x(d);
  CHECK(m.mass() == doctest::Approx(d.mass()).epsilon(1e-9));
  // N(x) proportional to x: compare two interior nodes
  const double ratio = m.value_at(0.8) / m.value_at(0.4);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("density csv round trip") {
  DensityGrid1D d(3.0, 50);
  for (int i = 0; i < d.n_x; ++i) d.values[i] = std::sin(d.x(i)) + 2.0;
  const auto path = std::filesystem::temp_directory_path() / "cellpop_test_density.csv";
  write_density_csv(path.string(), d);
  const DensityGrid1D back = read_density_csv_1d(path.string());
  REQUIRE(back.n_x == d.n_x);
  CHECK(back.x_max == doctest::Approx(d.x_max).epsilon(1e-14));
  for (int i = 0; i < d.n_x; ++i) CHECK(back.values[i] == d.values[i]);
  std::filesystem::remove(path);

  DensityGrid2D d2(1.5, 2.5, 12, 20);
  for (std::size_t k = 0; k < d2.values.size(); ++k) d2.values[k] = 0.1 * k;
  const auto path2 = std::filesystem::temp_directory_path() / "cellpop_test_density2.csv";
  write_density_csv(path2.string(), d2);
  const DensityGrid2D back2 = read_density_csv_2d(path2.string());
  REQUIRE(back2.n_a == d2.n_a);
  REQUIRE(back2.n_x == d2.n_x);
  CHECK(back2.values == d2.values);
  std::filesystem::remove(path2);
}
