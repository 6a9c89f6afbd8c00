#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "cellpop/sampling.hpp"
#include "cellpop/stationary.hpp"
#include "support/oracles.hpp"

using namespace cellpop;

TEST_CASE("uniform density sampling: mean and determinism") {
  DensityGrid1D uni(1.0, 100);
  for (double& v : uni.values) v = 1.0;
  uni.normalize();
  const Sample1D s = rejection_sample(uni, 100000, 11, 0);
  double mean = 0.0;
  for (double x : s.points) mean += x;
  mean /= s.points.size();
  CHECK(std::fabs(mean - 0.5) < 0.005);

  const Sample1D again = rejection_sample(uni, 100000, 11, 0);
  CHECK(again.points == s.points);  // bit-identical for a fixed seed
  const Sample1D other = rejection_sample(uni, 100, 11, 1);
  CHECK(other.points[0] != s.points[0]);
}

TEST_CASE("sampling N0 matches the series mean") {
  DensityGrid1D norm = tabulate_N0(1.0, 12.0, 2000);
  norm.normalize();
  const Sample1D s = rejection_sample(norm, 100000, 5, 0);
  double mean = 0.0;
  for (double x : s.points) mean += x;
  mean /= s.points.size();
  CHECK(std::fabs(mean - n0_mean(1.0)) < 0.01);
}

TEST_CASE("chi-square check on the rejection sampler") {
  DensityGrid1D norm = tabulate_N0(1.0, 12.0, 2000);
  norm.normalize();
  const Sample1D s = rejection_sample(norm, 100000, 7, 0);
  // 0.999 quantile of chi-square with 49 degrees of freedom
  CHECK(chi_square_gof(s, norm, 50) < 85.351);
}

TEST_CASE("2-D sampling respects the support") {
  DensityGrid2D d(1.0, 1.0, 400, 400);
  for (int i = 0; i < d.n_a; ++i)
    for (int j = 0; j < d.n_x; ++j)
      if (d.x(j) >= d.a(i)) d.at(i, j) = 1.0;
  d.normalize();
  const Sample2D s = rejection_sample(d, 20000, 3, 2);
  int below = 0;
  for (const auto& p : s.points)
    if (p[1] < p[0] - 0.01) ++below;
  CHECK(below < 40);  // bilinear smoothing leaks a thin band at the diagonal
}

TEST_CASE("chi-square check on a smooth 2-D density") {
  DensityGrid2D d(4.0, 4.0, 200, 200);
  for (int i = 0; i < d.n_a; ++i)
    for (int j = 0; j < d.n_x; ++j) {
      const double za = d.a(i) - 1.4, zx = d.x(j) - 2.2;
      d.at(i, j) = std::exp(-za * za - 0.7 * zx * zx);
    }
  d.normalize();
  const Sample2D s = rejection_sample(d, 100000, 21, 0);
  CHECK(chi_square_gof(s, d, 50) < 85.351);
}

TEST_CASE("kde: concentration, mass, and accuracy on N0") {
  Sample1D peaked;
  peaked.points.assign(50, 1.3);
  const DensityGrid1D kd = kde_1d(peaked, 0.01, 3.0, 300);
  int mode = 0;
  for (int i = 0; i < kd.n_x; ++i)
    if (kd.values[i] > kd.values[mode]) mode = i;
  CHECK(std::fabs(kd.x(mode) - 1.3) < 0.02);
  CHECK(kd.mass() == doctest::Approx(1.0).epsilon(1e-10));

  DensityGrid1D norm = tabulate_N0(1.0, 12.0, 2000);
  norm.normalize();
  const Sample1D s = rejection_sample(norm, 10000, 9, 0);
  const DensityGrid1D est = kde_1d(s, silverman_bandwidth(s.points), 12.0, 2000);
  CHECK(l1_dist(est, norm) < 0.05);
}

TEST_CASE("sample csv round trip keeps seed metadata") {
  DensityGrid1D uni(1.0, 50);
  for (double& v : uni.values) v = 1.0;
  uni.normalize();
  Sample1D s = rejection_sample(uni, 64, 123, 4);
  s.source = "unit";
  const auto path = std::filesystem::temp_directory_path() / "cellpop_sample.csv";
  write_sample_csv(path.string(), s);
  const Sample1D back = read_sample_csv_1d(path.string());
  CHECK(back.seed == 123);
  CHECK(back.stream == 4);
  CHECK(back.source == "unit");
  CHECK(back.points == s.points);
  std::filesystem::remove(path);
}

TEST_CASE("rejection sampling rejects degenerate inputs") {
  DensityGrid1D zero(1.0, 50);
  CHECK_THROWS_AS((void)rejection_sample(zero, 10, 1, 0), std::invalid_argument);
}
