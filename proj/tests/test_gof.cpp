#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "cellpop/gof.hpp"
#include "cellpop/rng.hpp"
#include "cellpop/stationary.hpp"
#include "support/oracles.hpp"

using namespace cellpop;

namespace {

DensityGrid1D normalized_n0(double R = 1.0) {
  DensityGrid1D d = tabulate_N0(R, 12.0, 2000);
  d.normalize();
  return d;
}

}  // namespace

TEST_CASE("u_stat with n=2 and a single basis function") {
  TestBasis basis = TestBasis::laguerre(1, 1);
  Sample1D s;
  s.points = {0.4, 1.9};
  const double expected = laguerre_fn(0, 0.4) * laguerre_fn(0, 1.9);
  CHECK(u_stat(s, basis, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("u_stat vanishes off the basis support") {
  // scaling functions at J=3 with |k|<=10 all vanish beyond x = 17/8
  TestBasis basis = TestBasis::daubechies(3, 3);
  Sample2D s;
  s.points = {{3.0, 4.0}, {5.0, 6.0}, {4.4, 7.0}};
  CHECK(u_stat(s, basis, 3) == 0.0);
}

TEST_CASE("fast u_stat equals the naive double loop (1-D and 2-D)") {
  PhiloxRng rng(99, 0);
  TestBasis b1 = TestBasis::laguerre(3, 20);
  for (int rep = 0; rep < 100; ++rep) {
    Sample1D s;
    const int n = 5 + static_cast<int>(rng.uniform() * 8);
    for (int i = 0; i < n; ++i) s.points.push_back(rng.uniform() * 6.0);
    const auto all = b1.u_stat_all(s);
    const int D = 3 + static_cast<int>(rng.uniform() * 17.99);
    const double naive = oracles::naive_u_stat(s, D);
    CHECK(u_stat(s, b1, D) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(all[D - 3] == doctest::Approx(naive).epsilon(1e-12));
  }

  TestBasis b2 = TestBasis::daubechies(3, 6);
  for (int rep = 0; rep < 10; ++rep) {
    Sample2D s;
    const int n = 4 + static_cast<int>(rng.uniform() * 4);
    for (int i = 0; i < n; ++i)
      s.points.push_back({rng.uniform() * 2.0, rng.uniform() * 2.0});
    const int J = 3 + static_cast<int>(rng.uniform() * 3.99);
    const double naive = oracles::naive_u_stat(s, b2.wavelet(), J);
    CHECK(u_stat(s, b2, J) == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("u_stat unbiasedness: mean over replications hits the projected norm") {
  const DensityGrid1D n0 = normalized_n0();
  const NullModel null = NullModel::from_grid(n0, "n0-table");
  TestBasis basis = TestBasis::laguerre(3, 20);
  const int D = 8;
  // quadrature target: sum_{l<8} <phi_l, N>^2
  double target = 0.0;
  for (int l = 0; l < D; ++l) {
    const double c = oracles::simpson(
        [&](double x) { return laguerre_fn(l, x) * n0.value_at(x); }, 0.0, 12.0, 1 << 14);
    target += c * c;
  }
  const int reps = 10000, n = 20;
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    const Sample1D s = null.sample(n, 1234, k);
    const double u = u_stat(s, basis, D);
    mean += u;
    m2 += u * u;
  }
  mean /= reps;
  const double sd = std::sqrt((m2 / reps - mean * mean) / reps);
  CHECK(std::fabs(mean - target) < 3.0 * sd);
}

TEST_CASE("t_stat reduces to u_stat under a zero null") {
  TestBasis basis = TestBasis::laguerre(3, 20);
  Sample1D s;
  PhiloxRng rng(4, 0);
  for (int i = 0; i < 20; ++i) s.points.push_back(rng.uniform() * 4.0);
  const NullModel zero = NullModel::degenerate_zero(1);
  CHECK(t_stat(s, zero, basis, 7) == doctest::Approx(u_stat(s, basis, 7)).epsilon(1e-13));
}

TEST_CASE("calibration: determinism, level constraint, boundary alpha") {
  const NullModel null = NullModel::mitosis_constant(1.0);
  TestBasis basis = TestBasis::laguerre(3, 20);
  const Calibration cal = calibrate(null, 60, 0.05, basis, 200, 77);
  CHECK(cal.empirical_level <= 0.05);
  CHECK(cal.u_alpha > 0.0);
  CHECK(cal.quantiles.size() == basis.resolutions().size());
  for (double q : cal.quantiles) CHECK(std::isfinite(q));

  const Calibration again = calibrate(null, 60, 0.05, basis, 200, 77);
  CHECK(again.u_alpha == cal.u_alpha);
  CHECK(again.quantiles == cal.quantiles);

  // alpha = 1: the largest grid u wins and the test rejects almost always
  const Calibration loose = calibrate(null, 60, 1.0, basis, 100, 77);
  CHECK(loose.u_alpha == doctest::Approx((100.0 - 1.0) / 100.0));
  int rejections = 0;
  for (int k = 0; k < 50; ++k) {
    const Sample1D s = null.sample(60, 555, 1000 + k);
    rejections += run_test(s, loose, null, basis).decision;
  }
  CHECK(rejections >= 45);

  const Calibration tiny = calibrate(null, 40, 0.05, basis, 60, 2);
  CHECK(tiny.warning_small_B);
}

TEST_CASE("run_test consistency and error paths") {
  const NullModel null = NullModel::mitosis_constant(1.0);
  TestBasis basis = TestBasis::laguerre(3, 20);
  const Calibration cal = calibrate(null, 50, 0.05, basis, 100, 31);

  const Sample1D s = null.sample(50, 8, 12345);
  const TestReport rep = run_test(s, cal, null, basis);
  CHECK(rep.decision == (rep.T_alpha > 0 ? 1 : 0));
  CHECK(rep.t_hats.size() == cal.resolutions.size());

  const NullModel other = NullModel::from_grid(normalized_n0(2.0), "other");
  CHECK_THROWS_AS((void)run_test(s, cal, other, basis), std::invalid_argument);
}

TEST_CASE("level of the calibrated test is near alpha on fresh nulls") {
  const NullModel null = NullModel::mitosis_constant(1.0);
  TestBasis basis = TestBasis::laguerre(3, 20);
  const Calibration cal = calibrate(null, 100, 0.05, basis, 200, 42);
  const PowerResult level = power_study(null.grid1(), null, cal, basis, 100, 200, 43);
  CHECK(level.proportion <= 0.12);
  CHECK(level.proportion >= 0.0);
  // alt = null: the rejection rate stays within a few standard errors of alpha
  CHECK(std::fabs(level.proportion - 0.05) < 0.06);
}

TEST_CASE("calibration json round trip") {
  const NullModel null = NullModel::mitosis_constant(1.0);
  TestBasis basis = TestBasis::laguerre(3, 20);
  const Calibration cal = calibrate(null, 30, 0.05, basis, 100, 9);
  const auto path = std::filesystem::temp_directory_path() / "cellpop_cal.json";
  save_calibration_json(path.string(), cal);
  const Calibration back = load_calibration_json(path.string());
  CHECK(back.u_alpha == cal.u_alpha);
  CHECK(back.quantiles == cal.quantiles);
  CHECK(back.resolutions == cal.resolutions);
  CHECK(back.seed == cal.seed);
  std::filesystem::remove(path);
}
