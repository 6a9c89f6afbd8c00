#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cellpop/fitting.hpp"
#include "cellpop/stationary.hpp"

using namespace cellpop;

namespace {

DensityGrid1D exact_n0_table(double R) {
  DensityGrid1D d = tabulate_N0(R, 12.0 / R, 1200);
  d.normalize();
  return d;
}

}  // namespace

TEST_CASE("moment fit is self-consistent on exact N0 tables") {
  for (double R : {0.8, 1.37, 2.4}) {
    const FitResult fit = fit_moments(exact_n0_table(R));
    CHECK(fit.R_hat == doctest::Approx(R).epsilon(1e-3));
    CHECK(fit.Nbar == doctest::Approx(normalize_N0(R)).epsilon(1e-3));
  }
}

TEST_CASE("moment fit scaling law") {
  // substituting x -> x/c rescales R by c
  const double c = 1.7;
  DensityGrid1D base = exact_n0_table(1.0);
  DensityGrid1D scaled(base.x_max / c, base.n_x);
  for (int i = 0; i < base.n_x; ++i) scaled.values[i] = base.values[i] * c;
  const double r1 = fit_moments(base).R_hat;
  const double r2 = fit_moments(scaled).R_hat;
  CHECK(r2 == doctest::Approx(c * r1).epsilon(1e-6));
}

TEST_CASE("moment fit rejects zero first moment") {
  DensityGrid1D d(1.0, 100);
  d.values[0] = 5.0;  // mass only at x=0
  CHECK_THROWS_AS((void)fit_moments(d), std::invalid_argument);
}

TEST_CASE("least squares recovers an on-grid R exactly") {
  const FitResult fit = fit_least_squares_R(exact_n0_table(1.37), default_R_grid());
  CHECK(fit.R_hat == doctest::Approx(1.37).epsilon(1e-12));
  CHECK(fit.Nbar == doctest::Approx(normalize_N0(1.37)).epsilon(1e-9));

  // argmin beats its grid neighbors
  const DensityGrid1D data = exact_n0_table(1.37);
  for (double nb : {1.36, 1.38}) {
    const FitResult other = fit_least_squares_R(data, {nb});
    CHECK(fit.objective <= other.objective);
  }
  CHECK_THROWS_AS((void)fit_least_squares_R(data, {}), std::invalid_argument);
}

TEST_CASE("parameter grids match the published search spaces") {
  const ParameterGrids m = mitosis_parameter_grids();
  CHECK(m.r.size() == 10);
  CHECK(m.gamma.size() == 21);
  CHECK(m.gamma.front() == doctest::Approx(0.5));
  CHECK(m.gamma.back() == doctest::Approx(6.0));
  CHECK(m.gamma[3] == doctest::Approx(1.325));
  CHECK(m.eta.back() == doctest::Approx(10.0));
  bool has9 = false;
  for (double e : m.eta) has9 |= std::fabs(e - 9.0) < 1e-12;
  CHECK(has9);

  const ParameterGrids a = adder_parameter_grids();
  CHECK(a.r.size() == 10);
  CHECK(a.gamma.size() == 11);
  CHECK(a.eta.size() == 21);
  CHECK(a.eta[15] == doctest::Approx(3.775));
}

TEST_CASE("mitosis grid search recovers an on-grid triple from its own profile") {
  GridSearchOptions opt;
  opt.n_x = 400;
  opt.eps = 1e-5;
  // target profile generated by the same solver settings at an on-grid triple
  DensityGrid1D probe(2.5, 500);
  const DensityGrid1D target = mitosis_null_profile(1.0, 1.05, 2.125, probe, opt);
  DensityGrid1D data(probe.x_max, probe.n_x);
  for (int i = 0; i < data.n_x; ++i) data.values[i] = target.value_at(data.x(i));
  data.normalize();

  ParameterGrids grids;
  grids.r = {0.5, 1.0, 5.0};
  grids.gamma = {0.775, 1.05, 1.325};
  grids.eta = {1.8, 2.125, 2.45};
  ObjectiveTable table;
  const FitResult fit = grid_search_mitosis(data, grids, opt, &table);
  CHECK(fit.r == doctest::Approx(1.0));
  CHECK(fit.gamma == doctest::Approx(1.05));
  CHECK(fit.eta == doctest::Approx(2.125));
  CHECK(fit.failures.empty());
  REQUIRE(table.objective.size() == 27);
  for (double o : table.objective) CHECK(std::isfinite(o));
  // the argmin beats every other triple
  for (double o : table.objective) CHECK(fit.objective <= o);
}

TEST_CASE("adder grid search recovers an on-grid pair and dedupes r") {
  GridSearchOptions opt;
  opt.n_x = 500;
  DensityGrid1D probe(8.0, 600);
  DensityGrid1D data = adder_null_marginal(7.0, 1.57, probe, opt);
  DensityGrid1D on_probe(probe.x_max, probe.n_x);
  for (int i = 0; i < probe.n_x; ++i) on_probe.values[i] = data.value_at(probe.x(i));
  on_probe.normalize();

  ParameterGrids grids;
  grids.r = {0.01, 5.0};
  grids.gamma = {6.5, 7.0};
  grids.eta = {1.325, 1.57};
  ObjectiveTable table;
  const FitResult fit = grid_search_adder(on_probe, grids, opt, &table);
  CHECK(fit.gamma == doctest::Approx(7.0));
  CHECK(fit.eta == doctest::Approx(1.57));
  // identical objective across the r axis: the profile is r-invariant
  REQUIRE(table.objective.size() == 8);
  CHECK(table.objective[0] == table.objective[4]);
}
