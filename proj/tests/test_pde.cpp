#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cellpop/pde.hpp"
#include "cellpop/pde_kernels.hpp"
#include "cellpop/rng.hpp"
#include "cellpop/stationary.hpp"

using namespace cellpop;

namespace {

ModelSpec constant_spec(double R, KernelVariant kv) {
  ModelSpec spec;
  spec.family = ModelFamily::MitosisConstant;
  spec.R = R;
  spec.kernel = KernelSpec(kv);
  return spec;
}

}  // namespace

TEST_CASE("stabilization residual formula and grid checks") {
  DensityGrid1D a(1.0, 100), b(1.0, 100);
  CHECK(stabilization_residual(a, b, 0.01) == 0.0);
  b.values[42] = 1e-3;
  CHECK(stabilization_residual(a, b, 0.01) == doctest::Approx(1e-3 / 0.01));
  DensityGrid1D c(2.0, 100);
  CHECK_THROWS_AS((void)stabilization_residual(a, c, 0.01), std::invalid_argument);
}

TEST_CASE("omp kernels match their serial references") {
  PhiloxRng rng(3, 1);
  const int n = 257;
  std::vector<double> W(n * n), v(n), y1(n), y2(n);
  for (double& x : W) x = rng.uniform() - 0.4;
  for (double& x : v) x = rng.uniform();
  kernels::upper_matvec_serial(W.data(), v.data(), y1.data(), n);
  kernels::upper_matvec(W.data(), v.data(), y2.data(), n);
  for (int i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-13));

  const int na = 33, nx = 41;
  std::vector<double> f(na * nx), bc(nx), cx(nx), ca(nx), rb(na * nx), o1(na * nx), o2(na * nx);
  for (double& x : f) x = rng.uniform();
  for (double& x : bc) x = rng.uniform();
  for (double& x : cx) x = 0.3 * rng.uniform();
  for (double& x : ca) x = 0.3 * rng.uniform();
  for (double& x : rb) x = 0.2 * rng.uniform();
  kernels::adder_step_serial(f.data(), bc.data(), cx.data(), ca.data(), rb.data(), o1.data(),
                             na, nx);
  kernels::adder_step(f.data(), bc.data(), cx.data(), ca.data(), rb.data(), o2.data(), na, nx);
  for (std::size_t k = 0; k < o1.size(); ++k) CHECK(o1[k] == o2[k]);
}

TEST_CASE("mitosis solver: dirac null matches the explicit series") {
  SolveOptions opt;
  opt.x_max = 10.0;
  opt.n_x = 1000;
  const SolveResult1D res = solve_mitosis(constant_spec(1.0, KernelVariant::DiracHalf), opt);
  CHECK(res.lambda == doctest::Approx(1.0).epsilon(0.01));
  CHECK(res.clamped_nodes == 0);

  DensityGrid1D n0 = tabulate_N0(1.0, 10.0, 1000);
  n0.normalize();
  const double rel = std::sqrt(l2_dist_sq(res.density, n0) / l2_norm_sq(n0));
  CHECK(rel < 1e-2);

  // residual trace decreases over the last recorded checkpoints
  const auto& ck = res.residual_checkpoints;
  if (ck.size() >= 10) {
    for (std::size_t i = ck.size() - 9; i < ck.size(); ++i) CHECK(ck[i] <= ck[i - 1] * 1.001);
  }
}

TEST_CASE("mitosis solver: restart from the converged profile stops immediately") {
  SolveOptions opt;
  opt.x_max = 10.0;
  opt.n_x = 500;
  const SolveResult1D first = solve_mitosis(constant_spec(1.0, KernelVariant::DiracHalf), opt);
  SolveOptions warm = opt;
  warm.initial_1d = first.density;
  const SolveResult1D second = solve_mitosis(constant_spec(1.0, KernelVariant::DiracHalf), warm);
  CHECK(second.steps <= 2);
}

TEST_CASE("mitosis solver: CFL violation is a configuration error") {
  SolveOptions opt;
  opt.dt = 1.0;  // max(g)/dx = 100 makes this far too large
  CHECK_THROWS_AS((void)solve_mitosis(constant_spec(1.0, KernelVariant::DiracHalf), opt),
                  std::invalid_argument);
}

TEST_CASE("mitosis solver: continuous kernels keep mass and positivity") {
  SolveOptions opt;
  opt.x_max = 10.0;
  opt.n_x = 400;
  opt.eps = 1e-5;
  const SolveResult1D res = solve_mitosis(constant_spec(1.0, KernelVariant::Uniform), opt);
  CHECK(res.density.mass() == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : res.density.values) CHECK(v >= 0.0);
  CHECK(res.lambda == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("adder solver: case 1 shape, marginals, and support") {
  ModelSpec spec;
  spec.family = ModelFamily::Adder;
  spec.r = 1.0;
  spec.gamma = 0.0;  // g = 1
  spec.R = 1.0;
  spec.eta = 0.0;  // B = 1
  spec.kernel = KernelSpec(KernelVariant::DiracHalf);
  SolveOptions opt;
  opt.a_max = 6.0;
  opt.x_max = 8.0;
  opt.n_a = 150;
  opt.n_x = 200;
  opt.eps = 2e-5;
  const SolveResult2D res = solve_adder(spec, opt);
  CHECK(res.density.mass() == doctest::Approx(1.0).epsilon(1e-8));
  for (int i = 0; i < res.density.n_a; ++i)
    for (int j = 0; j < res.density.n_x; ++j)
      if (res.density.x(j) < res.density.a(i)) CHECK(res.density.at(i, j) == 0.0);

  // both marginals are unimodal away from the axes
  const DensityGrid1D mx = marginal_x(res.density);
  CHECK(mx.mass() == doctest::Approx(res.density.mass()).epsilon(1e-6));
  int modes = 0;
  for (int j = 2; j + 2 < mx.n_x; ++j)
    if (mx.values[j] > mx.values[j - 1] && mx.values[j] > mx.values[j + 1] &&
        mx.values[j] > 0.05 * mx.max_value())
      ++modes;
  CHECK(modes <= 3);  // a single broad mode up to grid wiggle
}

TEST_CASE("adder solver rejects a mitosis spec and bad dt") {
  ModelSpec spec;
  spec.family = ModelFamily::MitosisConstant;
  SolveOptions opt;
  CHECK_THROWS_AS((void)solve_adder(spec, opt), std::invalid_argument);
}
