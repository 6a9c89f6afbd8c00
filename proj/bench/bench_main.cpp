// Microbenchmarks comparing the serial reference kernels with the
// OpenMP-parallel ones used by the solvers, plus one end-to-end solve.
//
//   ./cellpop_bench [threads]

#include <chrono>
#include <cstdio>
#include <vector>

#include "cellpop/parallel.hpp"
#include "cellpop/pde.hpp"
#include "cellpop/pde_kernels.hpp"
#include "cellpop/rng.hpp"

using namespace cellpop;

namespace {

template <class F>
double time_ms(F&& f, int iters) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) par::set_num_threads(std::atoi(argv[1]));
  std::printf("threads: %d\n", par::num_threads());

  PhiloxRng rng(1, 0);
  const int n = 1000;
  std::vector<double> W(static_cast<std::size_t>(n) * n), v(n), y(n);
  for (double& x : W) x = rng.uniform();
  for (double& x : v) x = rng.uniform();
  const double t_mv_s =
      time_ms([&] { kernels::upper_matvec_serial(W.data(), v.data(), y.data(), n); }, 50);
  const double t_mv_p =
      time_ms([&] { kernels::upper_matvec(W.data(), v.data(), y.data(), n); }, 50);
  std::printf("fragmentation matvec %dx%d   serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              n, n, t_mv_s, t_mv_p, t_mv_s / t_mv_p);

  const int na = 300, nx = 400;
  std::vector<double> f(static_cast<std::size_t>(na) * nx), bc(nx), cx(nx), ca(nx),
      rb(static_cast<std::size_t>(na) * nx), o(static_cast<std::size_t>(na) * nx);
  for (double& x : f) x = rng.uniform();
  for (double& x : bc) x = rng.uniform();
  for (double& x : cx) x = 0.2 * rng.uniform();
  for (double& x : ca) x = 0.2 * rng.uniform();
  for (double& x : rb) x = 0.1 * rng.uniform();
  const double t_as_s = time_ms(
      [&] {
        kernels::adder_step_serial(f.data(), bc.data(), cx.data(), ca.data(), rb.data(),
                                   o.data(), na, nx);
      },
      200);
  const double t_as_p = time_ms(
      [&] {
        kernels::adder_step(f.data(), bc.data(), cx.data(), ca.data(), rb.data(), o.data(), na,
                            nx);
      },
      200);
  std::printf("adder upwind step %dx%d     serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n",
              na, nx, t_as_s, t_as_p, t_as_s / t_as_p);

  std::vector<double> big(1 << 22);
  for (double& x : big) x = rng.uniform() - 0.5;
  const double t_sum_s = time_ms([&] { (void)par::sum_serial(big.data(), big.size()); }, 50);
  const double t_sum_p =
      time_ms([&] { (void)par::sum_deterministic(big.data(), big.size()); }, 50);
  std::printf("reduction 4M doubles        serial %8.3f ms   chunked %9.3f ms   speedup %.2fx\n",
              t_sum_s, t_sum_p, t_sum_s / t_sum_p);

  ModelSpec spec;
  spec.family = ModelFamily::MitosisConstant;
  spec.kernel = KernelSpec(KernelVariant::Uniform);
  SolveOptions opt;
  opt.n_x = 500;
  opt.eps = 1e-4;
  const double t_solve = time_ms([&] { (void)solve_mitosis(spec, opt); }, 1);
  std::printf("mitosis solve (uniform kernel, n_x=500, eps=1e-4): %.1f ms\n", t_solve);
  return 0;
}
