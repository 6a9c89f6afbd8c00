#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cellpop/kernels.hpp"
#include "support/oracles.hpp"

using namespace cellpop;

namespace {
const KernelVariant kContinuous[] = {KernelVariant::Beta22, KernelVariant::Uniform,
                                     KernelVariant::TruncNormal, KernelVariant::GaussMixture};
}

TEST_CASE("uniform and beta kernels match closed forms") {
  CHECK(kernel_density(KernelSpec(KernelVariant::Uniform), 0.3) == doctest::Approx(1.0));
  CHECK(kernel_density(KernelSpec(KernelVariant::Beta22), 0.5) ==
        doctest::Approx(1.5).epsilon(1e-9));
  CHECK(normalizing_constant(KernelVariant::Uniform) == doctest::Approx(1.0));
  CHECK(normalizing_constant(KernelVariant::Beta22) == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("mixture constant against adaptive-resolution quadrature") {
  // oracle: independent quadrature of the unnormalized two-bump formula,
  // refined until two resolutions agree to 1e-10
  auto unnorm = [](double t) {
    const double d1 = t - 0.9, d2 = t - 0.1;
    return std::exp(-d1 * d1 / 0.1) + std::exp(-d2 * d2 / 0.1);
  };
  double prev = oracles::simpson(unnorm, 0.0, 1.0, 1 << 10);
  double cur = oracles::simpson(unnorm, 0.0, 1.0, 1 << 12);
  while (std::fabs(cur - prev) > 1e-10) {
    prev = cur;
    cur = oracles::simpson(unnorm, 0.0, 1.0, 1 << 14);
  }
  const double c2 = 1.0 / cur;
  const KernelSpec mix(KernelVariant::GaussMixture);
  CHECK(mix.normalizing_constant() == doctest::Approx(c2).epsilon(1e-9));
  CHECK(kernel_density(mix, 0.5) == doctest::Approx(c2 * unnorm(0.5)).epsilon(1e-9));
}

TEST_CASE("continuous kernels integrate to one") {
  for (KernelVariant v : kContinuous) {
    const KernelSpec k(v);
    const double mass =
        oracles::simpson([&](double t) { return k.density(t); }, 0.0, 1.0, 20000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("continuous kernels are symmetric about one half and nonnegative") {
  for (KernelVariant v : kContinuous) {
    const KernelSpec k(v);
    for (int i = 0; i <= 100; ++i) {
      const double t = i / 100.0;
      CHECK(k.density(t) >= 0.0);
      CHECK(std::fabs(k.density(t) - k.density(1.0 - t)) < 1e-10);
    }
  }
}

TEST_CASE("dirac kernel refuses density evaluation") {
  const KernelSpec dirac(KernelVariant::DiracHalf);
  CHECK_THROWS_AS((void)kernel_density(dirac, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)kernel_density(KernelSpec(KernelVariant::Uniform), 1.5),
                  std::domain_error);
  CHECK_THROWS_AS((void)kernel_density(KernelSpec(KernelVariant::Uniform), -0.1),
                  std::domain_error);
}

TEST_CASE("kernel names round trip") {
  for (const char* name : {"dirac", "beta22", "uniform", "truncnorm", "mixture"})
    CHECK(KernelSpec::from_name(name).name() == name);
  CHECK_THROWS_AS(KernelSpec::from_name("nope"), std::invalid_argument);
}
