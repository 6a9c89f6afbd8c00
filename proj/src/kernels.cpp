#include "cellpop/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace cellpop {

namespace {

double normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Composite Simpson on [0,1] with 2^14 intervals.
template <class F>
double simpson01(F f) {
  constexpr int n = 1 << 14;
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; i += 2) s += 4.0 * f(i * h);
  for (int i = 2; i < n; i += 2) s += 2.0 * f(i * h);
  return s * h / 3.0;
}

}  // namespace

KernelSpec::KernelSpec(KernelVariant variant, double mu, double sigma)
    : variant_(variant), mu_(mu), sigma_(sigma) {
  switch (variant_) {
    case KernelVariant::DiracHalf:
    case KernelVariant::Uniform:
      constant_ = 1.0;
      break;
    case KernelVariant::TruncNormal: {
      // cdf-based constant, no quadrature needed
      const double z = normal_cdf((1.0 - mu_) / sigma_) - normal_cdf(-mu_ / sigma_);
      constant_ = 1.0 / (sigma_ * z);
      break;
    }
    case KernelVariant::Beta22:
    case KernelVariant::GaussMixture:
      constant_ = 1.0 / simpson01([this](double t) { return unnormalized(t); });
      break;
  }
}

double KernelSpec::unnormalized(double theta) const {
  switch (variant_) {
    case KernelVariant::Beta22:
      return theta * (1.0 - theta);
    case KernelVariant::Uniform:
      return 1.0;
    case KernelVariant::TruncNormal:
      return normal_pdf((theta - mu_) / sigma_);
    case KernelVariant::GaussMixture: {
      const double d1 = theta - 0.9, d2 = theta - 0.1;
      return std::exp(-d1 * d1 / 0.1) + std::exp(-d2 * d2 / 0.1);
    }
    case KernelVariant::DiracHalf:
      break;
  }
  throw std::logic_error("unnormalized: no density");
}

double KernelSpec::density(double theta) const {
  if (variant_ == KernelVariant::DiracHalf)
    throw std::invalid_argument("kernel_density: Dirac kernel has no density");
  if (theta < 0.0 || theta > 1.0)
    throw std::domain_error("kernel_density: theta outside [0,1]");
  return constant_ * unnormalized(theta);
}

std::string KernelSpec::name() const {
  switch (variant_) {
    case KernelVariant::DiracHalf: return "dirac";
    case KernelVariant::Beta22: return "beta22";
    case KernelVariant::Uniform: return "uniform";
    case KernelVariant::TruncNormal: return "truncnorm";
    case KernelVariant::GaussMixture: return "mixture";
  }
  return "?";
}

KernelSpec KernelSpec::from_name(const std::string& name) {
  if (name == "dirac") return KernelSpec(KernelVariant::DiracHalf);
  if (name == "beta22") return KernelSpec(KernelVariant::Beta22);
  if (name == "uniform") return KernelSpec(KernelVariant::Uniform);
  if (name == "truncnorm") return KernelSpec(KernelVariant::TruncNormal);
  if (name == "mixture") return KernelSpec(KernelVariant::GaussMixture);
  throw std::invalid_argument("unknown kernel name: " + name);
}

double kernel_density(const KernelSpec& spec, double theta) { return spec.density(theta); }

double normalizing_constant(KernelVariant variant) {
  return KernelSpec(variant).normalizing_constant();
}

}  // namespace cellpop
