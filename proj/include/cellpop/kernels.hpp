#pragma once

#include <string>

namespace cellpop {

enum class KernelVariant { DiracHalf, Beta22, Uniform, TruncNormal, GaussMixture };

// Division kernel on [0,1]: the Dirac-at-1/2 null or one of four absolutely
// continuous symmetric alternatives. Immutable after construction; the
// normalizing constant is computed once and cached.
class KernelSpec {
 public:
  // TruncNormal takes (mu, sigma); the other variants ignore the parameters.
  explicit KernelSpec(KernelVariant variant, double mu = 0.5, double sigma = 0.25);

  KernelVariant variant() const { return variant_; }
  bool is_dirac() const { return variant_ == KernelVariant::DiracHalf; }
  double normalizing_constant() const { return constant_; }

  // h(theta) including the normalizing constant. Throws for the Dirac
  // variant and for theta outside [0,1].
  double density(double theta) const;

  std::string name() const;
  static KernelSpec from_name(const std::string& name);

 private:
  double unnormalized(double theta) const;

  KernelVariant variant_;
  double mu_, sigma_;
  double constant_ = 1.0;
};

double kernel_density(const KernelSpec& spec, double theta);
double normalizing_constant(KernelVariant variant);

}  // namespace cellpop
