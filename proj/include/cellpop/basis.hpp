#pragma once

#include <utility>
#include <vector>

namespace cellpop {

// Laguerre functions phi_j(x) = sqrt(2) L_j(2x) e^{-x}, an orthonormal basis
// of L2(R+). L_j by the stable three-term recurrence.
double laguerre_fn(int j, double x);

class LaguerreBasis {
 public:
  explicit LaguerreBasis(int max_degree);
  int max_degree() const { return max_degree_; }
  // Writes phi_0(x) .. phi_{max_degree-1}(x).
  void features(double x, double* out) const;

 private:
  int max_degree_;
};

// Daubechies-4 scaling function (support [0,7]) tabulated on a dyadic grid by
// the cascade algorithm; values between table points are linearly
// interpolated. Scaling functions only, at one level J per resolution.
class WaveletBasis2D {
 public:
  explicit WaveletBasis2D(int k_bound = 10, int table_depth = 12);

  int k_bound() const { return k_bound_; }
  int dim() const { return (2 * k_bound_ + 1) * (2 * k_bound_ + 1); }

  // Scaling function value phi(t); zero outside the support.
  double phi(double t) const;
  double table_step() const { return step_; }
  int table_size() const { return static_cast<int>(table_.size()); }
  double table_value(int i) const { return table_[i]; }

  // 2^{J} phi(2^J a - k1) phi(2^J x - k2).
  double tensor_scaling_eval(int J, int k1, int k2, double a, double x) const;

  // Nonzero tensor features of the point (a,x) at level J as
  // (flat index, value) pairs; flat index = (k1+kb)*(2kb+1)+(k2+kb).
  void features(int J, double a, double x, std::vector<std::pair<int, double>>& out) const;

 private:
  void active_ks(double t, std::vector<std::pair<int, double>>& out) const;

  int k_bound_;
  double step_;
  std::vector<double> table_;
};

}  // namespace cellpop
