#pragma once

#include <vector>

#include "cellpop/grid.hpp"
#include "cellpop/kernels.hpp"

namespace cellpop {

// alpha_0 = 1, alpha_n = alpha_{n-1} * 2/(2^n - 1). Terms of the explicit
// stationary series under the constant-rate equal-mitosis null.
struct AlphaSeries {
  std::vector<double> coefficients;
  int truncation = 0;
};

AlphaSeries alpha_coefficients(int K);

// Series constants sum (-1)^n alpha_n / 2^{n+1} and / 2^{2n+2}; they enter
// the L1 norm and first moment of N0 and the moment estimator.
double n0_series_s1(int K = 40);
double n0_series_s2(int K = 40);

// Normalizing constant Nbar such that N0 integrates to 1 on [0, inf).
double normalize_N0(double R, int K = 40);
// Nbar * sum (-1)^n alpha_n exp(-2^{n+1} R x).
double eval_N0(double x, double R, int K = 40);
double n0_mean(double R, int K = 40);
// Closed-form double series for the squared L2 norm of N0.
double n0_l2_norm_sq(double R, int K = 40);
DensityGrid1D tabulate_N0(double R, double x_max, int n_x, int K = 40);

// Reusable evaluator: the alpha series is built once.
class N0Evaluator {
 public:
  explicit N0Evaluator(double R, int K = 40);
  double operator()(double x) const;
  double nbar() const { return nbar_; }

 private:
  double R_, nbar_;
  std::vector<double> alphas_;
};

// Fixed point of the generation operator for the adder eigenproblem with
// g(x) = x^gamma, B(a) = a^eta. For gamma = 1 the stored function is
// f(s) = s^2 M(0,s); for general gamma it is G(s) = s^gamma M(0,s).
// birth_density() converts either into the normalized size-at-birth density.
struct BirthSizeDensity {
  double s_max = 0.0;
  int n_s = 0;
  std::vector<double> values;    // f or G, normalized to unit trapezoid mass
  double gamma = 1.0, eta = 1.0;
  double lambda = 1.0;
  double residual = 0.0;         // final L1 fixed-point residual
  int iterations = 0;

  double ds() const { return s_max / n_s; }
  double s(int i) const { return i * ds(); }
  DensityGrid1D birth_density() const;
};

struct FixedPointOptions {
  double tol = 1e-8;
  int max_iterations = 10000;
  int theta_nodes = 256;         // panels of the trapezoid rule in theta
  double damping = 0.5;          // Picard mixing weight on the new iterate
  double lambda_tol = 1e-6;
  int max_lambda_iterations = 60;
};

// Lifetime density Phi(a) = a^eta exp(-a^{eta+1}/(eta+1)) and its survival
// function Psi(a) = exp(-a^{eta+1}/(eta+1)).
double lifetime_density(double a, double eta);
double lifetime_survival(double a, double eta);
// Smallest a with Psi(a) <= tail.
double lifetime_a_max(double eta, double tail = 1e-12);
// s-grid extent covering the birth-size support for the given kernel.
double suggest_birth_s_max(double eta, const KernelSpec& kernel);

BirthSizeDensity birth_fixed_point_gamma1(double eta, const KernelSpec& kernel,
                                          double s_max, int n_s,
                                          const FixedPointOptions& opt = {});
// gamma != 1; the growth eigenvalue lambda is co-iterated, starting at 1.
BirthSizeDensity birth_fixed_point_general(double gamma, double eta,
                                           const KernelSpec& kernel,
                                           double s_max, int n_s,
                                           const FixedPointOptions& opt = {});

// N(a,x) = M(a, x-a) for x >= a, zero otherwise, normalized to unit mass.
DensityGrid2D reconstruct_N_from_birth(const BirthSizeDensity& bsd, double a_max,
                                       double x_max, int n_a, int n_x);

// Quadrature of B(a) g(x) N(a,x) over the grid; equals lambda (with r = 1)
// for a converged eigenpair.
double division_rate_integral(const DensityGrid2D& n, double gamma, double eta);

}  // namespace cellpop
