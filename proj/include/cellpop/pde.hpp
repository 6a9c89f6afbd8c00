#pragma once

#include <optional>
#include <vector>

#include "cellpop/grid.hpp"
#include "cellpop/kernels.hpp"

namespace cellpop {

enum class ModelFamily { MitosisConstant, MitosisGeneral, Adder };

// Growth g(x) = r x^gamma (MitosisConstant fixes g = 1), division rate
// B(x) = R (constant), B(x) = R x^eta (general mitosis) or B(a) = R a^eta
// (adder).
struct ModelSpec {
  ModelFamily family = ModelFamily::MitosisConstant;
  double r = 1.0;
  double gamma = 1.0;
  double R = 1.0;
  double eta = 1.0;
  KernelSpec kernel{KernelVariant::DiracHalf};

  double growth(double x) const;
  double division(double ax) const;
  void validate() const;
};

struct SolveOptions {
  double x_max = 10.0;
  int n_x = 1000;
  double a_max = 6.0;   // 2-D only
  int n_a = 300;        // 2-D only
  double dt = 0.0;      // 0 = derive from the CFL bound
  // Courant factor close to 1 keeps the upwind diffusion (dx/2)(1-c) small;
  // the update stays monotone for any value below 1.
  double cfl = 0.98;
  double eps = 1e-6;
  long long max_steps = 2'000'000;
  int lambda_window = 100;
  int checkpoint_every = 100;
  std::optional<DensityGrid1D> initial_1d;
  std::optional<DensityGrid2D> initial_2d;
  bool throw_on_max_steps = true;
};

struct SolveResult1D {
  DensityGrid1D density;
  double lambda = 0.0;
  long long steps = 0;
  double residual = 0.0;
  bool oscillation_suspected = false;
  long long clamped_nodes = 0;
  std::vector<double> residual_checkpoints;
};

struct SolveResult2D {
  DensityGrid2D density;
  double lambda = 0.0;
  long long steps = 0;
  double residual = 0.0;
  bool oscillation_suspected = false;
  long long clamped_nodes = 0;
  std::vector<double> residual_checkpoints;
};

// (1/dt) * sum over grid nodes of |curr - prev|.
double stabilization_residual(const DensityGrid1D& prev, const DensityGrid1D& curr, double dt);
double stabilization_residual(const DensityGrid2D& prev, const DensityGrid2D& curr, double dt);

// Time-march to the normalized stationary profile; lambda is the mean
// pre-renormalization log-mass growth per unit time over the last
// lambda_window steps.
SolveResult1D solve_mitosis(const ModelSpec& spec, const SolveOptions& opt);
SolveResult2D solve_adder(const ModelSpec& spec, const SolveOptions& opt);

}  // namespace cellpop
