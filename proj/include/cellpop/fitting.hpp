#pragma once

#include <string>
#include <vector>

#include "cellpop/grid.hpp"

namespace cellpop {

struct FitResult {
  std::string method;
  double R_hat = 0.0;
  double Nbar = 0.0;
  double r = 0.0, gamma = 0.0, eta = 0.0;
  double objective = 0.0;  // squared L2 distance at the optimum
  double lambda = 0.0;     // implied growth eigenvalue (grid searches)
  std::vector<std::string> failures;  // per-triple skip log
};

// Closed-form moment estimates of (R, Nbar) for the constant-rate null from
// the L1 norm and first moment of the data density.
FitResult fit_moments(const DensityGrid1D& data);

std::vector<double> default_R_grid();  // {0.01, 0.02, ..., 20}
FitResult fit_least_squares_R(const DensityGrid1D& data, const std::vector<double>& R_grid);

struct ParameterGrids {
  std::vector<double> r, gamma, eta;
};
// Search spaces of the general-mitosis and adder fits.
ParameterGrids mitosis_parameter_grids();
ParameterGrids adder_parameter_grids();

struct GridSearchOptions {
  std::string cache_dir;   // empty disables the on-disk profile cache
  int n_x = 800;           // solver resolution
  double hazard_cut = 30.0;  // cumulative division hazard defining the solver domain
  double eps = 1e-6;
  long long max_steps = 4'000'000;
};

// Stationary profile of the general mitosis null (B(x) = x^eta, g = r x^gamma,
// Dirac kernel), solved on an adaptive domain sized by the hazard cut.
DensityGrid1D mitosis_null_profile(double r, double gamma, double eta,
                                   const DensityGrid1D& data_grid, const GridSearchOptions& opt,
                                   double* lambda_out = nullptr);
// x-marginal of the stationary adder null (B(a) = a^eta, g = x^gamma, Dirac
// kernel) on the data grid, via the birth fixed point; independent of r.
DensityGrid1D adder_null_marginal(double gamma, double eta, const DensityGrid1D& data_grid,
                                  const GridSearchOptions& opt);

// Objective table (one row per triple) for CSV export.
struct ObjectiveTable {
  std::vector<double> r, gamma, eta, objective, lambda;
  std::vector<std::string> status;
};
void write_objective_csv(const std::string& path, const ObjectiveTable& table);

FitResult grid_search_mitosis(const DensityGrid1D& data, const ParameterGrids& grids,
                              const GridSearchOptions& opt, ObjectiveTable* table = nullptr);
// The adder profile does not depend on r (r only rescales time), so solves
// are shared across the r axis; exact objective ties resolve to the first
// triple in grid order.
FitResult grid_search_adder(const DensityGrid1D& data, const ParameterGrids& grids,
                            const GridSearchOptions& opt, ObjectiveTable* table = nullptr);

}  // namespace cellpop
