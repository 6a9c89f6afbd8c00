#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cellpop/fitting.hpp"
#include "cellpop/gof.hpp"
#include "cellpop/grid.hpp"
#include "cellpop/pde.hpp"

namespace cellpop {

extern const char* const kKernelNames[4];  // beta22, uniform, truncnorm, mixture

// Mitosis simulation study: explicit N0 null (R = 1), alternatives solved
// from the four continuous kernels, Laguerre family D = 3..20.
struct MitosisStudyOptions {
  std::vector<int> ns = {100, 200, 500};
  double alpha = 0.05;
  int calibration_B = 200;
  int reps = 200;
  std::uint64_t seed = 1;
  double x_max = 10.0;
  int n_x = 1000;
  double eps = 1e-6;
};

struct StudyRow {
  int case_id = 0;  // 0 for the mitosis model
  int n = 0;
  std::string kernel;  // "level" rows carry the estimated level
  double value = 0.0;
  double std_error = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::map<std::string, DensityGrid1D> alternatives_1d;
  std::map<std::string, DensityGrid2D> alternatives_2d;
};

StudyResult run_mitosis_study(const MitosisStudyOptions& opt);

// Adder simulation study for the published (g, B) cases, tensor Daubechies
// family J = 3..10.
struct AdderCase {
  int id;
  double gamma;  // g(x) = x^gamma
  double eta;    // B(a) = a^eta
  std::vector<int> ns;
};
const std::vector<AdderCase>& adder_cases();

struct AdderStudyOptions {
  std::vector<int> cases = {1, 7};
  std::vector<int> ns;  // empty = the published per-case sample sizes
  double alpha = 0.05;
  int calibration_B = 500;
  int reps = 500;
  std::uint64_t seed = 1;
  double a_max = 6.0, x_max = 8.0;
  int n_a = 300, n_x = 400;
  double eps = 1e-6;
};

StudyResult run_adder_study(const AdderStudyOptions& opt);

// Biological-data workflow: resample the bundled density, fit the
// constant-rate null by moments and least squares, test both, then test the
// fitted general-mitosis and adder nulls; optional full grid searches.
struct BioStudyOptions {
  int resample_n = 10000;
  double alpha = 0.05;
  int calibration_B = 200;
  std::uint64_t seed = 1;
  bool with_grid_search = false;
  GridSearchOptions grid;
  // fitted triples used when the grid searches are skipped
  double mitosis_r = 0.05, mitosis_gamma = 1.325, mitosis_eta = 9.0;
  double adder_gamma = 9.0, adder_eta = 3.775;
};

struct BioStudyResult {
  FitResult moments, least_squares;
  TestReport test_moments, test_least_squares, test_general, test_adder;
  FitResult grid_mitosis, grid_adder;  // populated when with_grid_search
};

BioStudyResult run_bio_study(const DensityGrid1D& bio, const BioStudyOptions& opt);

void write_study_csv(const std::string& path, const StudyResult& result);

}  // namespace cellpop
