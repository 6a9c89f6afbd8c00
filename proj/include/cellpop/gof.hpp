#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cellpop/basis.hpp"
#include "cellpop/grid.hpp"
#include "cellpop/sampling.hpp"

namespace cellpop {

// Null stationary density: evaluator at sample points, its known squared L2
// norm, and a tabulated density to drive the Monte Carlo calibration sampler.
class NullModel {
 public:
  // Explicit series null of the constant-rate mitosis model; the norm uses
  // the closed-form double series and sampling uses a fine table.
  static NullModel mitosis_constant(double R, double x_max = 10.0, int n_x = 2000);
  static NullModel from_grid(DensityGrid1D d, std::string name);
  static NullModel from_grid(DensityGrid2D d, std::string name);
  // Evaluator identically zero with zero norm; calibration cannot sample it.
  static NullModel degenerate_zero(int dim);

  int dim() const { return dim_; }
  double eval(double x) const;
  double eval(double a, double x) const;
  double l2_norm_sq() const { return l2sq_; }
  Sample1D sample(int n, std::uint64_t seed, std::uint64_t stream) const;
  Sample2D sample2(int n, std::uint64_t seed, std::uint64_t stream) const;
  const std::string& name() const { return name_; }
  const DensityGrid1D& grid1() const { return grid1_; }
  const DensityGrid2D& grid2() const { return grid2_; }

 private:
  NullModel() = default;
  int dim_ = 1;
  bool explicit_n0_ = false;
  bool zero_ = false;
  double R_ = 1.0;
  DensityGrid1D grid1_;
  DensityGrid2D grid2_;
  double l2sq_ = 0.0;
  std::string name_;
};

// Projection family for the test statistics: Laguerre degrees D in 1-D,
// tensor Daubechies scaling levels J in 2-D.
class TestBasis {
 public:
  static TestBasis laguerre(int d_min = 3, int d_max = 20);
  static TestBasis daubechies(int j_min = 3, int j_max = 10, int k_bound = 10);

  bool is_2d() const { return two_d_; }
  const std::vector<int>& resolutions() const { return res_; }
  const WaveletBasis2D& wavelet() const { return *wav_; }

  // U-statistics (1/(n(n-1))) sum_{i != j} sum_l phi_l(Z_i) phi_l(Z_j) for
  // every resolution at once, via the O(nD) norm decomposition.
  std::vector<double> u_stat_all(const Sample1D& s) const;
  std::vector<double> u_stat_all(const Sample2D& s) const;

 private:
  bool two_d_ = false;
  std::vector<int> res_;
  std::shared_ptr<WaveletBasis2D> wav_;
};

double u_stat(const Sample1D& s, const TestBasis& basis, int D);
double u_stat(const Sample2D& s, const TestBasis& basis, int J);

// T_D = U_D - (2/n) sum_i N0(Z_i) + ||N0||_2^2 for every resolution.
std::vector<double> t_stat_all(const Sample1D& s, const NullModel& null, const TestBasis& basis);
std::vector<double> t_stat_all(const Sample2D& s, const NullModel& null, const TestBasis& basis);
double t_stat(const Sample1D& s, const NullModel& null, const TestBasis& basis, int D);
double t_stat(const Sample2D& s, const NullModel& null, const TestBasis& basis, int J);

struct Calibration {
  double alpha = 0.05;
  std::vector<int> resolutions;
  double u_alpha = 0.0;
  std::vector<double> quantiles;  // t_D(u_alpha), aligned with resolutions
  int B = 0;
  int n = 0;
  std::uint64_t seed = 0;
  std::string null_name;
  bool two_d = false;
  bool warning_small_B = false;
  // Quantiles and the level constraint are estimated on the same replication
  // set; the empirical sup-rejection rate at u_alpha over that set is <= alpha.
  double empirical_level = 0.0;
};

// Monte Carlo calibration: B null samples of size n (replication b uses RNG
// stream b), per-resolution empirical quantiles on the grid u = m/B, and
// u_alpha = the largest grid u whose sup-test rejects at most an alpha
// fraction of the replications.
Calibration calibrate(const NullModel& null, int n, double alpha, const TestBasis& basis, int B,
                      std::uint64_t seed);

struct TestReport {
  std::vector<int> resolutions;
  std::vector<double> t_hats;
  double T_alpha = 0.0;
  int decision = 0;
  int n = 0;
  double u_alpha = 0.0;
  std::uint64_t sample_seed = 0;
  std::uint64_t sample_stream = 0;
  std::string null_name;
  std::string calibration_note;
};

TestReport run_test(const Sample1D& s, const Calibration& cal, const NullModel& null,
                    const TestBasis& basis);
TestReport run_test(const Sample2D& s, const Calibration& cal, const NullModel& null,
                    const TestBasis& basis);

struct PowerResult {
  double proportion = 0.0;
  double std_error = 0.0;
  int rejections = 0;
  int reps = 0;
};

// Fraction of fresh size-n samples from `alt` rejected by the calibrated
// test; replication k uses RNG stream 2^32 + k of `seed`.
PowerResult power_study(const DensityGrid1D& alt, const NullModel& null, const Calibration& cal,
                        const TestBasis& basis, int n, int reps, std::uint64_t seed);
PowerResult power_study(const DensityGrid2D& alt, const NullModel& null, const Calibration& cal,
                        const TestBasis& basis, int n, int reps, std::uint64_t seed);
// Convenience: calibrate first, then run the study.
PowerResult power_study(const DensityGrid1D& alt, const NullModel& null, int n, double alpha,
                        int reps, std::uint64_t seed, const TestBasis& basis, int B);
PowerResult power_study(const DensityGrid2D& alt, const NullModel& null, int n, double alpha,
                        int reps, std::uint64_t seed, const TestBasis& basis, int B);

void save_calibration_json(const std::string& path, const Calibration& cal);
Calibration load_calibration_json(const std::string& path);
void save_report_json(const std::string& path, const TestReport& report);

}  // namespace cellpop
