#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellpop/grid.hpp"

namespace cellpop {

struct Sample1D {
  std::vector<double> points;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string source;
};

struct Sample2D {
  std::vector<std::array<double, 2>> points;  // (a, x)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string source;
};

// i.i.d. draws by rejection against a uniform proposal on the grid's
// bounding box, density linearly interpolated. Throws if the acceptance
// rate collapses below 1e-4.
Sample1D rejection_sample(const DensityGrid1D& d, int n, std::uint64_t seed,
                          std::uint64_t stream = 0);
Sample2D rejection_sample(const DensityGrid2D& d, int n, std::uint64_t seed,
                          std::uint64_t stream = 0);

double silverman_bandwidth(const std::vector<double>& points);

// Gaussian kernel density estimate on [0, x_max], renormalized to unit mass.
DensityGrid1D kde_1d(const Sample1D& s, double bandwidth, double x_max, int n_x);

// Chi-square statistic over `bins` equal-probability bins of the tabulated
// density (2-D samples are binned through the x-marginal).
double chi_square_gof(const Sample1D& s, const DensityGrid1D& d, int bins = 50);
double chi_square_gof(const Sample2D& s, const DensityGrid2D& d, int bins = 50);

void write_sample_csv(const std::string& path, const Sample1D& s);
void write_sample_csv(const std::string& path, const Sample2D& s);
Sample1D read_sample_csv_1d(const std::string& path);
Sample2D read_sample_csv_2d(const std::string& path);

}  // namespace cellpop
