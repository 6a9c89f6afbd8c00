#pragma once

#include <string>
#include <vector>

namespace cellpop {

// Tabulated density on the uniform grid x_i = i*dx, i = 0..n_x-1, with
// dx = x_max/n_x. Mass uses trapezoid weights; the squared L2 norm uses the
// plain Riemann sum sum(v^2)*dx.
struct DensityGrid1D {
  double x_max = 0.0;
  int n_x = 0;
  std::vector<double> values;

  DensityGrid1D() = default;
  DensityGrid1D(double xmax, int nx) : x_max(xmax), n_x(nx), values(nx, 0.0) {}

  double dx() const { return x_max / n_x; }
  double x(int i) const { return i * dx(); }

  double mass() const;
  // Scales values so that mass() == 1. Throws if the mass is not positive.
  void normalize();
  // Linear interpolation; zero outside [0, x_max].
  double value_at(double xq) const;
  double max_value() const;
  // Trapezoid integral of x * v(x).
  double first_moment() const;
};

// Row-major (a, x) density on a_i = i*da, x_j = j*dx.
struct DensityGrid2D {
  double a_max = 0.0, x_max = 0.0;
  int n_a = 0, n_x = 0;
  std::vector<double> values;

  DensityGrid2D() = default;
  DensityGrid2D(double amax, double xmax, int na, int nx)
      : a_max(amax), x_max(xmax), n_a(na), n_x(nx),
        values(static_cast<std::size_t>(na) * nx, 0.0) {}

  double da() const { return a_max / n_a; }
  double dx() const { return x_max / n_x; }
  double a(int i) const { return i * da(); }
  double x(int j) const { return j * dx(); }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n_x + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_x + j]; }

  double mass() const;
  void normalize();
  // Bilinear interpolation; zero outside the rectangle.
  double value_at(double aq, double xq) const;
  double max_value() const;
};

double l2_norm_sq(const DensityGrid1D& d);
double l2_norm_sq(const DensityGrid2D& d);
double l2_dist_sq(const DensityGrid1D& d1, const DensityGrid1D& d2);
double l2_dist_sq(const DensityGrid2D& d1, const DensityGrid2D& d2);
double l1_dist(const DensityGrid1D& d1, const DensityGrid1D& d2);
double l1_dist(const DensityGrid2D& d1, const DensityGrid2D& d2);

// N(x) = sum_a N(a,x) * da; preserves trapezoid-in-x mass up to the a-rule.
DensityGrid1D marginal_x(const DensityGrid2D& d);

void write_density_csv(const std::string& path, const DensityGrid1D& d);
void write_density_csv(const std::string& path, const DensityGrid2D& d);
DensityGrid1D read_density_csv_1d(const std::string& path);
DensityGrid2D read_density_csv_2d(const std::string& path);

}  // namespace cellpop
