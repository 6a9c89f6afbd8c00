#include "cellpop/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cellpop/parallel.hpp"

namespace cellpop {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double DensityGrid1D::mass() const {
  if (n_x < 2) return 0.0;
  double s = par::sum_deterministic(values.data(), values.size());
  s -= 0.5 * (values.front() + values.back());
  return s * dx();
}

void DensityGrid1D::normalize() {
  const double m = mass();
  require(m > 0.0 && std::isfinite(m), "DensityGrid1D::normalize: nonpositive mass");
  for (double& v : values) v /= m;
}

double DensityGrid1D::value_at(double xq) const {
  if (xq < 0.0 || xq > x_max || n_x < 2) return 0.0;
  const double t = xq / dx();
  int i = static_cast<int>(t);
  if (i >= n_x - 1) return i == n_x - 1 ? values[i] * (1.0 - (t - i)) : 0.0;
  const double w = t - i;
  return values[i] * (1.0 - w) + values[i + 1] * w;
}

double DensityGrid1D::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

double DensityGrid1D::first_moment() const {
  if (n_x < 2) return 0.0;
  std::vector<double> xv(values.size());
  for (int i = 0; i < n_x; ++i) xv[i] = x(i) * values[i];
  double s = par::sum_deterministic(xv.data(), xv.size());
  s -= 0.5 * (xv.front() + xv.back());
  return s * dx();
}

double DensityGrid2D::mass() const {
  if (n_a < 2 || n_x < 2) return 0.0;
  // trapezoid in both directions: weight 1/2 on edges, 1/4 on corners
  std::vector<double> row(n_a, 0.0);
  for (int i = 0; i < n_a; ++i) {
    const double* v = values.data() + static_cast<std::size_t>(i) * n_x;
    double s = par::sum_serial(v, n_x) - 0.5 * (v[0] + v[n_x - 1]);
    row[i] = s;
  }
  double s = par::sum_deterministic(row.data(), row.size()) - 0.5 * (row.front() + row.back());
  return s * da() * dx();
}

void DensityGrid2D::normalize() {
  const double m = mass();
  require(m > 0.0 && std::isfinite(m), "DensityGrid2D::normalize: nonpositive mass");
  for (double& v : values) v /= m;
}

double DensityGrid2D::value_at(double aq, double xq) const {
  if (aq < 0.0 || aq > a_max || xq < 0.0 || xq > x_max) return 0.0;
  const double ta = aq / da(), tx = xq / dx();
  int i = static_cast<int>(ta), j = static_cast<int>(tx);
  if (i >= n_a - 1) i = n_a - 2;
  if (j >= n_x - 1) j = n_x - 2;
  if (i < 0 || j < 0) return 0.0;
  const double wa = ta - i, wx = tx - j;
  return at(i, j) * (1 - wa) * (1 - wx) + at(i + 1, j) * wa * (1 - wx) +
         at(i, j + 1) * (1 - wa) * wx + at(i + 1, j + 1) * wa * wx;
}

double DensityGrid2D::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

double l2_norm_sq(const DensityGrid1D& d) {
  std::vector<double> sq(d.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = d.values[i] * d.values[i];
  return par::sum_deterministic(sq.data(), sq.size()) * d.dx();
}

double l2_norm_sq(const DensityGrid2D& d) {
  std::vector<double> sq(d.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = d.values[i] * d.values[i];
  return par::sum_deterministic(sq.data(), sq.size()) * d.da() * d.dx();
}

namespace {
void require_matching(const DensityGrid1D& a, const DensityGrid1D& b) {
  require(a.n_x == b.n_x && a.x_max == b.x_max, "grid mismatch");
}
void require_matching(const DensityGrid2D& a, const DensityGrid2D& b) {
  require(a.n_x == b.n_x && a.x_max == b.x_max && a.n_a == b.n_a && a.a_max == b.a_max,
          "grid mismatch");
}
}  // namespace

double l2_dist_sq(const DensityGrid1D& d1, const DensityGrid1D& d2) {
  require_matching(d1, d2);
  std::vector<double> sq(d1.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double diff = d1.values[i] - d2.values[i];
    sq[i] = diff * diff;
  }
  return par::sum_deterministic(sq.data(), sq.size()) * d1.dx();
}

double l2_dist_sq(const DensityGrid2D& d1, const DensityGrid2D& d2) {
  require_matching(d1, d2);
  std::vector<double> sq(d1.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double diff = d1.values[i] - d2.values[i];
    sq[i] = diff * diff;
  }
  return par::sum_deterministic(sq.data(), sq.size()) * d1.da() * d1.dx();
}

double l1_dist(const DensityGrid1D& d1, const DensityGrid1D& d2) {
  require_matching(d1, d2);
  std::vector<double> ab(d1.values.size());
  for (std::size_t i = 0; i < ab.size(); ++i) ab[i] = std::fabs(d1.values[i] - d2.values[i]);
  return par::sum_deterministic(ab.data(), ab.size()) * d1.dx();
}

double l1_dist(const DensityGrid2D& d1, const DensityGrid2D& d2) {
  require_matching(d1, d2);
  std::vector<double> ab(d1.values.size());
  for (std::size_t i = 0; i < ab.size(); ++i) ab[i] = std::fabs(d1.values[i] - d2.values[i]);
  return par::sum_deterministic(ab.data(), ab.size()) * d1.da() * d1.dx();
}

DensityGrid1D marginal_x(const DensityGrid2D& d) {
  DensityGrid1D out(d.x_max, d.n_x);
  for (int j = 0; j < d.n_x; ++j) {
    double s = 0.0;
    for (int i = 0; i < d.n_a; ++i) s += d.at(i, j);
    s -= 0.5 * (d.at(0, j) + d.at(d.n_a - 1, j));
    out.values[j] = s * d.da();
  }
  return out;
}

void write_density_csv(const std::string& path, const DensityGrid1D& d) {
  std::ofstream out(path);
  require(out.good(), "cannot open density csv for writing");
  out << "x,value\n";
  for (int i = 0; i < d.n_x; ++i) out << format17(d.x(i)) << ',' << format17(d.values[i]) << '\n';
}

void write_density_csv(const std::string& path, const DensityGrid2D& d) {
  std::ofstream out(path);
  require(out.good(), "cannot open density csv for writing");
  out << "a,x,value\n";
  for (int i = 0; i < d.n_a; ++i)
    for (int j = 0; j < d.n_x; ++j)
      out << format17(d.a(i)) << ',' << format17(d.x(j)) << ',' << format17(d.at(i, j)) << '\n';
}

namespace {
std::vector<std::vector<double>> read_csv_rows(const std::string& path, int cols) {
  std::ifstream in(path);
  require(in.good(), "cannot open csv for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {  // header
      first = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(static_cast<int>(row.size()) == cols, "csv row with unexpected column count");
    rows.push_back(std::move(row));
  }
  return rows;
}
}  // namespace

DensityGrid1D read_density_csv_1d(const std::string& path) {
  auto rows = read_csv_rows(path, 2);
  require(rows.size() >= 2, "density csv needs at least two rows");
  const int n = static_cast<int>(rows.size());
  const double dx = rows[1][0] - rows[0][0];
  DensityGrid1D d(dx * n, n);
  for (int i = 0; i < n; ++i) d.values[i] = rows[i][1];
  return d;
}

DensityGrid2D read_density_csv_2d(const std::string& path) {
  auto rows = read_csv_rows(path, 3);
  require(rows.size() >= 4, "density csv needs at least four rows");
  int n_x = 1;
  while (n_x < static_cast<int>(rows.size()) && rows[n_x][0] == rows[0][0]) ++n_x;
  const int n_a = static_cast<int>(rows.size()) / n_x;
  require(static_cast<std::size_t>(n_a) * n_x == rows.size(), "ragged 2d density csv");
  const double dx = rows[1][1] - rows[0][1];
  const double da = rows[n_x][0] - rows[0][0];
  DensityGrid2D d(da * n_a, dx * n_x, n_a, n_x);
  for (int i = 0; i < n_a; ++i)
    for (int j = 0; j < n_x; ++j) d.at(i, j) = rows[static_cast<std::size_t>(i) * n_x + j][2];
  return d;
}

}  // namespace cellpop
