#include "cellpop/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cellpop/rng.hpp"

namespace cellpop {

namespace {

constexpr double kMinAcceptRate = 1e-4;
constexpr long long kRateCheckAfter = 200000;

[[noreturn]] void efficiency_error() {
  throw std::runtime_error(
      "rejection_sample: acceptance rate below 1e-4; use a tighter envelope "
      "(trim the grid to the density support)");
}

}  // namespace

Sample1D rejection_sample(const DensityGrid1D& d, int n, std::uint64_t seed,
                          std::uint64_t stream) {
  if (n < 0) throw std::invalid_argument("rejection_sample: n must be nonnegative");
  const double dmax = d.max_value();
  if (!(dmax > 0.0) || !std::isfinite(dmax))
    throw std::invalid_argument("rejection_sample: density has no positive finite maximum");
  PhiloxRng rng(seed, stream);
  Sample1D out;
  out.points.reserve(n);
  out.seed = seed;
  out.stream = stream;
  long long proposals = 0;
  while (static_cast<int>(out.points.size()) < n) {
    const double x = rng.uniform(0.0, d.x_max);
    const double u = rng.uniform();
    ++proposals;
    if (u * dmax <= d.value_at(x)) out.points.push_back(x);
    if (proposals > kRateCheckAfter &&
        static_cast<double>(out.points.size() + 1) / proposals < kMinAcceptRate)
      efficiency_error();
  }
  return out;
}

Sample2D rejection_sample(const DensityGrid2D& d, int n, std::uint64_t seed,
                          std::uint64_t stream) {
  if (n < 0) throw std::invalid_argument("rejection_sample: n must be nonnegative");
  const double dmax = d.max_value();
  if (!(dmax > 0.0) || !std::isfinite(dmax))
    throw std::invalid_argument("rejection_sample: density has no positive finite maximum");
  PhiloxRng rng(seed, stream);
  Sample2D out;
  out.points.reserve(n);
  out.seed = seed;
  out.stream = stream;
  long long proposals = 0;
  while (static_cast<int>(out.points.size()) < n) {
    const double a = rng.uniform(0.0, d.a_max);
    const double x = rng.uniform(0.0, d.x_max);
    const double u = rng.uniform();
    ++proposals;
    if (u * dmax <= d.value_at(a, x)) out.points.push_back({a, x});
    if (proposals > kRateCheckAfter &&
        static_cast<double>(out.points.size() + 1) / proposals < kMinAcceptRate)
      efficiency_error();
  }
  return out;
}

double silverman_bandwidth(const std::vector<double>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least two points");
  double mean = 0.0;
  for (double x : points) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : points) var += (x - mean) * (x - mean);
  var /= (n - 1);
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * (n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double w = pos - lo;
    return lo + 1 < n ? sorted[lo] * (1 - w) + sorted[lo + 1] * w : sorted[lo];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double scale = std::sqrt(var);
  if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
  if (scale <= 0.0) scale = std::sqrt(var) > 0 ? std::sqrt(var) : 1.0;
  return 0.9 * scale * std::pow(static_cast<double>(n), -0.2);
}

DensityGrid1D kde_1d(const Sample1D& s, double bandwidth, double x_max, int n_x) {
  if (s.points.size() < 2) throw std::invalid_argument("kde_1d: need at least two points");
  if (bandwidth <= 0.0) throw std::invalid_argument("kde_1d: bandwidth must be positive");
  DensityGrid1D d(x_max, n_x);
  const double inv = 1.0 / (bandwidth * std::sqrt(2.0 * M_PI) * s.points.size());
  for (int i = 0; i < n_x; ++i) {
    const double x = d.x(i);
    double acc = 0.0;
    for (double p : s.points) {
      const double z = (x - p) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    d.values[i] = acc * inv;
  }
  d.normalize();
  return d;
}

namespace {

// Equal-probability bin edges of a tabulated 1-D density via its trapezoid CDF.
std::vector<double> quantile_edges(const DensityGrid1D& d, int bins) {
  const int n = d.n_x;
  std::vector<double> cdf(n, 0.0);
  for (int i = 1; i < n; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (d.values[i - 1] + d.values[i]) * d.dx();
  const double total = cdf.back();
  if (!(total > 0.0)) throw std::invalid_argument("chi_square_gof: degenerate density");
  std::vector<double> edges(bins + 1);
  edges[0] = 0.0;
  edges[bins] = d.x_max;
  int i = 1;
  for (int b = 1; b < bins; ++b) {
    const double target = total * b / bins;
    while (i < n - 1 && cdf[i] < target) ++i;
    const double c0 = cdf[i - 1], c1 = cdf[i];
    const double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    edges[b] = d.x(i - 1) + w * d.dx();
  }
  return edges;
}

double chi_square_from_points(const std::vector<double>& pts, const std::vector<double>& edges) {
  const int bins = static_cast<int>(edges.size()) - 1;
  std::vector<long long> counts(bins, 0);
  for (double p : pts) {
    const int b = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), p) -
                                   edges.begin()) - 1;
    counts[std::clamp(b, 0, bins - 1)]++;
  }
  const double expected = static_cast<double>(pts.size()) / bins;
  double stat = 0.0;
  for (long long c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

}  // namespace

double chi_square_gof(const Sample1D& s, const DensityGrid1D& d, int bins) {
  return chi_square_from_points(s.points, quantile_edges(d, bins));
}

double chi_square_gof(const Sample2D& s, const DensityGrid2D& d, int bins) {
  std::vector<double> xs(s.points.size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = s.points[i][1];
  return chi_square_from_points(xs, quantile_edges(marginal_x(d), bins));
}

namespace {
std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void write_sample_csv(const std::string& path, const Sample1D& s) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot open sample csv for writing");
  out << "# seed=" << s.seed << " stream=" << s.stream << " source=" << s.source << "\n";
  out << "x\n";
  for (double p : s.points) out << format17(p) << '\n';
}

void write_sample_csv(const std::string& path, const Sample2D& s) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot open sample csv for writing");
  out << "# seed=" << s.seed << " stream=" << s.stream << " source=" << s.source << "\n";
  out << "a,x\n";
  for (const auto& p : s.points) out << format17(p[0]) << ',' << format17(p[1]) << '\n';
}

Sample1D read_sample_csv_1d(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open sample csv for reading");
  Sample1D s;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("seed=", 0) == 0) s.seed = std::stoull(tok.substr(5));
        if (tok.rfind("stream=", 0) == 0) s.stream = std::stoull(tok.substr(7));
        if (tok.rfind("source=", 0) == 0) s.source = tok.substr(7);
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    s.points.push_back(std::stod(line));
  }
  return s;
}

Sample2D read_sample_csv_2d(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open sample csv for reading");
  Sample2D s;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("seed=", 0) == 0) s.seed = std::stoull(tok.substr(5));
        if (tok.rfind("stream=", 0) == 0) s.stream = std::stoull(tok.substr(7));
        if (tok.rfind("source=", 0) == 0) s.source = tok.substr(7);
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("bad 2d sample row");
    s.points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return s;
}

}  // namespace cellpop
