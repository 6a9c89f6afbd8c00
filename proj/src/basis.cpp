#include "cellpop/basis.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace cellpop {

double laguerre_fn(int j, double x) {
  if (j < 0 || j > 30) throw std::invalid_argument("laguerre_fn: degree out of range [0,30]");
  if (x < 0.0) throw std::domain_error("laguerre_fn: x must be nonnegative");
  const double y = 2.0 * x;
  double lkm1 = 1.0, lk = 1.0 - y;
  if (j == 0) return std::sqrt(2.0) * std::exp(-x);
  for (int k = 1; k < j; ++k) {
    const double lkp1 = ((2.0 * k + 1.0 - y) * lk - k * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return std::sqrt(2.0) * lk * std::exp(-x);
}

LaguerreBasis::LaguerreBasis(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 1 || max_degree > 31)
    throw std::invalid_argument("LaguerreBasis: max degree out of range");
}

void LaguerreBasis::features(double x, double* out) const {
  if (x < 0.0) throw std::domain_error("LaguerreBasis::features: x must be nonnegative");
  const double y = 2.0 * x;
  const double damp = std::sqrt(2.0) * std::exp(-x);
  double lkm1 = 1.0, lk = 1.0 - y;
  out[0] = damp;
  if (max_degree_ == 1) return;
  out[1] = damp * lk;
  for (int k = 1; k + 1 < max_degree_; ++k) {
    const double lkp1 = ((2.0 * k + 1.0 - y) * lk - k * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
    out[k + 1] = damp * lk;
  }
}

namespace {

// db4 scaling filter, sum = sqrt(2)
constexpr std::array<double, 8> kDb4 = {
    0.23037781330885523,  0.7148465705525415,   0.6308807679295904,
    -0.027983769416983849, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278};

}  // namespace

WaveletBasis2D::WaveletBasis2D(int k_bound, int table_depth) : k_bound_(k_bound) {
  if (table_depth < 4 || table_depth > 16)
    throw std::invalid_argument("WaveletBasis2D: table depth out of range");
  const double sqrt2 = std::sqrt(2.0);

  // values at integers: eigenvector of the refinement matrix for eigenvalue 1
  std::array<double, 8> vi{};  // phi(0..7); endpoints stay 0
  for (int m = 1; m <= 6; ++m) vi[m] = 1.0;
  for (int it = 0; it < 512; ++it) {
    std::array<double, 8> next{};
    for (int m = 1; m <= 6; ++m) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) {
        const int idx = 2 * m - k;
        if (idx >= 0 && idx <= 7) s += kDb4[k] * vi[idx];
      }
      next[m] = sqrt2 * s;
    }
    double total = 0.0;
    for (int m = 0; m <= 7; ++m) total += next[m];
    for (int m = 0; m <= 7; ++m) vi[m] = next[m] / total;
  }

  // cascade: refine to dyadic resolution 2^-table_depth
  std::vector<double> coarse(8);
  for (int m = 0; m <= 7; ++m) coarse[m] = vi[m];
  int level = 0;
  while (level < table_depth) {
    const long long stride = 1LL << level;          // points per unit interval
    const long long fine_n = 7 * (stride * 2) + 1;
    std::vector<double> fine(fine_n, 0.0);
    for (long long jj = 0; jj < fine_n; ++jj) {
      // phi(j/2^{l+1}) = sqrt2 sum_k h_k phi(j/2^l - k); coarse index j - k*2^l
      double s = 0.0;
      for (int k = 0; k < 8; ++k) {
        const long long ci = jj - static_cast<long long>(k) * stride;
        if (ci >= 0 && ci < static_cast<long long>(coarse.size())) s += kDb4[k] * coarse[ci];
      }
      fine[jj] = sqrt2 * s;
    }
    coarse.swap(fine);
    ++level;
  }
  table_ = std::move(coarse);
  step_ = 1.0 / static_cast<double>(1LL << table_depth);
}

double WaveletBasis2D::phi(double t) const {
  if (t <= 0.0 || t >= 7.0) return 0.0;
  const double pos = t / step_;
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= table_.size()) return 0.0;
  const double w = pos - i;
  return table_[i] * (1.0 - w) + table_[i + 1] * w;
}

double WaveletBasis2D::tensor_scaling_eval(int J, int k1, int k2, double a, double x) const {
  const double scale = std::ldexp(1.0, J);  // 2^J
  return scale * phi(scale * a - k1) * phi(scale * x - k2);
}

void WaveletBasis2D::active_ks(double t, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const int lo = std::max(static_cast<int>(std::ceil(t - 7.0)), -k_bound_);
  const int hi = std::min(static_cast<int>(std::floor(t)), k_bound_);
  for (int k = lo; k <= hi; ++k) {
    const double v = phi(t - k);
    if (v != 0.0) out.emplace_back(k, v);
  }
}

void WaveletBasis2D::features(int J, double a, double x,
                              std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const double scale = std::ldexp(1.0, J);
  thread_local std::vector<std::pair<int, double>> ka, kx;
  active_ks(scale * a, ka);
  active_ks(scale * x, kx);
  const int width = 2 * k_bound_ + 1;
  for (const auto& [k1, va] : ka)
    for (const auto& [k2, vx] : kx)
      out.emplace_back((k1 + k_bound_) * width + (k2 + k_bound_), scale * va * vx);
}

}  // namespace cellpop
