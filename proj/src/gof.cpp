#include "cellpop/gof.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cellpop/parallel.hpp"
#include "cellpop/stationary.hpp"

namespace cellpop {

NullModel NullModel::mitosis_constant(double R, double x_max, int n_x) {
  NullModel m;
  m.dim_ = 1;
  m.explicit_n0_ = true;
  m.R_ = R;
  m.grid1_ = tabulate_N0(R, x_max, n_x);
  m.grid1_.normalize();  // table mass 1 for the rejection sampler
  m.l2sq_ = n0_l2_norm_sq(R);
  m.name_ = "mitosis-constant R=" + std::to_string(R);
  return m;
}

NullModel NullModel::from_grid(DensityGrid1D d, std::string name) {
  NullModel m;
  m.dim_ = 1;
  m.grid1_ = std::move(d);
  m.grid1_.normalize();
  m.l2sq_ = cellpop::l2_norm_sq(m.grid1_);
  m.name_ = std::move(name);
  return m;
}

NullModel NullModel::from_grid(DensityGrid2D d, std::string name) {
  NullModel m;
  m.dim_ = 2;
  m.grid2_ = std::move(d);
  m.grid2_.normalize();
  m.l2sq_ = cellpop::l2_norm_sq(m.grid2_);
  m.name_ = std::move(name);
  return m;
}

NullModel NullModel::degenerate_zero(int dim) {
  NullModel m;
  m.dim_ = dim;
  m.zero_ = true;
  m.l2sq_ = 0.0;
  m.name_ = "zero";
  return m;
}

double NullModel::eval(double x) const {
  if (dim_ != 1) throw std::invalid_argument("NullModel::eval: 1-D evaluator on a 2-D null");
  if (zero_) return 0.0;
  if (explicit_n0_) return x >= 0.0 ? eval_N0(x, R_) : 0.0;
  return grid1_.value_at(x);
}

double NullModel::eval(double a, double x) const {
  if (dim_ != 2) throw std::invalid_argument("NullModel::eval: 2-D evaluator on a 1-D null");
  if (zero_) return 0.0;
  return grid2_.value_at(a, x);
}

Sample1D NullModel::sample(int n, std::uint64_t seed, std::uint64_t stream) const {
  if (dim_ != 1 || zero_) throw std::invalid_argument("NullModel::sample: not a tabulated 1-D null");
  Sample1D s = rejection_sample(grid1_, n, seed, stream);
  s.source = name_;
  return s;
}

Sample2D NullModel::sample2(int n, std::uint64_t seed, std::uint64_t stream) const {
  if (dim_ != 2 || zero_) throw std::invalid_argument("NullModel::sample2: not a tabulated 2-D null");
  Sample2D s = rejection_sample(grid2_, n, seed, stream);
  s.source = name_;
  return s;
}

TestBasis TestBasis::laguerre(int d_min, int d_max) {
  if (d_min < 1 || d_max > 31 || d_min > d_max)
    throw std::invalid_argument("TestBasis::laguerre: bad degree range");
  TestBasis b;
  b.two_d_ = false;
  for (int d = d_min; d <= d_max; ++d) b.res_.push_back(d);
  return b;
}

TestBasis TestBasis::daubechies(int j_min, int j_max, int k_bound) {
  if (j_min > j_max) throw std::invalid_argument("TestBasis::daubechies: bad level range");
  TestBasis b;
  b.two_d_ = true;
  for (int j = j_min; j <= j_max; ++j) b.res_.push_back(j);
  b.wav_ = std::make_shared<WaveletBasis2D>(k_bound);
  return b;
}

std::vector<double> TestBasis::u_stat_all(const Sample1D& s) const {
  if (two_d_) throw std::invalid_argument("u_stat: 1-D sample with a 2-D basis");
  const int n = static_cast<int>(s.points.size());
  if (n < 2) throw std::invalid_argument("u_stat: need n >= 2");
  const int dmax = res_.back();
  LaguerreBasis lb(dmax);
  std::vector<double> v(dmax, 0.0), w(dmax, 0.0), feat(dmax);
  for (double x : s.points) {
    lb.features(x, feat.data());
    for (int j = 0; j < dmax; ++j) {
      v[j] += feat[j];
      w[j] += feat[j] * feat[j];
    }
  }
  std::vector<double> out(res_.size());
  const double denom = static_cast<double>(n) * (n - 1);
  double acc = 0.0;
  int j = 0;
  for (std::size_t k = 0; k < res_.size(); ++k) {
    for (; j < res_[k]; ++j) acc += v[j] * v[j] - w[j];
    out[k] = acc / denom;
  }
  return out;
}

std::vector<double> TestBasis::u_stat_all(const Sample2D& s) const {
  if (!two_d_) throw std::invalid_argument("u_stat: 2-D sample with a 1-D basis");
  const int n = static_cast<int>(s.points.size());
  if (n < 2) throw std::invalid_argument("u_stat: need n >= 2");
  std::vector<double> out(res_.size(), 0.0);
  const double denom = static_cast<double>(n) * (n - 1);
  std::vector<double> v(wav_->dim());
  std::vector<std::pair<int, double>> feats;
  for (std::size_t k = 0; k < res_.size(); ++k) {
    std::fill(v.begin(), v.end(), 0.0);
    double w = 0.0;
    for (const auto& p : s.points) {
      wav_->features(res_[k], p[0], p[1], feats);
      for (const auto& [idx, val] : feats) {
        v[idx] += val;
        w += val * val;
      }
    }
    double vnorm = 0.0;
    for (double x : v) vnorm += x * x;
    out[k] = (vnorm - w) / denom;
  }
  return out;
}

namespace {

template <class S>
int resolution_index(const TestBasis& basis, int D) {
  const auto& res = basis.resolutions();
  const auto it = std::find(res.begin(), res.end(), D);
  if (it == res.end()) throw std::invalid_argument("resolution outside the basis family");
  return static_cast<int>(it - res.begin());
}

}  // namespace

double u_stat(const Sample1D& s, const TestBasis& basis, int D) {
  return basis.u_stat_all(s)[resolution_index<Sample1D>(basis, D)];
}

double u_stat(const Sample2D& s, const TestBasis& basis, int J) {
  return basis.u_stat_all(s)[resolution_index<Sample2D>(basis, J)];
}

namespace {

template <class S>
double cross_term(const S& s, const NullModel& null);

template <>
double cross_term(const Sample1D& s, const NullModel& null) {
  double acc = 0.0;
  for (double x : s.points) acc += null.eval(x);
  return 2.0 * acc / s.points.size();
}

template <>
double cross_term(const Sample2D& s, const NullModel& null) {
  double acc = 0.0;
  for (const auto& p : s.points) acc += null.eval(p[0], p[1]);
  return 2.0 * acc / s.points.size();
}

template <class S>
std::vector<double> t_stat_all_impl(const S& s, const NullModel& null, const TestBasis& basis) {
  std::vector<double> t = basis.u_stat_all(s);
  const double shift = null.l2_norm_sq() - cross_term(s, null);
  for (double& v : t) v += shift;
  return t;
}

}  // namespace

std::vector<double> t_stat_all(const Sample1D& s, const NullModel& null, const TestBasis& basis) {
  if (null.dim() != 1) throw std::invalid_argument("t_stat: null/sample dimension mismatch");
  return t_stat_all_impl(s, null, basis);
}

std::vector<double> t_stat_all(const Sample2D& s, const NullModel& null, const TestBasis& basis) {
  if (null.dim() != 2) throw std::invalid_argument("t_stat: null/sample dimension mismatch");
  return t_stat_all_impl(s, null, basis);
}

double t_stat(const Sample1D& s, const NullModel& null, const TestBasis& basis, int D) {
  return t_stat_all(s, null, basis)[resolution_index<Sample1D>(basis, D)];
}

double t_stat(const Sample2D& s, const NullModel& null, const TestBasis& basis, int J) {
  return t_stat_all(s, null, basis)[resolution_index<Sample2D>(basis, J)];
}

namespace {

// Order statistic at 1-based index ceil((1-u)*B) of the ascending sorted
// values ("higher" interpolation, level-respecting).
double empirical_quantile(const std::vector<double>& sorted_asc, double u) {
  const int B = static_cast<int>(sorted_asc.size());
  int idx = static_cast<int>(std::ceil((1.0 - u) * B));
  idx = std::clamp(idx, 1, B);
  return sorted_asc[idx - 1];
}

}  // namespace

Calibration calibrate(const NullModel& null, int n, double alpha, const TestBasis& basis, int B,
                      std::uint64_t seed) {
  if (B < 2) throw std::invalid_argument("calibrate: B must be >= 2");
  if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("calibrate: alpha outside (0,1]");
  if ((basis.is_2d() && null.dim() != 2) || (!basis.is_2d() && null.dim() != 1))
    throw std::invalid_argument("calibrate: basis/null dimension mismatch");

  const int K = static_cast<int>(basis.resolutions().size());
  std::vector<double> T(static_cast<std::size_t>(B) * K);
  par::parallel_for_dynamic(B, [&](long long b) {
    std::vector<double> t;
    if (basis.is_2d()) {
      t = t_stat_all(null.sample2(n, seed, static_cast<std::uint64_t>(b)), null, basis);
    } else {
      t = t_stat_all(null.sample(n, seed, static_cast<std::uint64_t>(b)), null, basis);
    }
    std::copy(t.begin(), t.end(), T.begin() + b * K);
  });

  std::vector<std::vector<double>> sorted(K, std::vector<double>(B));
  for (int k = 0; k < K; ++k) {
    for (int b = 0; b < B; ++b) sorted[k][b] = T[static_cast<std::size_t>(b) * K + k];
    std::sort(sorted[k].begin(), sorted[k].end());
  }

  const auto level_at = [&](double u) {
    std::vector<double> q(K);
    for (int k = 0; k < K; ++k) q[k] = empirical_quantile(sorted[k], u);
    int rejections = 0;
    for (int b = 0; b < B; ++b) {
      const double* row = T.data() + static_cast<std::size_t>(b) * K;
      for (int k = 0; k < K; ++k) {
        if (row[k] - q[k] > 0.0) {
          ++rejections;
          break;
        }
      }
    }
    return static_cast<double>(rejections) / B;
  };

  // u grid m/B up to twice the constraint boundary; quantiles only move at
  // rank boundaries so nothing finer exists.
  const int m_hi = std::min(2 * static_cast<int>(std::ceil(alpha * B)), B - 1);
  double u_alpha = 0.0, level = 0.0;
  for (int m = m_hi; m >= 1; --m) {
    const double u = static_cast<double>(m) / B;
    const double l = level_at(u);
    if (l <= alpha) {
      u_alpha = u;
      level = l;
      break;
    }
  }
  if (u_alpha == 0.0) {
    u_alpha = 0.5 / B;  // below the smallest rank: thresholds at the maximum
    level = level_at(u_alpha);
  }

  Calibration cal;
  cal.alpha = alpha;
  cal.resolutions = basis.resolutions();
  cal.u_alpha = u_alpha;
  cal.quantiles.resize(K);
  for (int k = 0; k < K; ++k) cal.quantiles[k] = empirical_quantile(sorted[k], u_alpha);
  cal.B = B;
  cal.n = n;
  cal.seed = seed;
  cal.null_name = null.name();
  cal.two_d = basis.is_2d();
  cal.warning_small_B = alpha * B < 5.0;
  cal.empirical_level = level;
  return cal;
}

namespace {

template <class S>
TestReport run_test_impl(const S& s, const Calibration& cal, const NullModel& null,
                         const TestBasis& basis) {
  if (cal.resolutions != basis.resolutions())
    throw std::invalid_argument("run_test: calibration resolutions do not match the basis");
  if (cal.null_name != null.name())
    throw std::invalid_argument("run_test: calibration was built for null '" + cal.null_name +
                                "', got '" + null.name() + "'");
  TestReport rep;
  rep.resolutions = cal.resolutions;
  rep.t_hats = t_stat_all(s, null, basis);
  rep.T_alpha = rep.t_hats[0] - cal.quantiles[0];
  for (std::size_t k = 1; k < rep.t_hats.size(); ++k)
    rep.T_alpha = std::max(rep.T_alpha, rep.t_hats[k] - cal.quantiles[k]);
  rep.decision = rep.T_alpha > 0.0 ? 1 : 0;
  rep.n = static_cast<int>(s.points.size());
  rep.u_alpha = cal.u_alpha;
  rep.sample_seed = s.seed;
  rep.sample_stream = s.stream;
  rep.null_name = cal.null_name;
  rep.calibration_note = "quantiles and level constraint share one replication set";
  return rep;
}

}  // namespace

TestReport run_test(const Sample1D& s, const Calibration& cal, const NullModel& null,
                    const TestBasis& basis) {
  if (cal.two_d) throw std::invalid_argument("run_test: 1-D sample with a 2-D calibration");
  return run_test_impl(s, cal, null, basis);
}

TestReport run_test(const Sample2D& s, const Calibration& cal, const NullModel& null,
                    const TestBasis& basis) {
  if (!cal.two_d) throw std::invalid_argument("run_test: 2-D sample with a 1-D calibration");
  return run_test_impl(s, cal, null, basis);
}

namespace {

constexpr std::uint64_t kPowerStreamBase = 1ULL << 32;

template <class Grid, class SampleFn>
PowerResult power_study_impl(const Grid& alt, const NullModel& null, const Calibration& cal,
                             const TestBasis& basis, int n, int reps, std::uint64_t seed,
                             SampleFn draw) {
  if (reps < 1) throw std::invalid_argument("power_study: reps must be >= 1");
  std::vector<int> reject(reps, 0);
  par::parallel_for_dynamic(reps, [&](long long k) {
    auto s = draw(alt, n, seed, kPowerStreamBase + static_cast<std::uint64_t>(k));
    const auto rep = run_test_impl(s, cal, null, basis);
    reject[k] = rep.decision;
  });
  PowerResult r;
  r.reps = reps;
  for (int v : reject) r.rejections += v;
  r.proportion = static_cast<double>(r.rejections) / reps;
  r.std_error = std::sqrt(r.proportion * (1.0 - r.proportion) / reps);
  return r;
}

}  // namespace

PowerResult power_study(const DensityGrid1D& alt, const NullModel& null, const Calibration& cal,
                        const TestBasis& basis, int n, int reps, std::uint64_t seed) {
  return power_study_impl(alt, null, cal, basis, n, reps, seed,
                          [](const DensityGrid1D& g, int nn, std::uint64_t sd, std::uint64_t st) {
                            return rejection_sample(g, nn, sd, st);
                          });
}

PowerResult power_study(const DensityGrid2D& alt, const NullModel& null, const Calibration& cal,
                        const TestBasis& basis, int n, int reps, std::uint64_t seed) {
  return power_study_impl(alt, null, cal, basis, n, reps, seed,
                          [](const DensityGrid2D& g, int nn, std::uint64_t sd, std::uint64_t st) {
                            return rejection_sample(g, nn, sd, st);
                          });
}

PowerResult power_study(const DensityGrid1D& alt, const NullModel& null, int n, double alpha,
                        int reps, std::uint64_t seed, const TestBasis& basis, int B) {
  const Calibration cal = calibrate(null, n, alpha, basis, B, seed);
  return power_study(alt, null, cal, basis, n, reps, seed);
}

PowerResult power_study(const DensityGrid2D& alt, const NullModel& null, int n, double alpha,
                        int reps, std::uint64_t seed, const TestBasis& basis, int B) {
  const Calibration cal = calibrate(null, n, alpha, basis, B, seed);
  return power_study(alt, null, cal, basis, n, reps, seed);
}

void save_calibration_json(const std::string& path, const Calibration& cal) {
  nlohmann::json j;
  j["alpha"] = cal.alpha;
  j["resolutions"] = cal.resolutions;
  j["u_alpha"] = cal.u_alpha;
  j["quantiles"] = cal.quantiles;
  j["B"] = cal.B;
  j["n"] = cal.n;
  j["seed"] = cal.seed;
  j["null"] = cal.null_name;
  j["two_d"] = cal.two_d;
  j["warning_small_B"] = cal.warning_small_B;
  j["empirical_level"] = cal.empirical_level;
  j["note"] = "quantiles and level constraint share one replication set";
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write calibration json");
  out << j.dump(2) << '\n';
}

Calibration load_calibration_json(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read calibration json");
  nlohmann::json j;
  in >> j;
  Calibration cal;
  cal.alpha = j.at("alpha");
  cal.resolutions = j.at("resolutions").get<std::vector<int>>();
  cal.u_alpha = j.at("u_alpha");
  cal.quantiles = j.at("quantiles").get<std::vector<double>>();
  cal.B = j.at("B");
  cal.n = j.at("n");
  cal.seed = j.at("seed");
  cal.null_name = j.at("null");
  cal.two_d = j.at("two_d");
  cal.warning_small_B = j.at("warning_small_B");
  cal.empirical_level = j.at("empirical_level");
  return cal;
}

void save_report_json(const std::string& path, const TestReport& report) {
  nlohmann::json j;
  j["resolutions"] = report.resolutions;
  j["t_hats"] = report.t_hats;
  j["T_alpha"] = report.T_alpha;
  j["decision"] = report.decision;
  j["n"] = report.n;
  j["u_alpha"] = report.u_alpha;
  j["sample_seed"] = report.sample_seed;
  j["sample_stream"] = report.sample_stream;
  j["null"] = report.null_name;
  j["calibration_note"] = report.calibration_note;
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write report json");
  out << j.dump(2) << '\n';
}

}  // namespace cellpop
