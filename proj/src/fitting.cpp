#include "cellpop/fitting.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cellpop/parallel.hpp"
#include "cellpop/pde.hpp"
#include "cellpop/stationary.hpp"

namespace cellpop {

FitResult fit_moments(const DensityGrid1D& data) {
  const double mass = data.mass();
  const double m1 = data.first_moment();
  if (!(m1 > 0.0)) throw std::invalid_argument("fit_moments: first moment must be positive");
  const double s1 = n0_series_s1();
  const double s2 = n0_series_s2();
  FitResult fit;
  fit.method = "moments";
  fit.R_hat = (s2 / s1) * (mass / m1);
  fit.Nbar = fit.R_hat * mass / s1;
  const DensityGrid1D model = tabulate_N0(fit.R_hat, data.x_max, data.n_x);
  fit.objective = l2_dist_sq(model, data);
  return fit;
}

std::vector<double> default_R_grid() {
  std::vector<double> g(2000);
  for (int k = 1; k <= 2000; ++k) g[k - 1] = k / 100.0;
  return g;
}

FitResult fit_least_squares_R(const DensityGrid1D& data, const std::vector<double>& R_grid) {
  if (R_grid.empty()) throw std::invalid_argument("fit_least_squares_R: empty grid");
  std::vector<double> obj(R_grid.size());
  par::parallel_for_dynamic(static_cast<long long>(R_grid.size()), [&](long long k) {
    const N0Evaluator n0(R_grid[k]);
    double acc = 0.0;
    for (int i = 0; i < data.n_x; ++i) {
      const double diff = n0(data.x(i)) - data.values[i];
      acc += diff * diff;
    }
    obj[k] = acc * data.dx();
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < obj.size(); ++k)
    if (obj[k] < obj[best]) best = k;
  FitResult fit;
  fit.method = "least-squares";
  fit.R_hat = R_grid[best];
  fit.Nbar = normalize_N0(fit.R_hat);
  fit.objective = obj[best];
  return fit;
}

ParameterGrids mitosis_parameter_grids() {
  ParameterGrids g;
  g.r = {0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 20.0};
  for (int k = 0; k <= 20; ++k) g.gamma.push_back(0.5 + 0.275 * k);
  for (int k = 0; k <= 20; ++k) g.eta.push_back(0.5 + 0.325 * k);
  for (int k = 1; k <= 6; ++k) g.eta.push_back(7.0 + 0.5 * k);
  return g;
}

ParameterGrids adder_parameter_grids() {
  ParameterGrids g;
  g.r = {0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0};
  for (int k = 0; k <= 10; ++k) g.gamma.push_back(5.0 + 0.5 * k);
  for (int k = 0; k <= 20; ++k) g.eta.push_back(0.1 + 0.245 * k);
  return g;
}

namespace {

std::string cache_key(const char* family, double r, double gamma, double eta, int n_x,
                      double x_solver) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s_r%.10g_g%.10g_e%.10g_n%d_x%.10g.csv", family, r, gamma, eta,
                n_x, x_solver);
  return buf;
}

bool cache_load(const std::string& dir, const std::string& key, DensityGrid1D& out,
                double* lambda = nullptr) {
  if (dir.empty()) return false;
  const auto path = std::filesystem::path(dir) / key;
  if (!std::filesystem::exists(path)) return false;
  out = read_density_csv_1d(path.string());
  if (lambda) {
    const auto lpath = path.string() + ".lambda";
    std::ifstream in(lpath);
    if (in.good()) in >> *lambda;
  }
  return true;
}

void cache_store(const std::string& dir, const std::string& key, const DensityGrid1D& d,
                 double lambda = 0.0) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / key;
  const auto tmp = path.string() + ".tmp";
  write_density_csv(tmp, d);
  std::filesystem::rename(tmp, path);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g\n", lambda);
  std::ofstream out(path.string() + ".lambda");
  out << buf;
}

// Squared L2 distance between a solver profile (its own grid) and the data
// grid, plus the profile's tail mass beyond the data domain where the data
// vanishes.
double objective_on_data(const DensityGrid1D& profile, const DensityGrid1D& data) {
  double acc = 0.0;
  for (int i = 0; i < data.n_x; ++i) {
    const double diff = profile.value_at(data.x(i)) - data.values[i];
    acc += diff * diff;
  }
  double obj = acc * data.dx();
  if (profile.x_max > data.x_max) {
    double tail = 0.0;
    for (int i = 0; i < profile.n_x; ++i)
      if (profile.x(i) > data.x_max) tail += profile.values[i] * profile.values[i];
    obj += tail * profile.dx();
  }
  return obj;
}

// Size by which the cumulative division hazard int B/g reaches `cut`;
// infinite when the hazard integral diverges at the origin.
double mitosis_hazard_size(double r, double gamma, double eta, double cut) {
  const double p = eta - gamma + 1.0;
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(cut * r * p, 1.0 / p);
}

}  // namespace

DensityGrid1D mitosis_null_profile(double r, double gamma, double eta,
                                   const DensityGrid1D& data_grid, const GridSearchOptions& opt,
                                   double* lambda_out) {
  double x_solver = mitosis_hazard_size(r, gamma, eta, opt.hazard_cut);
  if (!std::isfinite(x_solver) || x_solver > 3.0 * data_grid.x_max)
    x_solver = 3.0 * data_grid.x_max;
  x_solver = std::max(x_solver, 10.0 * data_grid.dx());

  DensityGrid1D profile;
  const std::string key = cache_key("mitosis", r, gamma, eta, opt.n_x, x_solver);
  double lambda = 0.0;
  if (!cache_load(opt.cache_dir, key, profile, &lambda)) {
    ModelSpec spec;
    spec.family = ModelFamily::MitosisGeneral;
    spec.r = r;
    spec.gamma = gamma;
    spec.eta = eta;
    spec.R = 1.0;
    spec.kernel = KernelSpec(KernelVariant::DiracHalf);
    SolveOptions sopt;
    sopt.x_max = x_solver;
    sopt.n_x = opt.n_x;
    sopt.eps = opt.eps;
    sopt.max_steps = opt.max_steps;
    const SolveResult1D res = solve_mitosis(spec, sopt);
    profile = res.density;
    lambda = res.lambda;
    cache_store(opt.cache_dir, key, profile, lambda);
  }
  if (lambda_out) *lambda_out = lambda;
  return profile;
}

DensityGrid1D adder_null_marginal(double gamma, double eta, const DensityGrid1D& data_grid,
                                  const GridSearchOptions& opt) {
  const KernelSpec dirac(KernelVariant::DiracHalf);
  const double a_cut = lifetime_a_max(eta);
  const double s_max = suggest_birth_s_max(eta, dirac);
  const double x_rec = s_max + a_cut;

  DensityGrid1D profile;
  const std::string key = cache_key("adder", 1.0, gamma, eta, opt.n_x, x_rec);
  if (!cache_load(opt.cache_dir, key, profile)) {
    const int n_s = opt.n_x;
    BirthSizeDensity bsd =
        gamma == 1.0 ? birth_fixed_point_gamma1(eta, dirac, s_max, n_s)
                     : birth_fixed_point_general(gamma, eta, dirac, s_max, n_s);
    const DensityGrid2D joint =
        reconstruct_N_from_birth(bsd, a_cut, x_rec, std::max(200, opt.n_x / 2), opt.n_x);
    profile = marginal_x(joint);
    profile.normalize();
    cache_store(opt.cache_dir, key, profile);
  }
  (void)data_grid;
  return profile;
}

void write_objective_csv(const std::string& path, const ObjectiveTable& table) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write objective csv");
  out << "r,gamma,eta,objective,lambda,status\n";
  char buf[200];
  for (std::size_t i = 0; i < table.r.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,", table.r[i], table.gamma[i],
                  table.eta[i], table.objective[i], table.lambda[i]);
    out << buf << table.status[i] << '\n';
  }
}

FitResult grid_search_mitosis(const DensityGrid1D& data, const ParameterGrids& grids,
                              const GridSearchOptions& opt, ObjectiveTable* table) {
  const std::size_t total = grids.r.size() * grids.gamma.size() * grids.eta.size();
  if (total == 0) throw std::invalid_argument("grid_search_mitosis: empty grids");
  std::vector<double> objective(total, std::numeric_limits<double>::infinity());
  std::vector<double> lambda(total, 0.0);
  std::vector<std::string> status(total, "ok");

  par::parallel_for_dynamic(static_cast<long long>(total), [&](long long idx) {
    const std::size_t ne = grids.eta.size(), ng = grids.gamma.size();
    const double r = grids.r[idx / (ng * ne)];
    const double gamma = grids.gamma[(idx / ne) % ng];
    const double eta = grids.eta[idx % ne];
    try {
      const DensityGrid1D profile = mitosis_null_profile(r, gamma, eta, data, opt, &lambda[idx]);
      objective[idx] = objective_on_data(profile, data);
    } catch (const std::exception& e) {
      status[idx] = e.what();
    }
  });

  std::size_t best = total;
  for (std::size_t i = 0; i < total; ++i)
    if (status[i] == "ok" && (best == total || objective[i] < objective[best])) best = i;
  if (best == total) throw std::runtime_error("grid_search_mitosis: every triple failed");

  FitResult fit;
  fit.method = "grid-mitosis";
  const std::size_t ne = grids.eta.size(), ng = grids.gamma.size();
  fit.r = grids.r[best / (ng * ne)];
  fit.gamma = grids.gamma[(best / ne) % ng];
  fit.eta = grids.eta[best % ne];
  fit.objective = objective[best];
  fit.lambda = lambda[best];
  for (std::size_t i = 0; i < total; ++i)
    if (status[i] != "ok")
      fit.failures.push_back("triple " + std::to_string(i) + ": " + status[i]);
  if (table) {
    for (std::size_t i = 0; i < total; ++i) {
      table->r.push_back(grids.r[i / (ng * ne)]);
      table->gamma.push_back(grids.gamma[(i / ne) % ng]);
      table->eta.push_back(grids.eta[i % ne]);
      table->objective.push_back(objective[i]);
      table->lambda.push_back(lambda[i]);
      table->status.push_back(status[i]);
    }
  }
  return fit;
}

FitResult grid_search_adder(const DensityGrid1D& data, const ParameterGrids& grids,
                            const GridSearchOptions& opt, ObjectiveTable* table) {
  const std::size_t pairs = grids.gamma.size() * grids.eta.size();
  if (pairs == 0 || grids.r.empty())
    throw std::invalid_argument("grid_search_adder: empty grids");
  std::vector<double> pair_objective(pairs, std::numeric_limits<double>::infinity());
  std::vector<std::string> pair_status(pairs, "ok");

  par::parallel_for_dynamic(static_cast<long long>(pairs), [&](long long idx) {
    const std::size_t ne = grids.eta.size();
    const double gamma = grids.gamma[idx / ne];
    const double eta = grids.eta[idx % ne];
    try {
      const DensityGrid1D profile = adder_null_marginal(gamma, eta, data, opt);
      pair_objective[idx] = objective_on_data(profile, data);
    } catch (const std::exception& e) {
      pair_status[idx] = e.what();
    }
  });

  // expand over r (the profile is r-invariant); first index wins exact ties
  const std::size_t ne = grids.eta.size();
  std::size_t best_pair = pairs;
  for (std::size_t i = 0; i < pairs; ++i)
    if (pair_status[i] == "ok" &&
        (best_pair == pairs || pair_objective[i] < pair_objective[best_pair]))
      best_pair = i;
  if (best_pair == pairs) throw std::runtime_error("grid_search_adder: every pair failed");

  FitResult fit;
  fit.method = "grid-adder";
  fit.r = grids.r.front();
  fit.gamma = grids.gamma[best_pair / ne];
  fit.eta = grids.eta[best_pair % ne];
  fit.objective = pair_objective[best_pair];
  for (std::size_t i = 0; i < pairs; ++i)
    if (pair_status[i] != "ok")
      fit.failures.push_back("pair " + std::to_string(i) + ": " + pair_status[i]);
  if (table) {
    for (double r : grids.r)
      for (std::size_t i = 0; i < pairs; ++i) {
        table->r.push_back(r);
        table->gamma.push_back(grids.gamma[i / ne]);
        table->eta.push_back(grids.eta[i % ne]);
        table->objective.push_back(pair_objective[i]);
        table->lambda.push_back(0.0);
        table->status.push_back(pair_status[i]);
      }
  }
  return fit;
}

}  // namespace cellpop
