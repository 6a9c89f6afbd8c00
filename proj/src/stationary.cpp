#include "cellpop/stationary.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cellpop/parallel.hpp"

namespace cellpop {

AlphaSeries alpha_coefficients(int K) {
  if (K < 0) throw std::invalid_argument("alpha_coefficients: K must be >= 0");
  AlphaSeries s;
  s.truncation = K;
  s.coefficients.resize(K + 1);
  s.coefficients[0] = 1.0;
  for (int n = 1; n <= K; ++n)
    s.coefficients[n] = s.coefficients[n - 1] * 2.0 / (std::pow(2.0, n) - 1.0);
  return s;
}

double n0_series_s1(int K) {
  const AlphaSeries a = alpha_coefficients(K);
  double s = 0.0, sign = 1.0;
  for (int n = 0; n <= K; ++n, sign = -sign)
    s += sign * a.coefficients[n] * std::pow(2.0, -(n + 1));
  return s;
}

double n0_series_s2(int K) {
  const AlphaSeries a = alpha_coefficients(K);
  double s = 0.0, sign = 1.0;
  for (int n = 0; n <= K; ++n, sign = -sign)
    s += sign * a.coefficients[n] * std::pow(2.0, -(2 * n + 2));
  return s;
}

double normalize_N0(double R, int K) {
  if (R <= 0.0) throw std::invalid_argument("normalize_N0: R must be positive");
  return R / n0_series_s1(K);
}

double eval_N0(double x, double R, int K) {
  if (x < 0.0) throw std::domain_error("eval_N0: x must be nonnegative");
  if (R <= 0.0) throw std::invalid_argument("eval_N0: R must be positive");
  const AlphaSeries a = alpha_coefficients(K);
  double s = 0.0, sign = 1.0;
  for (int n = 0; n <= K; ++n, sign = -sign) {
    const double e = std::exp(-std::pow(2.0, n + 1) * R * x);
    s += sign * a.coefficients[n] * e;
    if (a.coefficients[n] * e < 1e-18 && n > 2) break;
  }
  return normalize_N0(R, K) * s;
}

double n0_mean(double R, int K) { return n0_series_s2(K) / (n0_series_s1(K) * R); }

double n0_l2_norm_sq(double R, int K) {
  const AlphaSeries a = alpha_coefficients(K);
  const double nbar = normalize_N0(R, K);
  double s = 0.0;
  for (int m = 0; m <= K; ++m) {
    if (a.coefficients[m] < 1e-20) break;
    for (int n = 0; n <= K; ++n) {
      if (a.coefficients[n] < 1e-20) break;
      const double sign = ((m + n) % 2 == 0) ? 1.0 : -1.0;
      s += sign * a.coefficients[m] * a.coefficients[n] /
           ((std::pow(2.0, m + 1) + std::pow(2.0, n + 1)) * R);
    }
  }
  return nbar * nbar * s;
}

DensityGrid1D tabulate_N0(double R, double x_max, int n_x, int K) {
  const N0Evaluator n0(R, K);
  DensityGrid1D d(x_max, n_x);
  for (int i = 0; i < n_x; ++i) d.values[i] = n0(d.x(i));
  return d;
}

N0Evaluator::N0Evaluator(double R, int K) : R_(R) {
  if (R <= 0.0) throw std::invalid_argument("N0Evaluator: R must be positive");
  alphas_ = alpha_coefficients(K).coefficients;
  nbar_ = normalize_N0(R, K);
}

double N0Evaluator::operator()(double x) const {
  if (x < 0.0) throw std::domain_error("N0Evaluator: x must be nonnegative");
  double s = 0.0, sign = 1.0;
  for (std::size_t n = 0; n < alphas_.size(); ++n, sign = -sign) {
    const double e = std::exp(-std::pow(2.0, static_cast<double>(n + 1)) * R_ * x);
    s += sign * alphas_[n] * e;
    if (alphas_[n] * e < 1e-18 && n > 2) break;
  }
  return nbar_ * s;
}

double lifetime_density(double a, double eta) {
  if (a <= 0.0) return 0.0;
  return std::pow(a, eta) * std::exp(-std::pow(a, eta + 1.0) / (eta + 1.0));
}

double lifetime_survival(double a, double eta) {
  if (a <= 0.0) return 1.0;
  return std::exp(-std::pow(a, eta + 1.0) / (eta + 1.0));
}

double lifetime_a_max(double eta, double tail) {
  return std::pow(-(eta + 1.0) * std::log(tail), 1.0 / (eta + 1.0));
}

double suggest_birth_s_max(double eta, const KernelSpec& kernel) {
  const double a_cut = lifetime_a_max(eta);
  // Under the Dirac kernel division sizes stay below 2*a_cut, so births stay
  // below a_cut; spreading kernels can place a birth near the mother's size.
  return kernel.is_dirac() ? 2.0 * a_cut : 3.0 * a_cut;
}

namespace {

struct OperatorGrids {
  int n_s = 0, n_u = 0;
  double ds = 0.0;
  std::vector<double> phi_u;  // Phi sampled on the u-grid
};

OperatorGrids make_grids(double s_max, int n_s, double eta) {
  OperatorGrids g;
  g.n_s = n_s;
  g.ds = s_max / n_s;
  const double u_max = s_max + lifetime_a_max(eta);
  g.n_u = static_cast<int>(std::ceil(u_max / g.ds)) + 1;
  g.phi_u.resize(g.n_u);
  for (int k = 0; k < g.n_u; ++k) g.phi_u[k] = lifetime_density(k * g.ds, eta);
  return g;
}

double trapz(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  double s = par::sum_serial(v.data(), v.size()) - 0.5 * (v.front() + v.back());
  return s * h;
}

// Inner integral E(u_k) = int_0^{u_k} q(alpha) Phi(u_k - alpha) d alpha for a
// weighted input q; trapezoid in alpha, restricted to the s-grid support.
void convolve_with_phi(const OperatorGrids& g, const std::vector<double>& q,
                       std::vector<double>& out) {
  out.assign(g.n_u, 0.0);
  par::parallel_for(g.n_u, [&](long long k) {
    const int jmax = std::min<int>(static_cast<int>(k), g.n_s - 1);
    double s = 0.0;
    for (int j = 0; j <= jmax; ++j) {
      const double w = (j == 0 || j == jmax) ? 0.5 : 1.0;
      s += w * q[j] * g.phi_u[k - j];
    }
    out[k] = s * g.ds;
  });
}

// Applies the theta-average 2 * int C(s/theta) w(theta) dtheta on the s-grid,
// where w is h(theta) (gamma = 1) or h(theta)/theta (general gamma). C is
// linearly interpolated on the u-grid and zero beyond it.
void theta_average(const OperatorGrids& g, const std::vector<double>& C,
                   const KernelSpec& kernel, bool over_theta, int theta_nodes,
                   std::vector<double>& out) {
  out.assign(g.n_s, 0.0);
  auto C_at = [&](double u) -> double {
    const double t = u / g.ds;
    const int k = static_cast<int>(t);
    if (k < 0 || k >= g.n_u - 1) return 0.0;
    const double w = t - k;
    return C[k] * (1.0 - w) + C[k + 1] * w;
  };
  if (kernel.is_dirac()) {
    const double factor = over_theta ? 4.0 : 2.0;  // kappa/theta doubles at 1/2
    par::parallel_for(g.n_s, [&](long long i) { out[i] = factor * C_at(2.0 * i * g.ds); });
    return;
  }
  const int m = theta_nodes;
  const double dtheta = 1.0 / m;
  std::vector<double> wtheta(m + 1, 0.0);
  for (int t = 1; t <= m; ++t) {
    const double theta = t * dtheta;
    double w = kernel.density(theta);
    if (over_theta) w /= theta;
    wtheta[t] = w * ((t == m) ? 0.5 : 1.0) * dtheta;
  }
  // theta = 0 contributes nothing: C vanishes past the u-grid.
  par::parallel_for(g.n_s, [&](long long i) {
    const double s = i * g.ds;
    double acc = 0.0;
    for (int t = 1; t <= m; ++t) acc += wtheta[t] * C_at(s / (t * dtheta));
    out[i] = 2.0 * acc;
  });
}

void normalize_trapz(std::vector<double>& v, double h) {
  const double m = trapz(v, h);
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::runtime_error("birth fixed point: iterate lost positivity");
  for (double& x : v) x /= m;
}

double l1_diff(const std::vector<double>& a, const std::vector<double>& b, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return s * h;
}

}  // namespace

BirthSizeDensity birth_fixed_point_gamma1(double eta, const KernelSpec& kernel,
                                          double s_max, int n_s, const FixedPointOptions& opt) {
  if (eta <= 0.0) throw std::invalid_argument("birth_fixed_point_gamma1: eta must be positive");
  const OperatorGrids g = make_grids(s_max, n_s, eta);

  std::vector<double> f(g.n_s, 0.0), Tf, C;
  for (int i = 0; i < g.n_s; ++i) {
    const double s = i * g.ds;  // any smooth positive start works
    f[i] = s * std::exp(-s);
  }
  normalize_trapz(f, g.ds);

  double residual = 0.0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    convolve_with_phi(g, f, C);
    theta_average(g, C, kernel, /*over_theta=*/false, opt.theta_nodes, Tf);
    // the operator preserves mass, the quadrature only approximately so:
    // renormalize before mixing and measuring
    normalize_trapz(Tf, g.ds);
    residual = l1_diff(f, Tf, g.ds);
    for (int i = 0; i < g.n_s; ++i)
      f[i] = (1.0 - opt.damping) * f[i] + opt.damping * Tf[i];
    if (residual < opt.tol) break;
  }
  if (residual >= opt.tol)
    throw std::runtime_error("birth_fixed_point_gamma1: no convergence, residual " +
                             std::to_string(residual));

  BirthSizeDensity out;
  out.s_max = s_max;
  out.n_s = n_s;
  out.values = std::move(f);
  out.gamma = 1.0;
  out.eta = eta;
  out.lambda = 1.0;
  out.residual = residual;
  out.iterations = it + 1;
  return out;
}

namespace {

// One inner power iteration stage for the general-gamma operator at fixed
// lambda. K(u, alpha) = exp(lambda * (rho(alpha) - rho(u))) with
// rho(u) = u^{1-gamma}/(1-gamma); the exponent is <= 0 for alpha < u.
struct GeneralOperator {
  const OperatorGrids* g;
  double gamma, eta, lambda;
  std::vector<double> rho_u;      // rho on the u-grid (index 0 unused)

  void prepare() {
    rho_u.resize(g->n_u);
    for (int k = 1; k < g->n_u; ++k)
      rho_u[k] = std::pow(k * g->ds, 1.0 - gamma) / (1.0 - gamma);
    rho_u[0] = 0.0;
  }

  void apply(const std::vector<double>& G, const KernelSpec& kernel, int theta_nodes,
             std::vector<double>& out, std::vector<double>& E) const {
    E.assign(g->n_u, 0.0);
    par::parallel_for(g->n_u, [&](long long k) {
      if (k == 0) return;
      const int jmax = std::min<int>(static_cast<int>(k), g->n_s - 1);
      double s = 0.0;
      for (int j = 1; j <= jmax; ++j) {  // alpha = 0 has zero weight: exponent -> -inf
        const double w = (j == jmax) ? 0.5 : 1.0;
        s += w * G[j] * std::exp(lambda * (rho_u[j] - rho_u[k])) * g->phi_u[k - j];
      }
      E[k] = s * g->ds;
    });
    theta_average(*g, E, kernel, /*over_theta=*/true, theta_nodes, out);
  }
};

}  // namespace

BirthSizeDensity birth_fixed_point_general(double gamma, double eta, const KernelSpec& kernel,
                                           double s_max, int n_s, const FixedPointOptions& opt) {
  if (gamma == 1.0)
    throw std::invalid_argument("birth_fixed_point_general: use the gamma=1 overload");
  if (eta <= 0.0) throw std::invalid_argument("birth_fixed_point_general: eta must be positive");
  const OperatorGrids g = make_grids(s_max, n_s, eta);

  GeneralOperator op{&g, gamma, eta, /*lambda=*/1.0, {}};

  std::vector<double> G(g.n_s, 0.0), SG, E, prev;
  for (int i = 0; i < g.n_s; ++i) {
    const double s = i * g.ds;
    G[i] = s * std::exp(-s);
  }
  normalize_trapz(G, g.ds);

  double residual = 0.0, rho = 1.0;
  int total_it = 0;
  for (int outer = 0; outer < opt.max_lambda_iterations; ++outer) {
    op.prepare();
    // inner: normalized power iteration for the dominant eigenpair at this lambda
    for (int it = 0; it < opt.max_iterations; ++it) {
      ++total_it;
      op.apply(G, kernel, opt.theta_nodes, SG, E);
      rho = trapz(SG, g.ds);
      if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::runtime_error("birth_fixed_point_general: degenerate operator norm");
      prev = G;
      for (int i = 0; i < g.n_s; ++i)
        G[i] = (1.0 - opt.damping) * G[i] + opt.damping * SG[i] / rho;
      normalize_trapz(G, g.ds);
      if (l1_diff(G, prev, g.ds) < opt.tol) break;
      if (total_it >= opt.max_iterations)
        throw std::runtime_error("birth_fixed_point_general: no inner convergence");
    }
    // Mass balance of the reconstructed eigenprofile pins lambda: the
    // division-rate integral equals lambda * rho / (2 - rho), so rho = 1 at
    // the consistent growth rate.
    if (rho >= 1.95)
      throw std::runtime_error("birth_fixed_point_general: lambda iteration divergence");
    const double lambda_new = op.lambda * rho / (2.0 - rho);
    const double delta = std::fabs(lambda_new - op.lambda);
    op.lambda = lambda_new;
    if (delta < opt.lambda_tol && std::fabs(rho - 1.0) < 10.0 * opt.lambda_tol) break;
    if (outer + 1 == opt.max_lambda_iterations)
      throw std::runtime_error("birth_fixed_point_general: lambda iteration did not settle");
  }

  op.prepare();
  op.apply(G, kernel, opt.theta_nodes, SG, E);
  residual = l1_diff(G, SG, g.ds);
  if (residual >= 1e-4)
    throw std::runtime_error("birth_fixed_point_general: residual too large: " +
                             std::to_string(residual));

  BirthSizeDensity out;
  out.s_max = s_max;
  out.n_s = n_s;
  out.values = std::move(G);
  out.gamma = gamma;
  out.eta = eta;
  out.lambda = op.lambda;
  out.residual = residual;
  out.iterations = total_it;
  return out;
}

DensityGrid1D BirthSizeDensity::birth_density() const {
  DensityGrid1D d(s_max, n_s);
  if (gamma == 1.0) {
    // stored f(s) = s^2 M(0,s); the birth flux is proportional to f(s)/s
    for (int i = 1; i < n_s; ++i) d.values[i] = values[i] / s(i);
    d.values[0] = d.values[1];
  } else {
    d.values = values;  // stored G(s) = s^gamma M(0,s) is already the flux shape
  }
  d.normalize();
  return d;
}

DensityGrid2D reconstruct_N_from_birth(const BirthSizeDensity& bsd, double a_max, double x_max,
                                       int n_a, int n_x) {
  DensityGrid2D out(a_max, x_max, n_a, n_x);
  const double ds = bsd.ds();
  const double one_minus_gamma = 1.0 - bsd.gamma;
  auto birth_at = [&](double s) -> double {
    const double t = s / ds;
    const int i = static_cast<int>(t);
    if (i < 0 || i >= bsd.n_s - 1) return 0.0;
    const double w = t - i;
    return bsd.values[i] * (1.0 - w) + bsd.values[i + 1] * w;
  };
  par::parallel_for(n_a, [&](long long ia) {
    const double a = out.a(static_cast<int>(ia));
    const double surv = lifetime_survival(a, bsd.eta);
    for (int jx = 1; jx < n_x; ++jx) {
      const double x = out.x(jx);
      const double s = x - a;
      if (s <= 0.0) continue;
      double v;
      if (bsd.gamma == 1.0) {
        v = birth_at(s) / (x * x) * surv;  // M(0,s)(s/x)^2 with M(0,s) = f(s)/s^2
      } else {
        const double damp =
            std::exp(bsd.lambda * (std::pow(s, one_minus_gamma) - std::pow(x, one_minus_gamma)) /
                     one_minus_gamma);
        v = birth_at(s) * std::pow(x, -bsd.gamma) * damp * surv;
      }
      out.at(static_cast<int>(ia), jx) = v;
    }
  });
  out.normalize();
  return out;
}

double division_rate_integral(const DensityGrid2D& n, double gamma, double eta) {
  std::vector<double> rows(n.n_a, 0.0);
  for (int i = 0; i < n.n_a; ++i) {
    const double ba = std::pow(n.a(i), eta);
    double s = 0.0;
    for (int j = 0; j < n.n_x; ++j) {
      const double w = (j == 0 || j == n.n_x - 1) ? 0.5 : 1.0;
      s += w * std::pow(n.x(j), gamma) * n.at(i, j);
    }
    rows[i] = ba * s;
  }
  double s = par::sum_deterministic(rows.data(), rows.size()) - 0.5 * (rows.front() + rows.back());
  return s * n.da() * n.dx();
}

}  // namespace cellpop
