#include "cellpop/workflows.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cellpop/sampling.hpp"
#include "cellpop/stationary.hpp"

namespace cellpop {

const char* const kKernelNames[4] = {"beta22", "uniform", "truncnorm", "mixture"};

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step keeps per-stage streams apart
  std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

StudyResult run_mitosis_study(const MitosisStudyOptions& opt) {
  StudyResult out;
  const NullModel null = NullModel::mitosis_constant(1.0, opt.x_max, 2 * opt.n_x);
  const TestBasis basis = TestBasis::laguerre(3, 20);

  // one stationary profile per continuous kernel, reused across sample sizes
  for (const char* name : kKernelNames) {
    ModelSpec spec;
    spec.family = ModelFamily::MitosisConstant;
    spec.R = 1.0;
    spec.kernel = KernelSpec::from_name(name);
    SolveOptions sopt;
    sopt.x_max = opt.x_max;
    sopt.n_x = opt.n_x;
    sopt.eps = opt.eps;
    out.alternatives_1d.emplace(name, solve_mitosis(spec, sopt).density);
  }

  for (int n : opt.ns) {
    const Calibration cal =
        calibrate(null, n, opt.alpha, basis, opt.calibration_B, mix_seed(opt.seed, n));
    const PowerResult level = power_study(null.grid1(), null, cal, basis, n, opt.reps,
                                          mix_seed(opt.seed, 1000 + n));
    out.rows.push_back({0, n, "level", level.proportion, level.std_error});
    int k = 0;
    for (const char* name : kKernelNames) {
      const PowerResult p = power_study(out.alternatives_1d.at(name), null, cal, basis, n,
                                        opt.reps, mix_seed(opt.seed, 2000 + 10 * n + k));
      out.rows.push_back({0, n, name, p.proportion, p.std_error});
      ++k;
    }
  }
  return out;
}

const std::vector<AdderCase>& adder_cases() {
  static const std::vector<AdderCase> cases = {
      {1, 0.0, 0.0, {100, 200, 500, 1000}}, {2, 0.5, 0.0, {100, 200, 500}},
      {3, 0.5, 2.0, {10, 20, 50}},          {4, 0.0, 2.0, {10, 20, 50}},
      {5, 0.5, 1.0, {10, 20, 50}},          {6, 0.5, 0.5, {10, 20, 50, 100}},
      {7, 1.0, 2.0, {10, 20, 50}},
  };
  return cases;
}

StudyResult run_adder_study(const AdderStudyOptions& opt) {
  StudyResult out;
  const TestBasis basis = TestBasis::daubechies(3, 10);

  for (int case_id : opt.cases) {
    const AdderCase* cs = nullptr;
    for (const auto& c : adder_cases())
      if (c.id == case_id) cs = &c;
    if (!cs) throw std::invalid_argument("run_adder_study: unknown case id");

    ModelSpec spec;
    spec.family = ModelFamily::Adder;
    spec.r = 1.0;
    spec.gamma = cs->gamma;
    spec.R = 1.0;
    spec.eta = cs->eta;
    SolveOptions sopt;
    sopt.a_max = opt.a_max;
    sopt.x_max = opt.x_max;
    sopt.n_a = opt.n_a;
    sopt.n_x = opt.n_x;
    sopt.eps = opt.eps;

    spec.kernel = KernelSpec(KernelVariant::DiracHalf);
    const DensityGrid2D null_density = solve_adder(spec, sopt).density;
    const NullModel null =
        NullModel::from_grid(null_density, "adder-case-" + std::to_string(case_id));

    std::map<std::string, DensityGrid2D> alts;
    for (const char* name : kKernelNames) {
      spec.kernel = KernelSpec::from_name(name);
      auto alt = solve_adder(spec, sopt).density;
      out.alternatives_2d.emplace(std::to_string(case_id) + ":" + name, alt);
      alts.emplace(name, std::move(alt));
    }

    const std::vector<int>& ns = opt.ns.empty() ? cs->ns : opt.ns;
    for (int n : ns) {
      const Calibration cal = calibrate(null, n, opt.alpha, basis, opt.calibration_B,
                                        mix_seed(opt.seed, 100 * case_id + n));
      const PowerResult level = power_study(null.grid2(), null, cal, basis, n, opt.reps,
                                            mix_seed(opt.seed, 5000 + 100 * case_id + n));
      out.rows.push_back({case_id, n, "level", level.proportion, level.std_error});
      int k = 0;
      for (const char* name : kKernelNames) {
        const PowerResult p =
            power_study(alts.at(name), null, cal, basis, n, opt.reps,
                        mix_seed(opt.seed, 9000 + 100 * case_id + 10 * k + n));
        out.rows.push_back({case_id, n, name, p.proportion, p.std_error});
        ++k;
      }
    }
  }
  return out;
}

BioStudyResult run_bio_study(const DensityGrid1D& bio, const BioStudyOptions& opt) {
  BioStudyResult out;
  DensityGrid1D data = bio;
  data.normalize();

  // the paper's pipeline: resample the published density, then work on the
  // kernel density estimate of the resample
  const Sample1D resample = rejection_sample(data, opt.resample_n, mix_seed(opt.seed, 1), 0);
  const DensityGrid1D kde =
      kde_1d(resample, silverman_bandwidth(resample.points), data.x_max, data.n_x);

  out.moments = fit_moments(kde);
  out.least_squares = fit_least_squares_R(kde, default_R_grid());

  const TestBasis basis = TestBasis::laguerre(3, 20);
  const int n = opt.resample_n;

  const auto test_against = [&](const NullModel& null, std::uint64_t salt) {
    const Calibration cal =
        calibrate(null, n, opt.alpha, basis, opt.calibration_B, mix_seed(opt.seed, salt));
    return run_test(resample, cal, null, basis);
  };

  const NullModel null_m =
      NullModel::mitosis_constant(out.moments.R_hat, data.x_max, 2 * data.n_x);
  out.test_moments = test_against(null_m, 11);
  const NullModel null_l =
      NullModel::mitosis_constant(out.least_squares.R_hat, data.x_max, 2 * data.n_x);
  out.test_least_squares = test_against(null_l, 12);

  double mit_r = opt.mitosis_r, mit_g = opt.mitosis_gamma, mit_e = opt.mitosis_eta;
  double add_g = opt.adder_gamma, add_e = opt.adder_eta;
  if (opt.with_grid_search) {
    out.grid_mitosis = grid_search_mitosis(kde, mitosis_parameter_grids(), opt.grid);
    out.grid_adder = grid_search_adder(kde, adder_parameter_grids(), opt.grid);
    mit_r = out.grid_mitosis.r;
    mit_g = out.grid_mitosis.gamma;
    mit_e = out.grid_mitosis.eta;
    add_g = out.grid_adder.gamma;
    add_e = out.grid_adder.eta;
  }

  DensityGrid1D general = mitosis_null_profile(mit_r, mit_g, mit_e, data, opt.grid);
  DensityGrid1D general_on_data(data.x_max, data.n_x);
  for (int i = 0; i < data.n_x; ++i) general_on_data.values[i] = general.value_at(data.x(i));
  out.test_general = test_against(NullModel::from_grid(general_on_data, "mitosis-general-fit"), 13);

  DensityGrid1D adder = adder_null_marginal(add_g, add_e, data, opt.grid);
  DensityGrid1D adder_on_data(data.x_max, data.n_x);
  for (int i = 0; i < data.n_x; ++i) adder_on_data.values[i] = adder.value_at(data.x(i));
  out.test_adder = test_against(NullModel::from_grid(adder_on_data, "adder-marginal-fit"), 14);
  return out;
}

void write_study_csv(const std::string& path, const StudyResult& result) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write study csv");
  out << "case,n,kernel,value,std_error\n";
  char buf[120];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%s,%.17g,%.17g", row.case_id, row.n,
                  row.kernel.c_str(), row.value, row.std_error);
    out << buf << '\n';
  }
}

}  // namespace cellpop
