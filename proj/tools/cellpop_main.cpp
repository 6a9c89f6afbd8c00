// Command-line front end: solve, sample, calibrate, test, power, fit and
// reproduce-table subcommands over the library, with config-file support,
// mandatory seeds for anything stochastic, and a manifest per run.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cellpop/fitting.hpp"
#include "cellpop/gof.hpp"
#include "cellpop/parallel.hpp"
#include "cellpop/pde.hpp"
#include "cellpop/sampling.hpp"
#include "cellpop/stationary.hpp"
#include "cellpop/workflows.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

std::vector<std::string> g_outputs;  // removed if the command fails midway

void track_output(const std::string& path) { g_outputs.push_back(path); }

void remove_partial_outputs() {
  for (const auto& p : g_outputs) {
    std::error_code ec;
    std::filesystem::remove(p, ec);
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const std::string& out_dir, const std::string& command, const json& config,
                    std::uint64_t seed, const json& extra = json::object()) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = fnv1a(config.dump());
  m["seed"] = seed;
  m["version"] = kVersion;
  m["outputs"] = g_outputs;
  m["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch()).count();
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  std::ofstream f(std::filesystem::path(out_dir) / "manifest.json");
  if (!f.good()) throw std::runtime_error("cannot write manifest.json");
  f << m.dump(2) << '\n';
}

// Density CSV with 2 columns is 1-D, with 3 columns 2-D.
bool density_is_2d(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw CLI::ValidationError("--density", "cannot open " + path);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') break;
  return std::count(line.begin(), line.end(), ',') == 2;
}

cellpop::ModelSpec build_spec(const std::string& model, const std::string& kernel, double r,
                              double gamma, double R, double eta) {
  cellpop::ModelSpec spec;
  if (model == "mitosis-constant") {
    spec.family = cellpop::ModelFamily::MitosisConstant;
  } else if (model == "mitosis-general") {
    spec.family = cellpop::ModelFamily::MitosisGeneral;
  } else if (model == "adder") {
    spec.family = cellpop::ModelFamily::Adder;
  } else {
    throw CLI::ValidationError("--model", "unknown model " + model);
  }
  spec.r = r;
  spec.gamma = gamma;
  spec.R = R;
  spec.eta = eta;
  spec.kernel = cellpop::KernelSpec::from_name(kernel);
  return spec;
}

cellpop::NullModel build_null(const std::string& null_kind, double R, const std::string& table,
                              double x_max, int n_x) {
  if (null_kind == "n0") return cellpop::NullModel::mitosis_constant(R, x_max, n_x);
  if (null_kind == "table") {
    if (table.empty()) throw CLI::ValidationError("--null-table", "required for --null table");
    if (density_is_2d(table))
      return cellpop::NullModel::from_grid(cellpop::read_density_csv_2d(table),
                                           std::filesystem::path(table).filename().string());
    return cellpop::NullModel::from_grid(cellpop::read_density_csv_1d(table),
                                         std::filesystem::path(table).filename().string());
  }
  throw CLI::ValidationError("--null", "unknown null kind " + null_kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structured cell-population models and division-symmetry tests"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "parallel job pool size (0 = library default)");
  app.set_config("--config", "",
                 "config file with [subcommand] sections; command-line flags win");
  int config_version = 1;
  app.add_option("--config-version", config_version, "config format version tag")
      ->check(CLI::Range(1, 1));

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "time-march a model to its stationary profile");
  std::string model = "mitosis-constant", kernel = "dirac", out = "density.csv";
  double r = 1.0, gamma = 1.0, R = 1.0, eta = 1.0;
  double x_max = 10.0, a_max = 6.0, dt = 0.0, eps = 1e-6;
  int n_x = 1000, n_a = 300;
  long long max_steps = 2000000;
  std::string out_dir = ".";
  solve->add_option("--model", model, "mitosis-constant | mitosis-general | adder");
  solve->add_option("--kernel", kernel, "dirac | beta22 | uniform | truncnorm | mixture");
  solve->add_option("--r", r);
  solve->add_option("--gamma", gamma);
  solve->add_option("--R", R);
  solve->add_option("--eta", eta);
  solve->add_option("--x-max", x_max);
  solve->add_option("--n-x", n_x);
  solve->add_option("--a-max", a_max);
  solve->add_option("--n-a", n_a);
  solve->add_option("--dt", dt, "0 derives the step from the CFL bound");
  solve->add_option("--eps", eps);
  solve->add_option("--max-steps", max_steps);
  solve->add_option("--out", out);
  solve->add_option("--out-dir", out_dir);

  // ---- sample ----
  auto* sample = app.add_subcommand("sample", "draw i.i.d. points from a tabulated density");
  std::string density_path, sample_out = "sample.csv";
  int n = 100;
  std::optional<std::uint64_t> seed;
  std::uint64_t stream = 0;
  double n0_R = 0.0;
  sample->add_option("--density", density_path, "density csv (1-D or 2-D)");
  sample->add_option("--n0", n0_R, "sample the explicit constant-rate null with this R");
  sample->add_option("--n", n);
  sample->add_option("--seed", seed, "rng seed (required)");
  sample->add_option("--stream", stream);
  sample->add_option("--out", sample_out);
  sample->add_option("--out-dir", out_dir);

  // ---- calibrate ----
  auto* cal_cmd = app.add_subcommand("calibrate", "Monte Carlo quantile calibration");
  std::string null_kind = "n0", null_table, cal_out = "calibration.json";
  double alpha = 0.05;
  int B = 200;
  cal_cmd->add_option("--null", null_kind, "n0 | table");
  cal_cmd->add_option("--R", R);
  cal_cmd->add_option("--null-table", null_table);
  cal_cmd->add_option("--n", n);
  cal_cmd->add_option("--alpha", alpha);
  cal_cmd->add_option("--B", B);
  cal_cmd->add_option("--seed", seed, "rng seed (required)");
  cal_cmd->add_option("--x-max", x_max);
  cal_cmd->add_option("--n-x", n_x);
  cal_cmd->add_option("--out", cal_out);
  cal_cmd->add_option("--out-dir", out_dir);

  // ---- test ----
  auto* test_cmd = app.add_subcommand("test", "run the calibrated sup test on a sample");
  std::string sample_path, calibration_path, report_out = "report.json";
  test_cmd->add_option("--sample", sample_path)->required();
  test_cmd->add_option("--calibration", calibration_path)->required();
  test_cmd->add_option("--null", null_kind, "n0 | table");
  test_cmd->add_option("--R", R);
  test_cmd->add_option("--null-table", null_table);
  test_cmd->add_option("--x-max", x_max);
  test_cmd->add_option("--n-x", n_x);
  test_cmd->add_option("--out", report_out);
  test_cmd->add_option("--out-dir", out_dir);

  // ---- power ----
  auto* power_cmd = app.add_subcommand("power", "level/power study for one model and kernel");
  std::string power_model = "mitosis", power_out = "power.csv";
  int reps = 200, case_id = 1;
  power_cmd->add_option("--model", power_model, "mitosis | adder");
  power_cmd->add_option("--case", case_id, "adder case 1..7");
  power_cmd->add_option("--kernel", kernel, "alternative kernel (or 'dirac' for the level)");
  power_cmd->add_option("--n", n);
  power_cmd->add_option("--reps", reps);
  power_cmd->add_option("--alpha", alpha);
  power_cmd->add_option("--B", B, "calibration replications");
  power_cmd->add_option("--seed", seed, "rng seed (required)");
  power_cmd->add_option("--out", power_out);
  power_cmd->add_option("--out-dir", out_dir);

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "fit null-model parameters to a data density");
  std::string fit_method = "moments", data_path, fit_out = "fit.json", cache_dir,
              objective_out;
  int resample_n = 0;
  fit_cmd->add_option("--data", data_path, "data density csv")->required();
  fit_cmd->add_option("--method", fit_method, "moments | lsq | grid-mitosis | grid-adder");
  fit_cmd->add_option("--resample-n", resample_n,
                      "resample the density and fit its kde (paper pipeline)");
  fit_cmd->add_option("--seed", seed, "rng seed (required with --resample-n)");
  fit_cmd->add_option("--cache-dir", cache_dir, "stationary-profile cache directory");
  fit_cmd->add_option("--objective-out", objective_out, "objective table csv (grid searches)");
  fit_cmd->add_option("--out", fit_out);
  fit_cmd->add_option("--out-dir", out_dir);

  // ---- reproduce-table ----
  auto* repro = app.add_subcommand("reproduce-table", "rebuild a published results table");
  int table_id = 1;
  std::string cases_arg = "1,7", bio_path = "data/bio_density.csv";
  bool with_grid_search = false;
  repro->add_option("table", table_id, "1 | 3 | 5")->required();
  repro->add_option("--cases", cases_arg, "adder cases, comma separated (table 3)");
  repro->add_option("--data", bio_path, "biological density csv (table 5)");
  repro->add_flag("--with-grid-search", with_grid_search, "run the full grid searches (slow)");
  repro->add_option("--reps", reps);
  repro->add_option("--B", B);
  repro->add_option("--seed", seed, "rng seed (required)");
  repro->add_option("--cache-dir", cache_dir);
  repro->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.get_name() << ": " << e.what() << "\n";
    return 2;
  }
  cellpop::par::set_num_threads(jobs);

  const auto require_seed = [&]() -> std::uint64_t {
    if (!seed) {
      std::cerr << "config error: --seed is mandatory (no wall-clock default)\n";
      std::exit(2);
    }
    return *seed;
  };

  try {
    std::filesystem::create_directories(out_dir);
    const auto opath = [&](const std::string& name) {
      return (std::filesystem::path(out_dir) / name).string();
    };

    if (*solve) {
      const cellpop::ModelSpec spec = build_spec(model, kernel, r, gamma, R, eta);
      cellpop::SolveOptions opt;
      opt.x_max = x_max;
      opt.n_x = n_x;
      opt.a_max = a_max;
      opt.n_a = n_a;
      opt.dt = dt;
      opt.eps = eps;
      opt.max_steps = max_steps;
      json cfg = {{"model", model}, {"kernel", kernel}, {"r", r},     {"gamma", gamma},
                  {"R", R},         {"eta", eta},       {"x_max", x_max}, {"n_x", n_x},
                  {"a_max", a_max}, {"n_a", n_a},       {"dt", dt},   {"eps", eps},
                  {"max_steps", max_steps}};
      json extra;
      if (spec.family == cellpop::ModelFamily::Adder) {
        const auto res = cellpop::solve_adder(spec, opt);
        track_output(opath(out));
        cellpop::write_density_csv(opath(out), res.density);
        extra["lambda"] = res.lambda;
        extra["steps"] = res.steps;
        extra["residual"] = res.residual;
        extra["oscillation_suspected"] = res.oscillation_suspected;
      } else {
        const auto res = cellpop::solve_mitosis(spec, opt);
        track_output(opath(out));
        cellpop::write_density_csv(opath(out), res.density);
        extra["lambda"] = res.lambda;
        extra["steps"] = res.steps;
        extra["residual"] = res.residual;
        extra["oscillation_suspected"] = res.oscillation_suspected;
        if (spec.family == cellpop::ModelFamily::MitosisConstant && spec.kernel.is_dirac()) {
          cellpop::DensityGrid1D n0 = cellpop::tabulate_N0(R, x_max, n_x);
          n0.normalize();
          extra["l2_distance_sq_to_explicit_n0"] = cellpop::l2_dist_sq(res.density, n0);
        }
      }
      write_manifest(out_dir, "solve", cfg, 0, extra);
      return 0;
    }

    if (*sample) {
      const std::uint64_t sd = require_seed();
      json cfg = {{"density", density_path}, {"n0_R", n0_R}, {"n", n},
                  {"seed", sd},              {"stream", stream}};
      track_output(opath(sample_out));
      if (n0_R > 0.0) {
        cellpop::DensityGrid1D d = cellpop::tabulate_N0(n0_R, 12.0 / n0_R, 2000);
        d.normalize();
        auto s = cellpop::rejection_sample(d, n, sd, stream);
        s.source = "n0 R=" + std::to_string(n0_R);
        cellpop::write_sample_csv(opath(sample_out), s);
      } else if (density_path.empty()) {
        throw CLI::ValidationError("--density", "either --density or --n0 is required");
      } else if (density_is_2d(density_path)) {
        auto s = cellpop::rejection_sample(cellpop::read_density_csv_2d(density_path), n, sd,
                                           stream);
        s.source = density_path;
        cellpop::write_sample_csv(opath(sample_out), s);
      } else {
        auto s = cellpop::rejection_sample(cellpop::read_density_csv_1d(density_path), n, sd,
                                           stream);
        s.source = density_path;
        cellpop::write_sample_csv(opath(sample_out), s);
      }
      write_manifest(out_dir, "sample", cfg, sd);
      return 0;
    }

    if (*cal_cmd) {
      const std::uint64_t sd = require_seed();
      const cellpop::NullModel null = build_null(null_kind, R, null_table, x_max, n_x);
      const cellpop::TestBasis basis = null.dim() == 2 ? cellpop::TestBasis::daubechies(3, 10)
                                                       : cellpop::TestBasis::laguerre(3, 20);
      json cfg = {{"null", null_kind}, {"R", R},         {"null_table", null_table},
                  {"n", n},            {"alpha", alpha}, {"B", B},
                  {"seed", sd}};
      const auto cal = cellpop::calibrate(null, n, alpha, basis, B, sd);
      track_output(opath(cal_out));
      cellpop::save_calibration_json(opath(cal_out), cal);
      json extra;
      extra["u_alpha"] = cal.u_alpha;
      extra["empirical_level"] = cal.empirical_level;
      if (cal.warning_small_B)
        extra["warning"] = "alpha*B < 5: quantile resolution is too coarse for this level";
      write_manifest(out_dir, "calibrate", cfg, sd, extra);
      return 0;
    }

    if (*test_cmd) {
      const cellpop::NullModel null = build_null(null_kind, R, null_table, x_max, n_x);
      const cellpop::TestBasis basis = null.dim() == 2 ? cellpop::TestBasis::daubechies(3, 10)
                                                       : cellpop::TestBasis::laguerre(3, 20);
      const auto cal = cellpop::load_calibration_json(calibration_path);
      json cfg = {{"sample", sample_path}, {"calibration", calibration_path},
                  {"null", null_kind},     {"R", R},
                  {"null_table", null_table}};
      cellpop::TestReport rep;
      if (null.dim() == 2) {
        rep = cellpop::run_test(cellpop::read_sample_csv_2d(sample_path), cal, null, basis);
      } else {
        rep = cellpop::run_test(cellpop::read_sample_csv_1d(sample_path), cal, null, basis);
      }
      track_output(opath(report_out));
      cellpop::save_report_json(opath(report_out), rep);
      json extra;
      extra["T_alpha"] = rep.T_alpha;
      extra["decision"] = rep.decision;
      write_manifest(out_dir, "test", cfg, 0, extra);
      std::cout << "T_alpha=" << rep.T_alpha << " decision=" << rep.decision << "\n";
      return 0;
    }

    if (*power_cmd) {
      const std::uint64_t sd = require_seed();
      json cfg = {{"model", power_model}, {"case", case_id}, {"kernel", kernel}, {"n", n},
                  {"reps", reps},         {"alpha", alpha},  {"B", B},           {"seed", sd}};
      cellpop::StudyResult result;
      if (power_model == "mitosis") {
        cellpop::MitosisStudyOptions opt;
        opt.ns = {n};
        opt.alpha = alpha;
        opt.calibration_B = B;
        opt.reps = reps;
        opt.seed = sd;
        result = cellpop::run_mitosis_study(opt);
      } else if (power_model == "adder") {
        cellpop::AdderStudyOptions opt;
        opt.cases = {case_id};
        opt.ns = {n};
        opt.alpha = alpha;
        opt.calibration_B = B;
        opt.reps = reps;
        opt.seed = sd;
        result = cellpop::run_adder_study(opt);
      } else {
        throw CLI::ValidationError("--model", "power expects mitosis or adder");
      }
      if (kernel != "dirac") {  // keep only the requested kernel row plus the level
        cellpop::StudyResult filtered;
        for (const auto& row : result.rows)
          if (row.kernel == kernel || row.kernel == "level") filtered.rows.push_back(row);
        result.rows = std::move(filtered.rows);
      }
      track_output(opath(power_out));
      cellpop::write_study_csv(opath(power_out), result);
      write_manifest(out_dir, "power", cfg, sd);
      return 0;
    }

    if (*fit_cmd) {
      cellpop::DensityGrid1D data = cellpop::read_density_csv_1d(data_path);
      data.normalize();
      json cfg = {{"data", data_path},      {"method", fit_method},
                  {"resample_n", resample_n}, {"cache_dir", cache_dir}};
      std::uint64_t sd = 0;
      if (resample_n > 0) {
        sd = require_seed();
        cfg["seed"] = sd;
        const auto s = cellpop::rejection_sample(data, resample_n, sd, 0);
        data = cellpop::kde_1d(s, cellpop::silverman_bandwidth(s.points), data.x_max, data.n_x);
      }
      cellpop::GridSearchOptions gopt;
      gopt.cache_dir = cache_dir;
      cellpop::FitResult fit;
      cellpop::ObjectiveTable table;
      if (fit_method == "moments") {
        fit = cellpop::fit_moments(data);
      } else if (fit_method == "lsq") {
        fit = cellpop::fit_least_squares_R(data, cellpop::default_R_grid());
      } else if (fit_method == "grid-mitosis") {
        fit = cellpop::grid_search_mitosis(data, cellpop::mitosis_parameter_grids(), gopt,
                                           objective_out.empty() ? nullptr : &table);
      } else if (fit_method == "grid-adder") {
        fit = cellpop::grid_search_adder(data, cellpop::adder_parameter_grids(), gopt,
                                         objective_out.empty() ? nullptr : &table);
      } else {
        throw CLI::ValidationError("--method", "unknown fit method " + fit_method);
      }
      if (!objective_out.empty()) {
        track_output(opath(objective_out));
        cellpop::write_objective_csv(opath(objective_out), table);
      }
      json jf;
      jf["method"] = fit.method;
      jf["R_hat"] = fit.R_hat;
      jf["Nbar"] = fit.Nbar;
      jf["r"] = fit.r;
      jf["gamma"] = fit.gamma;
      jf["eta"] = fit.eta;
      jf["objective"] = fit.objective;
      jf["lambda"] = fit.lambda;
      jf["failures"] = fit.failures;
      track_output(opath(fit_out));
      std::ofstream f(opath(fit_out));
      f << jf.dump(2) << '\n';
      write_manifest(out_dir, "fit", cfg, sd);
      return 0;
    }

    if (*repro) {
      const std::uint64_t sd = require_seed();
      json cfg = {{"table", table_id}, {"cases", cases_arg}, {"data", bio_path},
                  {"reps", reps},      {"B", B},             {"seed", sd},
                  {"with_grid_search", with_grid_search}};
      if (table_id == 1) {
        cellpop::MitosisStudyOptions opt;
        opt.seed = sd;
        opt.reps = reps;
        opt.calibration_B = B;
        const auto result = cellpop::run_mitosis_study(opt);
        track_output(opath("table1.csv"));
        cellpop::write_study_csv(opath("table1.csv"), result);
      } else if (table_id == 3) {
        cellpop::AdderStudyOptions opt;
        opt.seed = sd;
        opt.reps = reps;
        opt.calibration_B = B;
        opt.cases.clear();
        for (size_t pos = 0; pos < cases_arg.size();) {
          const size_t comma = cases_arg.find(',', pos);
          opt.cases.push_back(std::stoi(cases_arg.substr(pos, comma - pos)));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        const auto result = cellpop::run_adder_study(opt);
        track_output(opath("table3.csv"));
        cellpop::write_study_csv(opath("table3.csv"), result);
      } else if (table_id == 5) {
        cellpop::DensityGrid1D bio = cellpop::read_density_csv_1d(bio_path);
        cellpop::BioStudyOptions opt;
        opt.seed = sd;
        opt.calibration_B = B;
        opt.with_grid_search = with_grid_search;
        opt.grid.cache_dir = cache_dir;
        const auto result = cellpop::run_bio_study(bio, opt);
        json t5;
        t5["moment"] = {{"R", result.moments.R_hat},
                        {"Nbar", result.moments.Nbar},
                        {"T_alpha", result.test_moments.T_alpha},
                        {"u_alpha", result.test_moments.u_alpha},
                        {"reject", result.test_moments.decision}};
        t5["least_squares"] = {{"R", result.least_squares.R_hat},
                               {"Nbar", result.least_squares.Nbar},
                               {"T_alpha", result.test_least_squares.T_alpha},
                               {"u_alpha", result.test_least_squares.u_alpha},
                               {"reject", result.test_least_squares.decision}};
        t5["general_mitosis"] = {{"T_alpha", result.test_general.T_alpha},
                                 {"u_alpha", result.test_general.u_alpha},
                                 {"reject", result.test_general.decision}};
        t5["adder"] = {{"T_alpha", result.test_adder.T_alpha},
                       {"u_alpha", result.test_adder.u_alpha},
                       {"reject", result.test_adder.decision}};
        if (with_grid_search) {
          t5["grid_mitosis"] = {{"r", result.grid_mitosis.r},
                                {"gamma", result.grid_mitosis.gamma},
                                {"eta", result.grid_mitosis.eta},
                                {"objective", result.grid_mitosis.objective}};
          t5["grid_adder"] = {{"r", result.grid_adder.r},
                              {"gamma", result.grid_adder.gamma},
                              {"eta", result.grid_adder.eta},
                              {"objective", result.grid_adder.objective}};
        }
        track_output(opath("table5.json"));
        std::ofstream f(opath("table5.json"));
        f << t5.dump(2) << '\n';
      } else {
        throw CLI::ValidationError("table", "expected 1, 3 or 5");
      }
      write_manifest(out_dir, "reproduce-table", cfg, sd);
      return 0;
    }
  } catch (const CLI::Error& e) {
    remove_partial_outputs();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    remove_partial_outputs();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    remove_partial_outputs();
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
