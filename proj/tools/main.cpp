// Command-line front end: fit (estimate a treatment effect from a CSV),
// simulate (Monte Carlo grid), diagnose (sparse-eigenvalue report).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pdsel/dataset.hpp"
#include "pdsel/diagnostics.hpp"
#include "pdsel/double_selection.hpp"
#include "pdsel/errors.hpp"
#include "pdsel/reports.hpp"
#include "pdsel/simulation.hpp"

namespace {

using namespace pdsel;

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitData = 3;
constexpr int kExitEstimation = 4;
constexpr int kExitCapacity = 5;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
  if (given) return *given;
  std::random_device device;
  const std::uint64_t seed =
      (static_cast<std::uint64_t>(device()) << 32) ^ device();
  std::cout << "seed: " << seed << " (generated; pass --seed to reproduce)\n";
  return seed;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw data_error("write to '" + path + "' failed");
}

struct FitArgs {
  std::string data, outcome, treatment;
  std::vector<std::string> controls, amelioration;
  bool controls_all_others = false;
  std::string selector = "iterated-lasso";
  double c = 1.1;
  double gamma = 0.05;
  double level = 0.95;
  bool no_intercept = false;
  bool with_ridge = false;
  std::optional<std::uint64_t> seed;
  std::string out = "estimation_report.json";
};

int run_fit(const FitArgs& args) {
  RoleMapping roles;
  roles.outcome = args.outcome;
  roles.treatment = args.treatment;
  roles.controls = args.controls;
  roles.controls_all_others = args.controls_all_others;
  roles.amelioration = args.amelioration;
  const Dataset ds = ingest_csv(args.data, roles);

  const Index n = ds.rows;
  const Index n_controls = static_cast<Index>(ds.control_columns.size());
  RealMatrix X;
  std::vector<Index> amelioration = ds.amelioration_indices();
  PenaltyConfig config;
  config.c = args.c;
  config.gamma = args.gamma;
  config.selector = selector_from_name(args.selector);
  if (args.no_intercept) {
    X = ds.controls();
  } else {
    X.resize(n, n_controls + 1);
    X.leftCols(n_controls) = ds.controls();
    X.col(n_controls).setOnes();
    amelioration.push_back(n_controls);
    config.initial_set = {n_controls};
  }

  // Only the ridge variant consumes randomness (CV fold assignment); a plain
  // fit is deterministic, so don't invent a seed for it.
  const std::uint64_t seed =
      args.with_ridge ? resolve_seed(args.seed) : args.seed.value_or(0);
  TreatmentEffectEstimate estimate;
  if (args.with_ridge) {
    RngStream stream(seed, 0);
    estimate = post_double_selection_ridge(ds.outcome(), ds.treatment(), X,
                                           amelioration, config, args.level,
                                           RidgeCvSpec{}, stream);
  } else {
    estimate = post_double_selection(ds.outcome(), ds.treatment(), X,
                                     amelioration, config, args.level);
  }

  // Selection indices -> column names; the synthetic columns get reserved names.
  const auto column_name = [&](Index j) -> std::string {
    if (j < n_controls) return ds.control_columns[static_cast<std::size_t>(j)];
    if (!args.no_intercept && j == n_controls) return "(intercept)";
    return "(ridge-fit)";
  };

  EstimationReport report;
  report.alpha_hat = estimate.alpha_hat;
  report.sigma_n = estimate.sigma_n;
  report.se_plugin = estimate.se_plugin;
  report.se_jackknife = estimate.se_jackknife;
  report.ci_plugin = estimate.ci_plugin;
  report.ci_jackknife = estimate.ci_jackknife;
  for (Index j : estimate.selection.treatment)
    report.selected_for_treatment.push_back(column_name(j));
  for (Index j : estimate.selection.outcome)
    report.selected_for_outcome.push_back(column_name(j));
  for (Index j : estimate.selection.amelioration)
    report.amelioration.push_back(column_name(j));
  report.union_size = estimate.selection.joined.size();
  report.n_used = n;
  report.rows_dropped = ds.rows_dropped;
  report.rank_deficient = estimate.rank_deficient;
  report.c = args.c;
  report.gamma = args.gamma;
  report.selector = args.selector;
  report.level = args.level;
  report.seed = seed;
  write_file(args.out, render_estimation_report(report));

  std::cout << "alpha_hat      " << format_double(estimate.alpha_hat) << "\n"
            << "se (plugin)    " << format_double(estimate.se_plugin)
            << "   CI [" << format_double(estimate.ci_plugin.lower) << ", "
            << format_double(estimate.ci_plugin.upper) << "]\n"
            << "se (jackknife) " << format_double(estimate.se_jackknife)
            << "   CI [" << format_double(estimate.ci_jackknife.lower) << ", "
            << format_double(estimate.ci_jackknife.upper) << "]\n"
            << "selected: " << report.selected_for_treatment.size()
            << " for treatment, " << report.selected_for_outcome.size()
            << " for outcome, " << report.amelioration.size()
            << " forced; union " << report.union_size << "\n"
            << "rows used " << n << " (dropped " << ds.rows_dropped << ")\n";
  if (estimate.rank_deficient)
    std::cout << "warning: final regression is rank deficient\n";
  std::cout << "report: " << args.out << "\n";
  return kExitOk;
}

struct SimArgs {
  int design = 1;
  std::string grid = "0,0";
  std::size_t reps = 100;
  std::vector<std::string> estimators;
  std::optional<std::uint64_t> seed;
  Index n = 100;
  Index p = 200;
  double alpha0 = 0.5;
  std::string out = ".";
  bool emit_studentized = false;
  std::size_t threads = 0;
};

std::vector<std::pair<double, double>> parse_grid(const std::string& text) {
  if (text == "full") {
    std::vector<std::pair<double, double>> grid;
    const double levels[] = {0.0, 0.2, 0.4, 0.6, 0.8};
    for (double ry : levels)
      for (double rd : levels) grid.emplace_back(ry, rd);
    return grid;
  }
  std::vector<std::pair<double, double>> grid;
  std::stringstream pairs(text);
  std::string pair_text;
  while (std::getline(pairs, pair_text, ';')) {
    const auto comma = pair_text.find(',');
    if (comma == std::string::npos)
      throw argument_error("grid point '" + pair_text +
                           "' is not of the form r2_y,r2_d");
    try {
      grid.emplace_back(std::stod(pair_text.substr(0, comma)),
                        std::stod(pair_text.substr(comma + 1)));
    } catch (const std::exception&) {
      throw argument_error("cannot parse grid point '" + pair_text + "'");
    }
  }
  if (grid.empty())
    throw argument_error("empty grid; use r2_y,r2_d[;...] or 'full'");
  return grid;
}

std::string point_tag(const SimulationReport& report) {
  return "d" + std::to_string(report.design) + "_ry" +
         format_double(report.r2_y) + "_rd" + format_double(report.r2_d);
}

int run_simulate(const SimArgs& args) {
  DesignSpec base;
  base.design = args.design;
  base.n = args.n;
  base.p = args.p;
  base.alpha0 = args.alpha0;
  base.seed = resolve_seed(args.seed);

  GridOptions options;
  options.replications = args.reps;
  options.threads = args.threads ? args.threads
                                 : std::max(1u, std::thread::hardware_concurrency());
  if (args.estimators.empty()) {
    options.estimators = all_estimators();
  } else {
    for (const std::string& name : args.estimators)
      options.estimators.push_back(estimator_from_name(name));
  }
  const auto grid = parse_grid(args.grid);

  std::filesystem::create_directories(args.out);
  const std::vector<SimulationReport> reports = run_grid(base, grid, options);
  for (const SimulationReport& report : reports) {
    const std::string path =
        (std::filesystem::path(args.out) /
         ("simulation_" + point_tag(report) + ".json")).string();
    write_file(path, render_simulation_report(report));
    std::cout << "wrote " << path << "\n";
  }
  const std::string table_path =
      (std::filesystem::path(args.out) / "simulation_table.csv").string();
  write_file(table_path, simulation_table_csv(reports));
  std::cout << "wrote " << table_path << "\n";

  if (args.emit_studentized) {
    for (const auto& [r2_y, r2_d] : grid) {
      DesignSpec spec = base;
      spec.r2_y = r2_y;
      spec.r2_d = r2_d;
      SimulationReport tag_helper;
      tag_helper.design = spec.design;
      tag_helper.r2_y = r2_y;
      tag_helper.r2_d = r2_d;
      std::string content = "estimator,statistic\n";
      for (Estimator estimator : options.estimators) {
        const StudentizedResult result = studentized_samples(
            spec, args.reps, estimator, options.threads);
        for (double s : result.samples)
          content += estimator_name(estimator) + "," + format_double(s) + "\n";
      }
      const std::string path =
          (std::filesystem::path(args.out) /
           ("studentized_" + point_tag(tag_helper) + ".csv")).string();
      write_file(path, content);
      std::cout << "wrote " << path << "\n";
    }
  }
  return kExitOk;
}

struct DiagnoseArgs {
  std::string data;
  std::vector<std::string> controls;
  Index m = 1;
  std::uint64_t cap = 200000;
  std::string out = "sparse_eig_report.json";
};

int run_diagnose(const DiagnoseArgs& args) {
  const RealMatrix X = read_csv_columns(args.data, args.controls);
  const RealMatrix gram =
      (X.transpose() * X) / static_cast<double>(X.rows());
  const SparseEigReport report = sparse_eigenvalues(gram, args.m, args.cap);
  write_file(args.out, render_sparse_eig_report(report));
  std::cout << "m " << report.m << ": phi_min "
            << format_double(report.phi_min) << ", phi_max "
            << format_double(report.phi_max) << " (" << report.method << ", "
            << report.subsets << " subsets)\n"
            << "report: " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treatment-effect inference with data-driven control selection"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* cmd_fit = app.add_subcommand(
      "fit", "Estimate a treatment effect from a CSV dataset");
  cmd_fit->add_option("--data", fit.data, "CSV file with a header row")
      ->required();
  cmd_fit->add_option("--outcome", fit.outcome, "Outcome column name")
      ->required();
  cmd_fit->add_option("--treatment", fit.treatment, "Treatment column name")
      ->required();
  auto* controls_opt =
      cmd_fit->add_option("--controls", fit.controls,
                          "Control column names (comma separated)")
          ->delimiter(',');
  auto* all_others = cmd_fit->add_flag(
      "--controls-all-others", fit.controls_all_others,
      "Use every column except outcome and treatment as a control");
  controls_opt->excludes(all_others);
  cmd_fit->add_option("--amelioration", fit.amelioration,
                      "Controls forced into the final regression")
      ->delimiter(',');
  cmd_fit->add_option("--selector", fit.selector,
                      "iterated-lasso | sqrt-lasso-homoscedastic | "
                      "sqrt-lasso-conservative | sqrt-lasso-iterated");
  cmd_fit->add_option("--c", fit.c, "Penalty slack constant (> 1)");
  cmd_fit->add_option("--gamma", fit.gamma, "Penalty confidence parameter");
  cmd_fit->add_option("--level", fit.level, "Confidence level for intervals");
  cmd_fit->add_flag("--no-intercept", fit.no_intercept,
                    "Do not add a forced all-ones control");
  cmd_fit->add_flag("--with-ridge", fit.with_ridge,
                    "Offer a cross-validated ridge fit of the treatment as an "
                    "extra selectable control");
  cmd_fit->add_option("--seed", fit.seed, "Seed for any randomized step");
  cmd_fit->add_option("--out", fit.out, "Report path (JSON)");

  SimArgs sim;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Monte Carlo study over an R^2 grid");
  cmd_simulate->add_option("--design", sim.design, "Design id: 1, 2, or 3")
      ->required();
  cmd_simulate->add_option(
      "--r2-grid", sim.grid,
      "Semicolon-separated r2_y,r2_d pairs, or 'full' for the 5x5 grid");
  cmd_simulate->add_option("--reps", sim.reps, "Replications per grid point")
      ->required();
  cmd_simulate->add_option("--estimators", sim.estimators,
                           "Comma-separated estimator names (default: all)")
      ->delimiter(',');
  cmd_simulate->add_option("--seed", sim.seed, "Base seed for all streams");
  cmd_simulate->add_option("--n", sim.n, "Sample size per replication");
  cmd_simulate->add_option("--p", sim.p, "Number of controls");
  cmd_simulate->add_option("--alpha0", sim.alpha0, "True treatment effect");
  cmd_simulate->add_option("--out", sim.out, "Output directory");
  cmd_simulate->add_flag("--emit-studentized", sim.emit_studentized,
                         "Also write per-replication studentized statistics");
  cmd_simulate->add_option("--threads", sim.threads,
                           "Worker threads (default: hardware)");

  DiagnoseArgs diag;
  CLI::App* cmd_diagnose = app.add_subcommand(
      "diagnose", "Sparse-eigenvalue report for a set of control columns");
  cmd_diagnose->add_option("--data", diag.data, "CSV file with a header row")
      ->required();
  cmd_diagnose->add_option("--controls", diag.controls,
                           "Control column names (comma separated)")
      ->delimiter(',')
      ->required();
  cmd_diagnose->add_option("--m", diag.m, "Sparsity level")->required();
  cmd_diagnose->add_option("--cap", diag.cap, "Subset enumeration budget");
  cmd_diagnose->add_option("--out", diag.out, "Report path (JSON)");

  try {
    app.parse(argc, argv);
    if (*cmd_fit) return run_fit(fit);
    if (*cmd_simulate) return run_simulate(sim);
    return run_diagnose(diag);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgument;
  } catch (const argument_error& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const estimation_error& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
