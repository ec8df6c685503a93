#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdsel/diagnostics.hpp"
#include "pdsel/double_selection.hpp"
#include "pdsel/simulation.hpp"

namespace pdsel {

inline constexpr int kReportSchemaVersion = 1;

struct EstimationReport {
  double alpha_hat = 0.0;
  double sigma_n = 0.0;
  double se_plugin = 0.0;
  double se_jackknife = 0.0;
  Interval ci_plugin;
  Interval ci_jackknife;
  std::vector<std::string> selected_for_treatment;
  std::vector<std::string> selected_for_outcome;
  std::vector<std::string> amelioration;
  std::size_t union_size = 0;
  Index n_used = 0;
  std::size_t rows_dropped = 0;
  bool rank_deficient = false;
  // config echo
  double c = 1.1;
  double gamma = 0.05;
  std::string selector;
  double level = 0.95;
  std::uint64_t seed = 0;
};

// Deterministic JSON renderings (sorted keys, two-space indent, trailing
// newline); identical inputs give byte-identical strings.
std::string render_estimation_report(const EstimationReport& report);
std::string render_simulation_report(const SimulationReport& report);
std::string render_sparse_eig_report(const SparseEigReport& report);

// Flat table with one row per (grid point, estimator): design, r2_y, r2_d,
// estimator, rmse, bias, std, rejection_rate, reps, exclusions.
std::string simulation_table_csv(const std::vector<SimulationReport>& reports);

// Checks `document` against the schema subset used by the shipped schemas:
// type, required, properties, items, enum, const, additionalProperties.
// Returns human-readable violations; empty means valid. Malformed JSON in
// either argument is reported as a violation, not thrown.
std::vector<std::string> validate_json(const std::string& document,
                                       const std::string& schema);

}  // namespace pdsel
