#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmo_optim/config.hpp"
#include "lmo_optim/diagnostics.hpp"

namespace lmo {

inline constexpr const char* kCsvVersionLine = "# lmo-optim csv v1";

struct RunRow {
  long step = 0;
  double loss = 0.0;
  double lr_mult = 1.0;
  std::string branch;  // muon | lion | mixed
  std::optional<double> grad_nuc;
  double grad_l1 = 0.0;
  std::optional<double> period_metric;
  double cum_flops = 0.0;
  double wnorm_inf = 0.0;
  std::optional<double> alpha_ratio;
  std::optional<double> rho_nuc_hat;
  std::optional<double> rho_1_hat;
  std::optional<double> L2_hat;
  std::optional<double> Linf_hat;
};

std::string csv_header();
std::string csv_line(const RunRow& row);

struct RunFailure {
  long step = 0;
  std::string reason;
};

struct RunSummary {
  double initial_loss = 0.0;
  double best_loss = 0.0;
  double final_loss = 0.0;
  double total_flops = 0.0;
  long steps_completed = 0;
  long muon_steps = 0;
  long lion_steps = 0;
  double wall_time_s = 0.0;
  std::optional<double> L2_hat_median, L2_hat_max, Linf_hat_median, Linf_hat_max;
  /// Smallest period-averaged metric seen so far, per completed period.
  std::vector<double> running_min_metric;
};

struct RunRecord {
  RunSpec spec;
  std::vector<RunRow> rows;
  RunSummary summary;
  std::optional<RunFailure> failure;
  /// Final parameter values.
  std::vector<ParamGroup> params;

  bool ok() const { return !failure.has_value(); }
};

struct RunOptions {
  /// Directory for run.csv and summary.json; empty keeps everything in memory.
  std::filesystem::path out_dir;
  bool quiet = true;
  /// Also keep a copy of every row in RunRecord::rows.
  bool keep_rows = true;
};

/// Clip, step and diagnostics per the intervals. Deterministic for a fixed
/// spec. A non-finite loss or gradient stops the run with a failure record.
RunRecord run_training(const RunSpec& spec, const RunOptions& options = {});

struct SweepCell {
  std::size_t index = 0;
  Period period;
  double eta_muon = 0.0;
  double eta_lion = 0.0;
  double adaptive_alpha = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double best_loss = 0.0;
  double final_loss = 0.0;
  double total_flops = 0.0;
  long muon_steps = 0;
  long steps = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // in grid order
  std::optional<std::size_t> best;
};

enum class SweepOrder { forward, reverse };

struct SweepOptions {
  std::filesystem::path out_dir;
  bool quiet = true;
  /// Order in which cells are handed to the workers; results do not depend on it.
  SweepOrder order = SweepOrder::forward;
};

/// Cartesian grid period × eta_muon × eta_lion × adaptive_alpha; empty axes
/// use the base value. Cell i runs with seed base_seed + i.
std::vector<SweepCell> expand_grid(const SweepSpec& spec);
SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});
std::string sweep_table_csv(const SweepResult& result);
/// Lowest best loss; ties go to smaller eta_muon, eta_lion, then smaller P.
std::optional<std::size_t> select_best(std::span<const SweepCell> cells);

struct ReportRow {
  std::string variant;
  double best_loss = 0.0;
  double final_loss = 0.0;
  double total_flops = 0.0;
  /// Cumulative FLOPs at the first row whose loss reached the target.
  std::optional<double> flops_to_target;
};

struct Report {
  std::vector<ReportRow> rows;  // sorted by total FLOPs, then variant
  std::optional<Period> empirical_P_star;
  std::optional<long> predicted_P_star;
  std::string predicted_label;
};

/// Best-loss-vs-FLOPs table per variant; with `target_loss`, also the
/// empirical argmin over P of FLOPs-to-target next to the φ prediction for
/// the given ratios (rL, rRho, κ).
Report report(std::span<const RunRecord> records, std::optional<double> target_loss = {},
              std::optional<std::array<double, 3>> phi_inputs = {}, int K_NS = 5);
std::string report_csv(const Report& r);

/// JSON with constants, bound_terms, optimal_params, phi_table, case_label.
std::string theory_report_json(const TheorySpec& spec);
/// Per-matrix breakdown, step cost, shares and all-gather bytes.
std::string flops_report_json(const FlopsSpec& spec);

struct OracleCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct OracleOptions {
  /// Relative change applied to every quintic coefficient.
  double quintic_perturbation = 0.0;
  int jacobi_max_sweeps = 60;
  std::uint64_t seed = 0x5eed;
};

std::vector<OracleCheck> oracle_selfcheck(const OracleOptions& options = {});

}  // namespace lmo
