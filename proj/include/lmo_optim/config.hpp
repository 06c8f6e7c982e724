#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmo_optim/flops.hpp"
#include "lmo_optim/optim.hpp"
#include "lmo_optim/problems.hpp"
#include "lmo_optim/theory.hpp"

namespace lmo {

struct RunSpec {
  ProblemSpec problem;
  NoiseSpec noise;
  OptimConfig optimizer;
  long total_steps = 100;
  long eval_interval = 1;
  long diag_interval = 10;
  std::uint64_t seed = 0;
  std::string output_path;

  /// Copies total_steps and seed into the optimizer schedule/seed and checks
  /// every cross-field invariant.
  void validate() const;
  /// optimizer with schedule.total_steps and base_seed filled from the run.
  OptimConfig effective_optimizer() const;
  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct SweepAxes {
  std::vector<Period> period;
  std::vector<double> eta_muon;
  std::vector<double> eta_lion;
  std::vector<double> adaptive_alpha;
  friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

struct SweepSpec {
  RunSpec base;
  SweepAxes axes;
  int threads = 1;
  void validate() const;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct TheorySpec {
  theory::TheoryInputs inputs;
  double eps = 0.1;
  Period period = Period::finite(2);
  double alpha_scale = 100.0;
  theory::SmoothnessVariant variant = theory::SmoothnessVariant::plain;
  long P_max = 20;
  /// Measured trade-off ratios; derived from the inputs and alpha_scale when absent.
  std::optional<double> rL;
  std::optional<double> rRho;
  void validate() const;
  friend bool operator==(const TheorySpec&, const TheorySpec&) = default;
};

struct FlopsSpec {
  /// Named preset ("124M", "355M", "720M") or "custom" with the fields below.
  std::string shape = "124M";
  std::int64_t layers = 12;
  std::int64_t dim = 768;
  std::int64_t seq_len = 512;
  std::int64_t batch = 32;
  std::int64_t vocab = 50304;
  Period period = Period::finite(1);
  int ns_steps = 5;
  flops::FlopOptions options;
  flops::ModelShape model_shape() const;
  void validate() const;
  friend bool operator==(const FlopsSpec&, const FlopsSpec&) = default;
};

enum class ConfigKind { run, sweep, theory, flops };
std::string to_string(ConfigKind k);

struct ConfigDoc {
  ConfigKind kind = ConfigKind::run;
  RunSpec run;      // run and sweep
  SweepAxes axes;   // sweep
  int threads = 1;  // sweep
  TheorySpec theory;
  FlopsSpec flops;

  SweepSpec sweep() const { return {run, axes, threads}; }
  friend bool operator==(const ConfigDoc&, const ConfigDoc&) = default;
};

/// Parse errors carry line/column or the dotted key path.
ConfigDoc parse_config_text(const std::string& text);
ConfigDoc parse_config(const std::string& path);
/// Full serialization with every default spelled out; parse(serialize(x)) == x.
std::string serialize_config(const ConfigDoc& doc);
/// Markdown listing every key, its default and its constraint.
std::string config_reference();

}  // namespace lmo
