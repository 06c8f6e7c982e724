#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmo_optim/linalg.hpp"
#include "lmo_optim/matrix.hpp"

namespace lmo {

/// Alternation period: a positive integer or the INFINITY sentinel
/// (spectral branch never taken).
class Period {
 public:
  constexpr Period() = default;
  static Period finite(long p);
  static constexpr Period infinite() { return Period(0); }

  constexpr bool is_infinite() const noexcept { return value_ == 0; }
  /// Throws for the infinite period.
  long value() const;
  /// True when step t is a spectral step (t mod P = 0).
  constexpr bool is_muon_step(long t) const noexcept {
    return !is_infinite() && t % value_ == 0;
  }
  std::string to_string() const;
  static Period parse(const std::string& s);

  friend constexpr bool operator==(Period, Period) = default;

 private:
  constexpr explicit Period(long v) : value_(v) {}
  long value_ = 1;
};

struct ScheduleSpec {
  long warmup_steps = 0;
  long total_steps = 1;
  double floor_fraction = 1.0;

  /// Multiplier 1 at every step.
  static ScheduleSpec constant(long total_steps) { return {0, total_steps, 1.0}; }
  void validate() const;
  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Linear warmup (t+1)/warmup, then cosine decay from 1 to floor_fraction.
double lr_multiplier(const ScheduleSpec& schedule, long t);

enum class NsOutputScale { none, muon_rms };
enum class BranchMode { periodic, adaptive };
enum class MomentumForm { ema, heavy_ball };
enum class Branch { muon, lion, adamw };

std::string to_string(NsOutputScale v);
std::string to_string(BranchMode v);
std::string to_string(MomentumForm v);
std::string to_string(Branch v);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

struct OptimConfig {
  Period period = Period::finite(1);
  double eta_muon = 1e-2;
  double eta_lion = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double weight_decay = 0.0;
  NsPreset ns_preset = NsPreset::muon_quintic();
  int ns_steps = 5;
  NsOutputScale ns_output_scale = NsOutputScale::none;
  std::optional<double> clip_global_norm;
  ScheduleSpec schedule = ScheduleSpec::constant(1);
  BranchMode branch_mode = BranchMode::periodic;
  double adaptive_alpha = 0.01;
  int power_iters = 20;
  std::uint64_t base_seed = 0;
  MomentumForm momentum_form = MomentumForm::ema;
  AdamWConfig adamw;

  /// Throws InvalidArgument naming the violated constraint.
  void validate() const;
  friend bool operator==(const OptimConfig&, const OptimConfig&) = default;
};

enum class ParamKind { matrix2d, vector1d };

struct ParamGroup {
  std::string id;
  ParamKind kind = ParamKind::matrix2d;
  Matrix value;
  Matrix grad;
};

struct AdamMoments {
  Matrix m;
  Matrix v;
  long step = 0;
};

struct OptimState {
  long step = 0;
  /// One buffer per matrix2d parameter, keyed by parameter id; starts at zero.
  std::map<std::string, Matrix> momentum;
  std::map<std::string, AdamMoments> adam;
};

OptimState init_state(std::span<const ParamGroup> params);

struct StepReport {
  long step = 0;
  double lr_mult = 1.0;
  std::vector<Branch> branches;  // one per parameter, in order
};

/// One optimizer step over every parameter; increments state.step.
/// Throws InvalidArgument on state/param mismatch or non-finite gradients.
StepReport step(OptimState& state, std::span<ParamGroup> params, const OptimConfig& config);

/// Decoupled-weight-decay Adam update with bias correction, in place.
/// `t_adam` is the 1-based step count after this update.
void adamw_step(Matrix& value, Matrix& m, Matrix& v, const Matrix& grad, long t_adam, double lr,
                double beta1, double beta2, double eps, double weight_decay);

/// Heavy-ball learning rate equivalent to an EMA learning rate: (1-β)·η_EMA.
double hb_equivalent_lr(double eta_ema, double beta);

/// Rescales every gradient by max_norm/‖g‖ when the joint Frobenius norm
/// exceeds max_norm. Returns the factor applied (1 when unchanged).
double clip_global(std::span<Matrix> grads, double max_norm);

/// Stable-rank rule: muon iff r̂(M) ≤ alpha·min(m, n). A zero M selects lion.
Branch adaptive_branch(const Matrix& momentum, double alpha, int power_iters, std::uint64_t seed);

/// Momentum recursions shared by step() and the reference loops in tests.
void interpolate_direction(const Matrix& momentum, const Matrix& grad, double beta1,
                           MomentumForm form, Matrix& out);
void update_momentum(Matrix& momentum, const Matrix& grad, double beta2, MomentumForm form);

}  // namespace lmo
