#include "lmo_optim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmo_optim/rng.hpp"

namespace lmo {

Period Period::finite(long p) {
  if (p < 1) throw InvalidArgument("period must be a positive integer or inf");
  return Period(p);
}

long Period::value() const {
  if (is_infinite()) throw InvalidArgument("period is infinite");
  return value_;
}

std::string Period::to_string() const {
  return is_infinite() ? std::string("inf") : std::to_string(value_);
}

Period Period::parse(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "INFINITY") return infinite();
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("invalid period '" + s + "'");
  }
  if (pos != s.size()) throw InvalidArgument("invalid period '" + s + "'");
  return finite(v);
}

void ScheduleSpec::validate() const {
  if (total_steps < 1) throw InvalidArgument("schedule.total_steps must be >= 1");
  if (warmup_steps < 0) throw InvalidArgument("schedule.warmup_steps must be >= 0");
  if (warmup_steps >= total_steps)
    throw InvalidArgument("schedule.warmup_steps must be < total_steps");
  if (!(floor_fraction >= 0.0 && floor_fraction <= 1.0))
    throw InvalidArgument("schedule.floor_fraction must lie in [0, 1]");
}

double lr_multiplier(const ScheduleSpec& schedule, long t) {
  if (t < 0 || t >= schedule.total_steps) {
    throw InvalidArgument("lr_multiplier: step " + std::to_string(t) + " outside [0, " +
                          std::to_string(schedule.total_steps) + ")");
  }
  if (t < schedule.warmup_steps)
    return static_cast<double>(t + 1) / static_cast<double>(schedule.warmup_steps);
  const double progress = static_cast<double>(t - schedule.warmup_steps) /
                          static_cast<double>(schedule.total_steps - schedule.warmup_steps);
  const double f = schedule.floor_fraction;
  return f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string to_string(NsOutputScale v) { return v == NsOutputScale::none ? "none" : "muon_rms"; }
std::string to_string(BranchMode v) { return v == BranchMode::periodic ? "periodic" : "adaptive"; }
std::string to_string(MomentumForm v) { return v == MomentumForm::ema ? "ema" : "heavy_ball"; }
std::string to_string(Branch v) {
  switch (v) {
    case Branch::muon: return "muon";
    case Branch::lion: return "lion";
    case Branch::adamw: return "adamw";
  }
  return "?";
}

void OptimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("optimizer: ") + what);
  };
  require(eta_muon > 0.0, "eta_M must be > 0");
  require(eta_lion > 0.0, "eta_L must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(ns_steps >= 1, "ns_steps must be >= 1");
  require(!clip_global_norm || *clip_global_norm > 0.0, "clip_global_norm must be > 0");
  require(adaptive_alpha > 0.0 && adaptive_alpha <= 1.0, "adaptive_alpha must lie in (0, 1]");
  require(power_iters >= 1, "power_iters must be >= 1");
  require(adamw.lr > 0.0, "adamw.lr must be > 0");
  require(adamw.beta1 >= 0.0 && adamw.beta1 < 1.0, "adamw.beta1 must lie in [0, 1)");
  require(adamw.beta2 >= 0.0 && adamw.beta2 < 1.0, "adamw.beta2 must lie in [0, 1)");
  require(adamw.eps > 0.0, "adamw.eps must be > 0");
  require(adamw.weight_decay >= 0.0, "adamw.weight_decay must be >= 0");
  schedule.validate();
}

OptimState init_state(std::span<const ParamGroup> params) {
  OptimState state;
  for (const auto& p : params) {
    if (!p.value.same_shape(p.grad) && !p.grad.empty())
      throw InvalidArgument("param '" + p.id + "': grad shape differs from value shape");
    const bool fresh = p.kind == ParamKind::matrix2d
                           ? state.momentum.emplace(p.id, Matrix(p.value.rows(), p.value.cols())).second
                           : state.adam.emplace(p.id, AdamMoments{Matrix(p.value.rows(), p.value.cols()),
                                                                  Matrix(p.value.rows(), p.value.cols()), 0})
                                 .second;
    if (!fresh) throw InvalidArgument("duplicate parameter id '" + p.id + "'");
  }
  return state;
}

void interpolate_direction(const Matrix& momentum, const Matrix& grad, double beta1,
                           MomentumForm form, Matrix& out) {
  const auto m = momentum.values();
  const auto g = grad.values();
  auto o = out.values();
  if (form == MomentumForm::ema) {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
  } else {
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = beta1 * m[i] + g[i];
  }
}

void update_momentum(Matrix& momentum, const Matrix& grad, double beta2, MomentumForm form) {
  auto m = momentum.values();
  const auto g = grad.values();
  if (form == MomentumForm::ema) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = beta2 * m[i] + (1.0 - beta2) * g[i];
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = beta2 * m[i] + g[i];
  }
}

Branch adaptive_branch(const Matrix& momentum, double alpha, int power_iters, std::uint64_t seed) {
  if (momentum.is_zero()) return Branch::lion;
  const double sigma = power_iter_sigma1(momentum, power_iters, seed);
  if (!(sigma > 0.0)) return Branch::lion;
  const double rank = stable_rank(momentum, sigma);
  const double threshold =
      alpha * static_cast<double>(std::min(momentum.rows(), momentum.cols()));
  // Relative slack of 1e-12 keeps the inclusive boundary (e.g. rank-1 at
  // threshold 1) from flipping on the last bit of ‖M‖_F².
  return rank <= threshold * (1.0 + 1e-12) ? Branch::muon : Branch::lion;
}

namespace {

Branch choose_branch(const OptimConfig& config, long t, const Matrix& momentum,
                     const Matrix& grad, std::size_t param_index) {
  if (config.branch_mode == BranchMode::periodic)
    return config.period.is_muon_step(t) ? Branch::muon : Branch::lion;
  const Matrix& source = t > 0 ? momentum : grad;
  const std::uint64_t seed =
      stream_key({config.base_seed, static_cast<std::uint64_t>(param_index),
                  static_cast<std::uint64_t>(t)});
  return adaptive_branch(source, config.adaptive_alpha, config.power_iters, seed);
}

}  // namespace

StepReport step(OptimState& state, std::span<ParamGroup> params, const OptimConfig& config) {
  const long t = state.step;
  std::size_t matrix_count = 0;
  std::size_t vector_count = 0;
  for (const auto& p : params) {
    require_same_shape(p.value, p.grad, ("param '" + p.id + "'").c_str());
    if (!p.grad.all_finite())
      throw InvalidArgument("param '" + p.id + "': non-finite gradient at step " + std::to_string(t));
    if (p.kind == ParamKind::matrix2d) {
      auto it = state.momentum.find(p.id);
      if (it == state.momentum.end() || !it->second.same_shape(p.value))
        throw InvalidArgument("optimizer state does not match parameter '" + p.id + "'");
      ++matrix_count;
    } else {
      auto it = state.adam.find(p.id);
      if (it == state.adam.end() || !it->second.m.same_shape(p.value))
        throw InvalidArgument("optimizer state does not match parameter '" + p.id + "'");
      ++vector_count;
    }
  }
  if (matrix_count != state.momentum.size() || vector_count != state.adam.size())
    throw InvalidArgument("optimizer state was initialized for a different parameter set");

  StepReport report;
  report.step = t;
  report.lr_mult = lr_multiplier(config.schedule, t);
  report.branches.reserve(params.size());

  for (std::size_t idx = 0; idx < params.size(); ++idx) {
    ParamGroup& p = params[idx];
    if (p.kind == ParamKind::vector1d) {
      AdamMoments& mom = state.adam.at(p.id);
      ++mom.step;
      adamw_step(p.value, mom.m, mom.v, p.grad, mom.step, config.adamw.lr, config.adamw.beta1,
                 config.adamw.beta2, config.adamw.eps, config.adamw.weight_decay);
      report.branches.push_back(Branch::adamw);
      continue;
    }

    Matrix& momentum = state.momentum.at(p.id);
    Matrix direction_in(p.value.rows(), p.value.cols());
    interpolate_direction(momentum, p.grad, config.beta1, config.momentum_form, direction_in);

    const Branch branch = choose_branch(config, t, momentum, p.grad, idx);
    Matrix direction;
    double eta = 0.0;
    double scale = 1.0;
    if (branch == Branch::muon) {
      direction = direction_in.is_zero()
                      ? Matrix(p.value.rows(), p.value.cols())
                      : newton_schulz(direction_in, config.ns_preset, config.ns_steps);
      eta = config.eta_muon;
      if (config.ns_output_scale == NsOutputScale::muon_rms)
        scale = 0.2 * std::sqrt(static_cast<double>(std::max(p.value.rows(), p.value.cols())));
    } else {
      direction = sign_elem(direction_in);
      eta = config.eta_lion;
    }

    const double lr = eta * report.lr_mult;
    const double lambda = config.weight_decay;
    auto w = p.value.values();
    const auto d = direction.values();
    if (scale == 1.0) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * (d[i] + lambda * w[i]);
    } else {
      for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = w[i] - lr * (scale * d[i] + lambda * w[i]);
    }

    update_momentum(momentum, p.grad, config.beta2, config.momentum_form);
    report.branches.push_back(branch);
  }

  ++state.step;
  return report;
}

void adamw_step(Matrix& value, Matrix& m, Matrix& v, const Matrix& grad, long t_adam, double lr,
                double beta1, double beta2, double eps, double weight_decay) {
  require_same_shape(value, grad, "adamw_step");
  require_same_shape(value, m, "adamw_step");
  require_same_shape(value, v, "adamw_step");
  if (t_adam < 1) throw InvalidArgument("adamw_step: t_adam must be >= 1");
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_adam));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_adam));
  auto w = value.values();
  auto mv = m.values();
  auto vv = v.values();
  const auto g = grad.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    mv[i] = beta1 * mv[i] + (1.0 - beta1) * g[i];
    vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = mv[i] / bc1;
    const double vhat = vv[i] / bc2;
    w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * w[i]);
  }
}

double hb_equivalent_lr(double eta_ema, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("hb_equivalent_lr: beta must lie in [0, 1)");
  return (1.0 - beta) * eta_ema;
}

double clip_global(std::span<Matrix> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidArgument("clip_global: max_norm must be > 0");
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g.values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double factor = max_norm / norm;
  for (auto& g : grads) g *= factor;
  return factor;
}

}  // namespace lmo
