#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lmo_optim/linalg.hpp"
#include "lmo_optim/matrix.hpp"
#include "lmo_optim/optim.hpp"

namespace lmo {

/// Per-step constant estimates. Optional fields are absent off-interval or
/// when the estimator is undefined (e.g. no previous step).
struct DiagRecord {
  long step = 0;
  std::optional<double> alpha_ratio;
  std::optional<double> rho_nuc_hat;
  std::optional<double> rho_1_hat;
  std::optional<double> L2_hat;
  std::optional<double> Linf_hat;
  double grad_nuc = 0.0;
  double grad_l1 = 0.0;
  double loss = 0.0;
  double cumulative_flops = 0.0;
};

/// ‖G‖₁ / ‖G‖_nuc. Throws on a zero matrix.
double alpha_ratio(const Matrix& g);

/// ‖G−M‖_nuc/‖G−M‖_F (Norm::nuclear) or ‖G−M‖₁/‖G−M‖_F (Norm::l1_elem).
double noise_level_hat(const Matrix& g, const Matrix& m, Norm which);

/// ‖dG‖_nuc/‖dW‖₂ (Norm::spectral, the L₂ estimate) or ‖dG‖₁/‖dW‖_∞
/// (Norm::inf_elem, the L_∞ estimate). Throws on zero dW.
double smoothness_hat(const Matrix& dg, const Matrix& dw, Norm primal);

/// (η_M·g_nuc + η_L·Σ g_l1) / (η_M + (P−1)·η_L), with `norms` holding the
/// spectral-step nuclear norm first and then P−1 sign-step l1 norms.
double period_avg_grad_metric(std::span<const double> norms, double eta_muon, double eta_lion,
                              long period);

/// P = ∞ convention: plain mean of the l1 norms.
double period_avg_grad_metric_lion(std::span<const double> l1_norms);

/// Closed-form Frank–Wolfe gap over the ball of radius 1/λ in the spectral
/// or element-wise ∞ norm: (1/λ)‖grad‖_★ + ⟨W, grad⟩. May be negative.
double fw_gap(const Matrix& w, const Matrix& grad, double lambda, Norm ball);

/// Block-diagonal aggregation of per-parameter estimates, used by the run
/// loop when a problem has several matrix parameters.
struct BlockNorms {
  double nuclear = 0.0;
  double l1 = 0.0;
  double fro_sq = 0.0;
  double spectral = 0.0;
  double inf = 0.0;
  void add(const Matrix& x, bool with_spectrum);
};

/// Running median/max of a stream of positive estimates.
class QuantileSummary {
 public:
  void add(double v) { values_.push_back(v); }
  std::size_t count() const { return values_.size(); }
  std::optional<double> median() const;
  std::optional<double> max() const;

 private:
  std::vector<double> values_;
};

}  // namespace lmo
