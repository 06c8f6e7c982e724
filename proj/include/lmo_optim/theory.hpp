#pragma once

#include <string>
#include <vector>

#include "lmo_optim/optim.hpp"

namespace lmo::theory {

/// Problem constants feeding the bound and parameter calculators.
struct TheoryInputs {
  double L2 = 1.0;
  double Linf = 1.0;
  double rho_nuc = 1.0;
  double rho_1 = 1.0;
  double sigma = 0.0;
  double kappa = 2.0;
  double delta0 = 1.0;
  double e0_l1 = 0.0;
  long m = 1;
  long n = 1;
  int K_NS = 5;

  void validate() const;
  friend bool operator==(const TheoryInputs&, const TheoryInputs&) = default;
};

enum class SmoothnessVariant { plain, refined, weight_decay };
std::string to_string(SmoothnessVariant v);
SmoothnessVariant smoothness_variant_from_string(const std::string& s);

struct PeriodConstants {
  double eta_bar = 0.0;
  double rho_bar = 0.0;
  double L_bar = 0.0;
  /// Weights of ρ_nuc and ρ₁ inside ρ̄ (sum to 1).
  double muon_weight = 0.0;
  double lion_weight = 0.0;
};

/// Period-averaged step size, noise level and smoothness. Finite P uses the
/// interior formulas; P = 1 and P = ∞ use the boundary overrides.
PeriodConstants period_constants(double eta_muon, double eta_lion, Period period,
                                 const TheoryInputs& inputs, SmoothnessVariant variant);

/// max{η_M, η_L} with the boundary conventions (η_M at P = 1, η_L at P = ∞).
double eta_max(double eta_muon, double eta_lion, Period period);

/// √(mn) for P ∈ (1, ∞), 1 at the boundaries.
double c2_factor(Period period, long m, long n);

struct BoundTerms {
  double initial_gap = 0.0;      // Δ₀/(η̄T)
  double smoothness = 0.0;       // 4L̄η̄/(1−β₂) or 8L̄η̄/min(1−β₂, 1/C₂)
  double noise_momentum = 0.0;   // (2β₁/β₂)ρ̄σ(1−β₂)^((κ−1)/κ)
  double noise_mismatch = 0.0;   // 2|1−β₁/β₂|ρ̄σ
  double initial_error = 0.0;    // (2β₁/β₂)η_max‖E₀‖₁/(η̄T(1−β₂))
  double total = 0.0;
};

BoundTerms bound_rhs(const TheoryInputs& inputs, const PeriodConstants& pc, double beta1,
                     double beta2, long T, double eta_max);

BoundTerms bound_rhs_wd(const TheoryInputs& inputs, const PeriodConstants& pc, double beta1,
                        double beta2, long T, double eta_max, double c2);

struct OptimalParams {
  double beta2 = 0.0;
  double beta1_low = 0.0;
  double beta1_high = 0.0;
  double eta_lion = 0.0;
  double eta_muon = 0.0;
  long T = 0;
  /// Horizon from the Δ₀ term alone (2⁹·L̄Δ₀·max{…}).
  double T_initial_gap = 0.0;
  /// Horizon that keeps the ‖E₀‖₁ term within its budget.
  double T_initial_error = 0.0;
  PeriodConstants constants;
};

/// Bound-minimizing momentum, step sizes and horizon for accuracy
/// `eps` with η_M = alpha_scale·η_L. `variant` is plain or weight_decay.
OptimalParams optimal_params(const TheoryInputs& inputs, double eps, Period period,
                             double alpha_scale, SmoothnessVariant variant);

/// Exact trade-off factor of the operation-count comparison against pure
/// Muon; rL = L_∞/(α²L₂), rRho = ρ₁/(αρ_nuc).
double phi_exact(long P, double rL, double rRho, double kappa, int K_NS);

/// Product-form approximation (1/P + (1−1/P)rL)(1/P + (1−1/P)rRho)^{κ/(κ−1)}.
double phi_approx(double P, double rL, double rRho, double kappa);

/// P → ∞ limit of phi_exact: rL·rRho^{κ/(κ−1)}/K_NS.
double phi_exact_limit(double rL, double rRho, double kappa, int K_NS);

enum class PeriodCase { muon_best, lion_trend, interior_optimum };
std::string to_string(PeriodCase c);

enum class PhiForm { exact, approx };
std::string to_string(PhiForm f);
PhiForm phi_form_from_string(const std::string& s);

struct PeriodScan {
  long P_star = 1;
  PeriodCase label = PeriodCase::interior_optimum;
  std::vector<double> phi;  // phi[P-1] for P = 1..P_max
  double phi_limit = 0.0;   // P → ∞
};

/// Evaluates φ over P = 1..P_max and its P → ∞ limit. Labels: muon_best when
/// P = 1 is the minimizer (limit included), lion_trend when φ strictly
/// decreases over the whole range, interior_optimum otherwise. Ties resolve
/// to the smaller P.
PeriodScan scan_optimal_P(double rL, double rRho, double kappa, int K_NS, long P_max,
                          PhiForm form = PhiForm::exact);

}  // namespace lmo::theory
