#include "lmo_optim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmo::theory {

void TheoryInputs::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("theory inputs: ") + what);
  };
  require(L2 > 0.0, "L2 must be > 0");
  require(Linf > 0.0, "Linf must be > 0");
  require(rho_nuc > 0.0, "rho_nuc must be > 0");
  require(rho_1 > 0.0, "rho_1 must be > 0");
  require(sigma >= 0.0, "sigma must be >= 0");
  require(kappa > 1.0 && kappa <= 2.0, "kappa must lie in (1, 2]");
  require(delta0 >= 0.0, "delta0 must be >= 0");
  require(e0_l1 >= 0.0, "e0_l1 must be >= 0");
  require(m >= 1 && n >= 1, "m and n must be >= 1");
  require(K_NS >= 1, "K_NS must be >= 1");
  const double tol = 1.0 + 1e-9;
  require(L2 <= Linf * tol, "L2 <= Linf violated");
  require(Linf <= static_cast<double>(m) * static_cast<double>(n) * L2 * tol,
          "Linf <= m*n*L2 violated");
}

std::string to_string(SmoothnessVariant v) {
  switch (v) {
    case SmoothnessVariant::plain: return "plain";
    case SmoothnessVariant::refined: return "refined";
    case SmoothnessVariant::weight_decay: return "weight_decay";
  }
  return "?";
}

SmoothnessVariant smoothness_variant_from_string(const std::string& s) {
  if (s == "plain") return SmoothnessVariant::plain;
  if (s == "refined") return SmoothnessVariant::refined;
  if (s == "weight_decay") return SmoothnessVariant::weight_decay;
  throw InvalidArgument("unknown smoothness variant '" + s + "'");
}

double eta_max(double eta_muon, double eta_lion, Period period) {
  if (period.is_infinite()) return eta_lion;
  if (period.value() == 1) return eta_muon;
  return std::max(eta_muon, eta_lion);
}

double c2_factor(Period period, long m, long n) {
  if (period.is_infinite() || period.value() == 1) return 1.0;
  return std::sqrt(static_cast<double>(m) * static_cast<double>(n));
}

PeriodConstants period_constants(double eta_muon, double eta_lion, Period period,
                                 const TheoryInputs& inputs, SmoothnessVariant variant) {
  if (period.is_infinite()) {
    if (!(eta_lion > 0.0)) throw InvalidArgument("period_constants: P = inf requires eta_L > 0");
    return {eta_lion, inputs.rho_1, inputs.Linf, 0.0, 1.0};
  }
  if (!(eta_muon > 0.0)) throw InvalidArgument("period_constants: eta_M must be > 0");
  const long P = period.value();
  if (P == 1) return {eta_muon, inputs.rho_nuc, inputs.L2, 1.0, 0.0};
  if (!(eta_lion > 0.0)) throw InvalidArgument("period_constants: eta_L must be > 0");

  const double p = static_cast<double>(P);
  const double eta_bar = eta_muon / p + (p - 1.0) * eta_lion / p;
  const double w_muon = eta_muon / (p * eta_bar);
  const double w_lion = (p - 1.0) * eta_lion / (p * eta_bar);
  const double rho_bar = w_muon * inputs.rho_nuc + w_lion * inputs.rho_1;
  const double denom = p * eta_bar * eta_bar;
  const double emax = std::max(eta_muon, eta_lion);
  const double sqrt_mn = std::sqrt(static_cast<double>(inputs.m) * static_cast<double>(inputs.n));

  double L_bar = 0.0;
  switch (variant) {
    case SmoothnessVariant::plain: {
      const double emax_tilde = std::max(eta_muon, sqrt_mn * eta_lion);
      L_bar = eta_muon * emax_tilde / denom * inputs.L2 +
              (p - 1.0) * eta_lion * emax / denom * inputs.Linf;
      break;
    }
    case SmoothnessVariant::refined:
      L_bar = eta_muon * eta_muon / denom * inputs.L2 +
              (p - 1.0) * eta_lion * eta_lion / denom * inputs.Linf;
      break;
    case SmoothnessVariant::weight_decay:
      L_bar = eta_muon * emax * sqrt_mn / denom * inputs.L2 +
              (p - 1.0) * eta_lion * emax / denom * inputs.Linf;
      break;
  }
  return {eta_bar, rho_bar, L_bar, w_muon, w_lion};
}

namespace {

double momentum_ratio(double beta1, double beta2) {
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidArgument("bound: betas must lie in [0, 1)");
  if (beta1 == beta2) return 1.0;
  if (beta2 == 0.0) throw InvalidArgument("bound: beta1/beta2 undefined for beta2 = 0");
  return beta1 / beta2;
}

BoundTerms common_terms(const TheoryInputs& in, const PeriodConstants& pc, double beta1,
                        double beta2, long T, double emax) {
  if (T < 1) throw InvalidArgument("bound: T must be >= 1");
  const double ratio = momentum_ratio(beta1, beta2);
  const double t = static_cast<double>(T);
  const double rs = pc.rho_bar * in.sigma;
  BoundTerms b;
  b.initial_gap = in.delta0 / (pc.eta_bar * t);
  b.noise_momentum = 2.0 * ratio * rs * std::pow(1.0 - beta2, (in.kappa - 1.0) / in.kappa);
  b.noise_mismatch = 2.0 * std::abs(1.0 - ratio) * rs;
  b.initial_error = 2.0 * ratio * emax * in.e0_l1 / (pc.eta_bar * t * (1.0 - beta2));
  return b;
}

void sum_terms(BoundTerms& b) {
  b.total = b.initial_gap + b.smoothness + b.noise_momentum + b.noise_mismatch + b.initial_error;
}

}  // namespace

BoundTerms bound_rhs(const TheoryInputs& inputs, const PeriodConstants& pc, double beta1,
                     double beta2, long T, double emax) {
  BoundTerms b = common_terms(inputs, pc, beta1, beta2, T, emax);
  b.smoothness = 4.0 * pc.L_bar * pc.eta_bar / (1.0 - beta2);
  sum_terms(b);
  return b;
}

BoundTerms bound_rhs_wd(const TheoryInputs& inputs, const PeriodConstants& pc, double beta1,
                        double beta2, long T, double emax, double c2) {
  if (!(c2 >= 1.0)) throw InvalidArgument("bound_rhs_wd: C2 must be >= 1");
  BoundTerms b = common_terms(inputs, pc, beta1, beta2, T, emax);
  b.smoothness = 8.0 * pc.L_bar * pc.eta_bar / std::min(1.0 - beta2, 1.0 / c2);
  sum_terms(b);
  return b;
}

OptimalParams optimal_params(const TheoryInputs& inputs, double eps, Period period,
                             double alpha_scale, SmoothnessVariant variant) {
  inputs.validate();
  if (!(eps > 0.0)) throw InvalidArgument("optimal_params: eps must be > 0");
  if (!(alpha_scale > 0.0)) throw InvalidArgument("optimal_params: alpha_scale must be > 0");
  if (variant == SmoothnessVariant::refined)
    throw InvalidArgument("optimal_params: variant must be plain or weight_decay");
  const bool wd = variant == SmoothnessVariant::weight_decay;

  // L̄ and ρ̄ depend on the step sizes only through η_M/η_L.
  const PeriodConstants shape = period_constants(alpha_scale, 1.0, period, inputs, variant);
  const double rs = shape.rho_bar * inputs.sigma;
  const double kappa = inputs.kappa;
  const double expo = kappa / (kappa - 1.0);
  const double c2 = wd ? c2_factor(period, inputs.m, inputs.n) : 1.0;

  OptimalParams out;
  double one_minus_b2 = rs > 0.0 ? std::min(std::pow(eps / (16.0 * rs), expo), 1.0) : 1.0;
  if (wd) one_minus_b2 = std::min(one_minus_b2, 1.0 / c2);
  out.beta2 = 1.0 - one_minus_b2;
  out.beta1_high = out.beta2;
  out.beta1_low = rs > 0.0 ? out.beta2 * std::max(1.0 - eps / (16.0 * rs), 0.0) : 0.0;

  double weight = 1.0;
  if (!period.is_infinite()) {
    const double p = static_cast<double>(period.value());
    weight = alpha_scale / p + (p - 1.0) / p;
  }
  const double divisor = wd ? 64.0 : 32.0;
  out.eta_lion = eps * one_minus_b2 / (divisor * weight * shape.L_bar);
  out.eta_muon = alpha_scale * out.eta_lion;
  out.constants = period_constants(out.eta_muon, out.eta_lion, period, inputs, variant);

  const double noise_branch =
      std::pow(16.0 * rs, expo) / std::pow(eps, (3.0 * kappa - 2.0) / (kappa - 1.0));
  out.T_initial_gap =
      512.0 * out.constants.L_bar * inputs.delta0 * std::max(noise_branch, c2 / (eps * eps));
  const double emax = eta_max(out.eta_muon, out.eta_lion, period);
  out.T_initial_error =
      16.0 * (emax / out.constants.eta_bar) * inputs.e0_l1 / (one_minus_b2 * eps);

  double horizon = std::ceil(std::max({out.T_initial_gap, out.T_initial_error, 1.0}));
  if (!period.is_infinite()) {
    const double p = static_cast<double>(period.value());
    horizon = std::ceil(horizon / p) * p;
  }
  if (!(horizon < 9.0e18)) throw InvalidArgument("optimal_params: horizon overflows");
  out.T = static_cast<long>(horizon);
  return out;
}

double phi_exact(long P, double rL, double rRho, double kappa, int K_NS) {
  if (P < 1) throw InvalidArgument("phi_exact: P must be >= 1");
  if (K_NS < 1) throw InvalidArgument("phi_exact: K_NS must be >= 1");
  const double p = static_cast<double>(P);
  const double lead = std::pow(1.0 / p, (3.0 * kappa - 2.0) / (kappa - 1.0));
  const double cost = 1.0 / p + 1.0 / static_cast<double>(K_NS);
  const double smooth = p + p * (p - 1.0) * rL;
  const double noise = std::pow(1.0 + (p - 1.0) * rRho, kappa / (kappa - 1.0));
  return lead * cost * smooth * noise;
}

double phi_approx(double P, double rL, double rRho, double kappa) {
  if (!(P >= 1.0)) throw InvalidArgument("phi_approx: P must be >= 1");
  const double inv = 1.0 / P;
  return (inv + (1.0 - inv) * rL) * std::pow(inv + (1.0 - inv) * rRho, kappa / (kappa - 1.0));
}

double phi_exact_limit(double rL, double rRho, double kappa, int K_NS) {
  return rL * std::pow(rRho, kappa / (kappa - 1.0)) / static_cast<double>(K_NS);
}

std::string to_string(PeriodCase c) {
  switch (c) {
    case PeriodCase::muon_best: return "muon_best";
    case PeriodCase::lion_trend: return "lion_trend";
    case PeriodCase::interior_optimum: return "interior_optimum";
  }
  return "?";
}

std::string to_string(PhiForm f) { return f == PhiForm::exact ? "exact" : "approx"; }

PhiForm phi_form_from_string(const std::string& s) {
  if (s == "exact") return PhiForm::exact;
  if (s == "approx") return PhiForm::approx;
  throw InvalidArgument("unknown phi form '" + s + "'");
}

PeriodScan scan_optimal_P(double rL, double rRho, double kappa, int K_NS, long P_max,
                          PhiForm form) {
  if (P_max < 2) throw InvalidArgument("scan_optimal_P: P_max must be >= 2");
  PeriodScan scan;
  scan.phi.reserve(static_cast<std::size_t>(P_max));
  for (long P = 1; P <= P_max; ++P) {
    scan.phi.push_back(form == PhiForm::exact
                           ? phi_exact(P, rL, rRho, kappa, K_NS)
                           : phi_approx(static_cast<double>(P), rL, rRho, kappa));
  }
  scan.phi_limit = form == PhiForm::exact ? phi_exact_limit(rL, rRho, kappa, K_NS)
                                          : rL * std::pow(rRho, kappa / (kappa - 1.0));

  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.phi.size(); ++i)
    if (scan.phi[i] < scan.phi[best]) best = i;
  scan.P_star = static_cast<long>(best) + 1;

  bool decreasing = true;
  for (std::size_t i = 1; i < scan.phi.size(); ++i)
    if (!(scan.phi[i] < scan.phi[i - 1])) decreasing = false;

  if (scan.P_star == 1 && scan.phi_limit >= scan.phi.front())
    scan.label = PeriodCase::muon_best;
  else if (decreasing)
    scan.label = PeriodCase::lion_trend;
  else
    scan.label = PeriodCase::interior_optimum;
  return scan;
}

}  // namespace lmo::theory
