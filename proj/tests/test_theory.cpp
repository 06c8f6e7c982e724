#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lmo_optim/theory.hpp"

using namespace lmo;
using namespace lmo::theory;

namespace {

TheoryInputs sample_inputs() {
  TheoryInputs in;
  in.L2 = 2.0;
  in.Linf = 7.0;
  in.rho_nuc = 3.0;
  in.rho_1 = 5.0;
  in.sigma = 0.4;
  in.kappa = 1.6;
  in.delta0 = 2.5;
  in.e0_l1 = 0.3;
  in.m = 4;
  in.n = 9;
  return in;
}

TheoryInputs random_inputs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TheoryInputs in;
  in.m = 1 + static_cast<long>(u(rng) * 64);
  in.n = 1 + static_cast<long>(u(rng) * 64);
  in.L2 = std::exp(4.0 * u(rng) - 2.0);
  in.Linf = in.L2 * (1.0 + u(rng) * (static_cast<double>(in.m * in.n) - 1.0));
  in.rho_nuc = 1.0 + 5.0 * u(rng);
  in.rho_1 = 1.0 + 20.0 * u(rng);
  in.sigma = u(rng) < 0.2 ? 0.0 : 2.0 * u(rng);
  in.kappa = 1.05 + 0.95 * u(rng);
  in.delta0 = 10.0 * u(rng);
  in.e0_l1 = 5.0 * u(rng);
  return in;
}

}  // namespace

TEST(Inputs, Validation) {
  TheoryInputs in = sample_inputs();
  EXPECT_NO_THROW(in.validate());
  in.kappa = 1.0;
  EXPECT_THROW(in.validate(), InvalidArgument);
  in = sample_inputs();
  in.Linf = 1.0;  // below L2
  EXPECT_THROW(in.validate(), InvalidArgument);
  in = sample_inputs();
  in.Linf = 100.0;  // above mn·L2 = 72
  EXPECT_THROW(in.validate(), InvalidArgument);
  in = sample_inputs();
  in.sigma = -1.0;
  EXPECT_THROW(in.validate(), InvalidArgument);
}

TEST(PeriodConstants, Boundaries) {
  const TheoryInputs in = sample_inputs();
  for (auto v : {SmoothnessVariant::plain, SmoothnessVariant::refined,
                 SmoothnessVariant::weight_decay}) {
    const auto muon = period_constants(3e-3, 2e-5, Period::finite(1), in, v);
    EXPECT_DOUBLE_EQ(muon.eta_bar, 3e-3);
    EXPECT_DOUBLE_EQ(muon.rho_bar, in.rho_nuc);
    EXPECT_NEAR(muon.L_bar, in.L2, 1e-12);
    const auto lion = period_constants(3e-3, 2e-5, Period::infinite(), in, v);
    EXPECT_DOUBLE_EQ(lion.eta_bar, 2e-5);
    EXPECT_DOUBLE_EQ(lion.rho_bar, in.rho_1);
    EXPECT_NEAR(lion.L_bar, in.Linf, 1e-12);
  }
}

TEST(PeriodConstants, InteriorFormulas) {
  const TheoryInputs in = sample_inputs();
  const double em = 3e-3, el = 2e-5;
  const auto pc = period_constants(em, el, Period::finite(2), in, SmoothnessVariant::plain);
  EXPECT_NEAR(pc.eta_bar, 1.51e-3, 1e-18);

  const double P = 5.0, mn = 36.0;
  const double eb = em / P + (P - 1) * el / P;
  const double tilde = std::max(em, std::sqrt(mn) * el), emax = std::max(em, el);
  const auto plain = period_constants(em, el, Period::finite(5), in, SmoothnessVariant::plain);
  EXPECT_NEAR(plain.eta_bar, eb, 1e-18);
  EXPECT_NEAR(plain.rho_bar, em / (P * eb) * in.rho_nuc + (P - 1) * el / (P * eb) * in.rho_1,
              1e-12);
  EXPECT_NEAR(plain.L_bar,
              em * tilde / (P * eb * eb) * in.L2 + (P - 1) * el * emax / (P * eb * eb) * in.Linf,
              1e-9);
  const auto refined = period_constants(em, el, Period::finite(5), in, SmoothnessVariant::refined);
  EXPECT_NEAR(refined.L_bar,
              em * em / (P * eb * eb) * in.L2 + (P - 1) * el * el / (P * eb * eb) * in.Linf,
              1e-9);
  const auto wd = period_constants(em, el, Period::finite(5), in, SmoothnessVariant::weight_decay);
  EXPECT_NEAR(wd.L_bar,
              em * emax * 6.0 / (P * eb * eb) * in.L2 + (P - 1) * el * emax / (P * eb * eb) * in.Linf,
              1e-9);
  EXPECT_EQ(c2_factor(Period::finite(5), 4, 9), 6.0);
  EXPECT_EQ(c2_factor(Period::finite(1), 4, 9), 1.0);
  EXPECT_EQ(c2_factor(Period::infinite(), 4, 9), 1.0);
  EXPECT_EQ(eta_max(3e-3, 2e-5, Period::finite(1)), 3e-3);
  EXPECT_EQ(eta_max(3e-3, 2e-5, Period::infinite()), 2e-5);
  EXPECT_EQ(eta_max(1e-5, 2e-5, Period::finite(3)), 2e-5);
}

TEST(Bound, Examples) {
  TheoryInputs in;
  in.delta0 = 1.0;
  in.sigma = 0.0;
  PeriodConstants pc;
  pc.eta_bar = 1e-3;
  pc.L_bar = 1.0;
  pc.rho_bar = 1.0;
  const auto b = bound_rhs(in, pc, 0.9, 0.9, 1000, 1e-3);
  EXPECT_NEAR(b.total, 1.04, 1e-12);
  EXPECT_EQ(b.noise_mismatch, 0.0);
  EXPECT_NEAR(b.initial_gap, 1.0, 1e-12);
  EXPECT_NEAR(b.smoothness, 0.04, 1e-12);

  // noiseless tail as T grows
  const auto far = bound_rhs(in, pc, 0.9, 0.9, 1000000000000L, 1e-3);
  EXPECT_NEAR(far.total, 0.04, 1e-8);
  EXPECT_THROW(bound_rhs(in, pc, 0.5, 0.0, 10, 1e-3), InvalidArgument);
  EXPECT_NO_THROW(bound_rhs(in, pc, 0.0, 0.0, 10, 1e-3));
  EXPECT_THROW(bound_rhs(in, pc, 0.5, 0.5, 0, 1e-3), InvalidArgument);

  const auto wd1 = bound_rhs_wd(in, pc, 0.9, 0.9, 1000, 1e-3, 1.0);
  EXPECT_NEAR(wd1.smoothness, 8e-3 / 0.1, 1e-12);
  const auto wd4 = bound_rhs_wd(in, pc, 0.5, 0.5, 1000, 1e-3, 4.0);
  EXPECT_NEAR(wd4.smoothness, 8e-3 / 0.25, 1e-12);
  const auto wdfar = bound_rhs_wd(in, pc, 0.5, 0.5, 1000000000000L, 1e-3, 4.0);
  EXPECT_NEAR(wdfar.total, 8e-3 / 0.25, 1e-8);
}

TEST(Bound, TermsByHand) {
  const TheoryInputs in = sample_inputs();
  PeriodConstants pc;
  pc.eta_bar = 2e-3;
  pc.L_bar = 3.0;
  pc.rho_bar = 4.0;
  const double b1 = 0.8, b2 = 0.95;
  const long T = 500;
  const auto b = bound_rhs(in, pc, b1, b2, T, 5e-3);
  EXPECT_NEAR(b.initial_gap, 2.5 / (2e-3 * 500), 1e-12);
  EXPECT_NEAR(b.smoothness, 4 * 3.0 * 2e-3 / 0.05, 1e-12);
  EXPECT_NEAR(b.noise_momentum,
              2 * b1 / b2 * 4.0 * 0.4 * std::pow(0.05, 0.6 / 1.6), 1e-12);
  EXPECT_NEAR(b.noise_mismatch, 2 * std::abs(1 - b1 / b2) * 4.0 * 0.4, 1e-12);
  EXPECT_NEAR(b.initial_error, 2 * b1 / b2 * 5e-3 * 0.3 / (2e-3 * 500 * 0.05), 1e-12);
  EXPECT_NEAR(b.total,
              b.initial_gap + b.smoothness + b.noise_momentum + b.noise_mismatch + b.initial_error,
              1e-12);
}

TEST(Optimal, Examples) {
  TheoryInputs in;
  in.rho_nuc = in.rho_1 = 1.0;
  in.sigma = 1.0;
  in.kappa = 2.0;
  const auto p = optimal_params(in, 0.1, Period::finite(1), 100.0, SmoothnessVariant::plain);
  EXPECT_NEAR(1.0 - p.beta2, 3.90625e-5, 1e-15);
  EXPECT_NEAR(p.eta_muon, 0.1 * (1.0 - p.beta2) / (32.0 * in.L2), 1e-18);

  TheoryInputs cap = in;
  cap.sigma = 0.005;  // ε ≥ 16ρ̄σ = 0.08
  const auto c = optimal_params(cap, 0.1, Period::finite(3), 10.0, SmoothnessVariant::plain);
  EXPECT_EQ(c.beta2, 0.0);
  EXPECT_EQ(c.beta1_low, 0.0);
  EXPECT_EQ(c.beta1_high, 0.0);

  EXPECT_THROW(optimal_params(in, 0.0, Period::finite(1), 1.0, SmoothnessVariant::plain),
               InvalidArgument);
  EXPECT_THROW(optimal_params(in, 0.1, Period::finite(1), 1.0, SmoothnessVariant::refined),
               InvalidArgument);
  EXPECT_EQ(optimal_params(in, 0.1, Period::finite(4), 3.0, SmoothnessVariant::plain).T % 4, 0);
}

TEST(Phi, Examples) {
  EXPECT_NEAR(phi_exact(1, 0.3, 2.0, 1.5, 5), 1.2, 1e-15);
  for (long P : {2L, 3L, 8L}) {
    EXPECT_NEAR(phi_exact(P, 0.0, 0.0, 2.0, 1000000000), std::pow(1.0 / P, 4.0), 1e-9);
  }
  EXPECT_EQ(phi_approx(1.0, 0.25, 1.02, 2.0), 1.0);
  for (double P : {1.0, 2.0, 7.0, 100.0}) EXPECT_NEAR(phi_approx(P, 1.0, 1.0, 1.7), 1.0, 1e-14);
  EXPECT_NEAR(phi_approx(1e6, 0.25, 1.02, 2.0), 0.25 * 1.02 * 1.02, 1e-5);
  EXPECT_THROW(phi_exact(0, 1, 1, 2, 5), InvalidArgument);
  EXPECT_THROW(phi_approx(0.5, 1, 1, 2), InvalidArgument);
}

TEST(Scan, Examples) {
  const auto lion = scan_optimal_P(0.01, 0.01, 2.0, 5, 20);
  EXPECT_EQ(lion.label, PeriodCase::lion_trend);
  EXPECT_EQ(lion.P_star, 20);
  const auto fine = scan_optimal_P(0.25, 1.02, 2.0, 5, 20);
  EXPECT_EQ(fine.phi.size(), 20u);
  EXPECT_GE(fine.P_star, 1);
  for (double r : {1.0, 1.5, 3.0}) {
    const auto s = scan_optimal_P(r, r, 2.0, 5, 20, PhiForm::approx);
    EXPECT_EQ(s.P_star, 1);
    EXPECT_EQ(s.label, PeriodCase::muon_best);
  }
  EXPECT_THROW(scan_optimal_P(1, 1, 2, 5, 1), InvalidArgument);
  EXPECT_EQ(phi_form_from_string("approx"), PhiForm::approx);
  EXPECT_THROW(phi_form_from_string("x"), InvalidArgument);
}

TEST(Scan, TiesPreferSmallerPeriod) {
  // rL = rRho = 1 under the approximation is flat: every P ties.
  const auto s = scan_optimal_P(1.0, 1.0, 2.0, 5, 10, PhiForm::approx);
  EXPECT_EQ(s.P_star, 1);
}

TEST(Properties, RhoBarIsConvexCombination) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-5, 1e-2);
  for (int trial = 0; trial < 200; ++trial) {
    const TheoryInputs in = random_inputs(rng);
    const double em = u(rng), el = u(rng);
    const long P = 1 + trial % 9;
    const auto pc = period_constants(em, el, Period::finite(P), in, SmoothnessVariant::plain);
    EXPECT_NEAR(pc.muon_weight + pc.lion_weight, 1.0, 1e-12);
    EXPECT_NEAR(pc.rho_bar, pc.muon_weight * in.rho_nuc + pc.lion_weight * in.rho_1,
                1e-12 * pc.rho_bar);
    EXPECT_GE(pc.rho_bar, std::min(in.rho_nuc, in.rho_1) - 1e-12);
    EXPECT_LE(pc.rho_bar, std::max(in.rho_nuc, in.rho_1) + 1e-12);
  }
}

TEST(Properties, BoundMonotoneInTAndMismatchVanishes) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const TheoryInputs in = random_inputs(rng);
    const auto pc = period_constants(1e-3, 1e-4, Period::finite(3), in, SmoothnessVariant::plain);
    double prev = 1e300;
    for (long T : {1L, 10L, 100L, 1000L, 100000L}) {
      const auto b = bound_rhs(in, pc, 0.9, 0.9, T, 1e-3);
      EXPECT_EQ(b.noise_mismatch, 0.0);
      EXPECT_LE(b.total, prev);
      prev = b.total;
    }
  }
}

TEST(Properties, OptimalParamsSelfConsistent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const TheoryInputs in = random_inputs(rng);
    const double eps = std::exp(-3.0 * u(rng)) * 0.5;
    const double alpha = std::exp(6.0 * u(rng));
    const Period P = trial % 5 == 4 ? Period::infinite() : Period::finite(1 + trial % 6);
    for (auto v : {SmoothnessVariant::plain, SmoothnessVariant::weight_decay}) {
      OptimalParams op;
      try {
        op = optimal_params(in, eps, P, alpha, v);
      } catch (const InvalidArgument&) {
        continue;  // horizon overflow on extreme draws
      }
      const double b1 = op.beta1_high;
      const double emax = eta_max(op.eta_muon, op.eta_lion, P);
      const auto pc = period_constants(op.eta_muon, op.eta_lion, P, in, v);
      const auto b =
          v == SmoothnessVariant::plain
              ? bound_rhs(in, pc, b1, op.beta2, op.T, emax)
              : bound_rhs_wd(in, pc, b1, op.beta2, op.T, emax, c2_factor(P, in.m, in.n));
      EXPECT_LE(b.total, eps * (1.0 + 1e-9))
          << "trial " << trial << " variant " << to_string(v);
      ++checked;
    }
  }
  EXPECT_GT(checked, 400);
}

TEST(Properties, PhiAtMuonBoundary) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double rL = u(rng), rR = u(rng), kappa = 1.05 + 0.19 * u(rng);
    const int K = 1 + trial % 10;
    EXPECT_NEAR(phi_exact(1, rL, rR, kappa, K), 1.0 + 1.0 / K, 1e-14);
    EXPECT_EQ(phi_approx(1.0, rL, rR, kappa), 1.0);
  }
}

TEST(Properties, CaseOneAlwaysMuon) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = scan_optimal_P(u(rng), u(rng), 1.1 + 0.009 * trial, 5, 20, PhiForm::approx);
    EXPECT_EQ(s.P_star, 1);
  }
}
