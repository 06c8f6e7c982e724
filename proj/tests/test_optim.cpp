#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lmo_optim/linalg.hpp"
#include "lmo_optim/optim.hpp"
#include "lmo_optim/rng.hpp"
#include "test_util.hpp"

using namespace lmo;
using lmo::testing::gaussian;

namespace {

OptimConfig base_config(Period p) {
  OptimConfig c;
  c.period = p;
  c.eta_muon = 0.05;
  c.eta_lion = 0.01;
  c.schedule = ScheduleSpec::constant(1000);
  return c;
}

std::vector<ParamGroup> one_param(const Matrix& w) {
  return {ParamGroup{"W", ParamKind::matrix2d, w, Matrix(w.rows(), w.cols())}};
}

Matrix grad_stream(std::uint64_t seed, long t, std::size_t r, std::size_t c) {
  auto rng = keyed_engine({seed, static_cast<std::uint64_t>(t)});
  return gaussian_matrix(r, c, rng);
}

// Gradient of ½‖W − target‖² plus seeded noise, shared by optimizer and reference loops.
Matrix synthetic_grad(const Matrix& w, const Matrix& target, std::uint64_t seed, long t) {
  Matrix g = w - target;
  g += 0.3 * grad_stream(seed, t, w.rows(), w.cols());
  return g;
}

}  // namespace

TEST(Period, ParseAndBranchIndex) {
  EXPECT_THROW(Period::finite(0), InvalidArgument);
  EXPECT_TRUE(Period::parse("inf").is_infinite());
  EXPECT_EQ(Period::parse("3"), Period::finite(3));
  EXPECT_THROW(Period::parse("3x"), InvalidArgument);
  EXPECT_THROW(Period::infinite().value(), InvalidArgument);
  const Period p2 = Period::finite(2);
  EXPECT_TRUE(p2.is_muon_step(0));
  EXPECT_FALSE(p2.is_muon_step(1));
  EXPECT_TRUE(p2.is_muon_step(2));
  for (long t = 0; t < 50; ++t) {
    EXPECT_TRUE(Period::finite(1).is_muon_step(t));
    EXPECT_FALSE(Period::infinite().is_muon_step(t));
  }
}

TEST(Schedule, Examples) {
  const ScheduleSpec s{4, 12, 0.0};
  EXPECT_DOUBLE_EQ(lr_multiplier(s, 4), 1.0);
  EXPECT_NEAR(lr_multiplier(s, 8), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(lr_multiplier(s, 0), 0.25);
  EXPECT_DOUBLE_EQ(lr_multiplier(s, 3), 1.0);
  const double last = 0.5 * (1.0 + std::cos(std::numbers::pi * (1.0 - 1.0 / 8.0)));
  EXPECT_NEAR(lr_multiplier(s, 11), last, 1e-15);
  EXPECT_LT(lr_multiplier(s, 11), 0.04);
  EXPECT_THROW(lr_multiplier(s, 12), InvalidArgument);
  EXPECT_THROW(lr_multiplier(s, -1), InvalidArgument);
  EXPECT_THROW((ScheduleSpec{12, 12, 0.0}.validate()), InvalidArgument);
  EXPECT_THROW((ScheduleSpec{0, 12, 1.5}.validate()), InvalidArgument);
  const ScheduleSpec floor{0, 10, 0.1};
  for (long t = 0; t < 10; ++t) {
    EXPECT_GE(lr_multiplier(floor, t), 0.1);
    EXPECT_LE(lr_multiplier(floor, t), 1.0);
  }
}

TEST(Step, PeriodTwoAlternates) {
  auto params = one_param(gaussian(3, 4, 1));
  OptimState state = init_state(params);
  const OptimConfig cfg = base_config(Period::finite(2));
  std::vector<Branch> seen;
  for (long t = 0; t < 3; ++t) {
    params[0].grad = grad_stream(2, t, 3, 4);
    seen.push_back(step(state, params, cfg).branches[0]);
  }
  EXPECT_EQ(seen, (std::vector<Branch>{Branch::muon, Branch::lion, Branch::muon}));
  EXPECT_EQ(state.step, 3);
}

TEST(Step, MemorylessMuon) {
  const Matrix w0 = gaussian(4, 5, 3);
  auto params = one_param(w0);
  params[0].grad = gaussian(4, 5, 4);
  OptimState state = init_state(params);
  OptimConfig cfg = base_config(Period::finite(1));
  cfg.beta1 = cfg.beta2 = 0.0;
  step(state, params, cfg);
  const Matrix expected = w0 - cfg.eta_muon * newton_schulz(params[0].grad, cfg.ns_preset, 5);
  EXPECT_LT(max_abs_diff(params[0].value, expected), 1e-15);
}

TEST(Step, ConstantGradientSignSteps) {
  const Matrix w0 = Matrix::from_rows({{0.2, -0.1}, {0.4, 1.0}});
  const Matrix g = Matrix::from_rows({{1, 0}, {0, -1}});
  auto params = one_param(w0);
  OptimState state = init_state(params);
  OptimConfig cfg = base_config(Period::infinite());
  cfg.beta1 = cfg.beta2 = 0.9;
  cfg.eta_lion = 0.1;
  for (int t = 0; t < 3; ++t) {
    params[0].grad = g;
    EXPECT_EQ(step(state, params, cfg).branches[0], Branch::lion);
  }
  EXPECT_LT(max_abs_diff(params[0].value, w0 - 0.3 * g), 1e-15);
}

TEST(Step, MuonRmsScaleAppliesOnlyToSpectralSteps) {
  const Matrix w0(3, 8);
  const Matrix g = gaussian(3, 8, 6);
  for (Period p : {Period::finite(1), Period::infinite()}) {
    auto a = one_param(w0), b = one_param(w0);
    a[0].grad = b[0].grad = g;
    OptimState sa = init_state(a), sb = init_state(b);
    OptimConfig cfg = base_config(p);
    step(sa, a, cfg);
    cfg.ns_output_scale = NsOutputScale::muon_rms;
    step(sb, b, cfg);
    const double factor = p.is_infinite() ? 1.0 : 0.2 * std::sqrt(8.0);
    EXPECT_LT(max_abs_diff(b[0].value, factor * a[0].value), 1e-14);
  }
}

TEST(Step, ErrorsOnMismatchAndNonFinite) {
  auto params = one_param(Matrix(2, 2));
  OptimState state = init_state(params);
  const OptimConfig cfg = base_config(Period::finite(1));
  auto other = one_param(Matrix(3, 2));
  other[0].grad = Matrix(3, 2, 1.0);
  EXPECT_THROW(step(state, other, cfg), InvalidArgument);
  params[0].grad = Matrix(2, 3);
  EXPECT_THROW(step(state, params, cfg), InvalidArgument);
  params[0].grad = Matrix(2, 2);
  params[0].grad(0, 0) = NAN;
  EXPECT_THROW(step(state, params, cfg), InvalidArgument);
  EXPECT_EQ(state.step, 0);
  std::vector<ParamGroup> dup = {params[0], params[0]};
  EXPECT_THROW(init_state(dup), InvalidArgument);
}

TEST(Step, VectorParamsUseAdamWWithFixedLr) {
  std::vector<ParamGroup> params = {
      {"W", ParamKind::matrix2d, Matrix(2, 2), Matrix(2, 2)},
      {"b", ParamKind::vector1d, Matrix(1, 3), Matrix(1, 3)},
  };
  OptimState state = init_state(params);
  EXPECT_EQ(state.momentum.size(), 1u);
  EXPECT_EQ(state.adam.size(), 1u);
  OptimConfig cfg = base_config(Period::finite(1));
  cfg.schedule = ScheduleSpec{5, 10, 0.0};
  params[0].grad = Matrix::identity(2);
  params[1].grad = Matrix::from_rows({{2.0, -1.0, 0.0}});
  const auto rep = step(state, params, cfg);
  EXPECT_EQ(rep.branches[1], Branch::adamw);
  // first Adam step is −lr·g/(|g| + eps/…) ≈ −lr·sign(g), unaffected by the 0.2 warmup multiplier
  EXPECT_NEAR(params[1].value(0, 0), -1e-3, 1e-10);
  EXPECT_NEAR(params[1].value(0, 1), 1e-3, 1e-10);
  EXPECT_EQ(params[1].value(0, 2), 0.0);
}

TEST(AdamW, Examples) {
  Matrix w = Matrix::from_rows({{1.0, -2.0}});
  Matrix m(1, 2), v(1, 2);
  adamw_step(w, m, v, Matrix(1, 2), 1, 1e-3, 0.9, 0.999, 1e-8, 0.0);
  EXPECT_EQ(w, Matrix::from_rows({{1.0, -2.0}}));

  Matrix w2 = Matrix::from_rows({{1.0, -2.0}});
  Matrix m2(1, 2), v2(1, 2);
  adamw_step(w2, m2, v2, Matrix(1, 2), 1, 1e-3, 0.9, 0.999, 1e-8, 0.1);
  EXPECT_NEAR(w2(0, 0), 1.0 * 0.9999, 1e-15);
  EXPECT_NEAR(w2(0, 1), -2.0 * 0.9999, 1e-15);

  Matrix w3(1, 1), m3(1, 1), v3(1, 1);
  const Matrix g = Matrix::from_rows({{0.37}});
  adamw_step(w3, m3, v3, g, 1, 1e-3, 0.9, 0.999, 1e-8, 0.0);
  EXPECT_NEAR(m3(0, 0), 0.1 * 0.37, 1e-16);
  EXPECT_NEAR(v3(0, 0), 0.001 * 0.37 * 0.37, 1e-18);
  EXPECT_NEAR(w3(0, 0), -1e-3 * 0.37 / (0.37 + 1e-8), 1e-15);
  EXPECT_THROW(adamw_step(w3, m3, v3, Matrix(1, 2), 1, 1e-3, 0.9, 0.999, 1e-8, 0.0),
               InvalidArgument);
}

TEST(HeavyBall, EquivalentLr) {
  EXPECT_NEAR(hb_equivalent_lr(1e-3, 0.99), 1e-5, 1e-20);
  EXPECT_EQ(hb_equivalent_lr(0.25, 0.0), 0.25);
  EXPECT_NEAR(hb_equivalent_lr(2e-4, 0.9), 2e-5, 1e-20);
  EXPECT_THROW(hb_equivalent_lr(1.0, 1.0), InvalidArgument);
}

TEST(Clip, Examples) {
  std::vector<Matrix> one = {Matrix::from_rows({{0.6, 0.8}})};
  EXPECT_NEAR(clip_global(one, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(frobenius_norm(one[0]), 0.5, 1e-15);

  std::vector<Matrix> small = {Matrix::from_rows({{0.3}})};
  EXPECT_EQ(clip_global(small, 0.5), 1.0);
  EXPECT_EQ(small[0](0, 0), 0.3);

  std::vector<Matrix> two = {Matrix::from_rows({{3.0}}), Matrix::from_rows({{0.0, 4.0}})};
  EXPECT_NEAR(clip_global(two, 0.5), 0.1, 1e-15);
  EXPECT_NEAR(two[0](0, 0), 0.3, 1e-15);
  EXPECT_NEAR(two[1](0, 1), 0.4, 1e-15);
}

TEST(Adaptive, Examples) {
  std::mt19937_64 rng(12);
  const Matrix r1 = matmul(gaussian_matrix(64, 1, rng), gaussian_matrix(1, 64, rng));
  EXPECT_EQ(adaptive_branch(r1, 0.01, 20, 3), Branch::lion);
  EXPECT_EQ(adaptive_branch(r1, 0.1, 20, 3), Branch::muon);
  EXPECT_EQ(adaptive_branch(Matrix::identity(6), 1.0, 20, 0), Branch::muon);
  EXPECT_EQ(adaptive_branch(Matrix(4, 4), 1.0, 20, 0), Branch::lion);
  EXPECT_EQ(adaptive_branch(r1, 0.05, 20, 7), adaptive_branch(r1, 0.05, 20, 7));
}

TEST(Adaptive, ColdStartInspectsGradient) {
  // t = 0 sees the rank-1 gradient (muon at alpha 0.5); later steps see the buffer.
  std::mt19937_64 rng(4);
  const Matrix r1 = matmul(gaussian_matrix(8, 1, rng), gaussian_matrix(1, 8, rng));
  auto params = one_param(Matrix(8, 8));
  OptimState state = init_state(params);
  OptimConfig cfg = base_config(Period::finite(1));
  cfg.branch_mode = BranchMode::adaptive;
  cfg.adaptive_alpha = 0.5;
  params[0].grad = r1;
  EXPECT_EQ(step(state, params, cfg).branches[0], Branch::muon);
  params[0].grad = gaussian_matrix(8, 8, rng);
  EXPECT_EQ(step(state, params, cfg).branches[0], Branch::muon);  // buffer is still rank 1
}

TEST(Properties, SpecialCasesMatchReferenceLoopsBitForBit) {
  const Matrix target = gaussian(5, 7, 100);
  const long T = 100;
  struct Case {
    Period p;
    double b1, b2;
    int kind;  // 0 Muon, 1 Signum, 2 Lion
  };
  for (const Case c : {Case{Period::finite(1), 0.9, 0.9, 0}, Case{Period::infinite(), 0.9, 0.9, 1},
                       Case{Period::infinite(), 0.9, 0.99, 2}}) {
    OptimConfig cfg = base_config(c.p);
    cfg.beta1 = c.b1;
    cfg.beta2 = c.b2;
    cfg.weight_decay = 0.05;
    auto params = one_param(Matrix(5, 7));
    OptimState state = init_state(params);

    Matrix w(5, 7), m(5, 7);
    for (long t = 0; t < T; ++t) {
      params[0].grad = synthetic_grad(params[0].value, target, 9, t);
      step(state, params, cfg);

      const Matrix g = synthetic_grad(w, target, 9, t);
      Matrix d;
      double eta = cfg.eta_lion;
      if (c.kind == 2) {
        Matrix cmix(5, 7);
        for (std::size_t i = 0; i < g.size(); ++i)
          cmix.values()[i] = c.b1 * m.values()[i] + (1.0 - c.b1) * g.values()[i];
        d = sign_elem(cmix);
      }
      for (std::size_t i = 0; i < g.size(); ++i)
        m.values()[i] = c.b2 * m.values()[i] + (1.0 - c.b2) * g.values()[i];
      if (c.kind == 0) {
        d = newton_schulz(m, cfg.ns_preset, cfg.ns_steps);
        eta = cfg.eta_muon;
      } else if (c.kind == 1) {
        d = sign_elem(m);
      }
      for (std::size_t i = 0; i < w.size(); ++i)
        w.values()[i] = w.values()[i] - eta * (d.values()[i] + cfg.weight_decay * w.values()[i]);
    }
    EXPECT_EQ(max_abs_diff(params[0].value, w), 0.0) << "case " << c.kind;
  }
}

TEST(Properties, PositiveScaleInvariance) {
  const Matrix target = gaussian(6, 4, 200);
  for (Period p : {Period::finite(1), Period::finite(3), Period::infinite()}) {
    OptimConfig cfg = base_config(p);
    cfg.weight_decay = 0.1;
    std::vector<Matrix> finals;
    for (double c : {1.0, 1e-3, 1e3}) {
      auto params = one_param(Matrix(6, 4));
      OptimState state = init_state(params);
      for (long t = 0; t < 60; ++t) {
        params[0].grad = c * synthetic_grad(params[0].value, target, 5, t);
        step(state, params, cfg);
      }
      finals.push_back(params[0].value);
    }
    // Sign and msign ignore the scale; only last-bit rounding of the normalization differs.
    EXPECT_LT(max_abs_diff(finals[0], finals[1]), 1e-10);
    EXPECT_LT(max_abs_diff(finals[0], finals[2]), 1e-10);
  }
}

TEST(Properties, BallConfinement) {
  const Matrix target = 10.0 * gaussian(6, 6, 300);
  for (NsPreset preset : {NsPreset::cubic_exact(), NsPreset::muon_quintic()}) {
    for (double lambda : {0.5, 2.0}) {
      OptimConfig cfg = base_config(Period::finite(3));
      cfg.ns_preset = preset;
      cfg.ns_steps = preset.default_iterations;
      cfg.weight_decay = lambda;
      cfg.eta_muon = 0.4 / lambda;
      cfg.eta_lion = 0.2 / lambda;
      cfg.schedule = ScheduleSpec{10, 300, 0.0};
      auto params = one_param(Matrix(6, 6));
      OptimState state = init_state(params);
      double worst = 0.0;
      for (long t = 0; t < 300; ++t) {
        params[0].grad = synthetic_grad(params[0].value, target, 11, t);
        step(state, params, cfg);
        worst = std::max(worst, matrix_norm(params[0].value, Norm::inf_elem));
      }
      EXPECT_LE(worst, 1.0 / lambda + 1e-12) << preset.name << " lambda " << lambda;
    }
  }
}

TEST(Properties, BranchScheduleCount) {
  for (long P : {1L, 2L, 3L, 7L}) {
    auto params = one_param(Matrix(2, 3));
    OptimState state = init_state(params);
    const OptimConfig cfg = base_config(Period::finite(P));
    const long T = 20;
    long count = 0;
    for (long t = 0; t < T; ++t) {
      params[0].grad = grad_stream(1, t, 2, 3);
      const bool muon = step(state, params, cfg).branches[0] == Branch::muon;
      count += muon;
      EXPECT_EQ(muon, t % P == 0);
    }
    EXPECT_EQ(count, (T + P - 1) / P);
  }
}
