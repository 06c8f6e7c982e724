#include <gtest/gtest.h>

#include <cmath>

#include "lmo_optim/linalg.hpp"
#include "lmo_optim/rng.hpp"
#include "test_util.hpp"

using namespace lmo;
using lmo::testing::gaussian;
using lmo::testing::ref_msign;
using lmo::testing::ref_nuclear;
using lmo::testing::ref_singular_values;

namespace {

Matrix reconstruct(const SvdResult& r) {
  Matrix us = r.U;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= r.S[j];
  return matmul(us, r.V.transpose());
}

double orthonormality_error(const Matrix& q) {
  const Matrix g = matmul(q.transpose(), q);
  return max_abs_diff(g, Matrix::identity(g.rows()));
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndBadSize) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), InvalidArgument);
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1, NAN}), InvalidArgument);
  EXPECT_THROW(Matrix(1, 1, std::vector<double>{INFINITY}), InvalidArgument);
  const Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.transpose()(2, 1), 6.0);
}

TEST(Matrix, MatmulSmall) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  EXPECT_EQ(matmul(a, b), Matrix::from_rows({{19, 22}, {43, 50}}));
  EXPECT_THROW(matmul(a, Matrix(3, 1)), InvalidArgument);
}

TEST(Norms, Examples) {
  EXPECT_DOUBLE_EQ(matrix_norm(Matrix::from_rows({{3, 4}, {0, 0}}), Norm::fro), 5.0);
  const Matrix i2 = Matrix::identity(2);
  EXPECT_NEAR(matrix_norm(i2, Norm::nuclear), 2.0, 1e-14);
  EXPECT_NEAR(matrix_norm(i2, Norm::spectral), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(matrix_norm(i2, Norm::l1_elem), 2.0);
  EXPECT_DOUBLE_EQ(matrix_norm(i2, Norm::inf_elem), 1.0);
  for (Norm n : {Norm::fro, Norm::inf_elem, Norm::l1_elem, Norm::spectral, Norm::nuclear})
    EXPECT_EQ(matrix_norm(Matrix(3, 2), n), 0.0);
}

TEST(Norms, ChainOnGaussian8x8AgainstOracle) {
  const Matrix x = gaussian(8, 8, 7);
  const auto s = ref_singular_values(x);
  const double inf = matrix_norm(x, Norm::inf_elem), sp = s(0), fro = frobenius_norm(x);
  const double nuc = s.sum(), l1 = matrix_norm(x, Norm::l1_elem);
  EXPECT_NEAR(matrix_norm(x, Norm::spectral), sp, 1e-12 * sp);
  EXPECT_NEAR(matrix_norm(x, Norm::nuclear), nuc, 1e-12 * nuc);
  EXPECT_LE(inf, sp);
  EXPECT_LE(sp, fro);
  EXPECT_LE(fro, 8 * inf);
  EXPECT_LE(l1 / 8, fro);
  EXPECT_LE(fro, nuc);
  EXPECT_LE(nuc, l1);
}

TEST(Norms, ChainProperty200Matrices) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dm(1, 32), dn(1, 48);
  for (int k = 0; k < 200; ++k) {
    const std::size_t m = dm(rng), n = dn(rng);
    const Matrix x = gaussian_matrix(m, n, rng);
    const double inf = matrix_norm(x, Norm::inf_elem), sp = matrix_norm(x, Norm::spectral);
    const double fro = frobenius_norm(x), nuc = matrix_norm(x, Norm::nuclear);
    const double l1 = matrix_norm(x, Norm::l1_elem), r = std::sqrt(double(m * n));
    EXPECT_GE(sp - inf, -1e-10);
    EXPECT_GE(fro - sp, -1e-10);
    EXPECT_GE(r * inf - fro, -1e-10);
    EXPECT_GE(fro - l1 / r, -1e-10);
    EXPECT_GE(nuc - fro, -1e-10);
    EXPECT_GE(l1 - nuc, -1e-10);
  }
}

TEST(Svd, DiagonalWithNegativeEntry) {
  const auto r = svd(Matrix::diag({2, -3}));
  ASSERT_EQ(r.S.size(), 2u);
  EXPECT_NEAR(r.S[0], 3.0, 1e-14);
  EXPECT_NEAR(r.S[1], 2.0, 1e-14);
  EXPECT_LT(max_abs_diff(reconstruct(r), Matrix::diag({2, -3})), 1e-14);
}

TEST(Svd, ZeroMatrixHasOrthonormalCompletion) {
  const auto r = svd(Matrix(3, 2));
  EXPECT_EQ(r.S, (std::vector<double>{0.0, 0.0}));
  EXPECT_LT(orthonormality_error(r.U), 1e-10);
  EXPECT_LT(orthonormality_error(r.V), 1e-10);
}

TEST(Svd, Gaussian16x9Reconstruction) {
  const Matrix x = gaussian(16, 9, 11);
  const auto r = svd(x);
  EXPECT_LT(frobenius_norm(reconstruct(r) - x), 1e-9 * frobenius_norm(x));
  EXPECT_LT(orthonormality_error(r.U), 1e-10);
  EXPECT_LT(orthonormality_error(r.V), 1e-10);
  const auto ref = ref_singular_values(x);
  for (std::size_t k = 0; k < r.S.size(); ++k) EXPECT_NEAR(r.S[k], ref(k), 1e-12 * ref(0));
}

TEST(Svd, InvariantsOnRandomShapesIncludingRankDeficient) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(1, 20);
  for (int k = 0; k < 40; ++k) {
    const std::size_t m = d(rng), n = d(rng);
    Matrix x = gaussian_matrix(m, n, rng);
    if (k % 4 == 0 && m > 1) {  // duplicate a row
      for (std::size_t j = 0; j < n; ++j) x(1, j) = x(0, j);
    }
    const auto r = svd(x);
    EXPECT_TRUE(std::is_sorted(r.S.rbegin(), r.S.rend()));
    for (double s : r.S) EXPECT_GE(s, 0.0);
    EXPECT_LT(frobenius_norm(reconstruct(r) - x), 1e-9 * frobenius_norm(x));
    EXPECT_LT(orthonormality_error(r.U), 1e-10);
    EXPECT_LT(orthonormality_error(r.V), 1e-10);
  }
}

TEST(Svd, SweepCapRaisesConvergenceError) {
  SvdOptions o;
  o.max_sweeps = 1;
  EXPECT_THROW(svd(gaussian(12, 12, 3), o), ConvergenceError);
}

TEST(Msign, DiagonalIsElementSign) {
  EXPECT_LT(max_abs_diff(msign(Matrix::diag({2, -3})), Matrix::diag({1, -1})), 1e-14);
  EXPECT_EQ(msign(Matrix(2, 3)), Matrix(2, 3));
}

TEST(Msign, HomogeneityIdempotenceAndOracle) {
  const Matrix x = gaussian(6, 6, 3);
  const Matrix base = msign(x);
  EXPECT_LT(max_abs_diff(msign(1e-3 * x), base), 1e-12);
  EXPECT_LT(max_abs_diff(msign(1e3 * x), base), 1e-12);
  EXPECT_LT(max_abs_diff(base, ref_msign(x)), 1e-10);

  const Matrix y = gaussian(8, 8, 5);
  const Matrix my = msign(y);
  EXPECT_LT(max_abs_diff(msign(my), my), 1e-10);
  for (double s : singular_values(my)) EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(Msign, RankDeficientOutputSpectrumIsZeroOrOne) {
  std::mt19937_64 rng(9);
  const Matrix x = matmul(gaussian_matrix(7, 2, rng), gaussian_matrix(2, 5, rng));
  const auto s = singular_values(msign(x));
  int ones = 0;
  for (double v : s) {
    if (std::abs(v - 1.0) <= 1e-9)
      ++ones;
    else
      EXPECT_LT(v, 1e-9);
  }
  EXPECT_EQ(ones, 2);
  EXPECT_LT(max_abs_diff(msign(x), ref_msign(x)), 1e-9);
}

TEST(SignElem, Examples) {
  const Matrix x = Matrix::from_rows({{0.5, -2}, {0, 7}});
  EXPECT_EQ(sign_elem(x), Matrix::from_rows({{1, -1}, {0, 1}}));
  EXPECT_EQ(sign_elem(3.5 * x), sign_elem(x));
  EXPECT_EQ(matrix_norm(sign_elem(x), Norm::inf_elem), 1.0);
}

TEST(NewtonSchulz, CubicExactMatchesMsign) {
  const Matrix out = newton_schulz(Matrix::diag({2, -3}), NsPreset::cubic_exact(), 30);
  EXPECT_LT(frobenius_norm(out - Matrix::diag({1, -1})), 1e-6);
  std::mt19937_64 rng(21);
  for (auto [m, n] : {std::pair{5, 9}, std::pair{9, 5}, std::pair{12, 12}}) {
    const Matrix x = conditioned_matrix(m, n, 1e-2, rng);
    EXPECT_LT(frobenius_norm(newton_schulz(x, NsPreset::cubic_exact(), 30) - ref_msign(x)), 1e-6);
  }
}

TEST(NewtonSchulz, QuinticAlignmentOnGaussian8x8) {
  const Matrix x = gaussian(8, 8, 13);
  const Matrix y = newton_schulz(x, NsPreset::muon_quintic(), 5);
  EXPECT_GE(inner(y, ref_msign(x)) / 8.0, 0.85);
  for (double s : singular_values(y)) {
    EXPECT_GE(s, 0.3);
    EXPECT_LE(s, 1.7);
  }
}

TEST(NewtonSchulz, ScaleFreeAndErrors) {
  const Matrix x = gaussian(4, 7, 2);
  const Matrix base = newton_schulz(x, NsPreset::muon_quintic(), 5);
  EXPECT_LT(max_abs_diff(newton_schulz(4.0 * x, NsPreset::muon_quintic(), 5), base), 1e-12);
  EXPECT_THROW(newton_schulz(Matrix(2, 2), NsPreset::muon_quintic(), 5), InvalidArgument);
  EXPECT_THROW(newton_schulz(x, NsPreset::muon_quintic(), 0), InvalidArgument);
  EXPECT_EQ(NsPreset::by_name("cubic_exact").coefficients, (std::array<double, 3>{1.5, -0.5, 0.0}));
  EXPECT_THROW(NsPreset::by_name("nope"), InvalidArgument);
}

TEST(NewtonSchulz, TallInputUsesTransposeTransparently) {
  const Matrix x = gaussian(9, 4, 8);
  const Matrix tall = newton_schulz(x, NsPreset::muon_quintic(), 5);
  const Matrix wide = newton_schulz(x.transpose(), NsPreset::muon_quintic(), 5);
  EXPECT_LT(max_abs_diff(tall, wide.transpose()), 1e-13);
}

TEST(Lmo, Examples) {
  const Matrix i2 = Matrix::identity(2);
  const Matrix s = lmo::lmo(i2, Norm::spectral, 1.0);
  EXPECT_LT(max_abs_diff(s, -1.0 * i2), 1e-14);
  EXPECT_NEAR(inner(i2, s), -2.0, 1e-14);

  const Matrix g = Matrix::from_rows({{1, -1}});
  const Matrix e = lmo::lmo(g, Norm::inf_elem, 0.5);
  EXPECT_EQ(e, Matrix::from_rows({{-0.5, 0.5}}));
  EXPECT_DOUBLE_EQ(inner(g, e), -1.0);

  const Matrix r = gaussian(5, 7, 17);
  EXPECT_NEAR(inner(r, lmo::lmo(r, Norm::spectral, 1.0)) + ref_nuclear(r), 0.0, 1e-9);
  EXPECT_NEAR(-inner(r, lmo::lmo(r, Norm::inf_elem, 1.0)), matrix_norm(r, Norm::l1_elem), 1e-12);
}

TEST(PowerIteration, Examples) {
  EXPECT_NEAR(power_iter_sigma1(Matrix::diag({5, 1}), 20, 0), 5.0, 1e-6);
  const Matrix u = Matrix::from_rows({{1}, {2}, {-2}});
  const Matrix v = Matrix::from_rows({{3, 4}});
  EXPECT_NEAR(power_iter_sigma1(matmul(u, v), 20, 4), 15.0, 1e-9);
  const Matrix x = gaussian(32, 32, 19);
  const double s1 = ref_singular_values(x)(0);
  EXPECT_NEAR(power_iter_sigma1(x, 20, 19), s1, 0.05 * s1);
  EXPECT_EQ(power_iter_sigma1(Matrix(3, 3), 20, 1), 0.0);
}

TEST(PowerIteration, NeverExceedsSigma1AndIsDeterministic) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 30; ++k) {
    const Matrix x = gaussian_matrix(1 + k % 13, 1 + (k * 7) % 17, rng);
    const double s1 = ref_singular_values(x)(0);
    const double est = power_iter_sigma1(x, 20, k);
    EXPECT_LE(est, s1 * (1 + 1e-12));
    EXPECT_EQ(est, power_iter_sigma1(x, 20, k));
  }
}

TEST(StableRank, Examples) {
  const Matrix r1 = matmul(Matrix::from_rows({{1}, {2}}), Matrix::from_rows({{2, 1, 0}}));
  EXPECT_NEAR(stable_rank(r1, ref_singular_values(r1)(0)), 1.0, 1e-12);
  EXPECT_NEAR(stable_rank(Matrix::identity(5), 1.0), 5.0, 1e-14);
  EXPECT_NEAR(stable_rank(Matrix::diag({2, 1, 1}), 2.0), 1.5, 1e-15);
  EXPECT_THROW(stable_rank(r1, 0.0), InvalidArgument);
}

TEST(Rng, KeyedStreamsAreDistinctAndReplayable) {
  auto a = keyed_engine({1, 2, 3});
  auto b = keyed_engine({1, 2, 3});
  auto c = keyed_engine({1, 3, 2});
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
}
