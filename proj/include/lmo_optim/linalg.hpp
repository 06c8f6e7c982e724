#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lmo_optim/matrix.hpp"

namespace lmo {

enum class Norm { fro, inf_elem, l1_elem, spectral, nuclear };

std::string to_string(Norm n);
Norm norm_from_string(const std::string& s);

struct SvdResult {
  Matrix U;               // m×k, k = min(m, n)
  std::vector<double> S;  // descending, non-negative
  Matrix V;               // n×k
};

struct SvdOptions {
  double tolerance = 1e-12;
  int max_sweeps = 60;
};

/// Thin SVD by one-sided Jacobi (Hestenes). Deterministic. Columns of U and
/// V belonging to zero singular values are an orthonormal completion.
/// Throws ConvergenceError when `max_sweeps` is exhausted.
SvdResult svd(const Matrix& x, const SvdOptions& options = {});

/// Singular values only (same algorithm as svd).
std::vector<double> singular_values(const Matrix& x, const SvdOptions& options = {});

double matrix_norm(const Matrix& x, Norm which);
double frobenius_norm(const Matrix& x);

/// U·Vᵀ over singular values above 1e-12·σ₁; msign(0) = 0.
Matrix msign(const Matrix& x);

/// Element-wise sign with sign(0) = 0.
Matrix sign_elem(const Matrix& x);

/// Coefficients of the odd polynomial X ← aX + b(XXᵀ)X + c(XXᵀ)²X.
struct NsPreset {
  std::string name;
  std::array<double, 3> coefficients{};
  int default_iterations = 5;

  static NsPreset cubic_exact();   // (1.5, -0.5, 0), K = 30
  static NsPreset muon_quintic();  // (3.4445, -4.7750, 2.0315), K = 5
  static NsPreset by_name(const std::string& name);

  friend bool operator==(const NsPreset&, const NsPreset&) = default;
};

/// Newton–Schulz approximation of msign. The input is divided by
/// ‖X‖_F·(1+1e-7) first; wide orientation is used internally so the Gram
/// matrix is the smaller square. Throws InvalidArgument on a zero input or K < 1.
Matrix newton_schulz(const Matrix& x, const NsPreset& preset, int iterations);

/// Linear minimization oracle over the ball of `radius` in the given primal
/// norm (spectral or inf_elem).
Matrix lmo(const Matrix& g, Norm norm, double radius);

/// Power-iteration estimate of σ₁ from a seeded start vector. The estimate is
/// ‖X v‖ for a unit v, hence never above σ₁ beyond rounding. Zero matrix → 0.
double power_iter_sigma1(const Matrix& x, int iterations, std::uint64_t seed);

/// ‖X‖_F² / σ̂₁².
double stable_rank(const Matrix& x, double sigma1_hat);

/// i.i.d. N(0, 1) entries.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

/// Columns form an orthonormal basis of a random k-dimensional subspace of ℝ^m (k ≤ m).
Matrix random_orthonormal(std::size_t m, std::size_t k, std::mt19937_64& rng);

/// U·diag(s)·Vᵀ with random orthonormal factors and the given spectrum
/// (length min(m, n)).
Matrix matrix_with_spectrum(std::size_t m, std::size_t n, std::span<const double> s,
                            std::mt19937_64& rng);

/// Random m×n matrix whose singular values are log-uniform in
/// [min_ratio, 1]·scale with both endpoints present; scale is log-uniform in [0.1, 10].
Matrix conditioned_matrix(std::size_t m, std::size_t n, double min_ratio, std::mt19937_64& rng);

}  // namespace lmo
