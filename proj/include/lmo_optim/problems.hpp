#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lmo_optim/matrix.hpp"
#include "lmo_optim/optim.hpp"

namespace lmo {

enum class ProblemFamily { quadratic_diag, logistic, mlp2 };
std::string to_string(ProblemFamily f);
ProblemFamily problem_family_from_string(const std::string& s);

/// Shape fields used per family:
///   quadratic_diag  rows × cols parameter, curvature h log-uniform in [h_min, h_max]
///   logistic        classes × features weights plus a class bias
///   mlp2            hidden × features, outputs × hidden, with biases
struct ProblemSpec {
  ProblemFamily family = ProblemFamily::quadratic_diag;
  long rows = 8;
  long cols = 8;
  long features = 8;
  long classes = 4;
  long hidden = 16;
  long outputs = 2;
  long samples = 128;
  std::uint64_t data_seed = 0;
  double h_min = 1.0;
  double h_max = 1.0;
  double target_scale = 1.0;
  /// Rank of W* (0 = full Gaussian target).
  long target_rank = 0;
  /// Explicit curvature / target (quadratic only); override the generated ones.
  std::optional<Matrix> h;
  std::optional<Matrix> w_star;

  void validate() const;
  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

enum class NoiseFamily { none, gaussian, student_t };
std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::none;
  double scale = 0.0;
  double dof = 3.0;
  double kappa_target = 1.5;

  void validate() const;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// I.i.d. zero-mean noise of the given shape drawn from `rng`.
Matrix sample_noise(const NoiseSpec& noise, std::size_t rows, std::size_t cols,
                    std::mt19937_64& rng);

/// (mean ‖D‖_F^κ)^{1/κ}. Throws on an empty list or κ outside (1, 2].
double estimate_kappa_moment(std::span<const Matrix> samples, double kappa);

struct AnalyticConstants {
  double Linf_exact = 0.0;
  double L2_upper = 0.0;
  double L2_lower = 0.0;
};

/// A materialized objective: the dataset (or curvature and target) is
/// generated once from its ProblemSpec and kept read-only.
class Problem {
 public:
  explicit Problem(ProblemSpec spec);

  const ProblemSpec& spec() const { return spec_; }
  /// Deterministic starting point (zeros for the convex families).
  std::vector<ParamGroup> initial_params() const;
  /// Loss at the given values.
  double loss(std::span<const ParamGroup> params) const;
  /// Loss plus the exact gradient written into each param's grad.
  double loss_and_grad(std::span<ParamGroup> params) const;
  /// Multiply-add count of one loss_and_grad call.
  double flops_per_grad() const;
  /// Lower bound of the loss when known (0 for the quadratic).
  std::optional<double> f_star() const;

  const Matrix& curvature() const;  // quadratic only
  const Matrix& target() const;     // quadratic only

 private:
  void check_params(std::span<const ParamGroup> params) const;
  double eval(std::span<const ParamGroup> params, std::span<ParamGroup> grads_out) const;

  ProblemSpec spec_;
  Matrix h_;
  Matrix w_star_;
  Matrix x_;  // samples × features
  Matrix y_;  // logistic: 1 × samples labels; mlp2: samples × outputs targets
  std::vector<ParamGroup> init_;
};

/// Exact for the quadratic family; throws for the others.
AnalyticConstants analytic_constants(const Problem& problem);

/// Central differences per coordinate against the exact gradient; returns
/// max |fd − exact| / max(1, |exact|).
double fd_gradient_check(const Problem& problem, std::span<const ParamGroup> params,
                         double step_size);

}  // namespace lmo
