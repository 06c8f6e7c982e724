#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmo_optim/optim.hpp"

namespace lmo::flops {

struct MatrixParam {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  bool embedding = false;
};

/// Decoder-only transformer shape. param_matrices holds every 2D parameter;
/// vector_params counts the 1D ones (norm gains/biases).
struct ModelShape {
  std::string name;
  std::int64_t layers = 0;
  std::int64_t dim = 0;
  std::int64_t seq_len = 0;
  std::int64_t batch = 0;
  std::int64_t vocab = 0;
  std::vector<MatrixParam> param_matrices;
  std::int64_t vector_params = 0;
  std::int64_t total_params = 0;

  std::int64_t tokens_per_step() const { return batch * seq_len; }
  /// Throws InvalidArgument when total_params disagrees with the parts.
  void validate() const;
};

/// GPT-style block: QKV d×3d, out-proj d×d, MLP d×4d and 4d×d per layer,
/// token and position embeddings, two LayerNorms per layer plus a final one.
ModelShape transformer_shape(std::string name, std::int64_t layers, std::int64_t dim,
                             std::int64_t seq_len, std::int64_t batch, std::int64_t vocab);

ModelShape shape_124m();
ModelShape shape_355m();
ModelShape shape_720m();
/// "124M", "355M" or "720M".
ModelShape shape_by_name(const std::string& name);

struct FlopOptions {
  bool include_embeddings = true;  // embeddings take the orthogonalized update
  bool include_attention = true;   // 12·L·B·S²·d term in the step cost
  friend bool operator==(const FlopOptions&, const FlopOptions&) = default;
};

std::uint64_t matmul_flops(std::uint64_t p, std::uint64_t q, std::uint64_t r);

/// K·(4s²t + 2s³) + 2st with s = min(m,n), t = max(m,n). Throws for K < 1.
std::uint64_t ns_flops(std::uint64_t m, std::uint64_t n, int K);

/// 6·N·tokens (+ 12·L·B·S²·d when attention is included).
double train_step_flops(const ModelShape& shape, const FlopOptions& options = {});

struct MatrixCost {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  double ns = 0.0;
  double sign = 0.0;
  double amortized = 0.0;
};

/// Per-matrix amortized optimizer cost ns/P + ((P−1)/P)·mn; P = 1 keeps only
/// the NS term and P = ∞ only the sign term.
std::vector<MatrixCost> optimizer_breakdown(const ModelShape& shape, Period period, int K,
                                            const FlopOptions& options = {});
double optimizer_amortized_flops(const ModelShape& shape, Period period, int K,
                                 const FlopOptions& options = {});
double optimizer_amortized_flops(const ModelShape& shape, const OptimConfig& config,
                                 const FlopOptions& options = {});

/// NS share of a pure-Muon step: opt/(train + opt) at P = 1.
double ns_share(const ModelShape& shape, int K, const FlopOptions& options = {});

/// 1 − cost(P)/cost(1) for a whole run (train step plus optimizer).
double total_flop_reduction(const ModelShape& shape, Period period, int K,
                            const FlopOptions& options = {});

/// Bytes gathered per orthogonalized step: Σ m·n·bytes_per_element.
double all_gather_bytes(const ModelShape& shape, int bytes_per_element = 4,
                        const FlopOptions& options = {});

}  // namespace lmo::flops
