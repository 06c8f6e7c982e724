#include "lmo_optim/flops.hpp"

#include <algorithm>
#include <utility>

namespace lmo::flops {

void ModelShape::validate() const {
  if (layers < 1 || dim < 1 || seq_len < 1 || batch < 1 || vocab < 1)
    throw InvalidArgument("model shape '" + name + "': dimensions must be positive");
  std::int64_t sum = vector_params;
  for (const auto& p : param_matrices) {
    if (p.rows < 1 || p.cols < 1)
      throw InvalidArgument("model shape '" + name + "': matrix " + p.name + " is empty");
    sum += p.rows * p.cols;
  }
  if (sum != total_params)
    throw InvalidArgument("model shape '" + name + "': total_params " +
                          std::to_string(total_params) + " != " + std::to_string(sum));
}

ModelShape transformer_shape(std::string name, std::int64_t layers, std::int64_t dim,
                             std::int64_t seq_len, std::int64_t batch, std::int64_t vocab) {
  ModelShape s;
  s.name = std::move(name);
  s.layers = layers;
  s.dim = dim;
  s.seq_len = seq_len;
  s.batch = batch;
  s.vocab = vocab;
  s.param_matrices.push_back({"wte", vocab, dim, true});
  s.param_matrices.push_back({"wpe", seq_len, dim, true});
  for (std::int64_t l = 0; l < layers; ++l) {
    const std::string p = "h" + std::to_string(l) + ".";
    s.param_matrices.push_back({p + "attn.qkv", dim, 3 * dim, false});
    s.param_matrices.push_back({p + "attn.proj", dim, dim, false});
    s.param_matrices.push_back({p + "mlp.fc", dim, 4 * dim, false});
    s.param_matrices.push_back({p + "mlp.proj", 4 * dim, dim, false});
  }
  s.vector_params = layers * 4 * dim + 2 * dim;
  s.total_params = s.vector_params;
  for (const auto& m : s.param_matrices) s.total_params += m.rows * m.cols;
  s.validate();
  return s;
}

ModelShape shape_124m() { return transformer_shape("124M", 12, 768, 512, 32, 50304); }
ModelShape shape_355m() { return transformer_shape("355M", 24, 1024, 1024, 512, 50304); }
ModelShape shape_720m() { return transformer_shape("720M", 12, 2048, 512, 1984, 50304); }

ModelShape shape_by_name(const std::string& name) {
  if (name == "124M") return shape_124m();
  if (name == "355M") return shape_355m();
  if (name == "720M") return shape_720m();
  throw InvalidArgument("unknown model shape '" + name + "' (expected 124M, 355M or 720M)");
}

std::uint64_t matmul_flops(std::uint64_t p, std::uint64_t q, std::uint64_t r) {
  return 2 * p * q * r;
}

std::uint64_t ns_flops(std::uint64_t m, std::uint64_t n, int K) {
  if (K < 1) throw InvalidArgument("ns_flops: K must be >= 1");
  const std::uint64_t s = std::min(m, n);
  const std::uint64_t t = std::max(m, n);
  // XXᵀ, A·A, then B·X
  const std::uint64_t per_iter = matmul_flops(s, t, s) + matmul_flops(s, s, s) + matmul_flops(s, s, t);
  return static_cast<std::uint64_t>(K) * per_iter + 2 * s * t;
}

double train_step_flops(const ModelShape& shape, const FlopOptions& options) {
  const double tokens = static_cast<double>(shape.tokens_per_step());
  double f = 6.0 * static_cast<double>(shape.total_params) * tokens;
  if (options.include_attention) {
    f += 12.0 * static_cast<double>(shape.layers) * static_cast<double>(shape.batch) *
         static_cast<double>(shape.seq_len) * static_cast<double>(shape.seq_len) *
         static_cast<double>(shape.dim);
  }
  return f;
}

std::vector<MatrixCost> optimizer_breakdown(const ModelShape& shape, Period period, int K,
                                            const FlopOptions& options) {
  std::vector<MatrixCost> out;
  for (const auto& p : shape.param_matrices) {
    if (p.embedding && !options.include_embeddings) continue;
    MatrixCost c{p.name, p.rows, p.cols};
    c.ns = static_cast<double>(ns_flops(static_cast<std::uint64_t>(p.rows),
                                        static_cast<std::uint64_t>(p.cols), K));
    c.sign = static_cast<double>(p.rows) * static_cast<double>(p.cols);
    if (period.is_infinite()) {
      c.amortized = c.sign;
    } else if (period.value() == 1) {
      c.amortized = c.ns;
    } else {
      const double P = static_cast<double>(period.value());
      c.amortized = c.ns / P + (P - 1.0) / P * c.sign;
    }
    out.push_back(std::move(c));
  }
  return out;
}

double optimizer_amortized_flops(const ModelShape& shape, Period period, int K,
                                 const FlopOptions& options) {
  double total = 0.0;
  for (const auto& c : optimizer_breakdown(shape, period, K, options)) total += c.amortized;
  return total;
}

double optimizer_amortized_flops(const ModelShape& shape, const OptimConfig& config,
                                 const FlopOptions& options) {
  return optimizer_amortized_flops(shape, config.period, config.ns_steps, options);
}

double ns_share(const ModelShape& shape, int K, const FlopOptions& options) {
  const double opt = optimizer_amortized_flops(shape, Period::finite(1), K, options);
  return opt / (train_step_flops(shape, options) + opt);
}

double total_flop_reduction(const ModelShape& shape, Period period, int K,
                            const FlopOptions& options) {
  const double train = train_step_flops(shape, options);
  const double base = train + optimizer_amortized_flops(shape, Period::finite(1), K, options);
  const double alt = train + optimizer_amortized_flops(shape, period, K, options);
  return 1.0 - alt / base;
}

double all_gather_bytes(const ModelShape& shape, int bytes_per_element,
                        const FlopOptions& options) {
  double total = 0.0;
  for (const auto& p : shape.param_matrices) {
    if (p.embedding && !options.include_embeddings) continue;
    total += static_cast<double>(p.rows) * static_cast<double>(p.cols);
  }
  return total * bytes_per_element;
}

}  // namespace lmo::flops
