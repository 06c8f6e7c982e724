#include "lmo_optim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lmo {

double alpha_ratio(const Matrix& g) {
  if (g.is_zero()) throw InvalidArgument("alpha_ratio: zero gradient");
  return matrix_norm(g, Norm::l1_elem) / matrix_norm(g, Norm::nuclear);
}

double noise_level_hat(const Matrix& g, const Matrix& m, Norm which) {
  const Matrix diff = g - m;
  if (diff.is_zero()) throw InvalidArgument("noise_level_hat: G equals M");
  if (which != Norm::nuclear && which != Norm::l1_elem)
    throw InvalidArgument("noise_level_hat: norm must be nuclear or l1_elem");
  return matrix_norm(diff, which) / frobenius_norm(diff);
}

double smoothness_hat(const Matrix& dg, const Matrix& dw, Norm primal) {
  require_same_shape(dg, dw, "smoothness_hat");
  if (dw.is_zero()) throw InvalidArgument("smoothness_hat: zero parameter difference");
  switch (primal) {
    case Norm::spectral:
      return matrix_norm(dg, Norm::nuclear) / matrix_norm(dw, Norm::spectral);
    case Norm::inf_elem:
      return matrix_norm(dg, Norm::l1_elem) / matrix_norm(dw, Norm::inf_elem);
    default:
      throw InvalidArgument("smoothness_hat: primal norm must be spectral or inf_elem");
  }
}

double period_avg_grad_metric(std::span<const double> norms, double eta_muon, double eta_lion,
                              long period) {
  if (period < 1) throw InvalidArgument("period_avg_grad_metric: period must be >= 1");
  if (norms.size() != static_cast<std::size_t>(period)) {
    throw InvalidArgument("period_avg_grad_metric: expected " + std::to_string(period) +
                          " entries, got " + std::to_string(norms.size()));
  }
  double num = eta_muon * norms[0];
  double lion_sum = 0.0;
  for (std::size_t j = 1; j < norms.size(); ++j) lion_sum += norms[j];
  num += eta_lion * lion_sum;
  return num / (eta_muon + static_cast<double>(period - 1) * eta_lion);
}

double period_avg_grad_metric_lion(std::span<const double> l1_norms) {
  if (l1_norms.empty()) throw InvalidArgument("period_avg_grad_metric_lion: empty list");
  return std::accumulate(l1_norms.begin(), l1_norms.end(), 0.0) /
         static_cast<double>(l1_norms.size());
}

double fw_gap(const Matrix& w, const Matrix& grad, double lambda, Norm ball) {
  if (!(lambda > 0.0)) throw InvalidArgument("fw_gap: lambda must be > 0");
  double dual = 0.0;
  switch (ball) {
    case Norm::spectral: dual = matrix_norm(grad, Norm::nuclear); break;
    case Norm::inf_elem: dual = matrix_norm(grad, Norm::l1_elem); break;
    default: throw InvalidArgument("fw_gap: ball must be spectral or inf_elem");
  }
  return dual / lambda + inner(w, grad);
}

void BlockNorms::add(const Matrix& x, bool with_spectrum) {
  for (double v : x.values()) {
    l1 += std::abs(v);
    fro_sq += v * v;
    inf = std::max(inf, std::abs(v));
  }
  if (with_spectrum && !x.is_zero()) {
    const auto s = singular_values(x);
    nuclear += std::accumulate(s.begin(), s.end(), 0.0);
    spectral = std::max(spectral, s.front());
  }
}

std::optional<double> QuantileSummary::median() const {
  if (values_.empty()) return std::nullopt;
  std::vector<double> v = values_;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

std::optional<double> QuantileSummary::max() const {
  if (values_.empty()) return std::nullopt;
  return *std::max_element(values_.begin(), values_.end());
}

}  // namespace lmo
