#include "lmo_optim/problems.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "lmo_optim/linalg.hpp"
#include "lmo_optim/rng.hpp"

namespace lmo {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;
constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr long kMlpParamCap = 10000;

Matrix gaussian_scaled(std::size_t r, std::size_t c, double s, std::mt19937_64& rng) {
  Matrix m = gaussian_matrix(r, c, rng);
  m *= s;
  return m;
}

ParamGroup make_param(std::string id, ParamKind kind, Matrix value) {
  Matrix grad(value.rows(), value.cols());
  return {std::move(id), kind, std::move(value), std::move(grad)};
}

}  // namespace

std::string to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::quadratic_diag: return "quadratic_diag";
    case ProblemFamily::logistic: return "logistic";
    case ProblemFamily::mlp2: return "mlp2";
  }
  return "?";
}

ProblemFamily problem_family_from_string(const std::string& s) {
  if (s == "quadratic_diag") return ProblemFamily::quadratic_diag;
  if (s == "logistic") return ProblemFamily::logistic;
  if (s == "mlp2") return ProblemFamily::mlp2;
  throw InvalidArgument("unknown problem family '" + s + "'");
}

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::none: return "none";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::student_t: return "student_t";
  }
  return "?";
}

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "none") return NoiseFamily::none;
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "student_t") return NoiseFamily::student_t;
  throw InvalidArgument("unknown noise family '" + s + "'");
}

void ProblemSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("problem: " + what);
  };
  switch (family) {
    case ProblemFamily::quadratic_diag:
      require(rows >= 1 && cols >= 1, "rows and cols must be >= 1");
      require(h_min > 0.0 && h_max >= h_min, "need 0 < h_min <= h_max");
      require(target_scale >= 0.0, "target_scale must be >= 0");
      require(target_rank >= 0 && target_rank <= std::min(rows, cols),
              "target_rank must lie in [0, min(rows, cols)]");
      if (h) {
        require(h->rows() == static_cast<std::size_t>(rows) &&
                    h->cols() == static_cast<std::size_t>(cols),
                "h shape must be rows x cols");
        for (double v : h->values()) require(v > 0.0, "h entries must be > 0");
      }
      if (w_star)
        require(w_star->rows() == static_cast<std::size_t>(rows) &&
                    w_star->cols() == static_cast<std::size_t>(cols),
                "w_star shape must be rows x cols");
      break;
    case ProblemFamily::logistic:
      require(features >= 1 && classes >= 2, "need features >= 1 and classes >= 2");
      require(samples >= 1, "samples must be >= 1");
      break;
    case ProblemFamily::mlp2:
      require(features >= 1 && hidden >= 1 && outputs >= 1, "mlp2 widths must be >= 1");
      require(samples >= 1, "samples must be >= 1");
      require(hidden * features + hidden + outputs * hidden + outputs <= kMlpParamCap,
              "mlp2 is limited to 10000 parameters");
      break;
  }
  if (family != ProblemFamily::quadratic_diag && (h || w_star))
    throw InvalidArgument("problem: h and w_star apply to quadratic_diag only");
}

void NoiseSpec::validate() const {
  if (!(scale >= 0.0)) throw InvalidArgument("noise: scale must be >= 0");
  if (!(kappa_target > 1.0 && kappa_target <= 2.0))
    throw InvalidArgument("noise: kappa_target must lie in (1, 2]");
  if (family == NoiseFamily::student_t && !(dof > 1.0 && dof > kappa_target))
    throw InvalidArgument("noise: student_t needs dof > 1 and dof > kappa_target");
}

Matrix sample_noise(const NoiseSpec& noise, std::size_t rows, std::size_t cols,
                    std::mt19937_64& rng) {
  noise.validate();
  Matrix out(rows, cols);
  if (noise.family == NoiseFamily::none || noise.scale == 0.0) return out;
  auto* d = out.values().data();
  if (noise.family == NoiseFamily::gaussian) {
    std::normal_distribution<double> dist(0.0, noise.scale);
    for (std::size_t i = 0; i < out.size(); ++i) d[i] = dist(rng);
  } else {
    std::student_t_distribution<double> dist(noise.dof);
    for (std::size_t i = 0; i < out.size(); ++i) d[i] = noise.scale * dist(rng);
  }
  return out;
}

double estimate_kappa_moment(std::span<const Matrix> samples, double kappa) {
  if (samples.empty()) throw InvalidArgument("estimate_kappa_moment: empty sample list");
  if (!(kappa > 1.0 && kappa <= 2.0))
    throw InvalidArgument("estimate_kappa_moment: kappa must lie in (1, 2]");
  double acc = 0.0;
  for (const auto& s : samples) acc += std::pow(frobenius_norm(s), kappa);
  return std::pow(acc / static_cast<double>(samples.size()), 1.0 / kappa);
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  auto rng = keyed_engine({spec_.data_seed, kDataStream});
  auto init_rng = keyed_engine({spec_.data_seed, kInitStream});
  const auto us = [](long v) { return static_cast<std::size_t>(v); };

  switch (spec_.family) {
    case ProblemFamily::quadratic_diag: {
      const std::size_t r = us(spec_.rows), c = us(spec_.cols);
      if (spec_.h) {
        h_ = *spec_.h;
      } else {
        h_ = Matrix(r, c);
        const double lo = std::log(spec_.h_min), hi = std::log(spec_.h_max);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < h_.size(); ++i)
          h_.values().data()[i] = std::exp(lo + (hi - lo) * u(rng));
      }
      if (spec_.w_star) {
        w_star_ = *spec_.w_star;
      } else if (spec_.target_rank > 0) {
        const std::size_t k = us(spec_.target_rank);
        w_star_ = matmul(gaussian_matrix(r, k, rng), gaussian_matrix(k, c, rng));
        w_star_ *= spec_.target_scale / std::sqrt(static_cast<double>(k));
      } else {
        w_star_ = gaussian_scaled(r, c, spec_.target_scale, rng);
      }
      init_.push_back(make_param("W", ParamKind::matrix2d, Matrix(r, c)));
      break;
    }
    case ProblemFamily::logistic: {
      const std::size_t n = us(spec_.samples), f = us(spec_.features), k = us(spec_.classes);
      const Matrix centers = gaussian_scaled(k, f, 1.5, rng);
      x_ = gaussian_matrix(n, f, rng);
      y_ = Matrix(1, n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % k;
        y_(0, i) = static_cast<double>(label);
        for (std::size_t j = 0; j < f; ++j) x_(i, j) += centers(label, j);
      }
      init_.push_back(make_param("W", ParamKind::matrix2d, Matrix(k, f)));
      init_.push_back(make_param("b", ParamKind::vector1d, Matrix(1, k)));
      break;
    }
    case ProblemFamily::mlp2: {
      const std::size_t n = us(spec_.samples), f = us(spec_.features);
      const std::size_t hd = us(spec_.hidden), o = us(spec_.outputs);
      x_ = gaussian_matrix(n, f, rng);
      const Matrix a1 = gaussian_scaled(hd, f, 1.0 / std::sqrt(static_cast<double>(f)), rng);
      const Matrix a2 = gaussian_scaled(o, hd, 1.0 / std::sqrt(static_cast<double>(hd)), rng);
      y_ = Matrix(n, o);
      std::normal_distribution<double> eps(0.0, 0.1);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> z(hd);
        for (std::size_t h = 0; h < hd; ++h) {
          double a = 0.0;
          for (std::size_t j = 0; j < f; ++j) a += a1(h, j) * x_(i, j);
          z[h] = std::tanh(a);
        }
        for (std::size_t q = 0; q < o; ++q) {
          double s = 0.0;
          for (std::size_t h = 0; h < hd; ++h) s += a2(q, h) * z[h];
          y_(i, q) = s + eps(rng);
        }
      }
      init_.push_back(make_param(
          "W1", ParamKind::matrix2d,
          gaussian_scaled(hd, f, 1.0 / std::sqrt(static_cast<double>(f)), init_rng)));
      init_.push_back(make_param("b1", ParamKind::vector1d, Matrix(1, hd)));
      init_.push_back(make_param(
          "W2", ParamKind::matrix2d,
          gaussian_scaled(o, hd, 1.0 / std::sqrt(static_cast<double>(hd)), init_rng)));
      init_.push_back(make_param("b2", ParamKind::vector1d, Matrix(1, o)));
      break;
    }
  }
}

std::vector<ParamGroup> Problem::initial_params() const { return init_; }

const Matrix& Problem::curvature() const {
  if (spec_.family != ProblemFamily::quadratic_diag)
    throw InvalidArgument("curvature: quadratic_diag only");
  return h_;
}

const Matrix& Problem::target() const {
  if (spec_.family != ProblemFamily::quadratic_diag)
    throw InvalidArgument("target: quadratic_diag only");
  return w_star_;
}

std::optional<double> Problem::f_star() const {
  if (spec_.family == ProblemFamily::quadratic_diag) return 0.0;
  return std::nullopt;
}

double Problem::flops_per_grad() const {
  const auto d = [](long v) { return static_cast<double>(v); };
  switch (spec_.family) {
    case ProblemFamily::quadratic_diag: return 4.0 * d(spec_.rows) * d(spec_.cols);
    case ProblemFamily::logistic:
      return 6.0 * d(spec_.samples) * d(spec_.classes) * d(spec_.features);
    case ProblemFamily::mlp2:
      return 6.0 * d(spec_.samples) *
             (d(spec_.hidden) * d(spec_.features) + d(spec_.outputs) * d(spec_.hidden));
  }
  return 0.0;
}

void Problem::check_params(std::span<const ParamGroup> params) const {
  if (params.size() != init_.size())
    throw InvalidArgument("problem: expected " + std::to_string(init_.size()) +
                          " parameters, got " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.rows() != init_[i].value.rows() ||
        params[i].value.cols() != init_[i].value.cols())
      throw InvalidArgument("problem: parameter " + init_[i].id + " expects shape " +
                            init_[i].value.shape_string() + ", got " +
                            params[i].value.shape_string());
  }
}

double Problem::loss(std::span<const ParamGroup> params) const {
  check_params(params);
  return eval(params, {});
}

double Problem::loss_and_grad(std::span<ParamGroup> params) const {
  check_params(params);
  return eval(params, params);
}

double Problem::eval(std::span<const ParamGroup> params, std::span<ParamGroup> out) const {
  const bool want_grad = !out.empty();
  if (want_grad)
    for (auto& p : out) p.grad = Matrix(p.value.rows(), p.value.cols());

  switch (spec_.family) {
    case ProblemFamily::quadratic_diag: {
      const Matrix& w = params[0].value;
      double f = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double d = w.data()[i] - w_star_.data()[i];
        const double hd = h_.data()[i] * d;
        f += 0.5 * hd * d;
        if (want_grad) out[0].grad.values().data()[i] = hd;
      }
      return f;
    }
    case ProblemFamily::logistic: {
      const Matrix& w = params[0].value;
      const Matrix& b = params[1].value;
      const std::size_t n = x_.rows(), f = x_.cols(), k = w.rows();
      const double inv_n = 1.0 / static_cast<double>(n);
      std::vector<double> z(k);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double zmax = -INFINITY;
        for (std::size_t c = 0; c < k; ++c) {
          double s = b(0, c);
          for (std::size_t j = 0; j < f; ++j) s += w(c, j) * x_(i, j);
          z[c] = s;
          zmax = std::max(zmax, s);
        }
        double denom = 0.0;
        for (std::size_t c = 0; c < k; ++c) denom += std::exp(z[c] - zmax);
        const auto label = static_cast<std::size_t>(y_(0, i));
        loss += (std::log(denom) + zmax - z[label]) * inv_n;
        if (!want_grad) continue;
        for (std::size_t c = 0; c < k; ++c) {
          const double r = (std::exp(z[c] - zmax) / denom - (c == label ? 1.0 : 0.0)) * inv_n;
          for (std::size_t j = 0; j < f; ++j) out[0].grad(c, j) += r * x_(i, j);
          out[1].grad(0, c) += r;
        }
      }
      return loss;
    }
    case ProblemFamily::mlp2: {
      const Matrix& w1 = params[0].value;
      const Matrix& b1 = params[1].value;
      const Matrix& w2 = params[2].value;
      const Matrix& b2 = params[3].value;
      const std::size_t n = x_.rows(), f = x_.cols(), hd = w1.rows(), o = w2.rows();
      const double inv_n = 1.0 / static_cast<double>(n);
      std::vector<double> z(hd), r(o), dz(hd);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t h = 0; h < hd; ++h) {
          double a = b1(0, h);
          for (std::size_t j = 0; j < f; ++j) a += w1(h, j) * x_(i, j);
          z[h] = std::tanh(a);
        }
        for (std::size_t q = 0; q < o; ++q) {
          double p = b2(0, q);
          for (std::size_t h = 0; h < hd; ++h) p += w2(q, h) * z[h];
          const double e = p - y_(i, q);
          loss += 0.5 * e * e * inv_n;
          r[q] = e * inv_n;
        }
        if (!want_grad) continue;
        std::fill(dz.begin(), dz.end(), 0.0);
        for (std::size_t q = 0; q < o; ++q) {
          for (std::size_t h = 0; h < hd; ++h) {
            out[2].grad(q, h) += r[q] * z[h];
            dz[h] += w2(q, h) * r[q];
          }
          out[3].grad(0, q) += r[q];
        }
        for (std::size_t h = 0; h < hd; ++h) {
          const double da = dz[h] * (1.0 - z[h] * z[h]);
          for (std::size_t j = 0; j < f; ++j) out[0].grad(h, j) += da * x_(i, j);
          out[1].grad(0, h) += da;
        }
      }
      return loss;
    }
  }
  return 0.0;
}

AnalyticConstants analytic_constants(const Problem& problem) {
  if (problem.spec().family != ProblemFamily::quadratic_diag)
    throw InvalidArgument("analytic_constants: quadratic_diag only");
  const Matrix& h = problem.curvature();
  AnalyticConstants c;
  for (double v : h.values()) {
    c.Linf_exact += v;
    c.L2_lower = std::max(c.L2_lower, v);
  }
  c.L2_upper = c.Linf_exact;
  return c;
}

double fd_gradient_check(const Problem& problem, std::span<const ParamGroup> params,
                         double step_size) {
  if (!(step_size > 0.0)) throw InvalidArgument("fd_gradient_check: step_size must be > 0");
  std::vector<ParamGroup> work(params.begin(), params.end());
  problem.loss_and_grad(work);
  const std::vector<ParamGroup> exact = work;
  double worst = 0.0;
  for (std::size_t p = 0; p < work.size(); ++p) {
    for (std::size_t i = 0; i < work[p].value.size(); ++i) {
      double* v = work[p].value.values().data() + i;
      const double orig = *v;
      *v = orig + step_size;
      const double up = problem.loss(work);
      *v = orig - step_size;
      const double down = problem.loss(work);
      *v = orig;
      const double fd = (up - down) / (2.0 * step_size);
      const double g = exact[p].grad.data()[i];
      worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(g)));
    }
  }
  return worst;
}

}  // namespace lmo
