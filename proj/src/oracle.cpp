#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lmo_optim/harness.hpp"
#include "lmo_optim/linalg.hpp"
#include "lmo_optim/rng.hpp"

namespace lmo {

namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix reconstruct(const SvdResult& r) {
  Matrix us = r.U;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= r.S[j];
  return matmul(us, r.V.transpose());
}

std::pair<std::size_t, std::size_t> random_shape(std::mt19937_64& rng, std::size_t max_m,
                                                 std::size_t max_n) {
  std::uniform_int_distribution<std::size_t> dm(1, max_m), dn(1, max_n);
  return {dm(rng), dn(rng)};
}

}  // namespace

std::vector<OracleCheck> oracle_selfcheck(const OracleOptions& options) {
  std::vector<OracleCheck> out;

  {
    OracleCheck c{"svd_reconstruction", true, 0.0, 1e-10, ""};
    auto rng = keyed_engine({options.seed, 1});
    SvdOptions so;
    so.max_sweeps = options.jacobi_max_sweeps;
    try {
      for (int k = 0; k < 20; ++k) {
        const auto [m, n] = random_shape(rng, 16, 24);
        const Matrix x = gaussian_matrix(m, n, rng);
        const Matrix back = reconstruct(svd(x, so));
        c.value = std::max(c.value, frobenius_norm(back - x) / frobenius_norm(x));
      }
      c.passed = c.value < c.threshold;
      c.detail = fmt("max relative error %.3e", c.value);
    } catch (const std::exception& e) {
      c.passed = false;
      c.value = INFINITY;
      c.detail = e.what();
    }
    out.push_back(c);
  }

  auto corpus_rng = keyed_engine({options.seed, 2});
  std::vector<Matrix> corpus;
  for (int k = 0; k < 20; ++k) {
    const auto [m, n] = random_shape(corpus_rng, 64, 96);
    corpus.push_back(conditioned_matrix(m, n, 1e-2, corpus_rng));
  }

  {
    OracleCheck c{"msign_vs_cubic_ns", true, 0.0, 1e-6, ""};
    const NsPreset cubic = NsPreset::cubic_exact();
    for (const auto& x : corpus)
      c.value = std::max(c.value, frobenius_norm(newton_schulz(x, cubic, 30) - msign(x)));
    c.passed = c.value < c.threshold;
    c.detail = fmt("max Frobenius distance %.3e", c.value);
    out.push_back(c);
  }

  {
    OracleCheck c{"quintic_band", true, 0.0, 0.85, ""};
    NsPreset q = NsPreset::muon_quintic();
    for (double& v : q.coefficients) v *= 1.0 + options.quintic_perturbation;
    double smin = INFINITY, smax = 0.0, align_min = INFINITY, align_sum = 0.0;
    for (const auto& x : corpus) {
      const Matrix y = newton_schulz(x, q, 5);
      if (!y.all_finite()) {
        smax = INFINITY;
        continue;
      }
      const auto s = singular_values(y);
      smax = std::max(smax, s.front());
      smin = std::min(smin, s.back());
      const double a = inner(y, msign(x)) / static_cast<double>(s.size());
      align_min = std::min(align_min, a);
      align_sum += a;
    }
    const double align = align_sum / static_cast<double>(corpus.size());
    c.value = align;
    c.passed = smin >= 0.3 && smax <= 1.7 && align >= 0.85;
    c.detail = "singular values in [" + fmt("%.4g", smin) + ", " + fmt("%.4g", smax) +
               "] (band [0.3, 1.7]), mean alignment " + fmt("%.4f", align) + " (per-matrix min " +
               fmt("%.4f", align_min) + ")";
    out.push_back(c);
  }

  {
    OracleCheck c{"norm_chain", true, INFINITY, -1e-10, ""};
    auto rng = keyed_engine({options.seed, 3});
    for (int k = 0; k < 50; ++k) {
      const auto [m, n] = random_shape(rng, 12, 12);
      const Matrix x = gaussian_matrix(m, n, rng);
      const double inf = matrix_norm(x, Norm::inf_elem), sp = matrix_norm(x, Norm::spectral);
      const double fro = frobenius_norm(x), nuc = matrix_norm(x, Norm::nuclear);
      const double l1 = matrix_norm(x, Norm::l1_elem);
      const double rmn = std::sqrt(static_cast<double>(m * n));
      for (double slack : {sp - inf, fro - sp, rmn * inf - fro, fro - l1 / rmn, nuc - fro, l1 - nuc})
        c.value = std::min(c.value, slack);
    }
    c.passed = c.value >= c.threshold;
    c.detail = fmt("min slack %.3e", c.value);
    out.push_back(c);
  }

  {
    OracleCheck c{"dual_pairing", true, 0.0, 1e-9, ""};
    auto rng = keyed_engine({options.seed, 4});
    for (int k = 0; k < 20; ++k) {
      const auto [m, n] = random_shape(rng, 10, 10);
      const Matrix g = gaussian_matrix(m, n, rng);
      const double nuc = matrix_norm(g, Norm::nuclear), l1 = matrix_norm(g, Norm::l1_elem);
      c.value = std::max(c.value, std::abs(-inner(g, lmo(g, Norm::spectral, 1.0)) - nuc) / nuc);
      c.value = std::max(c.value, std::abs(-inner(g, lmo(g, Norm::inf_elem, 1.0)) - l1) / l1);
    }
    c.passed = c.value < c.threshold;
    c.detail = fmt("max relative pairing error %.3e", c.value);
    out.push_back(c);
  }

  {
    OracleCheck c{"power_iteration", true, 0.0, 0.05, ""};
    auto rng = keyed_engine({options.seed, 5});
    for (int k = 0; k < 5; ++k) {
      const Matrix x = gaussian_matrix(64, 64, rng);
      const double s1 = singular_values(x).front();
      c.value = std::max(c.value, std::abs(power_iter_sigma1(x, 20, options.seed + k) - s1) / s1);
    }
    c.passed = c.value <= c.threshold;
    c.detail = fmt("max relative error %.3e at 20 iterations", c.value);
    out.push_back(c);
  }
  return out;
}

}  // namespace lmo
