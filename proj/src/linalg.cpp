#include "lmo_optim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmo_optim/rng.hpp"

namespace lmo {

std::string to_string(Norm n) {
  switch (n) {
    case Norm::fro: return "fro";
    case Norm::inf_elem: return "inf_elem";
    case Norm::l1_elem: return "l1_elem";
    case Norm::spectral: return "spectral";
    case Norm::nuclear: return "nuclear";
  }
  return "?";
}

Norm norm_from_string(const std::string& s) {
  if (s == "fro") return Norm::fro;
  if (s == "inf_elem") return Norm::inf_elem;
  if (s == "l1_elem") return Norm::l1_elem;
  if (s == "spectral") return Norm::spectral;
  if (s == "nuclear") return Norm::nuclear;
  throw InvalidArgument("unknown norm '" + s + "'");
}

namespace {

using Column = std::vector<double>;

double dot(const Column& a, const Column& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void rotate(Column& p, Column& q, double c, double s) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double xp = p[i];
    const double xq = q[i];
    p[i] = c * xp - s * xq;
    q[i] = s * xp + c * xq;
  }
}

// Orthonormal completion: appends unit vectors orthogonal to `basis` until
// `want` columns are present.
void complete_basis(std::vector<Column>& basis, std::vector<bool>& filled, std::size_t dim) {
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (filled[j]) continue;
    Column best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < dim; ++e) {
      Column v(dim, 0.0);
      v[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
          if (!filled[k]) continue;
          const double proj = dot(basis[k], v);
          for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * basis[k][i];
        }
      }
      const double nv = std::sqrt(dot(v, v));
      if (nv > best_norm) {
        best_norm = nv;
        best = std::move(v);
      }
    }
    for (double& x : best) x /= best_norm;
    basis[j] = std::move(best);
    filled[j] = true;
  }
}

// One-sided Jacobi on a tall (m ≥ n) matrix given by its columns.
SvdResult jacobi_tall(std::vector<Column> cols, std::size_t m, const SvdOptions& options) {
  const std::size_t n = cols.size();
  std::vector<Column> v(n, Column(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  // Pairs whose smaller column is below this fraction of the larger one are
  // left alone: their rotation is dominated by rounding in the larger column.
  constexpr double negligible = 1e-15;

  bool converged = n < 2;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(cols[p], cols[p]);
        const double beta = dot(cols[q], cols[q]);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::min(alpha, beta) <= negligible * negligible * std::max(alpha, beta)) continue;
        const double gamma = dot(cols[p], cols[q]);
        if (std::abs(gamma) <= options.tolerance * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(cols[p], cols[q], c, s);
        rotate(v[p], v[q], c, s);
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw ConvergenceError("svd: one-sided Jacobi did not converge within " +
                           std::to_string(options.max_sweeps) + " sweeps");
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(cols[j], cols[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  const double sigma_max = n == 0 ? 0.0 : sigma[order[0]];
  const double meaningful = sigma_max * 1e-14;

  std::vector<Column> ucols(n, Column(m, 0.0));
  std::vector<bool> filled(n, false);
  SvdResult out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.S[k] = sigma[j];
    if (sigma[j] > meaningful && sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) ucols[k][i] = cols[j][i] / sigma[j];
      filled[k] = true;
    }
    for (std::size_t i = 0; i < n; ++i) out.V(i, k) = v[j][i];
  }
  complete_basis(ucols, filled, m);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < m; ++i) out.U(i, k) = ucols[k][i];
  return out;
}

}  // namespace

SvdResult svd(const Matrix& x, const SvdOptions& options) {
  const bool wide = x.rows() < x.cols();
  const Matrix& a = x;
  const std::size_t m = wide ? a.cols() : a.rows();
  const std::size_t n = wide ? a.rows() : a.cols();
  std::vector<Column> cols(n, Column(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) cols[j][i] = wide ? a(j, i) : a(i, j);
  SvdResult r = jacobi_tall(std::move(cols), m, options);
  if (wide) std::swap(r.U, r.V);
  return r;
}

std::vector<double> singular_values(const Matrix& x, const SvdOptions& options) {
  return svd(x, options).S;
}

double frobenius_norm(const Matrix& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return std::sqrt(s);
}

double matrix_norm(const Matrix& x, Norm which) {
  switch (which) {
    case Norm::fro: return frobenius_norm(x);
    case Norm::inf_elem: {
      double m = 0.0;
      for (double v : x.values()) m = std::max(m, std::abs(v));
      return m;
    }
    case Norm::l1_elem: {
      double s = 0.0;
      for (double v : x.values()) s += std::abs(v);
      return s;
    }
    case Norm::spectral: {
      if (x.is_zero()) return 0.0;
      return singular_values(x).front();
    }
    case Norm::nuclear: {
      if (x.is_zero()) return 0.0;
      const auto s = singular_values(x);
      return std::accumulate(s.begin(), s.end(), 0.0);
    }
  }
  return 0.0;
}

Matrix msign(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  if (x.is_zero()) return out;
  const SvdResult r = svd(x);
  const double cutoff = 1e-12 * r.S.front();
  for (std::size_t k = 0; k < r.S.size(); ++k) {
    if (r.S[k] <= cutoff) break;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double uik = r.U(i, k);
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += uik * r.V(j, k);
    }
  }
  return out;
}

Matrix sign_elem(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  auto dst = out.values();
  const auto src = x.values();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = src[i] > 0.0 ? 1.0 : (src[i] < 0.0 ? -1.0 : 0.0);
  return out;
}

NsPreset NsPreset::cubic_exact() { return {"cubic-exact", {1.5, -0.5, 0.0}, 30}; }

NsPreset NsPreset::muon_quintic() { return {"muon-quintic", {3.4445, -4.7750, 2.0315}, 5}; }

NsPreset NsPreset::by_name(const std::string& name) {
  if (name == "cubic-exact" || name == "cubic_exact") return cubic_exact();
  if (name == "muon-quintic" || name == "muon_quintic") return muon_quintic();
  throw InvalidArgument("unknown Newton-Schulz preset '" + name + "'");
}

Matrix newton_schulz(const Matrix& x, const NsPreset& preset, int iterations) {
  if (iterations < 1) throw InvalidArgument("newton_schulz: iterations must be >= 1");
  if (x.is_zero()) throw InvalidArgument("newton_schulz: zero input cannot be normalized");
  const bool tall = x.rows() > x.cols();
  Matrix w = tall ? x.transpose() : x;
  const double scale = frobenius_norm(w) * (1.0 + 1e-7);
  for (double& v : w.values()) v /= scale;

  const auto [a, b, c] = preset.coefficients;
  for (int it = 0; it < iterations; ++it) {
    const Matrix gram = gram_rows(w);
    Matrix poly = gram * b;
    if (c != 0.0) {
      const Matrix gram2 = matmul(gram, gram);
      auto pv = poly.values();
      const auto g2 = gram2.values();
      for (std::size_t i = 0; i < pv.size(); ++i) pv[i] += c * g2[i];
    }
    const Matrix pw = matmul(poly, w);
    auto wv = w.values();
    const auto pwv = pw.values();
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] = a * wv[i] + pwv[i];
  }
  return tall ? w.transpose() : w;
}

Matrix lmo(const Matrix& g, Norm norm, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("lmo: radius must be positive");
  switch (norm) {
    case Norm::spectral: return msign(g) * (-radius);
    case Norm::inf_elem: return sign_elem(g) * (-radius);
    default: throw InvalidArgument("lmo: only spectral and inf_elem balls are supported");
  }
}

double power_iter_sigma1(const Matrix& x, int iterations, std::uint64_t seed) {
  if (iterations < 1) throw InvalidArgument("power_iter_sigma1: iterations must be >= 1");
  if (x.is_zero()) return 0.0;
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  auto rng = keyed_engine({seed, 0x706f776572ULL});
  std::normal_distribution<double> normal;
  std::vector<double> v(n), u(m);
  for (double& e : v) e = normal(rng);

  auto normalize = [](std::vector<double>& vec) {
    double s = 0.0;
    for (double e : vec) s += e * e;
    s = std::sqrt(s);
    if (s == 0.0) return false;
    for (double& e : vec) e /= s;
    return true;
  };
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += x(i, j) * in[j];
      out[i] = s;
    }
  };
  auto apply_t = [&](const std::vector<double>& in, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out[j] += x(i, j) * in[i];
  };

  if (!normalize(v)) return 0.0;
  for (int it = 0; it < iterations; ++it) {
    apply(v, u);
    apply_t(u, v);
    if (!normalize(v)) return 0.0;
  }
  apply(v, u);
  double s = 0.0;
  for (double e : u) s += e * e;
  return std::sqrt(s);
}

double stable_rank(const Matrix& x, double sigma1_hat) {
  if (!(sigma1_hat > 0.0)) throw InvalidArgument("stable_rank: sigma1_hat must be positive");
  const double f = frobenius_norm(x);
  return (f * f) / (sigma1_hat * sigma1_hat);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> data(rows * cols);
  for (double& v : data) v = normal(rng);
  return Matrix(rows, cols, std::move(data));
}

Matrix random_orthonormal(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  if (k > m) throw InvalidArgument("random_orthonormal: k must not exceed m");
  Matrix g = gaussian_matrix(m, k, rng);
  // Modified Gram–Schmidt, two passes.
  for (std::size_t j = 0; j < k; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        double proj = 0.0;
        for (std::size_t i = 0; i < m; ++i) proj += g(i, p) * g(i, j);
        for (std::size_t i = 0; i < m; ++i) g(i, j) -= proj * g(i, p);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) nrm += g(i, j) * g(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < m; ++i) g(i, j) /= nrm;
  }
  return g;
}

Matrix matrix_with_spectrum(std::size_t m, std::size_t n, std::span<const double> s,
                            std::mt19937_64& rng) {
  const std::size_t k = std::min(m, n);
  if (s.size() != k) throw InvalidArgument("matrix_with_spectrum: need min(m, n) singular values");
  Matrix u = random_orthonormal(m, k, rng);
  const Matrix v = random_orthonormal(n, k, rng);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) u(i, j) *= s[j];
  return matmul(u, v.transpose());
}

Matrix conditioned_matrix(std::size_t m, std::size_t n, double min_ratio, std::mt19937_64& rng) {
  if (!(min_ratio > 0.0 && min_ratio <= 1.0))
    throw InvalidArgument("conditioned_matrix: min_ratio must lie in (0, 1]");
  const std::size_t k = std::min(m, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double scale = std::pow(10.0, -1.0 + 2.0 * u(rng));
  std::vector<double> s(k);
  const double lo = std::log(min_ratio);
  for (std::size_t i = 0; i < k; ++i) s[i] = std::exp(lo * u(rng));
  s[0] = 1.0;
  if (k > 1) s[k - 1] = min_ratio;
  for (double& v : s) v *= scale;
  return matrix_with_spectrum(m, n, s, rng);
}

}  // namespace lmo
