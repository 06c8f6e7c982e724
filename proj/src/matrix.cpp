#include "lmo_optim/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmo {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw InvalidArgument("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw InvalidArgument("Matrix: entry count " + std::to_string(data_.size()) +
                          " does not match shape " + shape_string());
  }
  if (!all_finite()) throw InvalidArgument("Matrix: non-finite entry");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidArgument("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t k) {
  Matrix out(k, k);
  for (std::size_t i = 0; i < k; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::diag(std::span<const double> values) {
  Matrix out(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
  if (!out.all_finite()) throw InvalidArgument("Matrix::diag: non-finite entry");
  return out;
}

Matrix Matrix::diag(std::initializer_list<double> values) {
  return diag(std::span<const double>(values.begin(), values.size()));
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_;
  return os.str();
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                          b.shape_string());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner dimension mismatch " + a.shape_string() + " * " +
                          b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = a.cols();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* orow = &out(i, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data().data() + k * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix gram_rows(const Matrix& a) {
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  Matrix out(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    const double* ai = a.data().data() + i * c;
    for (std::size_t j = i; j < r; ++j) {
      const double* aj = a.data().data() + j * c;
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += ai[k] * aj[k];
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

double inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "inner");
  double s = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double d = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) d = std::max(d, std::abs(av[i] - bv[i]));
  return d;
}

}  // namespace lmo
