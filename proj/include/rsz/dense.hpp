#ifndef RSZ_DENSE_HPP
#define RSZ_DENSE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rsz/errors.hpp"

namespace rsz {

// Column-major dense matrix.  Column-major so that sampling operators can
// treat each column as a contiguous vector.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(j) * rows_ + i]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(j) * rows_ + i]; }

  double* col(int j) { return a_.data() + static_cast<size_t>(j) * rows_; }
  const double* col(int j) const { return a_.data() + static_cast<size_t>(j) * rows_; }
  std::span<double> col_span(int j) { return {col(j), static_cast<size_t>(rows_)}; }
  std::span<const double> col_span(int j) const { return {col(j), static_cast<size_t>(rows_)}; }

  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double nrm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) t(j, i) = m(i, j);
  return t;
}

// y = A x
inline void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != a.cols() || static_cast<int>(y.size()) != a.rows())
    throw error(errc::config_error, "matvec shape mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (int j = 0; j < a.cols(); ++j) {
    const double* c = a.col(j);
    double xj = x[j];
    for (int i = 0; i < a.rows(); ++i) y[i] += c[i] * xj;
  }
}

// y = A^T x
inline void matvec_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != a.rows() || static_cast<int>(y.size()) != a.cols())
    throw error(errc::config_error, "matvec_t shape mismatch");
  for (int j = 0; j < a.cols(); ++j) y[j] = dot(a.col_span(j), x);
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw error(errc::config_error, "matmul shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int j = 0; j < b.cols(); ++j) matvec(a, b.col_span(j), c.col_span(j));
  return c;
}

// Largest singular value by power iteration on M^T M; good to ~1e-6 relative,
// which is all the diagnostics need.
inline double spectral_norm_estimate(const Matrix& m, int iters = 60, uint64_t seed = 1234567) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  std::vector<double> v(m.cols()), w(m.rows());
  uint64_t s = seed ? seed : 1;
  for (auto& x : v) {
    // xorshift64 fill, any spread of signs works here
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
  }
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    double n = nrm2(v);
    if (n == 0.0) return 0.0;
    for (auto& x : v) x /= n;
    matvec(m, v, w);
    matvec_t(m, w, v);
    sigma = std::sqrt(nrm2(v));
  }
  return sigma;
}

}  // namespace rsz

#endif
