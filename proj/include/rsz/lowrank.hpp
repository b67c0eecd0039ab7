#ifndef RSZ_LOWRANK_HPP
#define RSZ_LOWRANK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "rsz/dense.hpp"
#include "rsz/grid.hpp"

namespace rsz {

// ---------------------------------------------------------------------------
// Deterministic standard normals: mt19937_64 feeding an explicit Box-Muller
// transform.  std::normal_distribution is implementation-defined, which would
// break cross-platform reproducibility of the sampled sketches.
// ---------------------------------------------------------------------------
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  // uniform in (0,1], 53-bit resolution
  double uniform() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Column-major fill in stream order, so a given seed pins every entry.
inline Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  GaussianStream g(seed);
  for (auto& v : m.data()) v = g.next();
  return m;
}

// ---------------------------------------------------------------------------
// Modified Gram-Schmidt with one full reorthogonalization pass.  Columns whose
// residual norm falls below 1e-13 * ||Y||_F are dropped and reported, which is
// how rank deficiency in the sketch surfaces.
// ---------------------------------------------------------------------------
struct QrResult {
  Matrix q;
  std::vector<int> dropped;  // input column indices that were dropped
};

inline QrResult qr_orthonormalize(const Matrix& y) {
  const int m = y.rows(), n = y.cols();
  const double thresh = 1e-13 * frobenius(y);
  QrResult res;
  std::vector<std::vector<double>> qcols;
  std::vector<double> v(m);
  for (int j = 0; j < n; ++j) {
    std::copy(y.col(j), y.col(j) + m, v.begin());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : qcols) {
        double r = dot(q, v);
        for (int i = 0; i < m; ++i) v[i] -= r * q[i];
      }
    double nv = nrm2(v);
    if (nv <= thresh || static_cast<int>(qcols.size()) == m) {
      res.dropped.push_back(j);
      continue;
    }
    for (auto& x : v) x /= nv;
    qcols.push_back(v);
  }
  res.q = Matrix(m, static_cast<int>(qcols.size()));
  for (int j = 0; j < res.q.cols(); ++j)
    std::copy(qcols[j].begin(), qcols[j].end(), res.q.col(j));
  return res;
}

// ---------------------------------------------------------------------------
// Singular value decomposition.
// ---------------------------------------------------------------------------
struct SVDTriple {
  Matrix u;               // m x r, orthonormal columns
  std::vector<double> s;  // r singular values, nonincreasing
  Matrix v;               // n x r, orthonormal columns
  std::uint64_t seed = 0;  // randomized drivers only
  int samples = 0;         // randomized drivers only
  std::vector<int> dropped;

  int rank() const { return static_cast<int>(s.size()); }
};

namespace detail {

// Replace exactly-zero columns of u (listed in `zeros`) with canonical basis
// vectors orthogonalized against everything else.
inline void complete_zero_columns(Matrix& u, const std::vector<int>& zeros) {
  const int m = u.rows(), n = u.cols();
  std::vector<double> v(m);
  int next_axis = 0;
  for (int jz : zeros) {
    bool placed = false;
    while (!placed && next_axis < m) {
      std::fill(v.begin(), v.end(), 0.0);
      v[next_axis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < n; ++j) {
          if (j == jz) continue;
          double r = dot(u.col_span(j), v);
          for (int i = 0; i < m; ++i) v[i] -= r * u(i, j);
        }
      double nv = nrm2(v);
      if (nv > 0.5) {
        for (int i = 0; i < m; ++i) u(i, jz) = v[i] / nv;
        placed = true;
      }
    }
    if (!placed)
      throw error(errc::no_convergence, "could not complete an orthonormal basis");
  }
}

}  // namespace detail

// One-sided Jacobi SVD: rotate column pairs of a working copy until all pairs
// are numerically orthogonal, then read off sigma as column norms.  Always
// returns min(m,n) sorted singular values with orthonormal U and V; exact zero
// columns are completed to an orthonormal basis.
inline SVDTriple dense_svd(const Matrix& a, int max_sweeps = 60) {
  if (a.rows() < a.cols()) {
    SVDTriple t = dense_svd(transpose(a), max_sweeps);
    std::swap(t.u, t.v);
    return t;
  }
  const int m = a.rows(), n = a.cols();
  SVDTriple out;
  out.u = Matrix(m, n);
  out.v = Matrix(n, n);
  if (n == 0) return out;

  Matrix g = a;
  Matrix v(n, n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;

  const double tol = 1e-14;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        double* gp = g.col(p);
        double* gq = g.col(q);
        for (int i = 0; i < m; ++i) {
          alpha += gp[i] * gp[i];
          beta += gq[i] * gq[i];
          gamma += gp[i] * gq[i];
        }
        if (alpha == 0.0 || beta == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta))
          continue;
        converged = false;
        double tau = (beta - alpha) / (2.0 * gamma);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t), s = c * t;
        for (int i = 0; i < m; ++i) {
          double xp = gp[i], xq = gq[i];
          gp[i] = c * xp - s * xq;
          gq[i] = s * xp + c * xq;
        }
        double* vp = v.col(p);
        double* vq = v.col(q);
        for (int i = 0; i < n; ++i) {
          double xp = vp[i], xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
  }
  if (!converged)
    throw error(errc::no_convergence, "Jacobi SVD did not converge within the sweep budget");

  std::vector<double> sigma(n);
  for (int j = 0; j < n; ++j) sigma[j] = nrm2(g.col_span(j));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return sigma[x] > sigma[y]; });

  out.s.resize(n);
  std::vector<int> zero_cols;
  for (int j = 0; j < n; ++j) {
    int src = order[j];
    out.s[j] = sigma[src];
    for (int i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    if (sigma[src] > 0.0) {
      const double* gc = g.col(src);
      for (int i = 0; i < m; ++i) out.u(i, j) = gc[i] / sigma[src];
    } else {
      zero_cols.push_back(j);
    }
  }
  detail::complete_zero_columns(out.u, zero_cols);
  return out;
}

// ---------------------------------------------------------------------------
// Randomized SVD of a linear operator given by matrix-free apply/adjoint
// callbacks (range sketch, orthonormalize, adjoint pass, small dense SVD).
// ---------------------------------------------------------------------------
struct RsvdConfig {
  int k = 0;          // target rank
  int p = 10;         // oversampling
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kProbeSeedF = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kProbeSeedG = 0xC2B2AE3D27D4EB4FULL;

// Callbacks have signature void(std::span<const double> in, std::span<double> out).
template <typename Apply, typename Adjoint>
SVDTriple rsvd_operator(int n_out, int n_in, Apply&& apply, Adjoint&& adjoint,
                        const RsvdConfig& cfg) {
  if (cfg.k < 1 || cfg.p < 0 || cfg.k + cfg.p > std::min(n_out, n_in))
    throw error(errc::config_error,
                "rsvd needs 1 <= k and k + p <= min of the operator dimensions");

  // The adjoint callback is user-supplied; verify <g, A f> = <A^T g, f> on
  // three probe pairs before trusting it for the factorization.
  {
    Matrix fs = gaussian_matrix(n_in, 3, cfg.seed ^ kProbeSeedF);
    Matrix gs = gaussian_matrix(n_out, 3, cfg.seed ^ kProbeSeedG);
    std::vector<double> af(n_out), atg(n_in);
    for (int t = 0; t < 3; ++t) {
      apply(fs.col_span(t), std::span<double>(af));
      adjoint(gs.col_span(t), std::span<double>(atg));
      double lhs = dot(gs.col_span(t), af);
      double rhs = dot(std::span<const double>(atg), fs.col_span(t));
      double denom = 0.5 * (nrm2(af) * nrm2(gs.col_span(t)) +
                            nrm2(std::span<const double>(atg)) * nrm2(fs.col_span(t)));
      if (std::abs(lhs - rhs) > 1e-8 * std::max(denom, 1e-300))
        throw error(errc::adjoint_inconsistent,
                    "apply/adjoint pair fails the inner-product identity");
    }
  }

  const int kp = cfg.k + cfg.p;
  Matrix omega = gaussian_matrix(n_in, kp, cfg.seed);
  Matrix y(n_out, kp);
  for (int j = 0; j < kp; ++j) apply(omega.col_span(j), y.col_span(j));

  QrResult qr = qr_orthonormalize(y);
  Matrix b(n_in, qr.q.cols());
  for (int j = 0; j < qr.q.cols(); ++j) adjoint(qr.q.col_span(j), b.col_span(j));

  SVDTriple small = dense_svd(transpose(b));
  // B^T = Us S Vs^T with Us spanning the sketch coordinates, so A ~ (Q Us) S Vs^T
  int r = std::min(cfg.k, small.rank());
  SVDTriple out;
  out.u = Matrix(n_out, r);
  out.v = Matrix(n_in, r);
  out.s.assign(small.s.begin(), small.s.begin() + r);
  for (int j = 0; j < r; ++j) {
    matvec(qr.q, small.u.col_span(j), out.u.col_span(j));
    std::copy(small.v.col(j), small.v.col(j) + n_in, out.v.col(j));
  }
  out.seed = cfg.seed;
  out.samples = kp;
  out.dropped = qr.dropped;
  return out;
}

inline SVDTriple rsvd_matrix(const Matrix& a, const RsvdConfig& cfg) {
  return rsvd_operator(
      a.rows(), a.cols(),
      [&](std::span<const double> x, std::span<double> yv) { matvec(a, x, yv); },
      [&](std::span<const double> x, std::span<double> yv) { matvec_t(a, x, yv); }, cfg);
}

// Expected spectral-error factor of the randomized range finder at target rank
// k (the multiplier of sigma_{k+1} in the a-priori bound).
inline double rsvd_expectation_factor(int m, int n, int k) {
  return 1.0 + 4.0 * std::sqrt(2.0 * std::min(m, n) / (k - 1.0));
}

}  // namespace rsz

#endif
