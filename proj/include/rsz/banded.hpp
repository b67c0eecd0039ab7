#ifndef RSZ_BANDED_HPP
#define RSZ_BANDED_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rsz/errors.hpp"

namespace rsz {

// ---------------------------------------------------------------------------
// Symmetric positive definite banded matrix and its Cholesky factor, stored by
// rows of the lower band.  Row i keeps entries (i, i-bw) .. (i, i), so the
// inner products of the factorization and the forward solve run over
// contiguous memory.
// ---------------------------------------------------------------------------
class BandedSPD {
 public:
  BandedSPD() = default;
  BandedSPD(int n, int bw) : n_(n), bw_(bw), a_(static_cast<size_t>(n) * (bw + 1), 0.0) {}

  int size() const { return n_; }
  int bandwidth() const { return bw_; }

  // Entry (i,j) with |i-j| <= bw, j <= i.
  double& at(int i, int j) { return a_[static_cast<size_t>(i) * (bw_ + 1) + (bw_ - (i - j))]; }
  double at(int i, int j) const {
    return a_[static_cast<size_t>(i) * (bw_ + 1) + (bw_ - (i - j))];
  }

  void add(int i, int j, double v) {
    if (j > i) std::swap(i, j);
    at(i, j) += v;
  }

  // In-place Cholesky A = L L^T over the band.  Throws on a nonpositive pivot,
  // which for our assemblies means the operator lost definiteness.
  void factor() {
    const int w = bw_ + 1;
    for (int i = 0; i < n_; ++i) {
      double* ri = a_.data() + static_cast<size_t>(i) * w;
      int k0 = std::max(0, i - bw_);
      for (int j = k0; j < i; ++j) {
        const double* rj = a_.data() + static_cast<size_t>(j) * w;
        // dot of L(i, k) and L(j, k) over k = max(k0, j-bw) .. j-1
        int kk0 = std::max(k0, j - bw_);
        double s = 0.0;
        const double* pi = ri + (bw_ - (i - kk0));
        const double* pj = rj + (bw_ - (j - kk0));
        for (int k = kk0; k < j; ++k) s += *pi++ * *pj++;
        ri[bw_ - (i - j)] = (ri[bw_ - (i - j)] - s) / rj[bw_];
      }
      double s = 0.0;
      const double* pi = ri + (bw_ - (i - k0));
      for (int k = k0; k < i; ++k, ++pi) s += *pi * *pi;
      double d = ri[bw_] - s;
      if (!(d > 0.0))
        throw error(errc::factorization_failure, "nonpositive pivot in banded Cholesky");
      ri[bw_] = std::sqrt(d);
    }
    factored_ = true;
  }

  bool factored() const { return factored_; }

  // Solve A x = b in place (forward then back substitution).
  void solve(std::span<double> x) const {
    const int w = bw_ + 1;
    for (int i = 0; i < n_; ++i) {
      const double* ri = a_.data() + static_cast<size_t>(i) * w;
      int k0 = std::max(0, i - bw_);
      double s = x[i];
      const double* p = ri + (bw_ - (i - k0));
      for (int k = k0; k < i; ++k) s -= *p++ * x[k];
      x[i] = s / ri[bw_];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      int k1 = std::min(n_ - 1, i + bw_);
      double s = x[i];
      // column i of L below the diagonal, strided across band rows
      const double* p = a_.data() + static_cast<size_t>(i + 1) * w + (bw_ - 1);
      for (int k = i + 1; k <= k1; ++k, p += w - 1) s -= *p * x[k];
      x[i] = s / a_[static_cast<size_t>(i) * w + bw_];
    }
  }

 private:
  int n_ = 0, bw_ = 0;
  bool factored_ = false;
  std::vector<double> a_;
};

}  // namespace rsz

#endif
