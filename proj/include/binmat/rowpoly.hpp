#ifndef BINMAT_ROWPOLY_HPP_
#define BINMAT_ROWPOLY_HPP_

#include <vector>

#include "binmat/common.hpp"
#include "binmat/weights.hpp"

namespace binmat {

// Log-domain elementary symmetric polynomials of the row suffixes of wbar:
// log_g(i, j, k) = log of the sum over k-subsets of {wbar(i,j..n-1)} of their
// products. Stored only for k <= min(r_i, n - j); everything else is queried
// through the range-checked accessor.
class GTable {
 public:
  GTable() = default;
  GTable(const Matrix<double>& wbar, const std::vector<int>& r);

  int rows() const { return m_; }
  int cols() const { return n_; }
  bool uniform() const { return uniform_; }
  size_t stored_cells() const { return values_.size(); }

  // -inf when no k-subset of the suffix has an all-positive product.
  double log_g(int i, int j, int k) const {
    if (k < 0) return kNegInf;
    if (k == 0) return 0.0;
    if (j >= n_) return kNegInf;
    const size_t base = offsets_[static_cast<size_t>(i) * n_ + j];
    const int kmax = static_cast<int>(offsets_[static_cast<size_t>(i) * n_ + j + 1] - base) - 1;
    if (k > kmax) return kNegInf;
    return values_[base + k];
  }

 private:
  int m_ = 0, n_ = 0;
  bool uniform_ = false;
  std::vector<size_t> offsets_;  // m*n + 1 entries; cell (i,j) holds k = 0..K_ij
  std::vector<double> values_;
};

GTable precompute_g(const CanonicalWeights& wbar, const std::vector<int>& r);

// Per-row weighting odds for one column, log domain. Rows whose remaining sum
// can only be met by taking the current entry come back in force_ones with
// log_v = 0; a row that cannot be completed at all marks the column dead.
struct VResult {
  std::vector<double> log_v;
  std::vector<int> force_ones;
  bool dead = false;
  int dead_row = -1;
};

// Odds for column `col` (0-based, after any reordering) given the updated row
// sums. n_total is the full column count of wbar.
VResult v_weights(const GTable& g, const CanonicalWeights& wbar, const std::vector<int>& r_current, int col,
                  int n_total);

// Support-adjusted variant: binomial factors count only the positive cells in
// each row's remaining columns. Zero numerators or denominators fall back to
// v = 1 and leave the decision to the constraint set.
VResult v_structural(const GTable& g, const CanonicalWeights& wbar, const BinaryMatrix& a,
                     const std::vector<int>& r_current, int col);

}  // namespace binmat

#endif  // BINMAT_ROWPOLY_HPP_
