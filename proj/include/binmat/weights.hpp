#ifndef BINMAT_WEIGHTS_HPP_
#define BINMAT_WEIGHTS_HPP_

#include <vector>

#include "binmat/common.hpp"

namespace binmat {

// Nonnegative weight matrix with cached log entries and support counts.
struct WeightMatrix {
  Matrix<double> w;
  Matrix<double> logw;       // -inf at zeros
  BinaryMatrix a;            // support indicator
  std::vector<int> row_nnz;  // n_i
  std::vector<int> col_nnz;  // m_j

  WeightMatrix() = default;
  explicit WeightMatrix(Matrix<double> weights);

  int rows() const { return w.rows(); }
  int cols() const { return w.cols(); }
  bool has_zeros() const;
  bool is_constant() const;  // all entries equal (and positive)
};

WeightMatrix ones_weights(int m, int n);

// Diagonally scaled representative of the weight matrix whose nonzero row and
// column averages are one: wbar = diag(alpha) * w * diag(beta).
struct CanonicalWeights {
  Matrix<double> wbar;
  std::vector<double> alpha;
  std::vector<double> beta;
  int iterations = 0;
  double residual = 0.0;  // L1 distance of row/col sums from their nnz targets
};

// Alternating row/column rescaling until the L1 change of (alpha, beta) drops
// below tol or max_iter is hit. Any iterate is a valid representative, so
// non-convergence is not an error.
CanonicalWeights canonicalize(const WeightMatrix& w, double tol = 1e-8, int max_iter = 100000);

// True when every row's nonzeros are contiguous and the band edges move
// monotonically down the rows.
bool detect_banded(const WeightMatrix& w);

enum class ColumnOrderMode { kAuto, kNone, kDescend };

// Column permutation: by decreasing column sum, ties by decreasing variance of
// the canonical weights within the column, remaining ties by original index.
// kAuto keeps banded matrices in place.
std::vector<int> column_order(const CanonicalWeights& wbar, const std::vector<int>& c, ColumnOrderMode mode);

}  // namespace binmat

#endif  // BINMAT_WEIGHTS_HPP_
