#include "binmat/weights.hpp"

#include <algorithm>
#include <numeric>

namespace binmat {

WeightMatrix::WeightMatrix(Matrix<double> weights) : w(std::move(weights)) {
  const int m = w.rows(), n = w.cols();
  logw = Matrix<double>(m, n);
  a = BinaryMatrix(m, n);
  row_nnz.assign(m, 0);
  col_nnz.assign(n, 0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double wij = w(i, j);
      if (!(wij >= 0.0) || !std::isfinite(wij)) throw std::invalid_argument("weights must be finite and nonnegative");
      if (wij > 0.0) {
        logw(i, j) = std::log(wij);
        a(i, j) = 1;
        row_nnz[i] += 1;
        col_nnz[j] += 1;
      } else {
        logw(i, j) = kNegInf;
        a(i, j) = 0;
      }
    }
  }
}

bool WeightMatrix::has_zeros() const {
  for (int i = 0; i < rows(); ++i)
    if (row_nnz[i] < cols()) return true;
  return false;
}

bool WeightMatrix::is_constant() const {
  if (w.empty()) return false;
  const double w0 = w.data()[0];
  if (w0 <= 0.0) return false;
  for (double wij : w.data())
    if (wij != w0) return false;
  return true;
}

WeightMatrix ones_weights(int m, int n) { return WeightMatrix(Matrix<double>(m, n, 1.0)); }

CanonicalWeights canonicalize(const WeightMatrix& w, double tol, int max_iter) {
  const int m = w.rows(), n = w.cols();
  for (int i = 0; i < m; ++i)
    if (w.row_nnz[i] == 0) throw std::invalid_argument("degenerate weight matrix");
  for (int j = 0; j < n; ++j)
    if (w.col_nnz[j] == 0) throw std::invalid_argument("degenerate weight matrix");

  CanonicalWeights out;
  out.alpha.assign(m, 1.0);
  out.beta.assign(n, 1.0);

  // Constant entries on the support are already balanced by a single scaling:
  // wbar equals the support indicator exactly.
  bool constant_support = true;
  double w0 = 0.0;
  for (double wij : w.w.data()) {
    if (wij > 0.0) {
      if (w0 == 0.0)
        w0 = wij;
      else if (wij != w0) {
        constant_support = false;
        break;
      }
    }
  }
  if (constant_support) {
    out.wbar = Matrix<double>(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out.wbar(i, j) = w.a(i, j) ? 1.0 : 0.0;
    for (double& ai : out.alpha) ai = 1.0 / w0;
    return out;
  }

  std::vector<double> alpha(m), beta(n), alpha_prev(m), beta_prev(n);
  // alpha_i = n_i / sum_j w_ij, normalized to mean one to pin the gauge.
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += w.w(i, j);
    alpha[i] = w.row_nnz[i] / s;
  }
  const double mean0 = std::accumulate(alpha.begin(), alpha.end(), 0.0) / m;
  for (double& ai : alpha) ai /= mean0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += alpha[i] * w.w(i, j);
    beta[j] = w.col_nnz[j] / s;
  }

  int iters = 0;
  double change = std::numeric_limits<double>::infinity();
  while (iters < max_iter && change > tol) {
    ++iters;
    alpha_prev = alpha;
    beta_prev = beta;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += beta[j] * w.w(i, j);
      alpha[i] = w.row_nnz[i] / s;
    }
    const double mean = std::accumulate(alpha.begin(), alpha.end(), 0.0) / m;
    for (double& ai : alpha) ai /= mean;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += alpha[i] * w.w(i, j);
      beta[j] = w.col_nnz[j] / s;
    }
    change = 0.0;
    for (int i = 0; i < m; ++i) change += std::abs(alpha[i] - alpha_prev[i]);
    for (int j = 0; j < n; ++j) change += std::abs(beta[j] - beta_prev[j]);
  }

  out.alpha = std::move(alpha);
  out.beta = std::move(beta);
  out.iterations = iters;
  out.wbar = Matrix<double>(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.wbar(i, j) = out.alpha[i] * out.beta[j] * w.w(i, j);

  double resid = 0.0;
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += out.wbar(i, j);
    resid += std::abs(s - w.row_nnz[i]);
  }
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += out.wbar(i, j);
    resid += std::abs(s - w.col_nnz[j]);
  }
  out.residual = resid;
  return out;
}

bool detect_banded(const WeightMatrix& w) {
  const int m = w.rows(), n = w.cols();
  int prev_start = 0, prev_end = -1;
  for (int i = 0; i < m; ++i) {
    int start = -1, end = -1;
    for (int j = 0; j < n; ++j) {
      if (w.a(i, j)) {
        if (start < 0) start = j;
        end = j;
      }
    }
    if (start < 0) continue;  // empty row constrains nothing
    if (end - start + 1 != w.row_nnz[i]) return false;  // gap inside the row
    if (start < prev_start || end < prev_end) return false;
    prev_start = start;
    prev_end = end;
  }
  return true;
}

std::vector<int> column_order(const CanonicalWeights& wbar, const std::vector<int>& c, ColumnOrderMode mode) {
  const int n = static_cast<int>(c.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (mode == ColumnOrderMode::kNone) return order;
  if (mode == ColumnOrderMode::kAuto) {
    // The in-place order exists to protect banded zero patterns; a matrix
    // without zeros is trivially a full band and gains nothing from it.
    WeightMatrix support(wbar.wbar);
    if (support.has_zeros() && detect_banded(support)) return order;
  }

  const int m = wbar.wbar.rows();
  std::vector<double> var(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double mean = 0.0;
    for (int i = 0; i < m; ++i) mean += wbar.wbar(i, j);
    mean /= m;
    double ss = 0.0;
    for (int i = 0; i < m; ++i) {
      const double dlt = wbar.wbar(i, j) - mean;
      ss += dlt * dlt;
    }
    var[j] = m > 1 ? ss / (m - 1) : 0.0;
  }
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (c[x] != c[y]) return c[x] > c[y];
    return var[x] > var[y];
  });
  return order;
}

}  // namespace binmat
