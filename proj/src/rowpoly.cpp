#include "binmat/rowpoly.hpp"

#include <algorithm>

namespace binmat {

GTable::GTable(const Matrix<double>& wbar, const std::vector<int>& r) : m_(wbar.rows()), n_(wbar.cols()) {
  if (static_cast<int>(r.size()) != m_) throw std::invalid_argument("row sums do not match weight matrix");

  uniform_ = true;
  for (double x : wbar.data())
    if (x != 1.0) {
      uniform_ = false;
      break;
    }

  offsets_.resize(static_cast<size_t>(m_) * n_ + 1);
  size_t total = 0;
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      offsets_[static_cast<size_t>(i) * n_ + j] = total;
      total += static_cast<size_t>(std::min(r[i], n_ - j)) + 1;
    }
  }
  offsets_.back() = total;
  values_.assign(total, kNegInf);

  // G(i,j,k) = G(i,j+1,k) + wbar(i,j) * G(i,j+1,k-1), right to left.
  for (int i = 0; i < m_; ++i) {
    for (int j = n_ - 1; j >= 0; --j) {
      const size_t base = offsets_[static_cast<size_t>(i) * n_ + j];
      const int kmax = std::min(r[i], n_ - j);
      const double lw = wbar(i, j) > 0.0 ? std::log(wbar(i, j)) : kNegInf;
      values_[base] = 0.0;
      for (int k = 1; k <= kmax; ++k) {
        const double keep = log_g(i, j + 1, k);
        const double take = lw == kNegInf ? kNegInf : lw + log_g(i, j + 1, k - 1);
        values_[base + k] = log_add(keep, take);
      }
    }
  }
}

GTable precompute_g(const CanonicalWeights& wbar, const std::vector<int>& r) { return GTable(wbar.wbar, r); }

VResult v_weights(const GTable& g, const CanonicalWeights& wbar, const std::vector<int>& r_current, int col,
                  int n_total) {
  const int m = g.rows();
  VResult out;
  out.log_v.assign(m, 0.0);
  if (g.uniform()) return out;  // binomial ratios cancel exactly

  const int n_rem = n_total - col - 1;
  for (int i = 0; i < m; ++i) {
    const int k = r_current[i];
    if (k <= 0) continue;  // exhausted row, v = 1
    const double den = g.log_g(i, col + 1, k);
    if (den == kNegInf) {
      const double num = g.log_g(i, col + 1, k - 1);
      if (num != kNegInf && wbar.wbar(i, col) > 0.0) {
        out.force_ones.push_back(i);  // must take the current entry
      } else {
        out.dead = true;
        out.dead_row = i;
        return out;
      }
      continue;
    }
    const double num = g.log_g(i, col + 1, k - 1);
    const double lw = wbar.wbar(i, col) > 0.0 ? std::log(wbar.wbar(i, col)) : kNegInf;
    out.log_v[i] = lw + std::log(static_cast<double>(n_rem - k + 1) / k) + num - den;
  }
  return out;
}

VResult v_structural(const GTable& g, const CanonicalWeights& wbar, const BinaryMatrix& a,
                     const std::vector<int>& r_current, int col) {
  const int m = g.rows(), n = g.cols();
  VResult out;
  out.log_v.assign(m, 0.0);

  for (int i = 0; i < m; ++i) {
    const int k = r_current[i];
    if (k <= 0) continue;
    int support_rest = 0;
    for (int j = col + 1; j < n; ++j) support_rest += a(i, j);
    const double den = g.log_g(i, col + 1, k);
    const double num = g.log_g(i, col + 1, k - 1);
    if (den == kNegInf || num == kNegInf || wbar.wbar(i, col) <= 0.0) continue;  // v = 1, A decides
    out.log_v[i] =
        std::log(wbar.wbar(i, col)) + std::log(static_cast<double>(support_rest - k + 1) / k) + num - den;
  }
  return out;
}

}  // namespace binmat
