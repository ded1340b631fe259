#include "binmat/margins.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace binmat {

Margins::Margins(std::vector<int> row_sums, std::vector<int> col_sums)
    : m(static_cast<int>(row_sums.size())),
      n(static_cast<int>(col_sums.size())),
      r(std::move(row_sums)),
      c(std::move(col_sums)) {
  if (m == 0 || n == 0) throw std::invalid_argument("margins: empty row or column sums");
  long long dr = 0, dc = 0;
  for (int ri : r) {
    if (ri < 0 || ri > n) throw std::invalid_argument("margins: row sum out of range [0, n]");
    dr += ri;
  }
  for (int cj : c) {
    if (cj < 0 || cj > m) throw std::invalid_argument("margins: column sum out of range [0, m]");
    dc += cj;
  }
  if (dr != dc) throw std::invalid_argument("margins: sum(r) != sum(c)");
  d = dr;
}

ConjugateVector conjugate(const std::vector<int>& c, int m) {
  ConjugateVector out;
  out.cc.assign(m, 0);
  // Histogram c_j into buckets 1..m (clamped), then suffix-sum.
  for (int cj : c) {
    if (cj >= m)
      out.cc[m - 1] += 1;
    else if (cj >= 1)
      out.cc[cj - 1] += 1;
  }
  int s = 0;
  for (int l = m - 1; l >= 0; --l) {
    s += out.cc[l];
    out.cc[l] = s;
  }
  return out;
}

bool gale_ryser_feasible(const Margins& margins) {
  std::vector<int> rs = margins.r;
  std::sort(rs.begin(), rs.end(), std::greater<int>());
  ConjugateVector cc = conjugate(margins.c, margins.m);
  long long lhs = 0, rhs = 0;
  for (int i = 0; i < margins.m; ++i) {
    lhs += rs[i];
    rhs += cc.cc[i];
    if (lhs > rhs) return false;
  }
  return true;  // lhs == rhs at i = m-1 by the sum-equality invariant
}

namespace {

std::vector<int> sort_rows_descending(const std::vector<int>& r) {
  std::vector<int> pi(r.size());
  std::iota(pi.begin(), pi.end(), 0);
  std::stable_sort(pi.begin(), pi.end(), [&](int a, int b) { return r[a] > r[b]; });
  return pi;
}

}  // namespace

bool ConstraintSet::contains(std::span<const uint8_t> x) const {
  const int m = static_cast<int>(pi.size());
  int s = 0;
  for (int i = 0; i < m; ++i) {
    const int xi = x[pi[i]];
    if (xi != 0 && xi != 1) return false;
    if (A[i] == RowChoice::kZero && xi != 0) return false;
    if (A[i] == RowChoice::kOne && xi != 1) return false;
    s += xi;
    const int lo = (i == m - 1) ? c1 : lower(i);
    if (s < lo || s > c1) return false;
  }
  return s == c1;
}

ConstraintSet build_constraints(const Margins& margins) {
  if (!gale_ryser_feasible(margins)) throw std::invalid_argument("empty support");

  const int m = margins.m, n = margins.n;
  ConstraintSet cs;
  cs.c1 = margins.c[0];
  cs.pi = sort_rows_descending(margins.r);
  cs.A.resize(m);
  cs.b.resize(m);

  // Conjugate of the trailing column sums c_1..c_{n-1}.
  std::vector<int> rest(margins.c.begin() + 1, margins.c.end());
  ConjugateVector cc = conjugate(rest, m);

  long long run_r = 0, run_cc = 0;
  for (int i = 0; i < m; ++i) {
    const int ri = margins.r[cs.pi[i]];
    cs.A[i] = ri == 0 ? RowChoice::kZero : (ri == n ? RowChoice::kOne : RowChoice::kFree);
    run_r += ri;
    run_cc += cc.cc[i];
    cs.b[i] = static_cast<int>(run_r - run_cc);
  }
  return cs;
}

ConstraintSet build_constraints_structural(const Margins& margins, const BinaryMatrix& zero_pattern) {
  const int m = margins.m, n = margins.n;
  if (zero_pattern.rows() != m || zero_pattern.cols() != n)
    throw std::invalid_argument("zero pattern dimensions do not match margins");
  for (int j = 0; j + 1 < n; ++j)
    if (margins.c[j] < margins.c[j + 1])
      throw std::invalid_argument("structural constraints require nonincreasing column sums");

  // y[i]: 0-based column of row i's unique zero, or n when the row is full.
  std::vector<int> y(m, n);
  std::vector<int> col_zeros(n, 0);
  for (int i = 0; i < m; ++i) {
    int zeros = 0;
    for (int j = 0; j < n; ++j) {
      if (!zero_pattern(i, j)) {
        ++zeros;
        y[i] = j;
        col_zeros[j] += 1;
      }
    }
    if (zeros > 1) throw std::invalid_argument("pattern unsupported, fall back to general-zeros path");
  }
  for (int j = 0; j < n; ++j)
    if (col_zeros[j] > 1) throw std::invalid_argument("pattern unsupported, fall back to general-zeros path");

  ConstraintSet cs;
  cs.c1 = margins.c[0];
  cs.pi.resize(m);
  std::iota(cs.pi.begin(), cs.pi.end(), 0);
  std::stable_sort(cs.pi.begin(), cs.pi.end(), [&](int a, int b) {
    if (margins.r[a] != margins.r[b]) return margins.r[a] > margins.r[b];
    return y[a] < y[b];
  });
  cs.A.resize(m);
  cs.b.resize(m);

  // Suffix sums of the column margins: suff[j] = sum_{k >= j} c_k (0-based j).
  std::vector<long long> suff(n + 1, 0);
  for (int j = n - 1; j >= 0; --j) suff[j] = suff[j + 1] + margins.c[j];

  long long run_r = 0;
  // zero_before[t] counts rows among pi[0..i] whose zero lies in columns 1..t-1
  // (0-based), i.e. inside the window the b_i minimum scans.
  std::vector<int> zero_hits(n + 1, 0);
  for (int i = 0; i < m; ++i) {
    const int row = cs.pi[i];
    const int ri = margins.r[row];
    const int support_row = n - (y[row] < n ? 1 : 0);
    const int a_first = y[row] == 0 ? 0 : 1;
    const long long forced = static_cast<long long>(a_first) * ri;
    if (forced == 0)
      cs.A[i] = RowChoice::kZero;
    else if (forced == support_row)
      cs.A[i] = RowChoice::kOne;
    else
      cs.A[i] = RowChoice::kFree;

    run_r += ri;
    if (y[row] >= 1 && y[row] < n) zero_hits[y[row]] += 1;

    // b_i = sum_{l<=i} r_pi - min_t { suff[t] + sum_{l<=i} #supported cells of
    // row pi_l in columns 2..t }, scanning t = 1..n (1-based).
    long long best = std::numeric_limits<long long>::max();
    long long zcum = 0;
    for (int t = 1; t <= n; ++t) {
      if (t >= 2) zcum += zero_hits[t - 1];
      const long long cells = static_cast<long long>(i + 1) * (t - 1) - zcum;
      best = std::min(best, suff[t] + cells);
    }
    cs.b[i] = static_cast<int>(run_r - best);
  }
  return cs;
}

}  // namespace binmat
