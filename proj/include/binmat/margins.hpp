#ifndef BINMAT_MARGINS_HPP_
#define BINMAT_MARGINS_HPP_

#include <optional>
#include <vector>

#include "binmat/common.hpp"

namespace binmat {

// Prescribed row and column sums of an m x n binary matrix.
// Construction validates 0 <= r_i <= n, 0 <= c_j <= m, and sum(r) == sum(c).
struct Margins {
  int m = 0;
  int n = 0;
  std::vector<int> r;
  std::vector<int> c;
  long long d = 0;  // total number of ones

  Margins() = default;
  Margins(std::vector<int> row_sums, std::vector<int> col_sums);
};

// Conjugate of the column sums: cc[l] = #{j : c_j >= l+1} for l = 0..m-1.
// Values above m are clamped into the last bucket.
struct ConjugateVector {
  std::vector<int> cc;
};

ConjugateVector conjugate(const std::vector<int>& c, int m);

// Existence of a binary matrix with the given margins.
bool gale_ryser_feasible(const Margins& margins);

enum class RowChoice : uint8_t {
  kZero,    // entry forced to 0
  kOne,     // entry forced to 1
  kFree,    // entry unconstrained
};

// Hard first-column constraint set: a row ordering pi, per-row choice sets A,
// and partial-sum windows B_i = {max(0,b_i),...,c1} (B_m = {c1}).
// Membership of x: x[pi[i]] in A_i and sum_{l<=i} x[pi[l]] in B_i for all i.
struct ConstraintSet {
  std::vector<int> pi;         // 0-based row permutation, r[pi[0]] >= r[pi[1]] >= ...
  std::vector<RowChoice> A;    // indexed by position i along pi
  std::vector<int> b;          // raw lower-bound quantities b_i (can be negative)
  int c1 = 0;                  // required column sum

  int lower(int i) const { return b[i] > 0 ? b[i] : 0; }
  bool contains(std::span<const uint8_t> x) const;
};

// Exact first-column support for margin-only constraints. Requires feasibility.
ConstraintSet build_constraints(const Margins& margins);

// Variant for a support pattern with at most one zero per row and per column
// (e.g. a zero diagonal). Requires the columns to be ordered so that
// c_0 >= c_1 >= ... >= c_{n-1}. Throws if the pattern has more than one zero
// in some row or column.
ConstraintSet build_constraints_structural(const Margins& margins, const BinaryMatrix& zero_pattern);

}  // namespace binmat

#endif  // BINMAT_MARGINS_HPP_
