#ifndef BINMAT_COMBINATORICS_HPP_
#define BINMAT_COMBINATORICS_HPP_

#include <span>
#include <vector>

#include "binmat/common.hpp"
#include "binmat/margins.hpp"

namespace binmat {

// Sum of falling factorials: sum_i t_i (t_i - 1) ... (t_i - ell + 1).
long long falling_factorial_sum(std::span<const int> t, int ell);

// Shared ingredients for the per-row odds formulas, taken over the column
// sums that remain after the current column. Updated incrementally as columns
// are consumed and rows decremented.
struct ApproxContext {
  int m = 0;
  int n_rest = 0;       // number of remaining columns
  long long c1 = 0;     // [c]_1 = sum of remaining column sums
  long long csq = 0;    // sum of squared remaining column sums
  long long c2 = 0;     // [c]_2
  long long c3 = 0;     // [c]_3
  long long r2 = 0;     // [r]_2 over the current row sums

  static ApproxContext from(std::span<const int> r, std::span<const int> c_rest);

  void remove_column(int cj) {
    n_rest -= 1;
    c1 -= cj;
    csq -= static_cast<long long>(cj) * cj;
    c2 -= static_cast<long long>(cj) * (cj - 1);
    c3 -= static_cast<long long>(cj) * (cj - 1) * (cj - 2);
  }
  void decrement_row(int old_r) { r2 -= 2LL * old_r - 2; }

  double eta() const {
    const long long cells = static_cast<long long>(m) * n_rest;
    if (c1 <= 0 || c1 >= cells) return 0.0;
    return static_cast<double>(cells) / (static_cast<double>(c1) * static_cast<double>(cells - c1));
  }
  // eta * (1 - nu), zero in the degenerate all-empty/all-full cases.
  double eta_one_minus_nu() const {
    const double e = eta();
    if (e == 0.0) return 0.0;
    const double nu = e * (static_cast<double>(csq) - static_cast<double>(c1) * c1 / n_rest);
    return e * (1.0 - nu);
  }
  double alpha1() const {
    if (c1 == 0) return 0.0;
    const double d1 = static_cast<double>(c1), d2 = static_cast<double>(c2);
    return d2 / (2 * d1 * d1) + d2 / (2 * d1 * d1 * d1) + d2 * d2 / (4 * d1 * d1 * d1 * d1);
  }
  double alpha2() const {
    if (c1 == 0) return 0.0;
    const double d1 = static_cast<double>(c1), d2 = static_cast<double>(c2), d3 = static_cast<double>(c3);
    return -d3 / (3 * d1 * d1 * d1) + d2 * d2 / (2 * d1 * d1 * d1 * d1);
  }
  double alpha3() const {
    if (c1 == 0) return 0.0;
    const double d1 = static_cast<double>(c1), d2 = static_cast<double>(c2), d3 = static_cast<double>(c3);
    return d2 / (4 * d1 * d1 * d1 * d1) + d3 / (2 * d1 * d1 * d1 * d1) -
           d2 * d2 / (2 * d1 * d1 * d1 * d1 * d1);
  }
};

// Per-row first-entry odds, log domain. Entries are exactly 0 for rows whose
// value is forced by the constraint set.
struct UVector {
  std::vector<double> log_u;
};

// log of the asymptotic count of m x n binary matrices with the given margins
// (binomial prefactors with a variance correction). Entries may violate
// sum(r) == sum(c); the formula only uses sum(c). Degenerate margins
// (all-empty or all-full) give log 1 = 0.
double log_n_canfield(int m, int n, std::span<const int> r, std::span<const int> c);
double log_n_canfield(const Margins& margins);

// Odds from the count-ratio simplification of the formula above. n is the
// current column count, c_rest the column sums after the current column.
UVector u_canfield(std::span<const int> r, std::span<const int> c_rest, int n);

// Sparse-regime alternative; exact for margins of the shape (k,1,...,1).
UVector u_greenhill(std::span<const int> r, std::span<const int> c_rest);

// Support-adjusted variant; a is the support pattern of the current submatrix
// (first column included). Reduces to u_canfield when a is all ones.
UVector u_structural(std::span<const int> r, std::span<const int> c_rest, const BinaryMatrix& a);

// Single-row evaluators used both by the batch builders above and by the
// per-column sampler update.
double log_u_canfield_row(const ApproxContext& ctx, int ri, int n_cur);
double log_u_greenhill_row(const ApproxContext& ctx, int ri, int n_cur);

}  // namespace binmat

#endif  // BINMAT_COMBINATORICS_HPP_
