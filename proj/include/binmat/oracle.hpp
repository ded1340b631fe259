#ifndef BINMAT_ORACLE_HPP_
#define BINMAT_ORACLE_HPP_

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "binmat/common.hpp"
#include "binmat/estimator.hpp"
#include "binmat/margins.hpp"
#include "binmat/weights.hpp"

namespace binmat::oracle {

// Ground-truth value: either an exact big integer or a log10-domain real.
class ExactCount {
 public:
  enum class Method { kEnumeration, kRecursion, kClosedForm };

  static ExactCount from_integer(mpz_class v, Method method);
  static ExactCount from_log10(double log10_value, Method method);
  static ExactCount from_rational(const mpq_class& v, Method method);

  bool is_exact_integer() const { return exact_; }
  const mpz_class& integer() const;
  double log10() const { return log10_; }
  double ln() const;
  Method method() const { return method_; }
  std::string to_string() const;

 private:
  bool exact_ = false;
  mpz_class int_value_;
  double log10_ = kNegInf;
  Method method_ = Method::kEnumeration;
};

double mpz_log10(const mpz_class& v);

// All binary matrices with the given margins (optionally restricted to a
// support pattern), by depth-first column assembly with feasibility pruning.
// Throws when the candidate-column product exceeds the cap.
std::vector<BinaryMatrix> enumerate_omega(const Margins& margins, const BinaryMatrix* zero_pattern = nullptr,
                                          double cap = 1e7);

// Exact count of binary matrices with the given margins via a transfer-matrix
// recursion over multisets of residual row sums. Independent of the sampler.
mpz_class count_matrices(const Margins& margins);

// kappa = sum over the margin set of the entrywise weight products. Uses the
// counting recursion when the weights are constant, enumeration otherwise.
ExactCount exact_kappa(const Margins& margins, const WeightMatrix& w, double cap = 1e7);

// Inclusion-exclusion permanent; practical up to n ~ 20.
ExactCount exact_permanent(const WeightMatrix& w);

// Number of n x n binary matrices with all margins equal to two.
ExactCount two_regular_count(int n);

// alpha-permanent of the constant n x n matrix with entry b, in exact
// rational arithmetic: n! b^n prod_i (i + alpha - 1) / i.
ExactCount const_alpha_permanent(int n, double b, double alpha);

// Reproducible uniform(0,1) matrix from the MINSTD multiplicative congruence
// x -> 7^5 x mod (2^31 - 1), filled column-major, exact integer arithmetic.
Matrix<double> minstd_canonical(int m, int n);

enum class WeightClass { kI, kII, kIII, kIV };

// The four benchmark weight families over a canonical uniform matrix:
// I ones, II y+1, III y, IV -log(y) clipped to zero on y >= 0.99.
WeightMatrix weight_class(const Matrix<double>& y, WeightClass cls);

// 13 x 17 species-by-island occurrence margins (Darwin's finches), a standard
// hard test case for margin-constrained counting.
Margins darwin_finch_margins();

}  // namespace binmat::oracle

#endif  // BINMAT_ORACLE_HPP_
