#ifndef BINMAT_ESTIMATOR_HPP_
#define BINMAT_ESTIMATOR_HPP_

#include <optional>
#include <string>
#include <vector>

#include "binmat/common.hpp"
#include "binmat/proposal.hpp"

namespace binmat {

// Decimal scientific form of a possibly astronomically large positive value,
// carried as log10. Zero is log10 = -inf.
struct LogBigNumber {
  double log10_value = kNegInf;

  static LogBigNumber from_ln(double ln_value);
  static LogBigNumber from_log10(double l10) { return LogBigNumber{l10}; }
  bool is_zero() const { return log10_value == kNegInf; }
  double ln() const;

  // mantissa in [1, 10) and decimal exponent, rounded to sig significant
  // digits (carries into the exponent when the mantissa rounds up to 10).
  std::pair<double, long long> parts(int sig = 6) const;
  std::string format(int sig = 6) const;
};

// Signed value carried as (sign, log |x|).
struct SignedLog {
  int sign = 0;  // -1, 0, +1
  double log_abs = kNegInf;

  static SignedLog zero() { return {}; }
  static SignedLog from_real(double x);
  static SignedLog from_log(double log_abs, int sign = 1) { return {log_abs == kNegInf ? 0 : sign, log_abs}; }
};

SignedLog signed_log_add(SignedLog a, SignedLog b);

// Max-shifted linear accumulator for sums of exp(log x). Summing equal terms
// is exact, which keeps the spread diagnostics at exactly zero for constant
// weights.
struct LogAccum {
  double shift = kNegInf;
  double sum = 0.0;

  void add(double log_x) {
    if (log_x == kNegInf) return;
    if (log_x > shift) {
      sum = sum * std::exp(shift - log_x) + 1.0;
      shift = log_x;
    } else {
      sum += std::exp(log_x - shift);
    }
  }
  void merge(const LogAccum& other) {
    if (other.shift == kNegInf) return;
    if (other.shift > shift) {
      sum = sum * std::exp(shift - other.shift) + other.sum;
      shift = other.shift;
    } else {
      sum += other.sum * std::exp(other.shift - shift);
    }
  }
  double lse() const { return shift == kNegInf || sum <= 0.0 ? kNegInf : shift + std::log(sum); }
};

// Mergeable sufficient statistics over importance-weighted samples.
// Per-sample inputs are log f (-inf for dead draws) and optionally h.
struct ShardStats {
  long long count = 0;
  long long dead = 0;
  double max_lf = kNegInf;
  double min_alive_lf = std::numeric_limits<double>::infinity();
  LogAccum sum_f;
  LogAccum sum_f2;
  bool has_h = false;
  LogAccum sum_fh_pos;  // positive and negative parts of sum f h
  LogAccum sum_fh_neg;
  LogAccum sum_f2h2;

  void add(double log_f);
  void add(double log_f, SignedLog h);
  SignedLog sum_fh() const;
  static ShardStats merge(const ShardStats& a, const ShardStats& b);
};

struct EstimateSummary {
  long long T = 0;
  LogBigNumber kappa_hat;
  LogBigNumber se_kappa;
  double cv2_hat = 0.0;
  double delta_hat = 0.0;
  double ess = 0.0;
  double dead_fraction = 0.0;
  bool delta_excludes_dead = false;  // dead draws exist; min taken over alive ones
  bool defined = true;               // false when every draw is dead

  // Present when h values were supplied.
  bool has_h = false;
  double mu_hat = 0.0;
  int mu_sign = 0;
  LogBigNumber per_hat;  // kappa_hat * mu_hat, i.e. mean of f h
  int per_sign = 0;
  LogBigNumber se_per;
  double rel_se_pct = 0.0;
};

EstimateSummary summarize(const ShardStats& stats);

// One-pass estimate over per-sample log weights (and optional h values;
// signed logs let h magnitudes exceed double range).
EstimateSummary estimate(std::span<const double> log_f);
EstimateSummary estimate(std::span<const double> log_f, std::span<const SignedLog> h);
EstimateSummary estimate_with_values(std::span<const double> log_f, std::span<const double> h);

// Number of disjoint cycles of the permutation encoded by a square binary
// matrix with unit margins. Throws when z is not a permutation matrix.
int cycle_count(const BinaryMatrix& z);
int cycle_count(const SampleRecord& rec);

struct AlphaPermanentRequest {
  WeightMatrix w;  // square, every row and column with a positive entry
  double alpha = 1.0;
  long long T = 1000;
  SamplerOptions options;
};

// Importance-sampling estimate of sum over permutations of
// alpha^(#cycles) * prod of matched entries.
EstimateSummary alpha_permanent(const AlphaPermanentRequest& req, uint64_t seed, int threads = 1);

}  // namespace binmat

#endif  // BINMAT_ESTIMATOR_HPP_
