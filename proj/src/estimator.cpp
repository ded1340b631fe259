#include "binmat/estimator.hpp"

#include <algorithm>
#include <cstdio>

#include "binmat/runner.hpp"

namespace binmat {

namespace {
constexpr double kLn10 = 2.302585092994045684;
}

LogBigNumber LogBigNumber::from_ln(double ln_value) {
  LogBigNumber x;
  x.log10_value = ln_value == kNegInf ? kNegInf : ln_value / kLn10;
  return x;
}

double LogBigNumber::ln() const { return log10_value == kNegInf ? kNegInf : log10_value * kLn10; }

std::pair<double, long long> LogBigNumber::parts(int sig) const {
  if (is_zero()) return {0.0, 0};
  long long e = static_cast<long long>(std::floor(log10_value));
  double man = std::pow(10.0, log10_value - e);
  // Round to the requested digits; a mantissa that rounds to 10 carries.
  const double scale = std::pow(10.0, sig - 1);
  man = std::round(man * scale) / scale;
  if (man >= 10.0) {
    man /= 10.0;
    e += 1;
  }
  if (man < 1.0) man = 1.0;  // guards log10 just below an integer
  return {man, e};
}

std::string LogBigNumber::format(int sig) const {
  if (is_zero()) return "0";
  auto [man, e] = parts(sig);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*ge%+lld", sig, man, e);
  return buf;
}

SignedLog SignedLog::from_real(double x) {
  if (x == 0.0) return {};
  return {x > 0 ? 1 : -1, std::log(std::abs(x))};
}

SignedLog signed_log_add(SignedLog a, SignedLog b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.log_abs < b.log_abs) std::swap(a, b);
  const double diff = std::exp(b.log_abs - a.log_abs);
  if (a.sign == b.sign) return {a.sign, a.log_abs + std::log1p(diff)};
  if (diff >= 1.0) return {};  // exact cancellation
  return {a.sign, a.log_abs + std::log1p(-diff)};
}

void ShardStats::add(double log_f) {
  count += 1;
  if (log_f == kNegInf) {
    dead += 1;
    return;
  }
  if (log_f > max_lf) max_lf = log_f;
  if (log_f < min_alive_lf) min_alive_lf = log_f;
  sum_f.add(log_f);
  sum_f2.add(2.0 * log_f);
}

void ShardStats::add(double log_f, SignedLog h) {
  add(log_f);
  has_h = true;
  if (log_f == kNegInf || h.sign == 0) return;  // f h = 0 contributes nothing
  const double lfh = log_f + h.log_abs;
  (h.sign > 0 ? sum_fh_pos : sum_fh_neg).add(lfh);
  sum_f2h2.add(2.0 * lfh);
}

SignedLog ShardStats::sum_fh() const {
  const SignedLog pos = SignedLog::from_log(sum_fh_pos.lse(), 1);
  const SignedLog neg = SignedLog::from_log(sum_fh_neg.lse(), -1);
  return signed_log_add(pos, neg);
}

ShardStats ShardStats::merge(const ShardStats& a, const ShardStats& b) {
  ShardStats out;
  out.count = a.count + b.count;
  out.dead = a.dead + b.dead;
  out.max_lf = std::max(a.max_lf, b.max_lf);
  out.min_alive_lf = std::min(a.min_alive_lf, b.min_alive_lf);
  out.sum_f = a.sum_f;
  out.sum_f.merge(b.sum_f);
  out.sum_f2 = a.sum_f2;
  out.sum_f2.merge(b.sum_f2);
  out.has_h = a.has_h || b.has_h;
  out.sum_fh_pos = a.sum_fh_pos;
  out.sum_fh_pos.merge(b.sum_fh_pos);
  out.sum_fh_neg = a.sum_fh_neg;
  out.sum_fh_neg.merge(b.sum_fh_neg);
  out.sum_f2h2 = a.sum_f2h2;
  out.sum_f2h2.merge(b.sum_f2h2);
  return out;
}

EstimateSummary summarize(const ShardStats& s) {
  if (s.count < 1) throw std::invalid_argument("estimate requires at least one sample");
  EstimateSummary out;
  out.T = s.count;
  out.dead_fraction = static_cast<double>(s.dead) / s.count;
  out.has_h = s.has_h;

  const double logT = std::log(static_cast<double>(s.count));
  if (s.sum_f.lse() == kNegInf) {
    // Every draw was dead: the estimate of kappa is exactly zero and the
    // weight diagnostics are undefined.
    out.kappa_hat = LogBigNumber::from_ln(kNegInf);
    out.se_kappa = LogBigNumber::from_ln(kNegInf);
    out.defined = false;
    out.ess = 0.0;
    return out;
  }

  const double log_kappa = s.sum_f.lse() - logT;
  out.kappa_hat = LogBigNumber::from_ln(log_kappa);

  if (s.count >= 2) {
    // cv^2 = (sum f^2 - T kappa^2) / ((T-1) kappa^2). The shifted-linear
    // ratio T sum_f2 / sum_f^2 is exactly one for constant weights, so the
    // diagnostic is exactly zero there.
    const double ratio = static_cast<double>(s.count) * s.sum_f2.sum /
                         (s.sum_f.sum * s.sum_f.sum) * std::exp(s.sum_f2.shift - 2.0 * s.sum_f.shift);
    double cv2 = (ratio - 1.0) * static_cast<double>(s.count) / (s.count - 1);
    if (cv2 < 0.0) cv2 = 0.0;
    out.cv2_hat = cv2;
    out.se_kappa = LogBigNumber::from_ln(cv2 > 0.0 ? log_kappa + 0.5 * std::log(cv2) - 0.5 * logT : kNegInf);
  } else {
    out.cv2_hat = 0.0;
    out.se_kappa = LogBigNumber::from_ln(kNegInf);
  }
  out.delta_hat = s.max_lf > s.min_alive_lf ? std::expm1(s.max_lf - s.min_alive_lf) : 0.0;
  out.delta_excludes_dead = s.dead > 0;
  out.ess = static_cast<double>(s.count) / (1.0 + out.cv2_hat);

  if (s.has_h) {
    const SignedLog fh = s.sum_fh();
    out.per_sign = fh.sign;
    out.per_hat = LogBigNumber::from_ln(fh.sign == 0 ? kNegInf : fh.log_abs - logT);
    const double log_mu = fh.sign == 0 ? kNegInf : fh.log_abs - s.sum_f.lse();
    out.mu_sign = fh.sign;
    out.mu_hat = fh.sign * std::exp(log_mu);
    if (s.count >= 2 && fh.sign != 0) {
      const double a = s.sum_f2h2.lse() + logT - 2.0 * fh.log_abs;
      double relvar = std::expm1(a) * static_cast<double>(s.count) / (s.count - 1);
      if (relvar < 0.0) relvar = 0.0;
      // sigma / (sqrt(T) |per|), in percent.
      out.rel_se_pct = 100.0 * std::sqrt(relvar / s.count);
      out.se_per = LogBigNumber::from_ln(relvar > 0.0 ? out.per_hat.ln() + 0.5 * std::log(relvar) - 0.5 * logT
                                                      : kNegInf);
    } else {
      out.se_per = LogBigNumber::from_ln(kNegInf);
    }
  }
  return out;
}

EstimateSummary estimate(std::span<const double> log_f) {
  ShardStats s;
  for (double lf : log_f) s.add(lf);
  return summarize(s);
}

EstimateSummary estimate(std::span<const double> log_f, std::span<const SignedLog> h) {
  if (log_f.size() != h.size()) throw std::invalid_argument("log_f and h lengths differ");
  ShardStats s;
  for (size_t i = 0; i < log_f.size(); ++i) s.add(log_f[i], h[i]);
  return summarize(s);
}

EstimateSummary estimate_with_values(std::span<const double> log_f, std::span<const double> h) {
  if (log_f.size() != h.size()) throw std::invalid_argument("log_f and h lengths differ");
  ShardStats s;
  for (size_t i = 0; i < log_f.size(); ++i) s.add(log_f[i], SignedLog::from_real(h[i]));
  return summarize(s);
}

int cycle_count(const BinaryMatrix& z) {
  const int n = z.rows();
  if (z.cols() != n) throw std::invalid_argument("cycle count requires a square matrix");
  std::vector<int> to_row(n, -1);
  std::vector<char> row_used(n, 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (z(i, j)) {
        if (to_row[j] != -1) throw std::invalid_argument("not a permutation matrix");
        to_row[j] = i;
      }
    }
    if (to_row[j] == -1 || row_used[to_row[j]]) throw std::invalid_argument("not a permutation matrix");
    row_used[to_row[j]] = 1;
  }
  int cycles = 0;
  std::vector<char> visited(n, 0);
  for (int j = 0; j < n; ++j) {
    if (visited[j]) continue;
    ++cycles;
    int k = j;
    while (!visited[k]) {
      visited[k] = 1;
      k = to_row[k];
    }
  }
  return cycles;
}

int cycle_count(const SampleRecord& rec) {
  if (rec.m != rec.n) throw std::invalid_argument("cycle count requires a square matrix");
  const int n = rec.n;
  if (static_cast<int>(rec.ones.size()) != n) throw std::invalid_argument("not a permutation matrix");
  std::vector<int> to_row(n, -1);
  std::vector<char> row_used(n, 0);
  for (auto [i, j] : rec.ones) {
    if (to_row[j] != -1 || row_used[i]) throw std::invalid_argument("not a permutation matrix");
    to_row[j] = i;
    row_used[i] = 1;
  }
  int cycles = 0;
  std::vector<char> visited(n, 0);
  for (int j = 0; j < n; ++j) {
    if (visited[j]) continue;
    ++cycles;
    int k = j;
    while (!visited[k]) {
      visited[k] = 1;
      k = to_row[k];
    }
  }
  return cycles;
}

EstimateSummary alpha_permanent(const AlphaPermanentRequest& req, uint64_t seed, int threads) {
  const int n = req.w.rows();
  if (req.w.cols() != n) throw std::invalid_argument("alpha-permanent requires a square weight matrix");
  if (req.T < 1) throw std::invalid_argument("alpha-permanent requires T >= 1");

  Margins margins(std::vector<int>(n, 1), std::vector<int>(n, 1));
  PreparedSpec prepared(ProblemSpec(std::move(margins), req.w, req.options));

  const double log_abs_alpha = req.alpha == 0.0 ? kNegInf : std::log(std::abs(req.alpha));
  ShardStats stats;
  run_samples_blocked(prepared, req.T, seed, threads, [&](long long, std::span<const SampleRecord> block) {
    for (const SampleRecord& rec : block) {
      const double lf = log_importance_weight(rec, req.w);
      if (lf == kNegInf) {
        stats.add(lf, SignedLog::zero());
        continue;
      }
      const int cyc = cycle_count(rec);
      SignedLog h;
      if (req.alpha == 0.0) {
        h = SignedLog::zero();
      } else {
        const int sign = req.alpha < 0.0 && (cyc % 2 == 1) ? -1 : 1;
        h = SignedLog::from_log(cyc * log_abs_alpha, sign);
      }
      stats.add(lf, h);
    }
  });
  return summarize(stats);
}

}  // namespace binmat
