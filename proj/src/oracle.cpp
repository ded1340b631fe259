#include "binmat/oracle.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace binmat::oracle {

double mpz_log10(const mpz_class& v) {
  if (v == 0) return kNegInf;
  signed long exp2;
  const double mant = mpz_get_d_2exp(&exp2, v.get_mpz_t());
  return std::log10(std::abs(mant)) + exp2 * 0.30102999566398119521;
}

ExactCount ExactCount::from_integer(mpz_class v, Method method) {
  ExactCount out;
  out.exact_ = true;
  out.int_value_ = std::move(v);
  out.log10_ = mpz_log10(out.int_value_);
  out.method_ = method;
  return out;
}

ExactCount ExactCount::from_log10(double log10_value, Method method) {
  ExactCount out;
  out.log10_ = log10_value;
  out.method_ = method;
  return out;
}

ExactCount ExactCount::from_rational(const mpq_class& v, Method method) {
  if (v.get_den() == 1) return from_integer(v.get_num(), method);
  ExactCount out;
  out.log10_ = mpz_log10(v.get_num()) - mpz_log10(v.get_den());
  out.method_ = method;
  return out;
}

const mpz_class& ExactCount::integer() const {
  if (!exact_) throw std::logic_error("value is not an exact integer");
  return int_value_;
}

double ExactCount::ln() const { return log10_ == kNegInf ? kNegInf : log10_ * 2.302585092994045684; }

std::string ExactCount::to_string() const {
  if (exact_) return int_value_.get_str();
  return LogBigNumber::from_log10(log10_).format();
}

namespace {

// Gale-Ryser test for raw residual sums against precomputed conjugate partial
// sums of the remaining columns.
bool residuals_feasible(std::vector<int> r, const std::vector<long long>& conj_prefix, long long col_total) {
  long long sum_r = std::accumulate(r.begin(), r.end(), 0LL);
  if (sum_r != col_total) return false;
  std::sort(r.begin(), r.end(), std::greater<int>());
  long long lhs = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    lhs += r[i];
    if (lhs > conj_prefix[i]) return false;
  }
  return true;
}

struct Enumerator {
  const Margins& margins;
  const BinaryMatrix* pattern;
  int m, n;
  std::vector<std::vector<long long>> conj_prefix;  // per column j: prefix sums of conj(c[j+1..])
  std::vector<long long> col_total;                 // sum of c[j+1..]
  std::vector<int> r_cur;
  BinaryMatrix work;
  std::vector<BinaryMatrix> out;

  Enumerator(const Margins& mg, const BinaryMatrix* pat) : margins(mg), pattern(pat), m(mg.m), n(mg.n), work(mg.m, mg.n) {
    conj_prefix.resize(n);
    col_total.resize(n);
    for (int j = 0; j < n; ++j) {
      std::vector<int> rest(margins.c.begin() + j + 1, margins.c.end());
      ConjugateVector cc = conjugate(rest, m);
      conj_prefix[j].resize(m);
      long long s = 0;
      for (int i = 0; i < m; ++i) {
        s += cc.cc[i];
        conj_prefix[j][i] = s;
      }
      col_total[j] = std::accumulate(rest.begin(), rest.end(), 0LL);
    }
    r_cur = margins.r;
  }

  void column(int j) {
    if (j == n) {
      out.push_back(work);
      return;
    }
    pick(j, 0, margins.c[j]);
  }

  void pick(int j, int from, int need) {
    if (need == 0) {
      if (residuals_feasible(r_cur, conj_prefix[j], col_total[j])) column(j + 1);
      return;
    }
    if (m - from < need) return;
    for (int i = from; i < m; ++i) {
      if (r_cur[i] == 0) continue;
      if (pattern && !(*pattern)(i, j)) continue;
      work(i, j) = 1;
      r_cur[i] -= 1;
      pick(j, i + 1, need - 1);
      work(i, j) = 0;
      r_cur[i] += 1;
    }
  }
};

}  // namespace

std::vector<BinaryMatrix> enumerate_omega(const Margins& margins, const BinaryMatrix* zero_pattern, double cap) {
  double log_candidates = 0.0;
  for (int cj : margins.c)
    log_candidates += std::lgamma(margins.m + 1.0) - std::lgamma(cj + 1.0) - std::lgamma(margins.m - cj + 1.0);
  if (log_candidates > std::log(cap)) throw std::invalid_argument("instance too large to enumerate");

  Enumerator en(margins, zero_pattern);
  en.column(0);
  return en.out;
}

mpz_class count_matrices(const Margins& margins) {
  const int m = margins.m, n = margins.n;

  // Conjugate prefix sums for pruning, per processed-column count.
  std::vector<std::vector<long long>> conj_prefix(n);
  std::vector<long long> col_total(n);
  for (int j = 0; j < n; ++j) {
    std::vector<int> rest(margins.c.begin() + j + 1, margins.c.end());
    ConjugateVector cc = conjugate(rest, m);
    conj_prefix[j].resize(m);
    long long s = 0;
    for (int i = 0; i < m; ++i) {
      s += cc.cc[i];
      conj_prefix[j][i] = s;
    }
    col_total[j] = std::accumulate(rest.begin(), rest.end(), 0LL);
  }

  // States are descending multisets of nonzero residual row sums.
  using State = std::vector<int>;
  std::map<State, mpz_class> states;
  State init = margins.r;
  std::sort(init.begin(), init.end(), std::greater<int>());
  while (!init.empty() && init.back() == 0) init.pop_back();
  states[init] = 1;

  for (int j = 0; j < n; ++j) {
    std::map<State, mpz_class> next;
    const int cj = margins.c[j];
    for (const auto& [state, ways] : states) {
      // Runs of equal residual values.
      std::vector<std::pair<int, int>> runs;  // (value, count)
      for (int v : state) {
        if (!runs.empty() && runs.back().first == v)
          runs.back().second += 1;
        else
          runs.emplace_back(v, 1);
      }
      // Distribute cj ones over the runs.
      std::vector<int> take(runs.size(), 0);
      auto rec = [&](auto&& self, size_t idx, int need, mpz_class mult) -> void {
        if (need == 0) {
          for (size_t t = idx; t < runs.size(); ++t) take[t] = 0;
          State ns;
          ns.reserve(state.size());
          for (size_t t = 0; t < runs.size(); ++t) {
            for (int q = 0; q < runs[t].second - take[t]; ++q) ns.push_back(runs[t].first);
            for (int q = 0; q < take[t]; ++q)
              if (runs[t].first > 1) ns.push_back(runs[t].first - 1);
          }
          std::sort(ns.begin(), ns.end(), std::greater<int>());
          // Prune states that cannot be completed by the remaining columns.
          long long sum_r = std::accumulate(ns.begin(), ns.end(), 0LL);
          if (sum_r != col_total[j]) return;
          long long lhs = 0;
          for (size_t i = 0; i < ns.size(); ++i) {
            lhs += ns[i];
            if (i < static_cast<size_t>(m) && lhs > conj_prefix[j][i]) return;
          }
          next[ns] += mult * ways;
          return;
        }
        if (idx == runs.size()) return;
        const int avail = runs[idx].second;
        for (int k = std::min(avail, need); k >= 0; --k) {
          take[idx] = k;
          mpz_class bin;
          mpz_bin_uiui(bin.get_mpz_t(), avail, k);
          self(self, idx + 1, need - k, mult * bin);
        }
        take[idx] = 0;
      };
      rec(rec, 0, cj, mpz_class(1));
    }
    states = std::move(next);
    if (states.empty()) return 0;
  }

  auto it = states.find(State{});
  return it == states.end() ? mpz_class(0) : it->second;
}

ExactCount exact_kappa(const Margins& margins, const WeightMatrix& w, double cap) {
  if (w.rows() != margins.m || w.cols() != margins.n)
    throw std::invalid_argument("weight matrix dimensions do not match margins");

  if (w.is_constant()) {
    const mpz_class count = count_matrices(margins);
    const double b = w.w(0, 0);
    if (b == 1.0) return ExactCount::from_integer(count, ExactCount::Method::kRecursion);
    return ExactCount::from_log10(mpz_log10(count) + margins.d * std::log10(b), ExactCount::Method::kRecursion);
  }

  std::vector<BinaryMatrix> all = enumerate_omega(margins, nullptr, cap);
  long double total = 0.0L;
  for (const BinaryMatrix& z : all) {
    long double prod = 1.0L;
    for (int i = 0; i < margins.m && prod != 0.0L; ++i)
      for (int j = 0; j < margins.n; ++j)
        if (z(i, j)) prod *= static_cast<long double>(w.w(i, j));
    total += prod;
  }
  if (total == 0.0L) return ExactCount::from_log10(kNegInf, ExactCount::Method::kEnumeration);
  return ExactCount::from_log10(static_cast<double>(log10l(total)), ExactCount::Method::kEnumeration);
}

ExactCount exact_permanent(const WeightMatrix& w) {
  const int n = w.rows();
  if (w.cols() != n) throw std::invalid_argument("permanent requires a square matrix");
  if (n > 20) throw std::invalid_argument("permanent limited to n <= 20");

  // Ryser with Gray-code subset updates.
  std::vector<long double> rowsum(n, 0.0L);
  long double total = 0.0L;
  uint32_t prev = 0;
  const uint32_t full = n >= 32 ? 0xFFFFFFFFu : ((1u << n) - 1);
  for (uint32_t g = 1; g <= full; ++g) {
    const uint32_t gray = g ^ (g >> 1);
    const uint32_t changed = gray ^ prev;
    const int j = std::countr_zero(changed);
    const long double sgn_col = (gray & changed) ? 1.0L : -1.0L;
    for (int i = 0; i < n; ++i) rowsum[i] += sgn_col * static_cast<long double>(w.w(i, j));
    prev = gray;

    long double prod = 1.0L;
    for (int i = 0; i < n; ++i) prod *= rowsum[i];
    const int bits = std::popcount(gray);
    total += ((n - bits) % 2 == 0 ? 1.0L : -1.0L) * prod;
  }
  // Nonnegative inputs give a nonnegative permanent; clamp rounding residue.
  if (total <= 0.0L) return ExactCount::from_log10(kNegInf, ExactCount::Method::kClosedForm);
  return ExactCount::from_log10(static_cast<double>(log10l(total)), ExactCount::Method::kClosedForm);
}

ExactCount two_regular_count(int n) {
  if (n < 1) throw std::invalid_argument("two-regular count requires n >= 1");
  std::vector<mpz_class> h(std::max(n + 1, 4));
  h[1] = 0;
  h[2] = 1;
  h[3] = 6;
  for (int k = 4; k <= n; ++k) {
    mpz_class acc = (2 * k - 3) * h[k - 2] + mpz_class(k - 2) * (k - 2) * h[k - 3];
    acc *= mpz_class(k) * (k - 1) * (k - 1);
    mpz_divexact_ui(acc.get_mpz_t(), acc.get_mpz_t(), 2);
    h[k] = acc;
  }
  return ExactCount::from_integer(h[n], ExactCount::Method::kRecursion);
}

ExactCount const_alpha_permanent(int n, double b, double alpha) {
  if (n < 1) throw std::invalid_argument("size must be positive");
  if (b < 0.0) throw std::invalid_argument("entry must be nonnegative");
  mpq_class value(1);
  mpz_class fact(1);
  const mpq_class alpha_q(alpha);  // exact binary rational
  const mpq_class b_q(b);
  for (int i = 1; i <= n; ++i) {
    fact *= i;
    value *= (alpha_q + i - 1) / mpq_class(i);
    value *= b_q;
  }
  value *= mpq_class(fact);
  value.canonicalize();
  return ExactCount::from_rational(value, ExactCount::Method::kClosedForm);
}

Matrix<double> minstd_canonical(int m, int n) {
  constexpr uint64_t kMod = 2147483647ull;  // 2^31 - 1
  constexpr uint64_t kMul = 16807ull;       // 7^5
  Matrix<double> y(m, n);
  uint64_t state = 1;  // R(0)
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      state = (kMul * state) % kMod;
      y(i, j) = static_cast<double>(state) / static_cast<double>(kMod);
    }
  }
  return y;
}

WeightMatrix weight_class(const Matrix<double>& y, WeightClass cls) {
  const int m = y.rows(), n = y.cols();
  Matrix<double> w(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double yij = y(i, j);
      switch (cls) {
        case WeightClass::kI: w(i, j) = 1.0; break;
        case WeightClass::kII: w(i, j) = yij + 1.0; break;
        case WeightClass::kIII: w(i, j) = yij; break;
        case WeightClass::kIV: w(i, j) = yij < 0.99 ? -std::log(yij) : 0.0; break;
      }
    }
  }
  return WeightMatrix(std::move(w));
}

Margins darwin_finch_margins() {
  return Margins({14, 13, 14, 10, 12, 2, 10, 1, 10, 11, 6, 2, 17},
                 {4, 4, 11, 10, 10, 8, 9, 10, 8, 9, 3, 10, 4, 7, 9, 3, 3});
}

}  // namespace binmat::oracle
