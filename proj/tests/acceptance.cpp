// End-to-end verification binary. Each numbered check prints one PASS/FAIL
// line; the process exits nonzero if any check fails. The slow large-scale
// shape checks only run with BINMAT_ACCEPT_SLOW=1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "binmat/estimator.hpp"
#include "binmat/io.hpp"
#include "binmat/oracle.hpp"
#include "binmat/runner.hpp"
#include "test_support.hpp"

using namespace binmat;
namespace orc = binmat::oracle;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& label, const std::string& detail) {
  std::printf("[%s] criterion %d: %s  (%s)\n", ok ? "PASS" : "FAIL", id, label.c_str(), detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EstimateSummary run_estimate(const ProblemSpec& problem, long long T, uint64_t seed, int threads = 4) {
  PreparedSpec prepared(problem);
  ShardStats stats;
  run_samples_blocked(prepared, T, seed, threads, [&](long long, std::span<const SampleRecord> block) {
    for (const SampleRecord& rec : block) stats.add(log_importance_weight(rec, problem.w));
  });
  return summarize(stats);
}

// --- criterion 1: exact count for the finch margins ------------------------
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const mpz_class count = orc::count_matrices(orc::darwin_finch_margins());
  const double dt = seconds_since(t0);
  const bool ok = count == mpz_class("67149106137567626") && dt < 10.0;
  report(1, ok, "finch margins exact count",
         "count=" + count.get_str() + ", " + std::to_string(dt) + " s");
}

// --- criterion 2: finch estimation quality ----------------------------------
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const Margins finch = orc::darwin_finch_margins();
  const EstimateSummary s = run_estimate(ProblemSpec::uniform(finch), 100000, 2024);
  const double dt = seconds_since(t0);
  const double exact_ln = orc::mpz_log10(orc::count_matrices(finch)) * std::log(10.0);
  const double devs = std::abs(s.kappa_hat.ln() - exact_ln) / std::exp(s.se_kappa.ln() - s.kappa_hat.ln());
  const bool ok = devs < 4.0 && s.cv2_hat >= 0.2 && s.cv2_hat <= 1.0 && dt < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "kappa=%s, %.2f se from exact, cv2=%.3f, %.1f s",
                s.kappa_hat.format().c_str(), devs, s.cv2_hat, dt);
  report(2, ok, "finch estimation within 4 se, cv2 in [0.2, 1.0]", buf);
}

// --- criterion 3: unit-margin uniform case is exact ------------------------
void criterion_3() {
  bool ok = true;
  std::string detail;
  for (int n : {5, 50}) {
    const EstimateSummary s =
        run_estimate(ProblemSpec::uniform(Margins(std::vector<int>(n, 1), std::vector<int>(n, 1))), 2000, 11);
    double log_fact = 0.0;
    for (int i = 2; i <= n; ++i) log_fact += std::log(static_cast<double>(i));
    const double rel = std::abs(s.kappa_hat.ln() - log_fact) / log_fact;
    ok = ok && s.delta_hat <= 1e-10 && s.cv2_hat <= 1e-10 && rel <= 1e-9;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "n=%d delta=%.2e cv2=%.2e relerr=%.2e; ", n, s.delta_hat, s.cv2_hat, rel);
    detail += buf;
  }
  report(3, ok, "unit margins: constant weights and exact factorial", detail);
}

// --- criterion 4: two-regular counts ----------------------------------------
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (int n : {4, 5, 6, 30}) {
    const EstimateSummary s =
        run_estimate(ProblemSpec::uniform(Margins(std::vector<int>(n, 2), std::vector<int>(n, 2))), 10000, 776);
    const double exact_ln = orc::two_regular_count(n).ln();
    const double devs = std::abs(s.kappa_hat.ln() - exact_ln) / std::exp(s.se_kappa.ln() - s.kappa_hat.ln());
    ok = ok && devs < 4.0;
    if (n == 30) ok = ok && s.cv2_hat < 1e-3;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "n=%d %.2fse cv2=%.1e; ", n, devs, s.cv2_hat);
    detail += buf;
  }
  const double dt = seconds_since(t0);
  detail += std::to_string(dt) + " s";
  report(4, ok && dt < 60.0, "two-regular counts within 4 se of the recursion", detail);
}

// --- criteria 5 and 6: deterministic identity and support over a grid -------
struct GridOutcome {
  int specs = 0;
  int identity_fail = 0;
  int support_fail = 0;
  double worst_rel = 0.0;
};

GridOutcome run_grid() {
  GridOutcome out;
  const Matrix<double> y4 = orc::minstd_canonical(4, 4);
  for (int m = 2; m <= 4; ++m) {
    for (int n = 2; n <= 4; ++n) {
      for (const Margins& mg : testing::all_feasible_margins(m, n, /*sorted_only=*/true)) {
        if (mg.d == 0) continue;
        for (auto cls : {orc::WeightClass::kI, orc::WeightClass::kII, orc::WeightClass::kIII,
                         orc::WeightClass::kIV}) {
          Matrix<double> yw(m, n);
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) yw(i, j) = y4(i, j);
          const WeightMatrix w = orc::weight_class(yw, cls);
          bool degenerate = false;
          for (int i = 0; i < m && !degenerate; ++i)
            if (w.row_nnz[i] == 0) degenerate = true;
          for (int j = 0; j < n && !degenerate; ++j)
            if (w.col_nnz[j] == 0) degenerate = true;
          if (degenerate) continue;

          out.specs += 1;
          PreparedSpec spec(ProblemSpec(mg, w));
          const auto omega = orc::enumerate_omega(mg);

          // Criterion 5: sum of Q*(z) f(z) over the support equals kappa,
          // with both factors produced by the estimation code path.
          long double kappa = 0.0L, identity = 0.0L;
          bool support_ok = true;
          for (const BinaryMatrix& z : omega) {
            long double prod = 1.0L;
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j)
                if (z(i, j)) prod *= static_cast<long double>(w.w(i, j));
            kappa += prod;
            const double lq = spec.evaluate(z);
            if (prod > 0.0L) {
              if (lq == kNegInf) {
                support_ok = false;  // positive-weight member missed by Q*
                continue;
              }
              SampleRecord rec;
              rec.m = m;
              rec.n = n;
              rec.log_q = lq;
              for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                  if (z(i, j)) rec.ones.emplace_back(i, j);
              const double lf = log_importance_weight(rec, w);
              identity += expl(static_cast<long double>(lq) + static_cast<long double>(lf));
            }
          }
          const double rel =
              kappa > 0.0L ? std::abs(static_cast<double>((identity - kappa) / kappa)) : 0.0;
          if (rel > out.worst_rel) out.worst_rel = rel;
          if (rel > 1e-9) out.identity_fail += 1;

          // Criterion 6: first-column support equality (exact for positive w,
          // coverage for class IV).
          const ConstraintSet cs = build_constraints(mg);
          const auto omega_cols = testing::first_columns(omega);
          if (!w.has_zeros()) {
            UVector u = u_canfield(mg.r, std::vector<int>(mg.c.begin() + 1, mg.c.end()), mg.n);
            std::vector<double> vzero(m, 0.0);
            ColumnChain chain = dp_build(u, vzero, cs);
            int support_size = 0;
            for (uint32_t mask = 0; mask < (1u << m); ++mask) {
              std::vector<uint8_t> x(m);
              for (int i = 0; i < m; ++i) x[i] = (mask >> i) & 1;
              const bool in_omega =
                  std::find(omega_cols.begin(), omega_cols.end(), x) != omega_cols.end();
              const bool in_chain = !chain.dead && dp_evaluate(chain, x) != kNegInf;
              if (in_chain) ++support_size;
              if (in_omega != in_chain) support_ok = false;
            }
            if (support_size != static_cast<int>(omega_cols.size())) support_ok = false;
          }
          if (!support_ok) out.support_fail += 1;
        }
      }
    }
  }
  return out;
}

void criteria_5_and_6() {
  const GridOutcome g = run_grid();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d specs, worst relative error %.2e, %d identity failures", g.specs,
                g.worst_rel, g.identity_fail);
  report(5, g.specs >= 50 && g.identity_fail == 0, "unbiasedness identity over the grid", buf);
  std::snprintf(buf, sizeof(buf), "%d specs, %d support mismatches", g.specs, g.support_fail);
  report(6, g.specs >= 50 && g.support_fail == 0, "proposal support matches the margin set", buf);
}

// --- criterion 7: constant-matrix alpha-permanents ---------------------------
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.0, 2.0}) {
    AlphaPermanentRequest req{ones_weights(20, 20), alpha, 10000};
    const EstimateSummary s = alpha_permanent(req, 31337);
    const double exact_ln = orc::const_alpha_permanent(20, 1.0, alpha).ln();
    const double sigma_rel = std::exp(s.se_per.ln() - s.per_hat.ln());
    const double err_ln = std::abs(s.per_hat.ln() - exact_ln);
    char buf[96];
    if (sigma_rel == 0.0) {
      // Constant weights: the estimator must reproduce the value outright.
      ok = ok && err_ln <= 1e-9;
      std::snprintf(buf, sizeof(buf), "n=20 a=%.1f exact (err %.1e); ", alpha, err_ln);
    } else {
      ok = ok && err_ln / sigma_rel < 4.0;
      std::snprintf(buf, sizeof(buf), "n=20 a=%.1f %.2fse; ", alpha, err_ln / sigma_rel);
    }
    detail += buf;
  }
  {
    AlphaPermanentRequest req{ones_weights(500, 500), 0.5, 1000};
    const EstimateSummary s = alpha_permanent(req, 424242, 4);
    const double exact_ln = orc::const_alpha_permanent(500, 1.0, 0.5).ln();
    const double sigma_rel = std::exp(s.se_per.ln() - s.per_hat.ln());
    const double devs = std::abs(s.per_hat.ln() - exact_ln) / sigma_rel;
    ok = ok && devs < 4.0;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "n=500 a=0.5 %.2fse rel_se=%.2f%%; ", devs, s.rel_se_pct);
    detail += buf;
  }
  const double dt = seconds_since(t0);
  detail += std::to_string(dt) + " s";
  report(7, ok && dt < 300.0, "constant-matrix alpha-permanents within 4 se", detail);
}

// --- criterion 8: sparse-regime odds are exact for lopsided margins ---------
void criterion_8() {
  // 24 x 31 with r = (24, 1, ...), c = (17, 1, ...): the exact count is
  // binom(30,23) binom(23,16) 7! + binom(30,24) binom(23,17) 6!.
  std::vector<int> r(24, 1);
  r[0] = 24;
  std::vector<int> c(31, 1);
  c[0] = 17;
  mpz_class b1, b2, b3, b4;
  mpz_bin_uiui(b1.get_mpz_t(), 30, 23);
  mpz_bin_uiui(b2.get_mpz_t(), 23, 16);
  mpz_bin_uiui(b3.get_mpz_t(), 30, 24);
  mpz_bin_uiui(b4.get_mpz_t(), 23, 17);
  const mpz_class exact = b1 * b2 * 5040 + b3 * b4 * 720;
  const double exact_ln = orc::mpz_log10(exact) * std::log(10.0);

  SamplerOptions opt;
  opt.approx = Approx::kGreenhill;
  const EstimateSummary s = run_estimate(ProblemSpec::uniform(Margins(r, c), opt), 3000, 7);
  const double rel = std::abs(s.kappa_hat.ln() - exact_ln) / exact_ln;
  const bool ok = s.delta_hat <= 1e-9 && rel <= 1e-9;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "delta=%.2e relerr=%.2e (count oracle agrees: %d)", s.delta_hat, rel,
                orc::count_matrices(Margins(r, c)) == exact);
  report(8, ok, "lopsided margins: sparse-regime odds reproduce the target", buf);
}

// --- criterion 9: diagonal rescaling shifts log kappa exactly ----------------
void criterion_9() {
  const int k = 5;
  const Matrix<double> y = orc::minstd_canonical(k, 2 * k + 2);
  Matrix<double> base(k, k);
  std::vector<double> aa(k), bb(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) base(i, j) = 0.2 + y(i, j);
    aa[i] = 0.5 + y(i, k);
    bb[i] = 0.25 + 2.0 * y(i, k + 1);
  }
  Matrix<double> scaled = base;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) scaled(i, j) *= aa[i] * bb[j];

  const Margins mg({2, 3, 1, 2, 2}, {2, 2, 2, 2, 2});
  SamplerOptions opt;
  opt.balance_tol = 1e-13;
  opt.balance_max_iter = 1000000;
  const long long T = 4000;
  const uint64_t seed = 99;
  const EstimateSummary s0 = run_estimate(ProblemSpec(mg, WeightMatrix(base), opt), T, seed, 1);
  const EstimateSummary s1 = run_estimate(ProblemSpec(mg, WeightMatrix(scaled), opt), T, seed, 1);

  double expect = 0.0;
  for (int i = 0; i < k; ++i) expect += mg.r[i] * std::log(aa[i]) + mg.c[i] * std::log(bb[i]);
  const double got = s1.kappa_hat.ln() - s0.kappa_hat.ln();
  const bool ok = std::abs(got - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "log shift %.12f vs %.12f", got, expect);
  report(9, ok, "diagonal rescaling shifts log kappa exactly", buf);
}

// --- criterion 10: per-sample time roughly linear in the fill ----------------
void criterion_10() {
  auto time_per_sample = [&](int r) {
    PreparedSpec spec(ProblemSpec::uniform(Margins(std::vector<int>(500, r), std::vector<int>(500, r))));
    SampleWorkspace ws;
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 5; ++rep) {
      const int T = 30;
      const auto t0 = std::chrono::steady_clock::now();
      for (int t = 0; t < T; ++t) {
        RngStream rng(12, static_cast<uint64_t>(t));
        spec.sample(rng, ws);
      }
      best = std::min(best, seconds_since(t0) / T);
    }
    return best;
  };
  const double t2 = time_per_sample(2);
  const double t8 = time_per_sample(8);
  const double t32 = time_per_sample(32);
  const double r1 = t8 / t2, r2 = t32 / t8;  // fill grows 4x at each step
  const bool ok = r1 >= 2.0 && r1 <= 8.0 && r2 >= 2.0 && r2 <= 8.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "ms/sample: %.2f, %.2f, %.2f; growth %.2fx, %.2fx vs 4x", t2 * 1e3,
                t8 * 1e3, t32 * 1e3, r1, r2);
  report(10, ok, "per-sample cost tracks the number of ones", buf);
}

std::vector<int> runs_to_vector(const std::vector<std::pair<int, int>>& runs) {
  std::vector<int> out;
  for (auto [value, count] : runs) out.insert(out.end(), count, value);
  return out;
}

// --- optional slow suite: large-scale diagnostic shape -----------------------
void slow_shape_suite() {
  std::printf("--- slow shape checks (BINMAT_ACCEPT_SLOW=1) ---\n");

  {
    // Irregular 50 x 100 margins; the uniform target sits near cv2 ~ 1e-3.
    const std::vector<int> r = runs_to_vector({{24, 1}, {22, 2}, {17, 4}, {13, 3}, {12, 2},
                                               {11, 3}, {10, 2}, {9, 3}, {8, 6}, {7, 1},
                                               {6, 4}, {5, 4}, {4, 5}, {3, 6}, {2, 4}});
    const std::vector<int> c = runs_to_vector({{12, 2}, {10, 2}, {9, 5}, {8, 4}, {7, 6},
                                               {6, 11}, {5, 10}, {4, 18}, {3, 9}, {2, 13},
                                               {1, 20}});
    const auto t0 = std::chrono::steady_clock::now();
    const EstimateSummary s = run_estimate(ProblemSpec::uniform(Margins(r, c)), 1000, 616);
    const bool ok = s.cv2_hat < 1e-2;
    std::printf("[%s] 50x100 irregular uniform: cv2=%.2e (limit 1e-02) delta=%.2e %.1fs\n",
                ok ? "PASS" : "FAIL", s.cv2_hat, s.delta_hat, seconds_since(t0));
    if (!ok) ++g_failures;
  }

  const Matrix<double> y = orc::minstd_canonical(500, 500);
  struct Case {
    int r;
    orc::WeightClass cls;
    double cv2_limit;
  };
  // Order-of-magnitude envelopes above the reported diagnostics.
  const std::vector<Case> cases = {
      {2, orc::WeightClass::kI, 1e-4},
      {8, orc::WeightClass::kI, 1e-4},
      {2, orc::WeightClass::kII, 1e-2},
      {2, orc::WeightClass::kIII, 0.5},
      {2, orc::WeightClass::kIV, 2.0},
  };
  bool all_ok = true;
  for (const Case& c : cases) {
    const WeightMatrix w = orc::weight_class(y, c.cls);
    ProblemSpec problem(Margins(std::vector<int>(500, c.r), std::vector<int>(500, c.r)), w);
    const auto t0 = std::chrono::steady_clock::now();
    const EstimateSummary s = run_estimate(problem, 1000, 5150);
    const bool ok = s.cv2_hat < c.cv2_limit;
    all_ok = all_ok && ok;
    std::printf("[%s] 500x500 r=%d class %d: cv2=%.2e (limit %.0e) delta=%.2e dead=%.3f %.1fs\n",
                ok ? "PASS" : "FAIL", c.r, static_cast<int>(c.cls), s.cv2_hat, c.cv2_limit, s.delta_hat,
                s.dead_fraction, seconds_since(t0));
  }
  if (!all_ok) ++g_failures;
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_and_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (const char* slow = std::getenv("BINMAT_ACCEPT_SLOW"); slow && std::string(slow) == "1") {
    slow_shape_suite();
  }
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
