#include "binmat/estimator.hpp"

#include <cmath>

#include "binmat/oracle.hpp"
#include "doctest.h"

using namespace binmat;

TEST_CASE("log big numbers") {
  LogBigNumber x = LogBigNumber::from_ln(std::log(6.722) + 16 * std::log(10.0));
  auto [man, e] = x.parts(4);
  CHECK(man == doctest::Approx(6.722).epsilon(1e-9));
  CHECK(e == 16);
  CHECK(x.format(4) == "6.722e+16");

  // Rounding carries into the exponent.
  LogBigNumber y = LogBigNumber::from_ln(std::log(9.99999) + 3 * std::log(10.0));
  auto [man2, e2] = y.parts(3);
  CHECK(man2 == doctest::Approx(1.0));
  CHECK(e2 == 4);

  CHECK(LogBigNumber::from_ln(kNegInf).is_zero());
  CHECK(LogBigNumber::from_ln(kNegInf).format() == "0");

  // Round-trip through six significant digits.
  LogBigNumber z = LogBigNumber::from_log10(2266.3573);
  auto [man3, e3] = z.parts(6);
  CHECK(std::abs(std::log10(man3) + e3 - 2266.3573) < 1e-6);
}

TEST_CASE("signed log arithmetic") {
  SignedLog a = SignedLog::from_real(3.0);
  SignedLog b = SignedLog::from_real(-1.0);
  SignedLog s = signed_log_add(a, b);
  CHECK(s.sign == 1);
  CHECK(std::exp(s.log_abs) == doctest::Approx(2.0));
  SignedLog t = signed_log_add(b, SignedLog::from_real(1.0));
  CHECK(t.sign == 0);
  CHECK(signed_log_add(SignedLog::zero(), a).sign == 1);
}

TEST_CASE("importance weight") {
  SUBCASE("uniform weights invert the proposal probability") {
    PreparedSpec spec(ProblemSpec::uniform(Margins({1, 1}, {1, 1})));
    RngStream rng(2, 0);
    SampleRecord rec = spec.sample(rng);
    CHECK(log_importance_weight(rec, spec.spec().w) == doctest::Approx(-rec.log_q));
  }
  SUBCASE("weighted 2x2 identity: expectation under the proposal is kappa") {
    Matrix<double> raw(2, 2, 1.0);
    raw(0, 0) = 2.0;
    WeightMatrix w(raw);
    PreparedSpec spec(ProblemSpec(Margins({1, 1}, {1, 1}), w));
    double total = 0.0;
    for (const BinaryMatrix& z : oracle::enumerate_omega(spec.spec().margins)) {
      const double lq = spec.evaluate(z);
      SampleRecord rec;
      rec.m = rec.n = 2;
      rec.log_q = lq;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          if (z(i, j)) rec.ones.emplace_back(i, j);
      total += std::exp(lq + log_importance_weight(rec, w));
    }
    CHECK(total == doctest::Approx(3.0).epsilon(1e-10));
  }
}

TEST_CASE("estimate summaries") {
  SUBCASE("constant weights have zero spread, exactly") {
    std::vector<double> lf(100, 1.2345);
    EstimateSummary s = estimate(lf);
    CHECK(s.kappa_hat.ln() == doctest::Approx(1.2345).epsilon(1e-12));
    CHECK(s.cv2_hat == 0.0);
    CHECK(s.delta_hat == 0.0);
    CHECK(s.ess == 100.0);
    CHECK(s.dead_fraction == 0.0);
  }
  SUBCASE("two-point example") {
    std::vector<double> lf{std::log(1.0), std::log(3.0)};
    EstimateSummary s = estimate(lf);
    CHECK(std::exp(s.kappa_hat.ln()) == doctest::Approx(2.0));
    CHECK(s.delta_hat == doctest::Approx(2.0));
    CHECK(s.cv2_hat == doctest::Approx(0.5));
  }
  SUBCASE("diagnostics are scale invariant") {
    std::vector<double> lf{0.3, 1.7, -0.4, 0.9};
    EstimateSummary base = estimate(lf);
    std::vector<double> shifted = lf;
    for (double& x : shifted) x += 7.5;  // multiply every weight by e^7.5
    EstimateSummary moved = estimate(shifted);
    CHECK(moved.cv2_hat == doctest::Approx(base.cv2_hat).epsilon(1e-12));
    CHECK(moved.delta_hat == doctest::Approx(base.delta_hat).epsilon(1e-12));
  }
  SUBCASE("dead samples count toward T but not the minimum") {
    std::vector<double> lf{std::log(2.0), kNegInf, std::log(2.0), std::log(2.0)};
    EstimateSummary s = estimate(lf);
    CHECK(std::exp(s.kappa_hat.ln()) == doctest::Approx(1.5));
    CHECK(s.dead_fraction == doctest::Approx(0.25));
    CHECK(s.delta_hat == 0.0);
    CHECK(s.delta_excludes_dead);
    // (f - kappa)^2 contributions: 3 * (2 - 1.5)^2 + 1.5^2 = 3.
    CHECK(s.cv2_hat == doctest::Approx(3.0 / (3.0 * 1.5 * 1.5)));
  }
  SUBCASE("all dead is flagged") {
    std::vector<double> lf{kNegInf, kNegInf};
    EstimateSummary s = estimate(lf);
    CHECK_FALSE(s.defined);
    CHECK(s.kappa_hat.is_zero());
    CHECK(s.dead_fraction == 1.0);
  }
  SUBCASE("merging shards equals the single pass") {
    std::vector<double> lf;
    std::vector<SignedLog> h;
    RngStream rng(4, 4);
    for (int i = 0; i < 1000; ++i) {
      lf.push_back(2.0 * rng.uniform() - 0.5);
      h.push_back(SignedLog::from_real(rng.uniform() < 0.3 ? -rng.uniform() : rng.uniform()));
    }
    ShardStats whole;
    for (size_t i = 0; i < lf.size(); ++i) whole.add(lf[i], h[i]);

    ShardStats a, b, c;
    for (size_t i = 0; i < 300; ++i) a.add(lf[i], h[i]);
    for (size_t i = 300; i < 700; ++i) b.add(lf[i], h[i]);
    for (size_t i = 700; i < lf.size(); ++i) c.add(lf[i], h[i]);
    const ShardStats merged = ShardStats::merge(ShardStats::merge(a, b), c);
    const ShardStats merged2 = ShardStats::merge(a, ShardStats::merge(b, c));

    const EstimateSummary sw = summarize(whole);
    for (const ShardStats& s : {merged, merged2}) {
      const EstimateSummary sm = summarize(s);
      CHECK(sm.kappa_hat.ln() == doctest::Approx(sw.kappa_hat.ln()).epsilon(1e-12));
      CHECK(sm.cv2_hat == doctest::Approx(sw.cv2_hat).epsilon(1e-9));
      CHECK(sm.per_hat.ln() == doctest::Approx(sw.per_hat.ln()).epsilon(1e-12));
      CHECK(sm.delta_hat == doctest::Approx(sw.delta_hat).epsilon(1e-12));
    }
  }
  SUBCASE("ratio estimate tracks h") {
    std::vector<double> lf(50, 0.0);
    std::vector<SignedLog> h;
    for (int i = 0; i < 50; ++i) h.push_back(SignedLog::from_real(i % 2 ? 3.0 : 1.0));
    EstimateSummary s = estimate(lf, h);
    CHECK(s.mu_hat == doctest::Approx(2.0));
    CHECK(std::exp(s.per_hat.ln()) == doctest::Approx(2.0));
    CHECK(s.rel_se_pct > 0.0);
  }
}

TEST_CASE("cycle counting") {
  BinaryMatrix id(4, 4);
  for (int i = 0; i < 4; ++i) id(i, i) = 1;
  CHECK(cycle_count(id) == 4);

  BinaryMatrix cyc(4, 4);
  for (int j = 0; j < 4; ++j) cyc((j + 1) % 4, j) = 1;
  CHECK(cycle_count(cyc) == 1);

  BinaryMatrix mixed(3, 3);
  mixed(1, 0) = mixed(0, 1) = mixed(2, 2) = 1;  // transposition + fixed point
  CHECK(cycle_count(mixed) == 2);

  BinaryMatrix bad(2, 2);
  bad(0, 0) = bad(0, 1) = 1;
  CHECK_THROWS_AS(cycle_count(bad), std::invalid_argument);
}

TEST_CASE("alpha-permanent estimation") {
  SUBCASE("alpha one reduces to the permanent with unit mu") {
    AlphaPermanentRequest req{ones_weights(4, 4), 1.0, 400};
    EstimateSummary s = alpha_permanent(req, 77);
    CHECK(s.mu_hat == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(s.per_hat.ln()) == doctest::Approx(24.0).epsilon(1e-9));
  }
  SUBCASE("constant matrix at alpha two matches the closed form") {
    AlphaPermanentRequest req{ones_weights(3, 3), 2.0, 4000};
    EstimateSummary s = alpha_permanent(req, 101);
    const double truth = 24.0;  // alpha^3 + 3 alpha^2 + 2 alpha at alpha = 2
    const double sigma = std::exp(s.se_per.ln());
    CHECK(std::abs(std::exp(s.per_hat.ln()) - truth) < 3.0 * std::max(sigma, 1e-9));
  }
  SUBCASE("weighted case against the exact expansion") {
    // 2x2: per_alpha = alpha^2 w00 w11 + alpha w01 w10.
    Matrix<double> raw(2, 2);
    raw(0, 0) = 1.0;
    raw(0, 1) = 2.0;
    raw(1, 0) = 3.0;
    raw(1, 1) = 4.0;
    const double alpha = 0.5;
    AlphaPermanentRequest req{WeightMatrix(raw), alpha, 20000};
    EstimateSummary s = alpha_permanent(req, 55);
    const double truth = alpha * alpha * 4.0 + alpha * 6.0;
    const double sigma = std::exp(s.se_per.ln());
    CHECK(std::abs(std::exp(s.per_hat.ln()) - truth) < 4.0 * sigma);
  }
}
