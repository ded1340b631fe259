#include "binmat/proposal.hpp"

#include <algorithm>
#include <numeric>

namespace binmat {

namespace {

constexpr double kOddsCap = 1e100;
constexpr double kFlushAt = 1e-250;

// Running product of column transition probabilities; flushes to the log
// accumulator before underflow. Multiplications by exactly 1.0 stay exact.
struct LogProduct {
  double logs = 0.0;
  double prod = 1.0;
  void mul(double x) {
    if (x < 1e-30) {  // keep the running product away from subnormals
      logs += std::log(prod) + std::log(x);
      prod = 1.0;
      return;
    }
    prod *= x;
    if (prod < kFlushAt) {
      logs += std::log(prod);
      prod = 1.0;
    }
  }
  double value() const { return logs + std::log(prod); }
};

// Row-independent pieces of the per-column odds formulas.
struct URowEval {
  Approx approx = Approx::kCanfield;
  int n_cur = 0;
  double theta = 0.0, cmean = 0.0;       // canfield
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;   // greenhill
  long long r2 = 0;

  static URowEval from(const ApproxContext& ctx, Approx approx, int n_cur) {
    URowEval e;
    e.approx = approx;
    e.n_cur = n_cur;
    if (approx == Approx::kCanfield) {
      e.theta = ctx.eta_one_minus_nu();
      e.cmean = static_cast<double>(ctx.c1) / ctx.m;
    } else {
      e.a1 = ctx.alpha1();
      e.a2 = ctx.alpha2();
      e.a3 = ctx.alpha3();
      e.r2 = ctx.r2;
    }
    return e;
  }

  double log_u(int rv) const {
    if (rv <= 0 || rv >= n_cur) return 0.0;
    if (approx == Approx::kCanfield)
      return std::log(static_cast<double>(rv) / (n_cur - rv)) + theta * (0.5 - rv + cmean);
    const double expo = 2.0 * a1 + 3.0 * a2 * (rv - 2) + 4.0 * a3 * static_cast<double>(r2 - rv + 1);
    return std::log(static_cast<double>(rv)) + (rv - 1) * expo;
  }
};

}  // namespace

struct SampleWorkspace::Impl {
  std::vector<int> r_cur, pi, cconj, alo, ahi;
  int alive = 0;  // rows with remaining need; they occupy pi[0..alive)
  std::vector<double> odds, msg_cur, msg_next;
  std::vector<uint8_t> allow0, allow1;
  std::vector<int> chosen;
  std::vector<long long> suff;
  std::vector<int> zero_hits;
  ColumnChain chain;
  ApproxContext ctx;
};

SampleWorkspace::SampleWorkspace() : impl(std::make_unique<Impl>()) {}
SampleWorkspace::~SampleWorkspace() = default;
SampleWorkspace::SampleWorkspace(SampleWorkspace&&) noexcept = default;

namespace {

// Backward pass of the chain construction. Consumes per-position odds, choice
// flags, and state windows [alo, ahi]; fills take probabilities. Returns false
// when the total normalizer vanishes (Q identically zero).
bool build_chain_from_positions(SampleWorkspace::Impl& ws, int m, int c1, ColumnChain* chain) {
  chain->m = m;
  chain->c1 = c1;
  chain->dead = false;
  if (static_cast<int>(chain->pred_lo.size()) < m) {
    chain->pred_lo.resize(m);
    chain->pred_width.resize(m);
  }
  const size_t cells = static_cast<size_t>(m) * (c1 + 1);
  if (chain->take.size() < cells) {
    chain->take.resize(cells);
    chain->stay.resize(cells);
  }

  for (int p = 0; p < m; ++p)
    if (ws.alo[p] > ws.ahi[p]) return false;

  ws.msg_next.assign(static_cast<size_t>(c1) + 2, 0.0);
  ws.msg_cur.assign(static_cast<size_t>(c1) + 2, 0.0);
  ws.msg_next[0] = 1.0;  // terminal state window is [c1, c1]

  for (int p = m - 1; p >= 0; --p) {
    const int plo = p == 0 ? 0 : ws.alo[p - 1];
    const int phi = p == 0 ? 0 : ws.ahi[p - 1];
    chain->pred_lo[p] = plo;
    chain->pred_width[p] = phi - plo + 1;
    double mx = 0.0;
    double* take_row = chain->take.data() + static_cast<size_t>(p) * (c1 + 1);
    double* stay_row = chain->stay.data() + static_cast<size_t>(p) * (c1 + 1);
    for (int s = plo; s <= phi; ++s) {
      const double stay =
          (ws.allow0[p] && s >= ws.alo[p] && s <= ws.ahi[p]) ? ws.msg_next[s - ws.alo[p]] : 0.0;
      const double take =
          (ws.allow1[p] && s + 1 >= ws.alo[p] && s + 1 <= ws.ahi[p]) ? ws.odds[p] * ws.msg_next[s + 1 - ws.alo[p]]
                                                                     : 0.0;
      take_row[s - plo] = take;
      stay_row[s - plo] = stay;
      const double tot = stay + take;
      ws.msg_cur[s - plo] = tot;
      if (tot > mx) mx = tot;
    }
    if (mx <= 0.0) return false;
    for (int s = plo; s <= phi; ++s) ws.msg_cur[s - plo] /= mx;
    std::swap(ws.msg_cur, ws.msg_next);
  }
  return true;
}

void fill_windows(SampleWorkspace::Impl& ws, int m, int c1, std::span<const int> b) {
  ws.alo.resize(m);
  ws.ahi.resize(m);
  for (int p = 0; p < m; ++p) {
    if (p == m - 1) {
      ws.alo[p] = c1;
      ws.ahi[p] = c1;
    } else {
      int lo = b[p] > 0 ? b[p] : 0;
      const int reach = c1 - (m - 1 - p);  // must still be able to climb to c1
      if (reach > lo) lo = reach;
      ws.alo[p] = lo;
      ws.ahi[p] = std::min(c1, p + 1);
    }
  }
}

}  // namespace

ColumnChain dp_build(const UVector& u, const std::vector<double>& log_v, const ConstraintSet& constraints) {
  const int m = static_cast<int>(constraints.pi.size());
  SampleWorkspace ws_holder;
  SampleWorkspace::Impl& ws = *ws_holder.impl;
  ws.odds.resize(m);
  ws.allow0.resize(m);
  ws.allow1.resize(m);
  for (int p = 0; p < m; ++p) {
    const int row = constraints.pi[p];
    const double lo = u.log_u[row] + (log_v.empty() ? 0.0 : log_v[row]);
    ws.odds[p] = lo == kNegInf ? 0.0 : std::min(std::exp(lo), kOddsCap);
    ws.allow0[p] = constraints.A[p] != RowChoice::kOne;
    ws.allow1[p] = constraints.A[p] != RowChoice::kZero;
  }
  fill_windows(ws, m, constraints.c1, constraints.b);

  ColumnChain chain;
  chain.pi = constraints.pi;
  if (!build_chain_from_positions(ws, m, constraints.c1, &chain)) chain.dead = true;
  return chain;
}

std::pair<std::vector<uint8_t>, double> dp_sample(const ColumnChain& chain, RngStream& rng) {
  if (chain.dead) throw std::logic_error("cannot sample from a dead chain");
  std::vector<uint8_t> x(chain.m, 0);
  double log_q = 0.0;
  int s = 0;
  for (int p = 0; p < chain.m; ++p) {
    const double pt = chain.take_prob(p, s);
    if (rng.uniform() < pt) {
      x[chain.pi[p]] = 1;
      log_q += std::log(pt);
      ++s;
    } else {
      log_q += std::log1p(-pt);
    }
  }
  return {std::move(x), log_q};
}

double dp_evaluate(const ColumnChain& chain, std::span<const uint8_t> x) {
  if (chain.dead) return kNegInf;
  double log_q = 0.0;
  int s = 0;
  for (int p = 0; p < chain.m; ++p) {
    const double pt = chain.take_prob(p, s);
    if (pt < 0.0) return kNegInf;
    const int xi = x[chain.pi[p]];
    if (xi == 1) {
      if (pt <= 0.0) return kNegInf;
      log_q += std::log(pt);
      ++s;
    } else if (xi == 0) {
      if (pt >= 1.0) return kNegInf;
      log_q += std::log1p(-pt);
    } else {
      return kNegInf;
    }
  }
  return s == chain.c1 ? log_q : kNegInf;
}

struct PreparedSpec::Impl {
  ProblemSpec spec;
  int m, n;
  std::vector<int> order;     // position -> original column
  std::vector<int> c_sorted;  // column sums in sampling order
  CanonicalWeights wbar;      // columns permuted to sampling order
  GTable g;
  bool uniform = false;
  bool structural = false;
  std::vector<int> zcol;    // per row: sampling-order column of its zero, or n
  std::vector<int> pi0;     // initial row order
  std::vector<int> cconj0;  // conjugate of all column sums
  ApproxContext ctx0;

  explicit Impl(ProblemSpec s) : spec(std::move(s)), m(spec.margins.m), n(spec.margins.n) {
    if (!gale_ryser_feasible(spec.margins)) throw std::invalid_argument("Gale-Ryser infeasible margins");

    CanonicalWeights canon;
    if (spec.options.canonicalize) {
      canon = canonicalize(spec.w, spec.options.balance_tol, spec.options.balance_max_iter);
    } else {
      canon.wbar = spec.w.w;
      canon.alpha.assign(m, 1.0);
      canon.beta.assign(n, 1.0);
    }

    // Support pattern with at most one zero per row and column?
    bool pattern_ok = spec.w.has_zeros();
    if (pattern_ok) {
      for (int i = 0; i < m && pattern_ok; ++i)
        if (spec.w.row_nnz[i] < n - 1) pattern_ok = false;
      for (int j = 0; j < n && pattern_ok; ++j)
        if (spec.w.col_nnz[j] < m - 1) pattern_ok = false;
    }
    const bool want_structural = spec.options.structural == StructuralMode::kAuto && pattern_ok &&
                                 spec.options.approx == Approx::kCanfield;

    order = column_order(canon, spec.margins.c, spec.options.column_order);
    if (want_structural && spec.options.column_order != ColumnOrderMode::kNone)
      order = column_order(canon, spec.margins.c, ColumnOrderMode::kDescend);

    c_sorted.resize(n);
    for (int jp = 0; jp < n; ++jp) c_sorted[jp] = spec.margins.c[order[jp]];

    bool nonincreasing = true;
    for (int jp = 0; jp + 1 < n; ++jp)
      if (c_sorted[jp] < c_sorted[jp + 1]) nonincreasing = false;
    structural = want_structural && nonincreasing;

    wbar.alpha = canon.alpha;
    wbar.iterations = canon.iterations;
    wbar.residual = canon.residual;
    wbar.beta.resize(n);
    wbar.wbar = Matrix<double>(m, n);
    for (int jp = 0; jp < n; ++jp) {
      wbar.beta[jp] = canon.beta[order[jp]];
      for (int i = 0; i < m; ++i) wbar.wbar(i, jp) = canon.wbar(i, order[jp]);
    }

    uniform = true;
    for (double x : wbar.wbar.data())
      if (x != 1.0) {
        uniform = false;
        break;
      }
    if (!uniform) g = GTable(wbar.wbar, spec.margins.r);

    zcol.assign(m, n);
    if (structural) {
      for (int i = 0; i < m; ++i)
        for (int jp = 0; jp < n; ++jp)
          if (!spec.w.a(i, order[jp])) zcol[i] = jp;
    }

    pi0.resize(m);
    std::iota(pi0.begin(), pi0.end(), 0);
    const std::vector<int>& r = spec.margins.r;
    if (structural) {
      std::stable_sort(pi0.begin(), pi0.end(), [&](int a, int b) {
        if (r[a] != r[b]) return r[a] > r[b];
        return zcol[a] < zcol[b];
      });
    } else {
      std::stable_sort(pi0.begin(), pi0.end(), [&](int a, int b) { return r[a] > r[b]; });
    }

    cconj0 = conjugate(c_sorted, m).cc;
    ctx0 = ApproxContext::from(r, c_sorted);
  }

  // One full pass over the columns. rng != nullptr samples into rec;
  // otherwise z is evaluated. Returns log Q* or -inf.
  double run(RngStream* rng, const BinaryMatrix* z, SampleRecord* rec, SampleWorkspace::Impl& ws) const;

  // Per-column chain construction; returns false when the column dies.
  bool build_column_general(SampleWorkspace::Impl& ws, int col, int cj) const;
  void prepare_column_structural(SampleWorkspace::Impl& ws, int col, int cj) const;
};

// Single backward sweep: the partial-sum bounds come from suffix sums, so the
// odds, choice sets, state windows, and chain messages are all produced in one
// pass over the rows. Exhausted rows occupy the tail of pi and can only pass
// the pinned state c1 through, so they get constant-time stub transitions.
bool PreparedSpec::Impl::build_column_general(SampleWorkspace::Impl& ws, int col, int cj) const {
  const int n_cur = n - col;
  const int n_rem = n_cur - 1;
  const URowEval ueval = URowEval::from(ws.ctx, spec.options.approx, n_cur);
  const long long total_r = ws.ctx.c1 + cj;  // remaining row sums, this column included
  const long long total_cc = ws.ctx.c1;      // conjugate mass of the later columns
  const int alive = ws.alive;
  if (cj > alive) return false;  // more ones needed than rows that can take them

  ColumnChain& chain = ws.chain;
  chain.m = m;
  chain.c1 = cj;
  chain.dead = false;
  if (static_cast<int>(chain.pred_lo.size()) < m) {
    chain.pred_lo.resize(m);
    chain.pred_width.resize(m);
  }
  const size_t cells = static_cast<size_t>(m) * (cj + 1);
  if (chain.take.size() < cells) {
    chain.take.resize(cells);
    chain.stay.resize(cells);
  }
  if (ws.msg_cur.size() < static_cast<size_t>(cj) + 2) {
    ws.msg_cur.resize(cj + 2);
    ws.msg_next.resize(cj + 2);
  }

  int alo = cj, ahi = cj;  // state window after the last position
  ws.msg_next[0] = 1.0;

  long long sufr = 0, sufcc = 0;
  for (int p = m - 1; p >= alive; --p) {
    sufcc += ws.cconj[p];
    chain.pred_lo[p] = cj;
    chain.pred_width[p] = 1;
    const size_t idx = static_cast<size_t>(p) * (cj + 1);
    chain.take[idx] = 0.0;
    chain.stay[idx] = 1.0;
  }

  int memo_rv = -1;
  double memo_u = 1.0;
  for (int p = alive - 1; p >= 0; --p) {
    const int row = ws.pi[p];
    const int rv = ws.r_cur[row];
    sufr += rv;
    sufcc += ws.cconj[p];

    bool allow0 = rv < n_cur;
    bool allow1 = rv > 0;
    double odds = 0.0;
    if (allow1) {
      if (rv != memo_rv) {
        memo_rv = rv;
        memo_u = std::exp(ueval.log_u(rv));
      }
      odds = memo_u;
      if (!uniform) {
        const double den = g.log_g(row, col + 1, rv);
        if (den == kNegInf) {
          const double num = g.log_g(row, col + 1, rv - 1);
          if (num != kNegInf && wbar.wbar(row, col) > 0.0) {
            allow0 = false;  // fewer than rv positive cells remain; take this one
          } else {
            return false;  // row cannot be completed at all
          }
        } else {
          const double num = g.log_g(row, col + 1, rv - 1);
          const double ratio = std::exp(std::min(num - den, 690.0));
          odds *= wbar.wbar(row, col) * (static_cast<double>(n_rem - rv + 1) / rv) * ratio;
          if (odds > kOddsCap) odds = kOddsCap;
        }
      }
    }

    int plo = 0, phi = 0;
    if (p > 0) {
      const long long bprev = (total_r - sufr) - (total_cc - sufcc);
      plo = bprev > 0 ? static_cast<int>(bprev) : 0;
      const int reach = cj - (alive - p);  // only rows with remaining need can climb
      if (reach > plo) plo = reach;
      phi = std::min(cj, p);
      if (plo > phi) return false;
    }
    chain.pred_lo[p] = plo;
    chain.pred_width[p] = phi - plo + 1;

    double mx = 0.0;
    double* take_row = chain.take.data() + static_cast<size_t>(p) * (cj + 1);
    double* stay_row = chain.stay.data() + static_cast<size_t>(p) * (cj + 1);
    for (int s = plo; s <= phi; ++s) {
      const double stay = (allow0 && s >= alo && s <= ahi) ? ws.msg_next[s - alo] : 0.0;
      const double take = (allow1 && s + 1 >= alo && s + 1 <= ahi) ? odds * ws.msg_next[s + 1 - alo] : 0.0;
      take_row[s - plo] = take;
      stay_row[s - plo] = stay;
      ws.msg_cur[s - plo] = stay + take;
      if (stay + take > mx) mx = stay + take;
    }
    if (mx <= 0.0) return false;
    // Rescale only near the representable range; ratios are scale free.
    if (mx > 1e100 || mx < 1e-100) {
      const double inv = 1.0 / mx;
      for (int s = plo; s <= phi; ++s) ws.msg_cur[s - plo] *= inv;
    }
    std::swap(ws.msg_cur, ws.msg_next);
    alo = plo;
    ahi = phi;
  }
  return true;
}

void PreparedSpec::Impl::prepare_column_structural(SampleWorkspace::Impl& ws, int col, int cj) const {
  const int n_cur = n - col;
  const int n_rem = n_cur - 1;

  // Row order: descending current sums, ties by position of the remaining
  // zero (earlier zero first), then row index.
  std::stable_sort(ws.pi.begin(), ws.pi.end(), [&](int a, int b) {
    if (ws.r_cur[a] != ws.r_cur[b]) return ws.r_cur[a] > ws.r_cur[b];
    const int ya = zcol[a] >= col ? zcol[a] : std::numeric_limits<int>::max();
    const int yb = zcol[b] >= col ? zcol[b] : std::numeric_limits<int>::max();
    if (ya != yb) return ya < yb;
    return a < b;
  });

  // Suffix sums of the remaining column sums, local index t = 0..n_cur.
  ws.suff.assign(n_cur + 1, 0);
  for (int t = n_cur - 1; t >= 0; --t) ws.suff[t] = ws.suff[t + 1] + c_sorted[col + t];
  ws.zero_hits.assign(n_cur + 1, 0);

  const double eta = ws.ctx.eta();
  const double theta = ws.ctx.eta_one_minus_nu();
  const double cmean = static_cast<double>(ws.ctx.c1) / m;
  const double dens = n_rem > 0 ? static_cast<double>(ws.ctx.c1) / (static_cast<double>(m) * n_rem) : 0.0;

  long long run_r = 0;
  for (int p = 0; p < m; ++p) {
    const int row = ws.pi[p];
    const int rv = ws.r_cur[row];
    run_r += rv;

    const bool zero_here = zcol[row] == col;
    const bool zero_later = zcol[row] > col && zcol[row] < n;
    const int support_cur = n_cur - (zero_here || zero_later ? 1 : 0);
    const int support_rest = n_rem - (zero_later ? 1 : 0);

    bool allow0 = true, allow1 = true;
    const int forced = zero_here ? 0 : rv;
    if (forced == 0)
      allow1 = false;
    else if (forced >= support_cur)
      allow0 = false;

    double odds = 0.0;
    if (allow1) {
      double log_u = 0.0;
      if (rv > 0 && rv < support_rest + 1) {
        double corr = 0.0;
        if (zero_later) corr = c_sorted[zcol[row]] - (m - 1) * dens;
        log_u = std::log(static_cast<double>(rv) / (support_rest - rv + 1)) + theta * (0.5 - rv + cmean) +
                eta * corr;
      }
      odds = std::exp(std::min(log_u, 690.0));
      if (!uniform && rv > 0) {
        const double den = g.log_g(row, col + 1, rv);
        const double num = g.log_g(row, col + 1, rv - 1);
        if (den != kNegInf && num != kNegInf && wbar.wbar(row, col) > 0.0) {
          const double ratio = std::exp(std::min(num - den, 690.0));
          odds *= wbar.wbar(row, col) * (static_cast<double>(support_rest - rv + 1) / rv) * ratio;
          if (odds > kOddsCap) odds = kOddsCap;
        }
      }
    }
    ws.odds[p] = odds;
    ws.allow0[p] = allow0;
    ws.allow1[p] = allow1;

    if (zero_later && zcol[row] - col <= n_cur - 1) ws.zero_hits[zcol[row] - col] += 1;

    // b_p = partial row sums minus the tightest column-capacity bound.
    long long best = std::numeric_limits<long long>::max();
    long long zcum = 0;
    for (int t = 1; t <= n_cur; ++t) {
      if (t >= 2) zcum += ws.zero_hits[t - 1];
      const long long cells = static_cast<long long>(p + 1) * (t - 1) - zcum;
      const long long cand = ws.suff[t] + cells;
      if (cand < best) best = cand;
    }
    ws.alo[p] = static_cast<int>(run_r - best);
  }

  for (int p = 0; p < m; ++p) {
    if (p == m - 1) {
      ws.alo[p] = cj;
      continue;
    }
    int lo = ws.alo[p] > 0 ? ws.alo[p] : 0;
    const int reach = cj - (m - 1 - p);
    if (reach > lo) lo = reach;
    ws.alo[p] = lo;
  }
  ws.ahi.resize(m);
  for (int p = 0; p < m; ++p) ws.ahi[p] = p == m - 1 ? cj : std::min(cj, p + 1);
}

double PreparedSpec::Impl::run(RngStream* rng, const BinaryMatrix* z, SampleRecord* rec,
                               SampleWorkspace::Impl& ws) const {
  ws.r_cur = spec.margins.r;
  ws.pi = pi0;
  ws.cconj = cconj0;
  ws.ctx = ctx0;
  ws.alive = 0;
  for (int rv : ws.r_cur)
    if (rv > 0) ws.alive += 1;
  ws.odds.resize(m);
  ws.allow0.resize(m);
  ws.allow1.resize(m);
  ws.alo.resize(m);
  ws.ahi.resize(m);
  if (rec) {
    rec->m = m;
    rec->n = n;
    rec->ones.clear();
    rec->alive = true;
  }

  LogProduct lq;
  for (int col = 0; col < n; ++col) {
    const int cj = c_sorted[col];
    for (int l = 0; l < cj; ++l) ws.cconj[l] -= 1;
    ws.ctx.remove_column(cj);

    if (cj == 0) {
      if (z) {
        for (int i = 0; i < m; ++i)
          if ((*z)(i, order[col]) != 0) return kNegInf;
      }
      continue;
    }

    bool ok;
    if (structural) {
      prepare_column_structural(ws, col, cj);
      ok = build_chain_from_positions(ws, m, cj, &ws.chain);
    } else {
      ok = build_column_general(ws, col, cj);
    }
    if (!ok) {
      if (rec) rec->alive = false;
      return kNegInf;
    }

    // Walk the chain: draw or replay this column.
    ws.chosen.clear();
    if (z) {
      int s = 0;
      const double* take_row = ws.chain.take.data();
      const double* stay_row = ws.chain.stay.data();
      for (int p = 0; p < m; ++p, take_row += cj + 1, stay_row += cj + 1) {
        const int off = s - ws.chain.pred_lo[p];
        if (off < 0 || off >= ws.chain.pred_width[p]) return kNegInf;
        const double tk = take_row[off];
        const double st = stay_row[off];
        const int zi = (*z)(ws.pi[p], order[col]);
        if (zi == 1) {
          if (tk <= 0.0) return kNegInf;
          if (st > 0.0) lq.mul(tk / (tk + st));
          ws.chosen.push_back(p);
          ++s;
        } else if (zi == 0) {
          if (st <= 0.0) return kNegInf;
          if (tk > 0.0) lq.mul(st / (tk + st));
        } else {
          return kNegInf;
        }
      }
      if (s != cj) return kNegInf;  // replaying a matrix with bad column sums
    } else {
      int s = 0;
      const double* take_row = ws.chain.take.data();
      const double* stay_row = ws.chain.stay.data();
      for (int p = 0; p < m; ++p, take_row += cj + 1, stay_row += cj + 1) {
        const int off = s - ws.chain.pred_lo[p];
        const double tk = take_row[off];
        if (tk <= 0.0) continue;  // deterministic zero consumes no randomness
        const double st = stay_row[off];
        if (st <= 0.0) {  // forced one, probability exactly one
          ws.chosen.push_back(p);
          if (++s == cj) break;  // all later take probabilities are zero
          continue;
        }
        const double tot = tk + st;
        if (rng->uniform() * tot < tk) {
          lq.mul(tk / tot);
          ws.chosen.push_back(p);
          if (++s == cj) break;
        } else {
          lq.mul(st / tot);
        }
      }
    }

    // Apply the column: decrement sums, record ones.
    for (int p : ws.chosen) {
      const int row = ws.pi[p];
      ws.ctx.decrement_row(ws.r_cur[row]);
      ws.r_cur[row] -= 1;
      if (ws.r_cur[row] == 0) ws.alive -= 1;
      if (rec) rec->ones.emplace_back(row, order[col]);
    }

    // Keep pi sorted: each decremented row slides past the run of rows that
    // now exceed it. Structural mode re-sorts at the next column instead.
    if (!structural) {
      for (auto it = ws.chosen.rbegin(); it != ws.chosen.rend(); ++it) {
        const int p = *it;
        const int row = ws.pi[p];
        const int val = ws.r_cur[row];
        if (p + 1 >= m || ws.r_cur[ws.pi[p + 1]] <= val) continue;
        // Binary search the end of the block of larger values; the suffix
        // beyond p is already sorted.
        int lo = p + 2, hi = m;
        while (lo < hi) {
          const int mid = lo + (hi - lo) / 2;
          if (ws.r_cur[ws.pi[mid]] > val)
            lo = mid + 1;
          else
            hi = mid;
        }
        const int last = lo - 1;
        ws.pi[p] = ws.pi[last];
        ws.pi[last] = row;
      }
#ifndef NDEBUG
      for (int p = 0; p + 1 < m; ++p) assert(ws.r_cur[ws.pi[p]] >= ws.r_cur[ws.pi[p + 1]]);
#endif
    }
  }

  for (int i = 0; i < m; ++i)
    if (ws.r_cur[i] != 0) return kNegInf;  // unmet row sums (bad input matrix)
  return lq.value();
}

PreparedSpec::PreparedSpec(ProblemSpec spec) : impl_(std::make_unique<Impl>(std::move(spec))) {}
PreparedSpec::~PreparedSpec() = default;
PreparedSpec::PreparedSpec(PreparedSpec&&) noexcept = default;
PreparedSpec& PreparedSpec::operator=(PreparedSpec&&) noexcept = default;

const ProblemSpec& PreparedSpec::spec() const { return impl_->spec; }
const CanonicalWeights& PreparedSpec::wbar() const { return impl_->wbar; }
const GTable& PreparedSpec::gtable() const { return impl_->g; }
const std::vector<int>& PreparedSpec::order() const { return impl_->order; }
bool PreparedSpec::structural_active() const { return impl_->structural; }
bool PreparedSpec::uniform_weights() const { return impl_->uniform; }

SampleRecord PreparedSpec::sample(RngStream& rng) const {
  SampleWorkspace ws;
  return sample(rng, ws);
}

SampleRecord PreparedSpec::sample(RngStream& rng, SampleWorkspace& ws) const {
  SampleRecord rec;
  const double lq = impl_->run(&rng, nullptr, &rec, *ws.impl);
  rec.log_q = lq;
  if (lq == kNegInf) rec.alive = false;
  return rec;
}

double PreparedSpec::evaluate(const BinaryMatrix& z) const {
  SampleWorkspace ws;
  return evaluate(z, ws);
}

double PreparedSpec::evaluate(const BinaryMatrix& z, SampleWorkspace& ws) const {
  if (z.rows() != impl_->m || z.cols() != impl_->n)
    throw std::invalid_argument("matrix dimensions do not match the problem");
  return impl_->run(nullptr, &z, nullptr, *ws.impl);
}

SampleRecord sample_matrix(const PreparedSpec& spec, RngStream& rng) { return spec.sample(rng); }

double evaluate_matrix(const PreparedSpec& spec, const BinaryMatrix& z) { return spec.evaluate(z); }

double log_importance_weight(const SampleRecord& rec, const WeightMatrix& w) {
  if (!rec.alive) return kNegInf;
  double lw = 0.0;
  for (auto [i, j] : rec.ones) {
    if (w.logw(i, j) == kNegInf) return kNegInf;
    lw += w.logw(i, j);
  }
  return lw - rec.log_q;
}

}  // namespace binmat
