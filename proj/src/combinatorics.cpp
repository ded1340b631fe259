#include "binmat/combinatorics.hpp"

#include <algorithm>

namespace binmat {

long long falling_factorial_sum(std::span<const int> t, int ell) {
  if (ell <= 0) throw std::invalid_argument("falling factorial order must be positive");
  long long total = 0;
  for (int ti : t) {
    if (ti < 0) throw std::invalid_argument("falling factorial of negative value");
    long long term = 1;
    for (int k = 0; k < ell; ++k) term *= ti - k;
    if (ti - ell + 1 <= 0) term = 0;
    total += term;
  }
  return total;
}

ApproxContext ApproxContext::from(std::span<const int> r, std::span<const int> c_rest) {
  ApproxContext ctx;
  ctx.m = static_cast<int>(r.size());
  ctx.n_rest = static_cast<int>(c_rest.size());
  for (int cj : c_rest) {
    ctx.c1 += cj;
    ctx.csq += static_cast<long long>(cj) * cj;
    ctx.c2 += static_cast<long long>(cj) * (cj - 1);
    ctx.c3 += static_cast<long long>(cj) * (cj - 1) * (cj - 2);
  }
  for (int ri : r) ctx.r2 += static_cast<long long>(ri) * (ri - 1);
  return ctx;
}

namespace {

double log_binom(double top, double bottom) {
  return std::lgamma(top + 1.0) - std::lgamma(bottom + 1.0) - std::lgamma(top - bottom + 1.0);
}

}  // namespace

double log_n_canfield(int m, int n, std::span<const int> r, std::span<const int> c) {
  long long d = 0;
  for (int cj : c) {
    if (cj < 0 || cj > m) throw std::invalid_argument("column sum out of range");
    d += cj;
  }
  for (int ri : r)
    if (ri < 0 || ri > n) throw std::invalid_argument("row sum out of range");
  const long long cells = static_cast<long long>(m) * n;
  if (d == 0 || d == cells) return 0.0;

  const double eta = static_cast<double>(cells) / (static_cast<double>(d) * static_cast<double>(cells - d));
  double mu = 0.0, nu = 0.0;
  const double rbar = static_cast<double>(d) / m;
  const double cbar = static_cast<double>(d) / n;
  for (int ri : r) mu += (ri - rbar) * (ri - rbar);
  for (int cj : c) nu += (cj - cbar) * (cj - cbar);
  mu *= eta;
  nu *= eta;

  double logn = -log_binom(static_cast<double>(cells), static_cast<double>(d));
  for (int ri : r) logn += log_binom(n, ri);
  for (int cj : c) logn += log_binom(m, cj);
  logn += -0.5 * (1.0 - mu) * (1.0 - nu);
  return logn;
}

double log_n_canfield(const Margins& margins) {
  return log_n_canfield(margins.m, margins.n, margins.r, margins.c);
}

namespace {

// All-empty or all-full trailing columns leave nothing to discriminate; every
// entry is then pinned by the constraint set and the odds are set to one.
bool degenerate_rest(const ApproxContext& ctx) {
  return ctx.c1 == 0 || ctx.c1 == static_cast<long long>(ctx.m) * ctx.n_rest;
}

}  // namespace

double log_u_canfield_row(const ApproxContext& ctx, int ri, int n_cur) {
  if (ri <= 0 || ri >= n_cur || degenerate_rest(ctx)) return 0.0;
  const double theta = ctx.eta_one_minus_nu();
  const double shift = 0.5 - ri + static_cast<double>(ctx.c1) / ctx.m;
  return std::log(static_cast<double>(ri) / (n_cur - ri)) + theta * shift;
}

double log_u_greenhill_row(const ApproxContext& ctx, int ri, int n_cur) {
  if (ri <= 0 || ri >= n_cur || degenerate_rest(ctx)) return 0.0;
  const double expo = 2.0 * ctx.alpha1() + 3.0 * ctx.alpha2() * (ri - 2) +
                      4.0 * ctx.alpha3() * static_cast<double>(ctx.r2 - ri + 1);
  return std::log(static_cast<double>(ri)) + (ri - 1) * expo;
}

UVector u_canfield(std::span<const int> r, std::span<const int> c_rest, int n) {
  const ApproxContext ctx = ApproxContext::from(r, c_rest);
  UVector u;
  u.log_u.resize(r.size());
  for (size_t i = 0; i < r.size(); ++i) u.log_u[i] = log_u_canfield_row(ctx, r[i], n);
  return u;
}

UVector u_greenhill(std::span<const int> r, std::span<const int> c_rest) {
  const int n = static_cast<int>(c_rest.size()) + 1;
  const ApproxContext ctx = ApproxContext::from(r, c_rest);
  UVector u;
  u.log_u.resize(r.size());
  for (size_t i = 0; i < r.size(); ++i) u.log_u[i] = log_u_greenhill_row(ctx, r[i], n);
  return u;
}

UVector u_structural(std::span<const int> r, std::span<const int> c_rest, const BinaryMatrix& a) {
  const int m = static_cast<int>(r.size());
  const int n = a.cols();
  if (a.rows() != m || static_cast<int>(c_rest.size()) != n - 1)
    throw std::invalid_argument("support pattern dimensions do not match margins");

  const ApproxContext ctx = ApproxContext::from(r, c_rest);
  const double eta = ctx.eta();
  const double theta = ctx.eta_one_minus_nu();

  std::vector<int> col_support(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) col_support[j] += a(i, j);

  UVector u;
  u.log_u.resize(m);
  long long support_total = 0;
  for (int j = 1; j < n; ++j) support_total += col_support[j];
  const bool degenerate = ctx.c1 == 0 || ctx.c1 == support_total;
  const double dens = ctx.n_rest > 0 ? static_cast<double>(ctx.c1) / (static_cast<double>(ctx.m) * ctx.n_rest) : 0.0;
  for (int i = 0; i < m; ++i) {
    int support_rest = 0;
    for (int j = 1; j < n; ++j) support_rest += a(i, j);
    if (r[i] == 0 || r[i] >= support_rest + 1 || degenerate) {
      u.log_u[i] = 0.0;
      continue;
    }
    double corr = 0.0;
    for (int j = 1; j < n; ++j)
      if (!a(i, j)) corr += c_rest[j - 1] - col_support[j] * dens;
    const double shift = 0.5 - r[i] + static_cast<double>(ctx.c1) / ctx.m;
    u.log_u[i] = std::log(static_cast<double>(r[i]) / (support_rest - r[i] + 1)) + theta * shift + eta * corr;
  }
  return u;
}

}  // namespace binmat
