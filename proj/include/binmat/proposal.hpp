#ifndef BINMAT_PROPOSAL_HPP_
#define BINMAT_PROPOSAL_HPP_

#include <memory>
#include <utility>
#include <vector>

#include "binmat/combinatorics.hpp"
#include "binmat/common.hpp"
#include "binmat/margins.hpp"
#include "binmat/rowpoly.hpp"
#include "binmat/weights.hpp"

namespace binmat {

enum class Approx { kCanfield, kGreenhill };
enum class StructuralMode { kOff, kAuto };

struct SamplerOptions {
  Approx approx = Approx::kCanfield;
  ColumnOrderMode column_order = ColumnOrderMode::kAuto;
  bool canonicalize = true;
  StructuralMode structural = StructuralMode::kAuto;
  double balance_tol = 1e-8;
  int balance_max_iter = 100000;
};

// The instance being sampled: margins, entrywise weights, and knobs.
struct ProblemSpec {
  Margins margins;
  WeightMatrix w;
  SamplerOptions options;

  ProblemSpec(Margins m, WeightMatrix weights, SamplerOptions opts = {})
      : margins(std::move(m)), w(std::move(weights)), options(opts) {
    if (w.rows() != margins.m || w.cols() != margins.n)
      throw std::invalid_argument("weight matrix dimensions do not match margins");
  }
  static ProblemSpec uniform(Margins m, SamplerOptions opts = {}) {
    const int rows = m.m, cols = m.n;
    return ProblemSpec(std::move(m), ones_weights(rows, cols), opts);
  }
};

// One draw from the sequential proposal. Ones are (row, col) pairs in the
// original orientation and ordering. alive == false means the sampler hit a
// column with no feasible positive-weight assignment; such draws carry an
// importance weight of exactly zero.
struct SampleRecord {
  int m = 0, n = 0;
  std::vector<std::pair<int, int>> ones;
  double log_q = 0.0;
  bool alive = true;

  BinaryMatrix to_matrix() const {
    BinaryMatrix z(m, n);
    for (auto [i, j] : ones) z(i, j) = 1;
    return z;
  }
};

// Markov-chain representation of one column's proposal. States are the
// partial sums along pi; only predecessor windows of width <= c1 + 1 are
// kept, as unnormalized (take, stay) message pairs sharing a per-row scale.
struct ColumnChain {
  int m = 0;
  int c1 = 0;
  bool dead = false;
  std::vector<int> pi;
  std::vector<int> pred_lo;     // per position: lowest stored predecessor state
  std::vector<int> pred_width;  // number of stored predecessor states
  std::vector<double> take;     // weight of X_{pi[p]} = 1 given S_{p-1}, stride c1 + 1
  std::vector<double> stay;     // weight of X_{pi[p]} = 0

  // Pr(X_{pi[p]} = 1 | S_{p-1} = s); negative for unreachable states.
  double take_prob(int p, int s) const {
    const int off = s - pred_lo[p];
    if (off < 0 || off >= pred_width[p]) return -1.0;
    const size_t idx = static_cast<size_t>(p) * (c1 + 1) + off;
    const double tot = take[idx] + stay[idx];
    if (tot <= 0.0) return -1.0;  // dead-end state
    return take[idx] / tot;
  }
};

// Builds the chain for log-odds u*v (indexed by row) under the given
// constraint set. A dead chain means Q is identically zero.
ColumnChain dp_build(const UVector& u, const std::vector<double>& log_v, const ConstraintSet& constraints);

// Draws one column (indexed by row) together with log Q(x). O(m).
std::pair<std::vector<uint8_t>, double> dp_sample(const ColumnChain& chain, RngStream& rng);

// log Q(x); -inf if x is not in the chain's support.
double dp_evaluate(const ColumnChain& chain, std::span<const uint8_t> x);

// Scratch space reused across samples by one thread.
struct SampleWorkspace;

// Immutable preprocessed instance: canonical weights, column order, polynomial
// tables, and the data needed for O(m) per-column parameter updates. Safe to
// share across threads; each sample owns its private state.
class PreparedSpec {
 public:
  explicit PreparedSpec(ProblemSpec spec);
  ~PreparedSpec();
  PreparedSpec(PreparedSpec&&) noexcept;
  PreparedSpec& operator=(PreparedSpec&&) noexcept;

  const ProblemSpec& spec() const;
  const CanonicalWeights& wbar() const;
  const GTable& gtable() const;
  const std::vector<int>& order() const;  // position -> original column
  bool structural_active() const;
  bool uniform_weights() const;

  SampleRecord sample(RngStream& rng) const;
  SampleRecord sample(RngStream& rng, SampleWorkspace& ws) const;
  // log Q*(z) under the identical column schedule as sample(); -inf off
  // support. z uses the original orientation.
  double evaluate(const BinaryMatrix& z) const;
  double evaluate(const BinaryMatrix& z, SampleWorkspace& ws) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SampleWorkspace {
  SampleWorkspace();
  ~SampleWorkspace();
  SampleWorkspace(SampleWorkspace&&) noexcept;

  struct Impl;
  std::unique_ptr<Impl> impl;
};

SampleRecord sample_matrix(const PreparedSpec& spec, RngStream& rng);
double evaluate_matrix(const PreparedSpec& spec, const BinaryMatrix& z);

// log f(z) = sum of log w over the ones of z minus log Q*(z), using the
// original (uncanonicalized) weights. -inf for dead samples.
double log_importance_weight(const SampleRecord& rec, const WeightMatrix& w);

}  // namespace binmat

#endif  // BINMAT_PROPOSAL_HPP_
