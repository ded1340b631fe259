#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "binmat/estimator.hpp"
#include "binmat/io.hpp"
#include "binmat/oracle.hpp"
#include "binmat/runner.hpp"
#include "json.hpp"

namespace {

using namespace binmat;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitInfeasible = 2;
constexpr int kExitIo = 3;

struct RunConfig {
  std::string margins_file;
  std::string weights_file;
  long long T = 1000;
  uint64_t seed = 1;
  std::string approx = "canfield";
  bool no_canonicalize = false;
  std::string column_order = "auto";
  bool transpose = false;
  double alpha = 1.0;
  int threads = 0;  // 0: use BINMAT_THREADS or 1
  std::string output;
};

int resolved_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("BINMAT_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

SamplerOptions sampler_options(const RunConfig& cfg) {
  SamplerOptions opt;
  opt.approx = cfg.approx == "greenhill" ? Approx::kGreenhill : Approx::kCanfield;
  opt.canonicalize = !cfg.no_canonicalize;
  if (cfg.column_order == "none")
    opt.column_order = ColumnOrderMode::kNone;
  else if (cfg.column_order == "descend")
    opt.column_order = ColumnOrderMode::kDescend;
  else
    opt.column_order = ColumnOrderMode::kAuto;
  return opt;
}

Matrix<double> transpose(const Matrix<double>& w) {
  Matrix<double> out(w.cols(), w.rows());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) out(j, i) = w(i, j);
  return out;
}

// Loads margins and weights, applying --transpose. Weights default to ones.
ProblemSpec load_problem(const RunConfig& cfg) {
  Margins margins = io::read_margins(cfg.margins_file);
  WeightMatrix w =
      cfg.weights_file.empty() ? ones_weights(margins.m, margins.n) : io::read_weights(cfg.weights_file);
  if (cfg.transpose) {
    margins = Margins(margins.c, margins.r);
    w = WeightMatrix(transpose(w.w));
  }
  return ProblemSpec(std::move(margins), std::move(w), sampler_options(cfg));
}

ordered_json config_json(const RunConfig& cfg, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["margins"] = cfg.margins_file;
  j["weights"] = cfg.weights_file;
  j["T"] = cfg.T;
  j["seed"] = cfg.seed;
  j["approx"] = cfg.approx;
  j["canonicalize"] = !cfg.no_canonicalize;
  j["column_order"] = cfg.column_order;
  j["transpose"] = cfg.transpose;
  j["threads"] = resolved_threads(cfg);
  j["output"] = cfg.output;
  return j;
}

ordered_json big_json(const LogBigNumber& x) {
  ordered_json j;
  auto [man, e] = x.parts(6);
  j["mantissa"] = man;
  j["exp10"] = e;
  j["log10"] = x.log10_value == kNegInf ? ordered_json(nullptr) : ordered_json(x.log10_value);
  return j;
}

ordered_json summary_json(const EstimateSummary& s) {
  ordered_json j;
  j["T"] = s.T;
  j["kappa_hat"] = big_json(s.kappa_hat);
  j["se"] = big_json(s.se_kappa);
  j["cv2_hat"] = s.cv2_hat;
  j["delta_hat"] = s.delta_hat;
  j["ess"] = s.ess;
  j["dead_fraction"] = s.dead_fraction;
  j["defined"] = s.defined;
  if (s.delta_excludes_dead) j["delta_excludes_dead"] = true;
  if (s.has_h) {
    j["per_hat"] = big_json(s.per_hat);
    j["per_sign"] = s.per_sign;
    j["se_per"] = big_json(s.se_per);
    j["rel_se_pct"] = s.rel_se_pct;
    j["mu_hat"] = s.mu_hat;
  }
  return j;
}

void emit(const ordered_json& j, const std::string& output) {
  if (output.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(output);
  if (!out) throw io::FormatError("cannot write '" + output + "'");
  out << j.dump(2) << "\n";
}

int cmd_sample(const RunConfig& cfg) {
  const ProblemSpec problem = load_problem(cfg);
  PreparedSpec prepared(problem);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) throw io::FormatError("cannot write '" + cfg.output + "'");
    out = &file;
  }
  // Report in the caller's orientation.
  const int m_out = cfg.transpose ? problem.margins.n : problem.margins.m;
  const int n_out = cfg.transpose ? problem.margins.m : problem.margins.n;
  io::write_samples(*out, m_out, n_out, cfg.seed, cfg.T);
  run_samples_blocked(prepared, cfg.T, cfg.seed, resolved_threads(cfg),
                      [&](long long start, std::span<const SampleRecord> block) {
                        for (size_t k = 0; k < block.size(); ++k) {
                          const double lf = log_importance_weight(block[k], problem.w);
                          io::append_sample(*out, start + static_cast<long long>(k), block[k], lf,
                                            cfg.transpose);
                        }
                      });
  return 0;
}

int cmd_estimate(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemSpec problem = load_problem(cfg);
  PreparedSpec prepared(problem);
  ShardStats stats;
  run_samples_blocked(prepared, cfg.T, cfg.seed, resolved_threads(cfg),
                      [&](long long, std::span<const SampleRecord> block) {
                        for (const SampleRecord& rec : block)
                          stats.add(log_importance_weight(rec, problem.w));
                      });
  const EstimateSummary s = summarize(stats);
  ordered_json j = summary_json(s);
  j["seed"] = cfg.seed;
  j["approx"] = cfg.approx;
  j["config"] = config_json(cfg, "estimate");
  j["timing_sec"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(j, cfg.output);
  return 0;
}

int cmd_alpha_permanent(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  WeightMatrix w = io::read_weights(cfg.weights_file);
  if (cfg.transpose) w = WeightMatrix(transpose(w.w));
  AlphaPermanentRequest req{std::move(w), cfg.alpha, cfg.T, sampler_options(cfg)};
  const EstimateSummary s = alpha_permanent(req, cfg.seed, resolved_threads(cfg));
  ordered_json j = summary_json(s);
  j["alpha"] = cfg.alpha;
  j["seed"] = cfg.seed;
  j["approx"] = cfg.approx;
  j["config"] = config_json(cfg, "alpha-permanent");
  j["config"]["alpha"] = cfg.alpha;
  j["timing_sec"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit(j, cfg.output);
  return 0;
}

ordered_json exact_json(const oracle::ExactCount& v) {
  ordered_json j;
  if (v.is_exact_integer()) j["value"] = v.to_string();
  j["log10"] = v.log10() == kNegInf ? ordered_json(nullptr) : ordered_json(v.log10());
  auto [man, e] = LogBigNumber::from_log10(v.log10()).parts(6);
  j["mantissa"] = man;
  j["exp10"] = e;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential importance sampling for binary matrices with fixed margins"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub, bool need_margins, bool need_weights) {
    if (need_margins) sub->add_option("-m,--margins", cfg.margins_file, "margins file")->required();
    auto* wopt = sub->add_option("-w,--weights", cfg.weights_file, "weights file (CSV or sparse)");
    if (need_weights) wopt->required();
    sub->add_option("-T,--samples", cfg.T, "number of samples")->check(CLI::PositiveNumber);
    sub->add_option("-s,--seed", cfg.seed, "master seed");
    sub->add_option("--approx", cfg.approx, "count approximation")
        ->check(CLI::IsMember({"canfield", "greenhill"}));
    sub->add_flag("--no-canonicalize", cfg.no_canonicalize, "use raw weights for the odds");
    sub->add_option("--column-order", cfg.column_order, "column ordering")
        ->check(CLI::IsMember({"auto", "none", "descend"}));
    sub->add_flag("--transpose", cfg.transpose, "swap rows and columns");
    sub->add_option("-j,--threads", cfg.threads, "worker threads (default $BINMAT_THREADS or 1)");
    sub->add_option("-o,--output", cfg.output, "output path (default stdout)");
  };

  CLI::App* sample = app.add_subcommand("sample", "draw matrices and write them with their weights");
  add_common(sample, true, false);

  CLI::App* estimate = app.add_subcommand("estimate", "estimate kappa with diagnostics");
  add_common(estimate, true, false);

  CLI::App* alpha = app.add_subcommand("alpha-permanent", "estimate the alpha-permanent of a square matrix");
  add_common(alpha, false, true);
  alpha->add_option("-a,--alpha", cfg.alpha, "cycle weight alpha")->required();

  CLI::App* orc = app.add_subcommand("oracle", "exact reference computations");
  std::string orc_what;
  std::vector<std::string> orc_args;
  bool orc_json = false;
  orc->add_option("what", orc_what, "two-regular | finch | count | enumerate | permanent | const-alpha | minstd")
      ->required();
  orc->add_option("args", orc_args, "positional arguments for the chosen computation");
  orc->add_option("-m,--margins", cfg.margins_file, "margins file (count, enumerate)");
  orc->add_option("-w,--weights", cfg.weights_file, "weights file (count, permanent)");
  orc->add_flag("--json", orc_json, "emit JSON");
  orc->add_option("-o,--output", cfg.output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sample->parsed()) return cmd_sample(cfg);
    if (estimate->parsed()) return cmd_estimate(cfg);
    if (alpha->parsed()) return cmd_alpha_permanent(cfg);

    // oracle subcommands
    oracle::ExactCount value = oracle::ExactCount::from_log10(kNegInf, oracle::ExactCount::Method::kClosedForm);
    if (orc_what == "two-regular") {
      if (orc_args.size() != 1) throw io::FormatError("usage: oracle two-regular <n>");
      value = oracle::two_regular_count(std::stoi(orc_args[0]));
    } else if (orc_what == "finch") {
      value = oracle::ExactCount::from_integer(oracle::count_matrices(oracle::darwin_finch_margins()),
                                               oracle::ExactCount::Method::kRecursion);
    } else if (orc_what == "count") {
      const Margins margins = io::read_margins(cfg.margins_file);
      value = oracle::ExactCount::from_integer(oracle::count_matrices(margins),
                                               oracle::ExactCount::Method::kRecursion);
    } else if (orc_what == "enumerate") {
      const Margins margins = io::read_margins(cfg.margins_file);
      WeightMatrix w =
          cfg.weights_file.empty() ? ones_weights(margins.m, margins.n) : io::read_weights(cfg.weights_file);
      value = oracle::exact_kappa(margins, w);
    } else if (orc_what == "permanent") {
      value = oracle::exact_permanent(io::read_weights(cfg.weights_file));
    } else if (orc_what == "const-alpha") {
      if (orc_args.size() != 3) throw io::FormatError("usage: oracle const-alpha <n> <b> <alpha>");
      value = oracle::const_alpha_permanent(std::stoi(orc_args[0]), std::stod(orc_args[1]),
                                            std::stod(orc_args[2]));
    } else if (orc_what == "minstd") {
      if (orc_args.size() != 2) throw io::FormatError("usage: oracle minstd <m> <n>");
      const Matrix<double> y = oracle::minstd_canonical(std::stoi(orc_args[0]), std::stoi(orc_args[1]));
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!cfg.output.empty()) {
        file.open(cfg.output);
        if (!file) throw io::FormatError("cannot write '" + cfg.output + "'");
        out = &file;
      }
      for (int i = 0; i < y.rows(); ++i) {
        for (int j = 0; j < y.cols(); ++j) *out << (j ? "," : "") << io::format_double(y(i, j));
        *out << "\n";
      }
      return 0;
    } else {
      throw io::FormatError("unknown oracle computation '" + orc_what + "'");
    }

    if (orc_json) {
      emit(exact_json(value), cfg.output);
    } else if (cfg.output.empty()) {
      std::cout << value.to_string() << "\n";
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw io::FormatError("cannot write '" + cfg.output + "'");
      out << value.to_string() << "\n";
    }
    return 0;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.find("Gale-Ryser") != std::string::npos || what.find("empty support") != std::string::npos) {
      std::cerr << "error: Gale-Ryser infeasible margins\n";
      return kExitInfeasible;
    }
    std::cerr << "error: " << what << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
