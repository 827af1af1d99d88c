// bmadmm: command-line front end.
//
//   bmadmm solve --input g.txt --alg admm --rho-mode practice --r auto
//                --trace out.csv --summary out.json --seed 7 --check-invariants
//   bmadmm gen-so3 --q 1000 --s 0.02 --seed 1 --out prob.bin
//   bmadmm info --input g.txt
//
// Exit codes: 0 converged, 2 iteration or time budget exhausted, 3 error.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "bmadmm/eigen_estimate.h"
#include "bmadmm/errors.h"
#include "bmadmm/experiment.h"
#include "bmadmm/problem_io.h"

namespace {

constexpr int kExitError = 3;

struct SolveArgs {
  std::string input;
  std::string alg = "admm";
  std::string rho_mode = "practice";
  double rho = 0.0;
  double mu = 0.0;
  double eps = 0.0;
  std::string rank = "auto";
  std::string trace;
  std::string trace_jsonl;
  std::string summary;
  std::uint64_t seed = 0;
  bool check_invariants = false;
  long long max_iter = 10000;
  double tol_primal = 1e-8;
  double tol_obj = 1e-10;
  std::string reference;
  bool no_timing = false;
  double budget_seconds = 0.0;
  long long trace_every = 1;
};

bmadmm::ExperimentConfig to_config(const SolveArgs& a, const CLI::App& cmd) {
  bmadmm::ExperimentConfig c;
  c.input = a.input;
  c.alg = bmadmm::parse_algorithm(a.alg);
  c.rho_mode = bmadmm::parse_penalty_mode(a.rho_mode);
  if (cmd.count("--rho") > 0) {
    if (cmd.count("--rho-mode") > 0 && c.rho_mode != bmadmm::PenaltyMode::kAbsolute) {
      throw bmadmm::InvalidArgument("--rho conflicts with --rho-mode " + a.rho_mode);
    }
    c.rho_mode = bmadmm::PenaltyMode::kAbsolute;
    c.rho = a.rho;
  }
  if (cmd.count("--mu") > 0) c.mu = a.mu;
  if (cmd.count("--eps") > 0) c.eps = a.eps;
  if (a.rank != "auto") {
    std::size_t used = 0;
    long long r = 0;
    try {
      r = std::stoll(a.rank, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.rank.size()) {
      throw bmadmm::InvalidArgument("--r expects 'auto' or an integer, got '" + a.rank + "'");
    }
    c.rank = r;
  }
  c.trace_path = a.trace;
  c.trace_jsonl_path = a.trace_jsonl;
  c.summary_path = a.summary;
  c.seed = a.seed;
  c.check_invariants = a.check_invariants;
  c.max_iter = a.max_iter;
  c.tol_primal = a.tol_primal;
  c.tol_obj = a.tol_obj;
  c.record_time = !a.no_timing;
  c.budget_seconds = a.budget_seconds;
  c.trace_every = a.trace_every;
  if (a.reference == "oracle") {
    c.reference = bmadmm::ReferenceMode::kOracle;
  } else if (!a.reference.empty()) {
    try {
      std::size_t used = 0;
      c.reference_value = std::stod(a.reference, &used);
      if (used != a.reference.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw bmadmm::InvalidArgument("--reference expects 'oracle' or a number");
    }
    c.reference = bmadmm::ReferenceMode::kValue;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank factored ADMM for SDPs with block-diagonal constraints"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  SolveArgs sa;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem and write trace and summary");
  solve->add_option("--input", sa.input, "Gset text file or .bin problem")->required();
  solve->add_option("--alg", sa.alg, "admm | admm2 | prox-admm | rgd")->capture_default_str();
  solve->add_option("--rho-mode", sa.rho_mode, "theory | practice | absolute")
      ->capture_default_str();
  solve->add_option("--rho", sa.rho, "Penalty value (implies absolute mode)");
  solve->add_option("--mu", sa.mu, "Proximal weight (prox-admm)");
  solve->add_option("--eps", sa.eps, "Curvature tolerance (admm2, default 1e-2)");
  solve->add_option("--r", sa.rank, "Rank: auto or an integer")->capture_default_str();
  solve->add_option("--trace", sa.trace, "Trace CSV path");
  solve->add_option("--trace-jsonl", sa.trace_jsonl, "Trace JSON-lines path");
  solve->add_option("--summary", sa.summary, "Summary JSON path");
  solve->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  solve->add_flag("--check-invariants", sa.check_invariants, "Check convergence invariants");
  solve->add_option("--max-iter", sa.max_iter)->capture_default_str();
  solve->add_option("--tol-primal", sa.tol_primal)->capture_default_str();
  solve->add_option("--tol-obj", sa.tol_obj)->capture_default_str();
  solve->add_option("--reference", sa.reference,
                    "oracle, or a reference optimal value for the relative gap");
  solve->add_flag("--no-timing", sa.no_timing, "Write 0 to the seconds fields");
  solve->add_option("--budget-seconds", sa.budget_seconds, "Wall-clock limit (0: none)");
  solve->add_option("--trace-every", sa.trace_every, "Trace stride (0: no trace)")
      ->capture_default_str();

  long long q = 0;
  double s = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-so3", "Generate a random SO(3) synchronization cost");
  gen->add_option("--q", q, "Number of 3x3 blocks")->required();
  gen->add_option("--s", s, "Probability that a block pair is populated")->required();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output .bin path")->required();

  std::string info_input;
  CLI::App* info = app.add_subcommand("info", "Print size and norms of a problem");
  info->add_option("--input", info_input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  spdlog::set_level(verbose ? spdlog::level::debug
                            : quiet ? spdlog::level::err : spdlog::level::info);

  try {
    if (*solve) {
      const bmadmm::ExperimentConfig config = to_config(sa, *solve);
      const bmadmm::ExperimentOutcome out = bmadmm::run_experiment(config);
      if (config.summary_path.empty()) std::cout << out.summary_json;
      spdlog::info("{}: status {}, objective {:.10g}, {} iterations, certified {}",
                   bmadmm::to_string(config.alg), bmadmm::to_string(out.result.status),
                   out.certificate.objective, out.result.state.k, out.certificate.certified);
      if (out.result.status == bmadmm::SolveStatus::kAssumptionViolated) {
        spdlog::error("{}", out.result.message);
      }
      return out.exit_code;
    }
    if (*gen) {
      const bmadmm::So3Instance inst = bmadmm::generate_so3(q, s, gen_seed);
      bmadmm::write_problem_binary(gen_out, inst.cost, 3);
      const double two = bmadmm::two_norm_estimate(inst.cost);
      std::printf("n=%lld populated_pairs=%lld nnz=%lld norm2=%.6g\n",
                  static_cast<long long>(inst.cost.dim()),
                  static_cast<long long>(inst.populated_pairs),
                  static_cast<long long>(inst.cost.nnz()), two);
      return 0;
    }
    if (*info) {
      const std::filesystem::path path(info_input);
      bmadmm::SparseSymMatrix cost;
      long long d = 1;
      if (path.extension() == ".bin") {
        bmadmm::BinaryProblem bp = bmadmm::read_problem_binary(path);
        cost = std::move(bp.cost);
        d = bp.d;
      } else {
        cost = bmadmm::maxcut_cost(bmadmm::read_gset(path));
      }
      const bmadmm::CostNorms norms = bmadmm::CostNorms::compute(cost);
      std::printf("n=%lld d=%lld nnz=%lld norm_inf=%.10g norm2=%.10g\n",
                  static_cast<long long>(cost.dim()), d,
                  static_cast<long long>(cost.nnz()), norms.inf, norms.two);
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return kExitError;
}
