#ifndef BMADMM_EXPERIMENT_H_
#define BMADMM_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bmadmm/admm.h"
#include "bmadmm/certify.h"

namespace bmadmm {

enum class Algorithm { kAdmm, kAdmm2, kProxAdmm, kRgd };

// "admm", "admm2", "prox-admm", "rgd"; anything else throws InvalidArgument.
Algorithm parse_algorithm(std::string_view name);
const char* to_string(Algorithm alg);

PenaltyMode parse_penalty_mode(std::string_view name);  // theory | practice | absolute

enum class ReferenceMode { kNone, kOracle, kValue };

struct ExperimentConfig {
  // Gset text file, or a binary problem file when the name ends in ".bin".
  std::string input;
  Algorithm alg = Algorithm::kAdmm;
  std::optional<Index> rank;  // empty: default_rank(n, d)
  PenaltyMode rho_mode = PenaltyMode::kPractice;
  double rho = 0.0;
  std::optional<double> mu;
  std::optional<double> eps;
  Index max_iter = 10000;
  double tol_primal = 1e-8;
  double tol_obj = 1e-10;
  std::uint64_t seed = 0;
  bool check_invariants = false;
  Index trace_every = 1;
  bool record_time = true;
  double budget_seconds = 0.0;
  ReferenceMode reference = ReferenceMode::kNone;
  double reference_value = 0.0;
  std::string trace_path;        // CSV
  std::string trace_jsonl_path;  // JSON lines
  std::string summary_path;

  // Throws InvalidArgument on inconsistent settings (eps outside admm2, mu
  // outside prox-admm, non-positive tolerances, ...).
  void validate() const;
};

struct ExperimentOutcome {
  SolveResult result;
  Certificate certificate;
  Index n = 0;
  Index d = 1;
  Index r = 0;
  std::optional<double> reference_value;
  std::optional<double> relative_gap;
  std::vector<std::string> warnings;
  std::string summary_json;
  int exit_code = 0;
};

// Loads the problem, solves, certifies and writes the requested files.
// Errors propagate as exceptions.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// run_experiment with the exit-code contract: 0 Converged / EpsConvex,
// 2 MaxIter / Stalled, 3 on any error (including AssumptionViolated).
int run(const ExperimentConfig& config);

}  // namespace bmadmm

#endif  // BMADMM_EXPERIMENT_H_
