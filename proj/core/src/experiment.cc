#include "bmadmm/experiment.h"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "bmadmm/curvature.h"
#include "bmadmm/errors.h"
#include "bmadmm/problem_io.h"
#include "bmadmm/rgd.h"

namespace bmadmm {
namespace {

struct LoadedProblem {
  SparseSymMatrix cost;
  Index d = 1;
  std::string name;
};

LoadedProblem load(const std::string& input) {
  const std::filesystem::path path(input);
  LoadedProblem out;
  out.name = path.stem().string();
  if (path.extension() == ".bin") {
    BinaryProblem bp = read_problem_binary(path);
    out.cost = std::move(bp.cost);
    out.d = bp.d;
  } else {
    out.cost = maxcut_cost(read_gset(path));
  }
  return out;
}

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
    case SolveStatus::kEpsConvex:
      return 0;
    case SolveStatus::kMaxIter:
    case SolveStatus::kStalled:
      return 2;
    case SolveStatus::kAssumptionViolated:
      return 3;
  }
  return 3;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "admm") return Algorithm::kAdmm;
  if (name == "admm2") return Algorithm::kAdmm2;
  if (name == "prox-admm") return Algorithm::kProxAdmm;
  if (name == "rgd") return Algorithm::kRgd;
  throw InvalidArgument("unknown algorithm '" + std::string(name) +
                        "' (expected admm, admm2, prox-admm or rgd)");
}

const char* to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::kAdmm: return "admm";
    case Algorithm::kAdmm2: return "admm2";
    case Algorithm::kProxAdmm: return "prox-admm";
    case Algorithm::kRgd: return "rgd";
  }
  return "unknown";
}

PenaltyMode parse_penalty_mode(std::string_view name) {
  if (name == "theory") return PenaltyMode::kTheory;
  if (name == "practice") return PenaltyMode::kPractice;
  if (name == "absolute") return PenaltyMode::kAbsolute;
  throw InvalidArgument("unknown rho mode '" + std::string(name) +
                        "' (expected theory, practice or absolute)");
}

void ExperimentConfig::validate() const {
  if (input.empty()) throw InvalidArgument("no input problem given");
  if (eps && alg != Algorithm::kAdmm2) {
    throw InvalidArgument("eps only applies to admm2");
  }
  if (eps && !(*eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (mu && alg != Algorithm::kProxAdmm) {
    throw InvalidArgument("mu only applies to prox-admm");
  }
  if (mu && !(*mu > 0.0)) throw InvalidArgument("prox-admm needs mu > 0");
  if (alg == Algorithm::kProxAdmm && rho_mode == PenaltyMode::kAbsolute && !mu) {
    throw InvalidArgument("prox-admm with an absolute rho needs --mu");
  }
  if (rho_mode == PenaltyMode::kAbsolute && !(rho > 0.0)) {
    throw InvalidArgument("absolute rho mode needs rho > 0");
  }
  if (rank && *rank < 1) throw InvalidArgument("rank must be positive");
  if (!(tol_primal > 0.0) || !(tol_obj > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (max_iter < 0 || trace_every < 0 || budget_seconds < 0.0) {
    throw InvalidArgument("max_iter, trace_every and budget must be nonnegative");
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  LoadedProblem loaded = load(config.input);
  const Index n = loaded.cost.dim();
  const Index d = loaded.d;
  const Index r = config.rank ? *config.rank : default_rank(n, d);
  const ManifoldSpec spec{n / d, d, r};
  spec.validate();
  const CostNorms norms = CostNorms::compute(loaded.cost);

  ExperimentOutcome out;
  out.n = n;
  out.d = d;
  out.r = r;

  SolverOptions so;
  so.penalty_mode = config.rho_mode;
  so.rho = config.rho;
  so.mu = config.mu.value_or(0.0);
  so.proximal = config.alg == Algorithm::kProxAdmm;
  so.max_iter = config.max_iter;
  so.tol_primal = config.tol_primal;
  so.tol_obj = config.tol_obj;
  so.seed = config.seed;
  so.check_invariants = config.check_invariants;
  so.trace_every = config.trace_every;
  so.record_time = config.record_time;
  so.time_limit_seconds = config.budget_seconds;
  if (config.alg == Algorithm::kProxAdmm && config.mu &&
      config.rho_mode != PenaltyMode::kAbsolute) {
    const Penalty p = resolve_penalty(norms, so);
    so.penalty_mode = PenaltyMode::kAbsolute;
    so.rho = p.rho;
  }
  if (config.alg == Algorithm::kProxAdmm) {
    const Penalty p = resolve_penalty(norms, so);
    if (!(p.mu - norms.two * norms.two / p.rho > 0.0)) {
      out.warnings.push_back(fmt::format("mu - ||C||^2 / rho = {:.3g} is not positive; "
                                         "convergence is not guaranteed",
                                         p.mu - norms.two * norms.two / p.rho));
    }
  }
  for (const std::string& w : out.warnings) spdlog::warn("{}", w);

  Problem problem{loaded.cost, spec, loaded.name};
  switch (config.alg) {
    case Algorithm::kAdmm:
    case Algorithm::kProxAdmm:
      out.result = AdmmSolver(problem, so, norms).solve();
      break;
    case Algorithm::kAdmm2: {
      CurvatureSolveOptions co;
      co.eps = config.eps.value_or(1e-2);
      co.probe.seed = config.seed;
      out.result = solve_with_curvature(problem, so, co);
      break;
    }
    case Algorithm::kRgd: {
      RgdOptions ro;
      ro.max_iter = config.max_iter;
      ro.grad_tol = config.tol_primal;
      ro.seed = config.seed;
      ro.trace_every = config.trace_every;
      ro.record_time = config.record_time;
      ro.time_limit_seconds = config.budget_seconds;
      out.result = rgd_solve(problem, ro);
      break;
    }
  }

  CertifyOptions copt;
  copt.cost_two_norm = norms.two;
  copt.seed = config.seed;
  out.certificate = dual_certificate(loaded.cost, out.result.state.sigma_tilde, spec, copt);

  if (config.reference == ReferenceMode::kOracle) {
    out.reference_value = oracle_sdp(loaded.cost, spec.q, d, 5, config.seed).value;
  } else if (config.reference == ReferenceMode::kValue) {
    out.reference_value = config.reference_value;
  }
  if (out.reference_value) {
    if (*out.reference_value != 0.0) {
      out.relative_gap = relative_gap(out.certificate.objective, *out.reference_value);
    } else {
      out.warnings.push_back("reference value is zero; relative gap not reported");
      spdlog::warn("{}", out.warnings.back());
    }
  }

  if (!config.trace_path.empty()) {
    write_file_atomic(config.trace_path, out.result.trace.to_csv());
  }
  if (!config.trace_jsonl_path.empty()) {
    write_file_atomic(config.trace_jsonl_path, out.result.trace.to_jsonl());
  }

  nlohmann::ordered_json j;
  j["problem"] = loaded.name;
  j["alg"] = to_string(config.alg);
  j["n"] = n;
  j["r"] = r;
  j["rho"] = out.result.rho;
  j["mu"] = out.result.mu;
  j["final_objective"] = out.certificate.objective;
  j["gap"] = out.certificate.duality_gap;
  j["certified"] = out.certificate.certified;
  j["iterations"] = out.result.state.k;
  j["seconds"] = config.record_time ? out.result.seconds : 0.0;
  j["seed"] = config.seed;
  j["status"] = to_string(out.result.status);
  j["d"] = d;
  j["slack_min_eig"] = out.certificate.slack_min_eig;
  j["dual_bound"] = out.certificate.dual_bound;
  j["certified_relative_gap"] = out.certificate.relative_gap;
  j["reference_value"] = out.reference_value ? nlohmann::json(*out.reference_value) : nlohmann::json();
  j["relative_gap"] = out.relative_gap ? nlohmann::json(*out.relative_gap) : nlohmann::json();
  j["probes"] = out.result.probes;
  j["escapes"] = out.result.escapes;
  j["invariant_warnings"] = out.result.invariant_warnings;
  j["message"] = out.result.message;
  j["warnings"] = out.warnings;
  out.summary_json = j.dump(2) + "\n";
  if (!config.summary_path.empty()) write_file_atomic(config.summary_path, out.summary_json);

  out.exit_code = exit_code_for(out.result.status);
  return out;
}

int run(const ExperimentConfig& config) {
  try {
    const ExperimentOutcome out = run_experiment(config);
    if (out.result.status == SolveStatus::kAssumptionViolated) {
      spdlog::error("{}", out.result.message);
    }
    return out.exit_code;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
}

}  // namespace bmadmm
