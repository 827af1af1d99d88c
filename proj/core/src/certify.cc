#include "bmadmm/certify.h"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "bmadmm/admm.h"
#include "bmadmm/eigen_estimate.h"
#include "bmadmm/errors.h"
#include "bmadmm/rgd.h"

namespace bmadmm {
namespace {

constexpr double kOnManifoldTol = 1e-8;

}  // namespace

Certificate dual_certificate(const SparseSymMatrix& C, const FactorMatrix& sigma,
                             const ManifoldSpec& spec, const CertifyOptions& options) {
  spec.validate();
  if (C.dim() != spec.n()) throw DimensionError("cost matrix and manifold disagree on n");
  if (manifold_violation(sigma, spec) > kOnManifoldTol) {
    throw InvalidArgument("dual_certificate: sigma is off the manifold");
  }
  const Index d = spec.d;
  const FactorMatrix c_sigma = spmm(C, sigma);

  Certificate cert;
  cert.block_count = spec.q;
  cert.objective = c_sigma.cwiseProduct(sigma).sum();

  std::vector<Triplet> entries = C.upper_entries();
  double trace_sum = 0.0;
  double stationarity2 = 0.0;
  if (d == 1) {
    cert.lambda.resize(spec.n());
    for (Index i = 0; i < spec.n(); ++i) {
      const double l = c_sigma.row(i).dot(sigma.row(i));
      cert.lambda[i] = l;
      trace_sum += l;
      stationarity2 += (c_sigma.row(i) - l * sigma.row(i)).squaredNorm();
      entries.push_back({i, i, -l});
    }
  } else {
    cert.blocks.reserve(static_cast<std::size_t>(spec.q));
    double skew = 0.0;
    for (Index b = 0; b < spec.q; ++b) {
      const auto s = sigma.middleRows(b * d, d);
      const auto cs = c_sigma.middleRows(b * d, d);
      const Eigen::MatrixXd m = s * cs.transpose();
      const Eigen::MatrixXd lam = 0.5 * (m + m.transpose());
      skew += (0.5 * (m - m.transpose())).norm();
      trace_sum += lam.trace();
      stationarity2 += (cs - lam * s).squaredNorm();
      for (Index r = 0; r < d; ++r) {
        for (Index c = r; c < d; ++c) entries.push_back({b * d + r, b * d + c, -lam(r, c)});
      }
      cert.blocks.push_back(lam);
    }
    cert.skew = skew;
  }
  cert.stationarity = std::sqrt(stationarity2);
  cert.duality_gap = cert.objective - trace_sum;

  const double c2 =
      options.cost_two_norm > 0.0 ? options.cost_two_norm : two_norm_estimate(C);
  const SparseSymMatrix slack = SparseSymMatrix::from_entries(spec.n(), entries);
  EigenEstimateOptions eo;
  eo.rel_tol = options.eig_rel_tol;
  eo.max_iter = options.eig_max_iter;
  eo.seed = options.seed;
  try {
    const EigenPair p = min_eig_estimate(slack, eo);
    cert.slack_min_eig = p.value;
    cert.eig_residual = p.residual;
  } catch (const NonConvergence& e) {
    spdlog::warn("slack eigenvalue did not converge (residual {:.3g})", e.residual());
    cert.slack_min_eig = e.estimate();
    cert.eig_residual = e.residual();
  }

  const double n = static_cast<double>(spec.n());
  cert.dual_bound = trace_sum + n * std::min(0.0, cert.slack_min_eig - cert.eig_residual);
  const double spread = cert.objective - cert.dual_bound;
  const double denom = std::abs(cert.dual_bound);
  cert.relative_gap = spread <= 0.0 ? 0.0
                      : denom > 0.0 ? spread / denom
                                    : std::numeric_limits<double>::infinity();
  cert.certified = cert.slack_min_eig >= -options.tol * c2 &&
                   cert.duality_gap <= options.tol * (1.0 + std::abs(cert.objective));
  return cert;
}

std::string certificate_to_json(const Certificate& cert) {
  nlohmann::ordered_json j;
  j["objective"] = cert.objective;
  j["gap"] = cert.duality_gap;
  j["slack_min_eig"] = cert.slack_min_eig;
  j["certified"] = cert.certified;
  j["block_count"] = cert.block_count;
  j["dual_bound"] = cert.dual_bound;
  j["relative_gap"] = cert.relative_gap;
  return j.dump();
}

double relative_gap(double objective, double reference) {
  if (reference == 0.0) {
    throw InvalidArgument("relative gap undefined for a zero reference; use the absolute gap");
  }
  return std::abs((objective - reference) / reference);
}

MaxCutResult brute_force_maxcut(const GraphInstance& graph) {
  const Index n = graph.n;
  if (n < 1 || n > 24) throw InvalidArgument("brute_force_maxcut needs 1 <= n <= 24");
  std::vector<std::vector<std::pair<Index, double>>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : graph.edges) {
    adj[static_cast<std::size_t>(e.i - 1)].push_back({e.j - 1, e.w});
    adj[static_cast<std::size_t>(e.j - 1)].push_back({e.i - 1, e.w});
  }
  std::vector<int> x(static_cast<std::size_t>(n), 1);
  double cut = 0.0;
  MaxCutResult best{0.0, x};
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto v = static_cast<std::size_t>(std::countr_zero(k) + 1);
    for (const auto& [u, w] : adj[v]) cut += w * x[v] * x[static_cast<std::size_t>(u)];
    x[v] = -x[v];
    if (cut > best.value) {
      best.value = cut;
      best.assignment = x;
    }
  }
  return best;
}

OracleResult oracle_sdp(const SparseSymMatrix& C, Index q, Index d, int restarts,
                        std::uint64_t seed) {
  const Index n = q * d;
  if (C.dim() != n) throw DimensionError("oracle_sdp: cost matrix and q * d disagree");
  if (restarts < 1) throw InvalidArgument("oracle_sdp needs at least one restart");
  Index r = std::min<Index>(n, static_cast<Index>(std::ceil(std::sqrt(2.0 * n))) + 2);
  r = std::max(r, std::min(d + 1, n));
  r = std::max(r, d);
  const ManifoldSpec spec{q, d, r};

  OracleResult best;
  best.rank = r;
  best.value = std::numeric_limits<double>::infinity();
  bool have = false;

  const CostNorms norms = CostNorms::compute(C);
  CertifyOptions copt;
  copt.cost_two_norm = norms.two;

  for (int i = 0; i < restarts; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    FactorMatrix sigma;
    if (norms.inf == 0.0) {
      sigma = random_point(spec, s);
    } else {
      Problem problem{C, spec, "oracle"};
      SolverOptions opt;
      opt.penalty_mode = PenaltyMode::kPractice;
      opt.max_iter = 20000;
      opt.tol_primal = 1e-9;
      opt.seed = s;
      opt.trace_every = 0;
      const AdmmSolver solver(problem, opt, norms);
      SolveResult admm = solver.solve();
      RgdOptions ropt;
      ropt.max_iter = 5000;
      ropt.grad_tol = 1e-10;
      ropt.trace_every = 0;
      SolveResult polished = rgd_solve(problem, ropt, admm.state.sigma_tilde);
      sigma = std::move(polished.state.sigma_tilde);
    }
    copt.seed = s;
    Certificate cert = dual_certificate(C, sigma, spec, copt);
    const bool better =
        !have || (cert.certified && !best.certified) ||
        (cert.certified == best.certified && cert.objective < best.value);
    if (better) {
      best.value = cert.objective;
      best.sigma = std::move(sigma);
      best.certificate = std::move(cert);
      best.certified = best.certificate.certified;
      best.seed = s;
      have = true;
    }
    if (norms.inf == 0.0) break;
  }
  return best;
}

}  // namespace bmadmm
