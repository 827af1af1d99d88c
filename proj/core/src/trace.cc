#include "bmadmm/trace.h"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <ostream>
#include <sstream>

namespace bmadmm {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Trace::write_csv(std::ostream& os) const {
  os << "k,objective,lagrangian,primal_res,step_tilde,step_sigma,min_gamma,seconds";
  if (curvature_columns_) os << ",probe_performed,lambda_h,escaped";
  os << '\n';
  for (const TraceRecord& r : records_) {
    os << r.k << ',' << fmt_double(r.objective) << ',' << fmt_double(r.lagrangian)
       << ',' << fmt_double(r.primal_res) << ',' << fmt_double(r.step_tilde) << ','
       << fmt_double(r.step_sigma) << ',' << fmt_double(r.min_gamma) << ','
       << fmt_double(r.seconds);
    if (curvature_columns_) {
      os << ',' << r.probe_performed << ',' << fmt_double(r.lambda_h) << ','
         << r.escaped;
    }
    os << '\n';
  }
}

void Trace::write_jsonl(std::ostream& os) const {
  for (const TraceRecord& r : records_) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["objective"] = r.objective;
    j["lagrangian"] = r.lagrangian;
    j["primal_res"] = r.primal_res;
    j["step_tilde"] = r.step_tilde;
    j["step_sigma"] = r.step_sigma;
    j["min_gamma"] = r.min_gamma;
    j["seconds"] = r.seconds;
    if (curvature_columns_) {
      j["probe_performed"] = r.probe_performed;
      j["lambda_h"] = r.lambda_h;
      j["escaped"] = r.escaped;
    }
    os << j.dump() << '\n';
  }
}

std::string Trace::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

std::string Trace::to_jsonl() const {
  std::ostringstream os;
  write_jsonl(os);
  return os.str();
}

}  // namespace bmadmm
