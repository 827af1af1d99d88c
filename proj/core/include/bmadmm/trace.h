#ifndef BMADMM_TRACE_H_
#define BMADMM_TRACE_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

struct TraceRecord {
  Index k = 0;
  double objective = 0.0;   // <C sigma_tilde, sigma_tilde>
  double lagrangian = 0.0;  // G_rho(sigma_tilde, sigma)
  double primal_res = 0.0;  // ||sigma_tilde - sigma||_F
  double step_tilde = 0.0;  // ||sigma_tilde^{k} - sigma_tilde^{k-1}||_F
  double step_sigma = 0.0;  // ||sigma^{k} - sigma^{k-1}||_F
  double min_gamma = 0.0;
  double seconds = 0.0;

  // Only written when the trace carries curvature columns.
  int probe_performed = 0;
  double lambda_h = 0.0;
  int escaped = 0;
};

// Iterate log. CSV columns are
//   k,objective,lagrangian,primal_res,step_tilde,step_sigma,min_gamma,seconds
// followed by probe_performed,lambda_h,escaped for curvature runs. JSON lines
// use the same keys. Doubles are printed with 17 significant digits so equal
// runs produce byte-identical files.
class Trace {
 public:
  explicit Trace(bool curvature_columns = false)
      : curvature_columns_(curvature_columns) {}

  void add(const TraceRecord& record) { records_.push_back(record); }
  // Overwrites the last record if it has the same k, otherwise appends.
  void add_or_replace(const TraceRecord& record) {
    if (!records_.empty() && records_.back().k == record.k) {
      records_.back() = record;
    } else {
      records_.push_back(record);
    }
  }
  const std::vector<TraceRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  bool has_curvature_columns() const { return curvature_columns_; }

  void write_csv(std::ostream& os) const;
  void write_jsonl(std::ostream& os) const;
  std::string to_csv() const;
  std::string to_jsonl() const;

 private:
  bool curvature_columns_;
  std::vector<TraceRecord> records_;
};

}  // namespace bmadmm

#endif  // BMADMM_TRACE_H_
