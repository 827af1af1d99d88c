#include "bmadmm/sparse_sym_matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bmadmm/errors.h"

namespace bmadmm {

SparseSymMatrix::SparseSymMatrix(Index n, std::vector<Index> row_ptr,
                                 std::vector<Index> col_idx,
                                 std::vector<double> values)
    : n_(n),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {}

SparseSymMatrix SparseSymMatrix::zero(Index n) {
  if (n < 1) throw InvalidArgument("matrix dimension must be >= 1");
  return SparseSymMatrix(n, std::vector<Index>(n + 1, 0), {}, {});
}

SparseSymMatrix SparseSymMatrix::identity(Index n) {
  std::vector<Triplet> diag;
  diag.reserve(n);
  for (Index i = 0; i < n; ++i) diag.push_back({i, i, 1.0});
  return from_entries(n, diag);
}

SparseSymMatrix SparseSymMatrix::from_entries(Index n,
                                              std::span<const Triplet> entries) {
  if (n < 1) throw InvalidArgument("matrix dimension must be >= 1");

  std::vector<Triplet> all;
  all.reserve(2 * entries.size());
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
      throw DimensionError("entry (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ") outside " +
                           std::to_string(n) + " x " + std::to_string(n));
    }
    if (!std::isfinite(t.value)) throw InvalidArgument("non-finite entry");
    // Canonical upper-triangle form so both mirrors sum identically.
    all.push_back({std::min(t.row, t.col), std::max(t.row, t.col), t.value});
  }
  std::sort(all.begin(), all.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Triplet> upper;
  for (const Triplet& t : all) {
    if (!upper.empty() && upper.back().row == t.row && upper.back().col == t.col) {
      upper.back().value += t.value;
    } else {
      upper.push_back(t);
    }
  }
  std::erase_if(upper, [](const Triplet& t) { return t.value == 0.0; });

  std::vector<Index> counts(n, 0);
  for (const Triplet& t : upper) {
    ++counts[t.row];
    if (t.row != t.col) ++counts[t.col];
  }
  std::vector<Index> row_ptr(n + 1, 0);
  for (Index i = 0; i < n; ++i) row_ptr[i + 1] = row_ptr[i] + counts[i];

  std::vector<Index> col_idx(row_ptr[n]);
  std::vector<double> values(row_ptr[n]);
  std::vector<Index> fill(row_ptr.begin(), row_ptr.end() - 1);
  // Two passes: all mirrored (lower) entries first, then the upper ones. Both
  // passes visit columns in ascending order and lower columns are < i <=
  // upper columns, so every row comes out sorted.
  for (const Triplet& t : upper) {
    if (t.row != t.col) {
      col_idx[fill[t.col]] = t.row;
      values[fill[t.col]++] = t.value;
    }
  }
  for (const Triplet& t : upper) {
    col_idx[fill[t.row]] = t.col;
    values[fill[t.row]++] = t.value;
  }
  SparseSymMatrix m(n, std::move(row_ptr), std::move(col_idx), std::move(values));
  m.validate();
  return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) {
    throw DimensionError("dense matrix is " + std::to_string(dense.rows()) +
                         " x " + std::to_string(dense.cols()) +
                         ", expected square");
  }
  const Index n = dense.rows();
  std::vector<Triplet> entries;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      if (dense(i, j) != dense(j, i)) {
        throw InvalidArgument("dense matrix is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (dense(i, j) != 0.0) entries.push_back({i, j, dense(i, j)});
    }
  }
  return from_entries(n, entries);
}

SparseSymMatrix SparseSymMatrix::from_csr(Index n, std::vector<Index> row_ptr,
                                          std::vector<Index> col_idx,
                                          std::vector<double> values) {
  if (n < 1) throw InvalidArgument("matrix dimension must be >= 1");
  SparseSymMatrix m(n, std::move(row_ptr), std::move(col_idx), std::move(values));
  m.validate();
  return m;
}

void SparseSymMatrix::validate() const {
  if (static_cast<Index>(row_ptr_.size()) != n_ + 1 || row_ptr_.front() != 0) {
    throw InvalidArgument("row_ptr must have n + 1 entries starting at 0");
  }
  if (col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<Index>(values_.size())) {
    throw InvalidArgument("CSR array lengths disagree");
  }
  for (Index i = 0; i < n_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) {
      throw InvalidArgument("row_ptr not monotone at row " + std::to_string(i));
    }
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index j = col_idx_[p];
      if (j < 0 || j >= n_) {
        throw InvalidArgument("column index out of range in row " +
                              std::to_string(i));
      }
      if (p > row_ptr_[i] && col_idx_[p - 1] >= j) {
        throw InvalidArgument("columns not strictly increasing in row " +
                              std::to_string(i));
      }
      if (!std::isfinite(values_[p])) throw InvalidArgument("non-finite entry");
    }
  }
  // Mirror check by binary search in the transposed row.
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const Index j = col_idx_[p];
      const auto first = col_idx_.begin() + row_ptr_[j];
      const auto last = col_idx_.begin() + row_ptr_[j + 1];
      const auto it = std::lower_bound(first, last, i);
      if (it == last || *it != i ||
          values_[static_cast<std::size_t>(it - col_idx_.begin())] != values_[p]) {
        throw InvalidArgument("matrix is not symmetric at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
}

SparseSymMatrix SparseSymMatrix::scaled(double factor) const {
  std::vector<double> values = values_;
  for (double& v : values) v *= factor;
  if (factor == 0.0) return zero(n_);
  return SparseSymMatrix(n_, row_ptr_, col_idx_, std::move(values));
}

std::vector<Triplet> SparseSymMatrix::upper_entries() const {
  std::vector<Triplet> out;
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_idx_[p] >= i) out.push_back({i, col_idx_[p], values_[p]});
    }
  }
  return out;
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i) {
    for (Index p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      dense(i, col_idx_[p]) = values_[p];
    }
  }
  return dense;
}

void spmm(const SparseSymMatrix& C, const FactorMatrix& V, FactorMatrix& out) {
  if (V.rows() != C.dim()) {
    throw DimensionError("spmm: matrix is " + std::to_string(C.dim()) + " x " +
                         std::to_string(C.dim()) + " but factor has " +
                         std::to_string(V.rows()) + " rows");
  }
  out.resize(V.rows(), V.cols());
  const auto row_ptr = C.row_ptr();
  const auto col_idx = C.col_idx();
  const auto values = C.values();
  for (Index i = 0; i < C.dim(); ++i) {
    auto row = out.row(i);
    row.setZero();
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      row.noalias() += values[p] * V.row(col_idx[p]);
    }
  }
}

FactorMatrix spmm(const SparseSymMatrix& C, const FactorMatrix& V) {
  FactorMatrix out;
  spmm(C, V, out);
  return out;
}

void spmv(const SparseSymMatrix& C, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  if (x.size() != C.dim()) {
    throw DimensionError("spmv: matrix dimension " + std::to_string(C.dim()) +
                         " vs vector length " + std::to_string(x.size()));
  }
  y.resize(C.dim());
  const auto row_ptr = C.row_ptr();
  const auto col_idx = C.col_idx();
  const auto values = C.values();
  for (Index i = 0; i < C.dim(); ++i) {
    double acc = 0.0;
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) acc += values[p] * x[col_idx[p]];
    y[i] = acc;
  }
}

double inf_norm(const SparseSymMatrix& C) {
  const auto row_ptr = C.row_ptr();
  const auto values = C.values();
  double best = 0.0;
  for (Index i = 0; i < C.dim(); ++i) {
    double sum = 0.0;
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) sum += std::abs(values[p]);
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace bmadmm
