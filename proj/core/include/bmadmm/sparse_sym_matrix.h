#ifndef BMADMM_SPARSE_SYM_MATRIX_H_
#define BMADMM_SPARSE_SYM_MATRIX_H_

#include <Eigen/Core>

#include <span>
#include <vector>

namespace bmadmm {

using Index = Eigen::Index;

// Dense n x r factor stored row-major so that every row (or d x r block) is
// contiguous. Holds sigma, sigma_tilde, y, gamma and tangent directions alike.
using FactorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Symmetric matrix in CSR layout with both triangles materialized.
//
// Invariants: n >= 1; row_ptr has n + 1 monotone entries; column indices are
// strictly increasing inside each row; every stored (i, j, v) has a stored
// mirror (j, i, v) with the bit-identical value. Immutable after
// construction.
class SparseSymMatrix {
 public:
  // 1 x 1 zero matrix.
  SparseSymMatrix() : n_(1), row_ptr_{0, 0} {}

  // n x n zero matrix (empty pattern).
  static SparseSymMatrix zero(Index n);
  static SparseSymMatrix identity(Index n);

  // Each entry (i, j, v) with i != j contributes v to both (i, j) and (j, i);
  // diagonal entries contribute once. Duplicates are summed and exact zeros
  // after summation are dropped.
  static SparseSymMatrix from_entries(Index n, std::span<const Triplet> entries);

  // Requires an exactly symmetric dense matrix.
  static SparseSymMatrix from_dense(const Eigen::MatrixXd& dense);

  // Adopts raw CSR arrays after validating every invariant above.
  static SparseSymMatrix from_csr(Index n, std::vector<Index> row_ptr,
                                  std::vector<Index> col_idx,
                                  std::vector<double> values);

  Index dim() const { return n_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  SparseSymMatrix scaled(double factor) const;

  // Entries with row <= col, in row-major order.
  std::vector<Triplet> upper_entries() const;

  Eigen::MatrixXd to_dense() const;

 private:
  SparseSymMatrix(Index n, std::vector<Index> row_ptr,
                  std::vector<Index> col_idx, std::vector<double> values);
  void validate() const;

  Index n_ = 0;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

// out = C * V. Each output row accumulates in ascending column order, so the
// result is bit-reproducible for a given build.
void spmm(const SparseSymMatrix& C, const FactorMatrix& V, FactorMatrix& out);
FactorMatrix spmm(const SparseSymMatrix& C, const FactorMatrix& V);

// y = C * x for a single vector.
void spmv(const SparseSymMatrix& C, const Eigen::VectorXd& x,
          Eigen::VectorXd& y);

// Maximum absolute row sum. Equals the 1-norm for symmetric matrices.
double inf_norm(const SparseSymMatrix& C);

}  // namespace bmadmm

#endif  // BMADMM_SPARSE_SYM_MATRIX_H_
