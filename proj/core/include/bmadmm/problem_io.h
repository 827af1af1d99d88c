#ifndef BMADMM_PROBLEM_IO_H_
#define BMADMM_PROBLEM_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bmadmm/manifold.h"
#include "bmadmm/sparse_sym_matrix.h"

namespace bmadmm {

// 1-based endpoints as they appear in the file.
struct Edge {
  Index i = 0;
  Index j = 0;
  double w = 0.0;
};

// Canonical form: i < j, sorted by (i, j), parallel edges merged by summing
// weights, self-loops removed.
struct GraphInstance {
  Index n = 0;
  std::vector<Edge> edges;
  std::string name;
  Index self_loops_dropped = 0;
};

// Gset layout: header "n m", then m lines "i j w". Blank lines are ignored.
// Throws ParseError with the 1-based line number on malformed input.
GraphInstance parse_gset(std::string_view text, std::string name = "");
GraphInstance read_gset(const std::filesystem::path& path);
std::string serialize_gset(const GraphInstance& graph);

// C = -(D - W) / 4, the max-cut relaxation cost: the cut of a +-1 vector x
// equals -x^T C x.
SparseSymMatrix maxcut_cost(const GraphInstance& graph);

struct So3Instance {
  SparseSymMatrix cost;
  Index q = 0;
  Index populated_pairs = 0;
};

// Block-sparse symmetric cost with 3 x 3 blocks: every pair i < j is
// populated with probability s by a block of i.i.d. uniform[-1, 1] entries,
// mirrored as its transpose at (j, i); diagonal blocks are zero.
So3Instance generate_so3(Index q, double s, std::uint64_t seed);

// Binary problem file, all fields little-endian:
//   u64 n, u64 nnz, u64 d, u64 row_ptr[n + 1], u64 col_idx[nnz], f64 values[nnz]
struct BinaryProblem {
  SparseSymMatrix cost;
  Index d = 1;
};
std::string encode_problem_binary(const SparseSymMatrix& cost, Index d);
BinaryProblem decode_problem_binary(std::string_view bytes);
void write_problem_binary(const std::filesystem::path& path, const SparseSymMatrix& cost,
                          Index d);
BinaryProblem read_problem_binary(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace bmadmm

#endif  // BMADMM_PROBLEM_IO_H_
