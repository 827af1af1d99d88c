#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <unistd.h>

#include "bmadmm/errors.h"
#include "bmadmm/problem_io.h"
#include "test_support.h"

namespace bmadmm {
namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("bmadmm_io_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(ParseGsetTest, MinimalFile) {
  const GraphInstance g = parse_gset("2 1\n1 2 1\n");
  EXPECT_EQ(g.n, 2);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].i, 1);
  EXPECT_EQ(g.edges[0].j, 2);
  EXPECT_EQ(g.edges[0].w, 1.0);
}

TEST(ParseGsetTest, Triangle) {
  const GraphInstance g = parse_gset("3 3\n1 2 1\n2 3 1\n1 3 1\n");
  ASSERT_EQ(g.edges.size(), 3u);
  EXPECT_EQ(g.edges[0].i, 1);
  EXPECT_EQ(g.edges[0].j, 2);
  EXPECT_EQ(g.edges[1].i, 1);
  EXPECT_EQ(g.edges[1].j, 3);
  EXPECT_EQ(g.edges[2].i, 2);
  EXPECT_EQ(g.edges[2].j, 3);
}

TEST(ParseGsetTest, SelfLoopDropped) {
  const GraphInstance g = parse_gset("2 2\n1 1 5\n1 2 1\n");
  EXPECT_EQ(g.self_loops_dropped, 1);
  EXPECT_EQ(g.edges.size(), 1u);
}

TEST(ParseGsetTest, ParallelEdgesSummedAndOriented) {
  const GraphInstance g = parse_gset("3 3\n2 1 1\n1 2 2.5\n3 2 -1\n");
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0].w, 3.5);
  EXPECT_EQ(g.edges[1].i, 2);
  EXPECT_EQ(g.edges[1].j, 3);
}

TEST(ParseGsetTest, BlankLinesIgnored) {
  EXPECT_EQ(parse_gset("\n2 1\n\n1 2 1\n\n").edges.size(), 1u);
}

TEST(ParseGsetTest, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::int64_t {
    try {
      parse_gset(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("2 1\n1 x 1\n"), 2);
  EXPECT_EQ(line_of("2 2\n1 2 1\n1 3 1\n"), 3);
  EXPECT_EQ(line_of("2 1\n0 2 1\n"), 2);
  EXPECT_EQ(line_of("two 1\n"), 1);
  EXPECT_EQ(line_of("2 1\n1 2 1 9\n"), 2);
  EXPECT_GE(line_of("3 2\n1 2 1\n"), 1);
  EXPECT_GE(line_of("2 1\n1 2 1\n1 2 1\n"), 1);
}

TEST(ParseGsetTest, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GraphInstance g = testing::random_graph(30, 0.2, seed);
    for (Edge& e : g.edges) e.w = 0.1 + static_cast<double>(e.i * 7 % 13) / 3.0;
    const GraphInstance a = parse_gset(serialize_gset(g));
    const GraphInstance b = parse_gset(serialize_gset(a));
    ASSERT_EQ(a.edges.size(), b.edges.size());
    EXPECT_EQ(serialize_gset(a), serialize_gset(b));
    for (std::size_t k = 0; k < a.edges.size(); ++k) {
      EXPECT_EQ(a.edges[k].w, g.edges[k].w);
      EXPECT_EQ(a.edges[k].i, b.edges[k].i);
    }
  }
}

TEST(ReadGsetTest, DataFiles) {
  const std::filesystem::path dir(BMADMM_DATA_DIR);
  EXPECT_EQ(read_gset(dir / "edge.txt").n, 2);
  EXPECT_EQ(read_gset(dir / "triangle.txt").edges.size(), 3u);
  EXPECT_EQ(read_gset(dir / "cycle4.txt").n, 4);
  EXPECT_THROW(read_gset(dir / "missing.txt"), Error);
}

TEST(MaxCutCostTest, SingleEdge) {
  const SparseSymMatrix C = maxcut_cost(parse_gset("2 1\n1 2 1\n"));
  Eigen::MatrixXd expect(2, 2);
  expect << -0.25, 0.25, 0.25, -0.25;
  EXPECT_EQ(C.to_dense(), expect);
  // x = (1, -1): cut 1 = -x^T C x.
  const Eigen::Vector2d x(1, -1);
  EXPECT_EQ(-x.dot(expect * x), 1.0);
}

TEST(MaxCutCostTest, LaplacianRowsSumToZero) {
  GraphInstance g = testing::random_graph(50, 0.2, 8);
  for (Edge& e : g.edges) e.w = 0.5 + static_cast<double>((e.i + e.j) % 5);
  const Eigen::MatrixXd L = -4.0 * maxcut_cost(g).to_dense();
  for (Index i = 0; i < 50; ++i) {
    EXPECT_LE(std::abs(L.row(i).sum()), 1e-12 * std::max(1.0, L(i, i)));
  }
}

TEST(MaxCutCostTest, CutIdentity) {
  const GraphInstance g = testing::random_graph(10, 0.5, 2);
  const Eigen::MatrixXd C = maxcut_cost(g).to_dense();
  Eigen::VectorXd x(10);
  for (Index i = 0; i < 10; ++i) x[i] = (i % 3 == 0) ? 1.0 : -1.0;
  double cut = 0.0;
  for (const Edge& e : g.edges) cut += x[e.i - 1] != x[e.j - 1] ? e.w : 0.0;
  EXPECT_NEAR(-x.dot(C * x), cut, 1e-12);
}

TEST(GenerateSo3Test, SymmetricBlocks) {
  const So3Instance inst = generate_so3(20, 0.3, 4);
  EXPECT_EQ(inst.cost.dim(), 60);
  const Eigen::MatrixXd d = inst.cost.to_dense();
  EXPECT_EQ(d, d.transpose());
  for (Index b = 0; b < 20; ++b) EXPECT_TRUE(d.block(3 * b, 3 * b, 3, 3).isZero(0.0));
  Index pairs = 0;
  for (Index i = 0; i < 20; ++i) {
    for (Index j = i + 1; j < 20; ++j) {
      if (!d.block(3 * i, 3 * j, 3, 3).isZero(0.0)) ++pairs;
    }
  }
  EXPECT_EQ(pairs, inst.populated_pairs);
  EXPECT_LE(d.cwiseAbs().maxCoeff(), 1.0);
}

TEST(GenerateSo3Test, PairCountMatchesProbability) {
  const Index q = 200;
  const double s = 0.05;
  const So3Instance inst = generate_so3(q, s, 9);
  const double pairs = static_cast<double>(q * (q - 1) / 2);
  const double mean = pairs * s;
  const double sd = std::sqrt(pairs * s * (1 - s));
  EXPECT_LE(std::abs(static_cast<double>(inst.populated_pairs) - mean), 5 * sd);
}

TEST(GenerateSo3Test, DeterministicAndValidated) {
  EXPECT_EQ(generate_so3(10, 0.4, 2).cost.to_dense(), generate_so3(10, 0.4, 2).cost.to_dense());
  EXPECT_THROW(generate_so3(1, 0.5, 0), InvalidArgument);
  EXPECT_THROW(generate_so3(5, 1.5, 0), InvalidArgument);
  EXPECT_THROW(generate_so3(5, -0.1, 0), InvalidArgument);
}

TEST(BinaryFormatTest, RoundTrip) {
  const So3Instance inst = generate_so3(15, 0.4, 6);
  const std::string bytes = encode_problem_binary(inst.cost, 3);
  const std::size_t n = 45, nnz = static_cast<std::size_t>(inst.cost.nnz());
  EXPECT_EQ(bytes.size(), 8 * (3 + (n + 1) + nnz) + 8 * nnz);
  const BinaryProblem back = decode_problem_binary(bytes);
  EXPECT_EQ(back.d, 3);
  EXPECT_EQ(back.cost.to_dense(), inst.cost.to_dense());
}

TEST(BinaryFormatTest, LittleEndianHeader) {
  const std::string bytes = encode_problem_binary(testing::edge_matrix(), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 2);
  for (int k = 1; k < 8; ++k) EXPECT_EQ(bytes[static_cast<std::size_t>(k)], 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 1);
}

TEST(BinaryFormatTest, RejectsCorruptInput) {
  const std::string bytes = encode_problem_binary(testing::edge_matrix(), 1);
  EXPECT_THROW(decode_problem_binary(bytes.substr(0, bytes.size() - 1)), Error);
  EXPECT_THROW(decode_problem_binary(bytes + "x"), Error);
  EXPECT_THROW(decode_problem_binary(""), Error);
  std::string bad_d = bytes;
  bad_d[16] = 3;
  EXPECT_THROW(decode_problem_binary(bad_d), Error);
}

TEST(BinaryFormatTest, FileRoundTrip) {
  const auto path = scratch("p.bin");
  const SparseSymMatrix C = testing::random_symmetric(30, 0.2, 1);
  write_problem_binary(path, C, 1);
  EXPECT_EQ(read_problem_binary(path).cost.to_dense(), C.to_dense());
}

TEST(WriteFileAtomicTest, ReplacesContentsWithoutLeftovers) {
  const auto path = scratch("atomic.txt");
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::set<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    names.insert(e.path().filename().string());
  }
  for (const std::string& name : names) EXPECT_EQ(name.find(".tmp"), std::string::npos) << name;
}

}  // namespace
}  // namespace bmadmm
