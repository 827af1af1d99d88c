#include "bmadmm/problem_io.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <system_error>
#include <utility>

#include <unistd.h>

#include "bmadmm/errors.h"

namespace bmadmm {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

long long parse_int(std::string_view tok, std::int64_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(line, "line " + std::to_string(line) + ": expected an integer, got '" +
                               std::string(tok) + "'");
  }
  return v;
}

double parse_double(std::string_view tok, std::int64_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError(line, "line " + std::to_string(line) + ": expected a number, got '" +
                               std::string(tok) + "'");
  }
  return v;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

}  // namespace

GraphInstance parse_gset(std::string_view text, std::string name) {
  GraphInstance g;
  g.name = std::move(name);
  std::map<std::pair<Index, Index>, double> merged;

  std::int64_t line_no = 0;
  bool have_header = false;
  long long expected = 0;
  long long seen = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!have_header) {
      if (tok.size() != 2) {
        throw ParseError(line_no, "line " + std::to_string(line_no) +
                                      ": header must be 'n m'");
      }
      const long long n = parse_int(tok[0], line_no);
      expected = parse_int(tok[1], line_no);
      if (n < 1 || expected < 0) {
        throw ParseError(line_no, "line " + std::to_string(line_no) +
                                      ": need n >= 1 and m >= 0");
      }
      g.n = static_cast<Index>(n);
      have_header = true;
    } else {
      if (tok.size() != 3) {
        throw ParseError(line_no, "line " + std::to_string(line_no) +
                                      ": edge lines must be 'i j w'");
      }
      const long long i = parse_int(tok[0], line_no);
      const long long j = parse_int(tok[1], line_no);
      const double w = parse_double(tok[2], line_no);
      if (i < 1 || j < 1 || i > g.n || j > g.n) {
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": vertex index out of range 1.." +
                                      std::to_string(g.n));
      }
      ++seen;
      if (seen > expected) {
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": more than " +
                                      std::to_string(expected) + " edge lines");
      }
      if (i == j) {
        ++g.self_loops_dropped;
        continue;
      }
      merged[{std::min<Index>(i, j), std::max<Index>(i, j)}] += w;
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(line_no, "empty input: missing 'n m' header");
  if (seen != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) + " edge lines, found " +
                                  std::to_string(seen));
  }
  for (const auto& [key, w] : merged) {
    if (w != 0.0) g.edges.push_back({key.first, key.second, w});
  }
  if (g.self_loops_dropped > 0) {
    spdlog::warn("{}: dropped {} self-loop(s)", g.name.empty() ? "graph" : g.name,
                 g.self_loops_dropped);
  }
  return g;
}

GraphInstance read_gset(const std::filesystem::path& path) {
  return parse_gset(read_file(path), path.stem().string());
}

std::string serialize_gset(const GraphInstance& graph) {
  std::ostringstream os;
  os.precision(17);
  os << graph.n << ' ' << graph.edges.size() << '\n';
  for (const Edge& e : graph.edges) os << e.i << ' ' << e.j << ' ' << e.w << '\n';
  return os.str();
}

SparseSymMatrix maxcut_cost(const GraphInstance& graph) {
  if (graph.n < 1) throw InvalidArgument("graph needs at least one vertex");
  std::vector<double> degree(static_cast<std::size_t>(graph.n), 0.0);
  std::vector<Triplet> entries;
  entries.reserve(graph.edges.size() + static_cast<std::size_t>(graph.n));
  for (const Edge& e : graph.edges) {
    if (e.i < 1 || e.j < 1 || e.i > graph.n || e.j > graph.n || e.i == e.j) {
      throw InvalidArgument("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                            ") is not a valid non-loop edge");
    }
    degree[static_cast<std::size_t>(e.i - 1)] += e.w;
    degree[static_cast<std::size_t>(e.j - 1)] += e.w;
    entries.push_back({e.i - 1, e.j - 1, 0.25 * e.w});
  }
  for (Index v = 0; v < graph.n; ++v) {
    entries.push_back({v, v, -0.25 * degree[static_cast<std::size_t>(v)]});
  }
  return SparseSymMatrix::from_entries(graph.n, entries);
}

So3Instance generate_so3(Index q, double s, std::uint64_t seed) {
  if (q < 2) throw InvalidArgument("generate_so3 needs q >= 2");
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("sparsity s must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);

  So3Instance out;
  out.q = q;
  std::vector<Triplet> entries;
  for (Index a = 0; a < q; ++a) {
    for (Index b = a + 1; b < q; ++b) {
      if (!(coin(rng) < s)) continue;
      ++out.populated_pairs;
      for (Index r = 0; r < 3; ++r) {
        for (Index c = 0; c < 3; ++c) entries.push_back({3 * a + r, 3 * b + c, entry(rng)});
      }
    }
  }
  out.cost = SparseSymMatrix::from_entries(3 * q, entries);
  return out;
}

std::string encode_problem_binary(const SparseSymMatrix& cost, Index d) {
  if (d < 1 || cost.dim() % d != 0) {
    throw InvalidArgument("block size d must divide n");
  }
  std::string out;
  out.reserve(24 + 8 * (cost.dim() + 1) + 16 * cost.nnz());
  put_u64(out, static_cast<std::uint64_t>(cost.dim()));
  put_u64(out, static_cast<std::uint64_t>(cost.nnz()));
  put_u64(out, static_cast<std::uint64_t>(d));
  for (Index v : cost.row_ptr()) put_u64(out, static_cast<std::uint64_t>(v));
  for (Index v : cost.col_idx()) put_u64(out, static_cast<std::uint64_t>(v));
  for (double v : cost.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

BinaryProblem decode_problem_binary(std::string_view bytes) {
  if (bytes.size() < 24) throw ParseError(0, "binary problem: truncated header");
  const std::uint64_t n = get_u64(bytes, 0);
  const std::uint64_t nnz = get_u64(bytes, 8);
  const std::uint64_t d = get_u64(bytes, 16);
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
  if (n < 1 || n > kLimit || nnz > kLimit || d < 1 || n % d != 0) {
    throw ParseError(0, "binary problem: implausible header (n=" + std::to_string(n) +
                            ", nnz=" + std::to_string(nnz) + ", d=" + std::to_string(d) + ")");
  }
  const std::uint64_t want = 24 + 8 * (n + 1) + 16 * nnz;
  if (bytes.size() != want) {
    throw ParseError(0, "binary problem: expected " + std::to_string(want) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  std::vector<Index> row_ptr(n + 1);
  std::vector<Index> col_idx(nnz);
  std::vector<double> values(nnz);
  std::size_t off = 24;
  for (auto& v : row_ptr) { v = static_cast<Index>(get_u64(bytes, off)); off += 8; }
  for (auto& v : col_idx) { v = static_cast<Index>(get_u64(bytes, off)); off += 8; }
  for (auto& v : values) { v = std::bit_cast<double>(get_u64(bytes, off)); off += 8; }
  try {
    return {SparseSymMatrix::from_csr(static_cast<Index>(n), std::move(row_ptr),
                                      std::move(col_idx), std::move(values)),
            static_cast<Index>(d)};
  } catch (const Error& e) {
    throw ParseError(0, std::string("binary problem: ") + e.what());
  }
}

void write_problem_binary(const std::filesystem::path& path, const SparseSymMatrix& cost,
                          Index d) {
  write_file_atomic(path, encode_problem_binary(cost, d));
}

BinaryProblem read_problem_binary(const std::filesystem::path& path) {
  return decode_problem_binary(read_file(path));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bmadmm
