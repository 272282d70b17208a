// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "graphinformer/errors.hpp"
#include "graphinformer/graph.hpp"

namespace gi {
namespace {

constexpr std::size_t kMaxShortFormNodes = 62;
constexpr char kBias = 63;

}  // namespace

// Layout: byte 0 is n + 63; then the upper triangle x(i, j), i < j, is
// listed column by column (j = 1..n-1, i = 0..j-1), packed big-endian six
// bits per byte, zero padded, each byte offset by 63.
Graph parse_graph6(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.empty()) throw ParseError("empty graph6 line", 0);
  for (std::size_t i = 0; i < line.size(); ++i) {
    const auto c = static_cast<unsigned char>(line[i]);
    if (c < 63 || c > 126) throw ParseError("graph6 byte outside 63..126", i);
  }
  const auto first = static_cast<unsigned char>(line[0]);
  if (first == 126) throw ParseError("graph6 long form (n > 62) is not supported", 0);
  const std::size_t n = first - kBias;
  const std::size_t bits = n * (n - (n ? 1 : 0)) / 2;
  const std::size_t bytes = (bits + 5) / 6;
  if (line.size() < 1 + bytes) throw ParseError("truncated graph6 bit string", line.size());
  if (line.size() > 1 + bytes) throw ParseError("trailing bytes after graph6 bit string", 1 + bytes);

  Graph g(n);
  std::size_t k = 0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i, ++k) {
      const auto byte = static_cast<unsigned char>(line[1 + k / 6]) - kBias;
      if ((byte >> (5 - k % 6)) & 1) g.add_edge(i, j);
    }
  }
  // Padding bits must be zero for a canonical encoding.
  for (; k < bytes * 6; ++k) {
    const auto byte = static_cast<unsigned char>(line[1 + k / 6]) - kBias;
    if ((byte >> (5 - k % 6)) & 1) throw ParseError("non-zero graph6 padding bit", 1 + k / 6);
  }
  return g;
}

std::string encode_graph6(const Graph& g) {
  const std::size_t n = g.size();
  if (n > kMaxShortFormNodes) throw ConfigError("graph6 short form supports at most 62 nodes");
  const std::size_t bits = n * (n - (n ? 1 : 0)) / 2;
  std::string out(1 + (bits + 5) / 6, '\0');
  out[0] = static_cast<char>(n + kBias);
  std::size_t k = 0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i, ++k) {
      if (g.has_edge(i, j)) out[1 + k / 6] = static_cast<char>(out[1 + k / 6] | (1 << (5 - k % 6)));
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = static_cast<char>(out[i] + kBias);
  return out;
}

std::vector<Graph> read_graph6_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph6 file " + path.string());
  std::vector<Graph> graphs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind(">>graph6<<", 0) == 0) line.erase(0, 10);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      Graph g = parse_graph6(line);
      g.set_name(path.stem().string() + "-G" + std::to_string(graphs.size() + 1));
      graphs.push_back(std::move(g));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return graphs;
}

}  // namespace gi
