#include "casetest/edge_list.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "casetest/errors.hpp"

namespace casetest {

namespace {

bool parse_vertex_id(std::string_view token, long& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && out >= 0;
}

// Recognizes "n=<count>" inside a comment line, ignoring whitespace.
bool parse_order_header(std::string_view comment, long& out) {
  std::string compact;
  for (char c : comment) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  if (compact.rfind("n=", 0) != 0) return false;
  return parse_vertex_id(std::string_view(compact).substr(2), out);
}

}  // namespace

AdjacencyMatrix load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list: " + path);

  std::vector<std::pair<long, long>> edges;
  long declared_order = -1;
  long max_id = -1;
  long line_number = 0;
  bool saw_content = false;
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      long n = 0;
      if (parse_order_header(std::string_view(line).substr(hash + 1), n)) declared_order = n;
      line = line.substr(0, hash);
    }
    std::istringstream tokens(line);
    std::string a, b, extra;
    if (!(tokens >> a)) continue;  // blank line
    saw_content = true;
    if (!(tokens >> b) || (tokens >> extra)) {
      throw ParseError("expected exactly two vertex ids", line_number);
    }
    long u = 0, v = 0;
    if (!parse_vertex_id(a, u) || !parse_vertex_id(b, v)) {
      throw ParseError("vertex ids must be non-negative integers", line_number);
    }
    if (u == v) throw ParseError("self-loops are not allowed", line_number);
    edges.emplace_back(u, v);
    max_id = std::max(max_id, std::max(u, v));
  }
  if (!saw_content && declared_order < 0) throw ParseError("empty edge list: " + path);

  const long order = declared_order >= 0 ? declared_order : max_id + 1;
  if (order < 1) throw ParseError("edge list declares an empty graph: " + path);
  if (max_id >= order) {
    throw ParseError("vertex id " + std::to_string(max_id) +
                     " exceeds declared order n=" + std::to_string(order));
  }

  AdjacencyMatrix adj;
  adj.entries = Matrix::Zero(order, order);
  for (const auto& [u, v] : edges) {
    adj.entries(u, v) = 1.0;
    adj.entries(v, u) = 1.0;
  }
  return adj;
}

void save_edge_list(const AdjacencyMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write edge list: " + path);
  const int n = a.order();
  out << "# n=" << n << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (a.entries(i, j) != 0.0) out << i << " " << j << "\n";
    }
  }
  if (!out) throw ParseError("failed writing edge list: " + path);
}

}  // namespace casetest
