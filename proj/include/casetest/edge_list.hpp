#pragma once

#include <string>

#include "casetest/graph_models.hpp"

namespace casetest {

/// Reads an undirected edge list: lines of "u v" with 0-based vertex ids,
/// optional '#' comments. The vertex count is 1 + max id unless a comment of
/// the form "# n=<count>" overrides it. Duplicate edges are idempotent;
/// self-loops and malformed tokens raise ParseError with the line number.
AdjacencyMatrix load_edge_list(const std::string& path);

/// Writes a "# n=<count>" header and the strict upper-triangle edges in
/// ascending order, so a load round-trips bit for bit.
void save_edge_list(const AdjacencyMatrix& a, const std::string& path);

}  // namespace casetest
