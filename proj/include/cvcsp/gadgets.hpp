#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <utility>
#include <vector>

#include "cvcsp/core.hpp"

namespace cvcsp {

/// Undirected graph without self-loops or duplicate edges.
struct SimpleGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // (u, v) with u < v
};

SimpleGraph make_simple_graph(int n, std::vector<std::pair<int, int>> edges);

/// Edge-list text format: first line "n m", then m lines "u v" (0-based).
SimpleGraph parse_edge_list(std::istream& in);
std::string format_edge_list(const SimpleGraph& g);

/// Domain {a,b} with the single binary function
/// h(a,a) = h(b,b) = 1, h(a,b) = h(b,a) = 0.
std::shared_ptr<const Language> xor_language();

/// Maximum-independent-set encoding: per edge the binary function with
/// value 0 except infinite at (b,b), per vertex the unary (1, 0).
/// Minimum cost is |V(g)| minus the independence number.
Instance mis_instance(const SimpleGraph& g);

/// Seeded generator: uniform function choice, scope sampled without
/// replacement per term. Byte-for-byte repeatable for a fixed seed.
Instance random_instance(std::shared_ptr<const Language> language, int vars,
                         int terms, std::uint64_t seed);

}  // namespace cvcsp
