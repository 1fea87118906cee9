#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cvcsp/core.hpp"
#include "cvcsp/mmorph.hpp"

namespace cvcsp {

/// Bounded closure of the binary functions of a language under the gadget
/// constructions used for edge detection. Sound but incomplete; truncated is
/// set when the size cap stopped the closure early.
struct ClosureResult {
  std::vector<CostFunction> functions;
  bool truncated = false;
};

ClosureResult close_binary(const Language& language, int depth = 2,
                           std::size_t size_cap = 10'000);

/// A graph on ordered label pairs (a,b), a != b. Node index = a*d + b.
/// Every edge carries a re-verifiable witness: a binary function from the
/// pool together with the oriented node pair and the four certifying values
/// f(a,a'), f(b,b'), f(a,b'), f(b,a').
struct GammaGraph {
  struct EdgeWitness {
    int fn;                   // index into witness_pool
    std::pair<int, int> p, q; // orientation: p supplies first arguments
    Cost faa, fbb, fab, fba;
  };
  struct Edge {
    bool soft;
    EdgeWitness witness;
  };

  int domain_size = 0;
  std::vector<CostFunction> witness_pool;
  std::map<std::pair<int, int>, Edge> edges;  // key: unordered {min, max}

  int node(int a, int b) const { return a * domain_size + b; }
  std::pair<int, int> labels(int node) const {
    return {node / domain_size, node % domain_size};
  }
  int bar(int node) const {
    auto [a, b] = labels(node);
    return this->node(b, a);
  }
  bool has_edge(int p, int q) const {
    return edges.count({std::min(p, q), std::max(p, q)}) != 0;
  }
  const Edge* edge(int p, int q) const {
    auto it = edges.find({std::min(p, q), std::max(p, q)});
    return it == edges.end() ? nullptr : &it->second;
  }
  bool has_soft_self_loop() const;
  /// Strict rearrangement inequality and dom conditions of the stored
  /// witness, re-evaluated from the pool.
  bool witness_verifies(const Edge& e) const;
};

/// Scans every function for the strict rearrangement inequality and closes
/// the edge set under the bar-symmetry and transitivity rules, constructing
/// a composed witness function for each derived edge.
GammaGraph detect_and_saturate(std::span<const CostFunction> fns,
                               int domain_size);

/// NP-hardness indicator: some node has a soft self-loop.
struct SoftSelfLoop {
  int node;
};

/// The self-loop-free part of the graph is not 2-colorable, which cannot
/// happen for a graph derived from an actual language.
struct OddCycle {
  std::vector<int> cycle;  // node sequence of odd length
};

struct StpWitness {
  BinaryPair pair;
  PairSet m;
  std::vector<int> sigma;  // +1/-1 per node in M, 0 elsewhere
};

using StpResult = std::variant<StpWitness, SoftSelfLoop, OddCycle>;

/// Builds the pair that is commutative on self-loop-free pairs (oriented by
/// a 2-coloring) and the first projection elsewhere.
StpResult stp_from_graph(const GammaGraph& g);

}  // namespace cvcsp
