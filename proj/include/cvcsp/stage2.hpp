#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cvcsp/consistency.hpp"
#include "cvcsp/core.hpp"
#include "cvcsp/mmorph.hpp"

namespace cvcsp {

/// State threaded through the commutativity-growth loop: a frozen
/// strong-3-consistent microstructure, per-variable commutative sets M_i,
/// per-variable meet/join tables, and the frozen ternary tables.
struct Stage2State {
  Microstructure micro;
  std::vector<PairSet> m;             // per variable
  std::vector<BinaryPair> pairs;      // per variable
  std::vector<TernaryTriple> triples; // per variable, never rewritten

  /// Initializes every variable from the global witness, with M_i cut down
  /// to the pairs inside the variable's domain.
  static Stage2State from_witness(Microstructure micro, const Witness& w);

  /// Pairs of distinct in-domain labels of variable i not yet commutative.
  std::vector<std::pair<int, int>> mbar_pairs(int i) const;
};

/// One block computation: U and the closed A/B families found from the
/// seed, per the growth procedure executed with ascending scan order.
struct BlockResult {
  int k = -1;
  std::pair<int, int> seed{-1, -1};
  std::vector<int> u;                     // ascending
  std::vector<std::uint32_t> a_sets;      // indexed by variable, 0 off U
  std::vector<std::uint32_t> b_sets;
};

BlockResult find_blocks(const Stage2State& state, int k,
                        std::pair<int, int> seed);

struct Stage2Config {
  bool debug_checks = true;  // re-verify block invariants and the
                             // multimorphism sweep after every update
};

/// Which invariant failed, for error reporting.
enum class BlockClause { A, B, C, D };

/// Checks the four block invariants against the microstructure; returns the
/// first violated clause.
std::optional<BlockClause> check_block_invariants(const Stage2State& state,
                                                  const BlockResult& blocks);

/// Proposition-style cross-pair coherence of the current state: for
/// non-commutative {a,b} at i with supports (a,a'),(b,b') in rel(i,j),
/// either both cross pairs are present or both absent with {a',b'}
/// non-commutative at j.
bool check_cross_coherence(const Stage2State& state);

/// Grows M_i by all A_i x B_i pairs and rewrites meet/join so the A side is
/// the meet. Throws InternalError naming the violated clause when
/// debug_checks is on and an invariant fails.
void apply_update(Stage2State& state, const BlockResult& blocks,
                  const Stage2Config& config = {},
                  const Instance* debug_instance = nullptr);

struct Stage2Trace {
  struct Step {
    int k;
    std::pair<int, int> seed;
    std::vector<int> u;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ab;  // per U member
  };
  std::vector<Step> steps;
};

/// Iterates seed selection, block computation and the update until every
/// M_i covers all in-domain pairs.
Stage2Trace run_stage2(Stage2State& state, const Instance* debug_instance,
                       const Stage2Config& config = {});

/// The binary inequality swept with per-variable operations over the
/// instance terms; nullopt when it holds everywhere.
std::optional<Violation> verify_instance_pair(const Instance& instance,
                                              const Stage2State& state);

}  // namespace cvcsp
