#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvcsp/core.hpp"
#include "cvcsp/mmorph.hpp"

namespace cvcsp {

/// Total order of a variable's live labels induced by an acyclic join
/// tournament (a before b iff join(a,b) = b), or a witness 3-cycle.
struct TournamentOrder {
  std::vector<int> order;                 // labels, least first
  std::optional<std::array<int, 3>> cycle;
  bool total() const { return !cycle.has_value(); }
};

/// Requires the pair to be commutative and conservative on every pair of
/// live labels (throws StructuralError otherwise).
TournamentOrder tournament_order(const BinaryPair& pair,
                                 std::uint32_t domain_mask);

/// A pairwise table fails the lattice inequality under the chosen orders.
struct NotSubmodular : std::runtime_error {
  NotSubmodular(int term_index, std::vector<int> x_tuple,
                std::vector<int> y_tuple);
  int term;
  std::vector<int> x, y;  // the offending tuple pair, in scope order
};

/// Exact capacity/flow value: rational plus a signed count of infinity
/// units, ordered lexicographically with units dominant. Arc capacities are
/// non-negative under this order; an infinite extended cost is one unit.
struct FlowValue {
  detail::Rat fin{};
  long long units = 0;

  static FlowValue from_cost(const Cost& c);
  Cost to_cost() const;  // units > 0 -> infinity; requires fin >= 0 otherwise
  bool negative() const;
  bool zero() const { return units == 0 && fin.num == 0; }
  friend FlowValue operator+(const FlowValue& a, const FlowValue& b);
  friend FlowValue operator-(const FlowValue& a, const FlowValue& b);
  friend std::strong_ordering operator<=>(const FlowValue&, const FlowValue&);
  friend bool operator==(const FlowValue&, const FlowValue&) = default;
  std::string str() const;
};

/// Directed s-t network with exact capacities. Nodes 0 and 1 are the source
/// and sink. Max flow is shortest-augmenting-path with deterministic
/// adjacency order.
class FlowNetwork {
 public:
  FlowNetwork();
  int add_node();
  void add_arc(int from, int to, const FlowValue& capacity);

  int source() const { return 0; }
  int sink() const { return 1; }
  int num_nodes() const { return static_cast<int>(adjacency_.size()); }

  /// Runs max flow (idempotent) and returns its value.
  const FlowValue& max_flow();
  /// Source side of the canonical minimum cut; valid after max_flow.
  std::vector<bool> min_cut_side();
  std::uint64_t augmentations() const { return augmentations_; }

  /// Constant added to the cut value to recover the instance minimum.
  FlowValue offset;

  std::string dump() const;  // plain adjacency text, one arc per line

 private:
  struct Arc {
    int to;
    int rev;  // index of the reverse arc in adjacency_[to]
    FlowValue residual;
  };
  bool bfs_augment();
  std::vector<std::vector<Arc>> adjacency_;
  FlowValue flow_;
  bool solved_ = false;
  std::uint64_t augmentations_ = 0;
};

/// Threshold/chain encoding of an instance whose every term touches at most
/// two distinct variables. Capacity non-negativity is exactly the
/// second-difference submodularity test; violations raise NotSubmodular.
/// Returns the network plus the chain node ids per variable level.
struct MinCutModel {
  FlowNetwork network;
  std::vector<std::vector<int>> level_nodes;  // per variable, |order|-1 ids
};

MinCutModel build_mincut(const Instance& instance,
                         std::span<const TournamentOrder> orders,
                         std::span<const std::uint32_t> domain_masks);

struct Stage3Options {
  std::uint64_t brute_guard = 10'000'000;
  bool require_mincut = false;  // fail instead of falling back to brute force
};

struct Stage3Result {
  Assignment assignment;
  Cost cost;
  enum class Backend { MinCut, Brute } backend = Backend::MinCut;
  std::uint64_t augmentations = 0;
};

/// Dispatch: min-cut when every order is total and every term touches at
/// most two distinct variables, otherwise brute force over the live
/// domains under the guard.
Stage3Result solve_stage3(const Instance& instance,
                          std::span<const BinaryPair> per_var_pairs,
                          std::span<const std::uint32_t> domain_masks,
                          const Stage3Options& options = {});

/// Convenience overload: one pair and full domains for every variable.
Stage3Result solve_stage3(const Instance& instance, const BinaryPair& pair,
                          const Stage3Options& options = {});

}  // namespace cvcsp
