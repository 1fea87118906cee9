#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cvcsp/core.hpp"
#include "cvcsp/mmorph.hpp"

namespace cvcsp {

/// Per-variable domain sets and symmetric pairwise relations, stored as
/// bitmasks (|D| <= 8, so a relation fits one 64-bit word with bit a*d+b
/// for the ordered pair (a,b)).
class Microstructure {
 public:
  Microstructure() = default;
  Microstructure(int num_vars, int domain_size);

  int num_vars() const { return static_cast<int>(domains_.size()); }
  int domain_size() const { return dsize_; }

  std::uint32_t domain(int i) const { return domains_[i]; }
  void set_domain(int i, std::uint32_t mask) { domains_[i] = mask; }

  /// Relation oriented as (label of i, label of j); i != j.
  std::uint64_t rel(int i, int j) const;
  void set_rel(int i, int j, std::uint64_t bits);
  void intersect_rel(int i, int j, std::uint64_t bits);

  bool rel_contains(int i, int j, int a, int b) const {
    return (rel(i, j) >> (a * dsize_ + b)) & 1u;
  }

  /// Image of a label set through an oriented relation.
  std::uint32_t image(int i, int j, std::uint32_t labels_of_i) const;

  std::uint64_t full_rel(std::uint32_t di, std::uint32_t dj) const;
  std::uint64_t transpose(std::uint64_t bits) const;

  bool operator==(const Microstructure&) const = default;

 private:
  int dsize_ = 0;
  std::vector<std::uint32_t> domains_;
  std::vector<std::uint64_t> rels_;  // triangular storage for i < j
  std::size_t tri(int i, int j) const;
};

/// Projects every term's feasibility set to unary and pairwise relations.
/// Pairs of variables never sharing a scope get the full relation.
Microstructure build_microstructure(const Instance& instance);

enum class Strong3 { Consistent, Infeasible };

/// Arc + path consistency to a fixpoint, processed in ascending (i,j,k)
/// order. Infeasible as soon as a domain or relation empties.
Strong3 enforce_strong3(Microstructure& m);

/// Same fixpoint computed under a seeded random processing order; used to
/// exercise confluence.
Strong3 enforce_strong3_shuffled(Microstructure& m, std::uint64_t order_seed);

/// True iff dom f equals the join of its unary and pairwise projections.
bool check_decomposition(const CostFunction& f);

/// The pipeline's guard: mu must preserve dom f and the decomposition must
/// be exact. Throws StructuralError naming the offending check otherwise.
void assert_decomposable(const CostFunction& f, const TernaryOp& mu,
                         const std::string& name);

}  // namespace cvcsp
