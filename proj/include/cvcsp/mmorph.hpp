#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvcsp/core.hpp"

namespace cvcsp {

/// Symmetric set of unordered label pairs {a,b}, a != b.
class PairSet {
 public:
  PairSet() : dsize_(0) {}
  explicit PairSet(int domain_size);

  int domain_size() const { return dsize_; }
  bool contains(int a, int b) const;
  void insert(int a, int b);
  void erase(int a, int b);
  int size() const;
  PairSet complement() const;  // all pairs P minus this set
  std::vector<std::pair<int, int>> pairs() const;  // lexicographic, a < b

  bool operator==(const PairSet&) const = default;

 private:
  int index(int a, int b) const;
  int dsize_;
  std::vector<bool> bits_;
};

/// Two total binary tables meet/join over D. Shape obligations (conservative,
/// commutative exactly on M, projections on the complement) are validated by
/// check_shapes, not by construction.
class BinaryPair {
 public:
  BinaryPair() : dsize_(0) {}
  explicit BinaryPair(int domain_size);  // initialized to projections
  static BinaryPair min_max(int domain_size);
  static BinaryPair projections(int domain_size);

  int domain_size() const { return dsize_; }
  int meet(int a, int b) const { return meet_[a * dsize_ + b]; }
  int join(int a, int b) const { return join_[a * dsize_ + b]; }
  void set(int a, int b, int meet_value, int join_value);

  void apply(std::span<const int> x, std::span<const int> y,
             std::span<int> meet_out, std::span<int> join_out) const;

  /// Pairs {a,b} on which both tables are commutative.
  PairSet commutative_pairs() const;

  bool operator==(const BinaryPair&) const = default;

 private:
  int dsize_;
  std::vector<int> meet_, join_;
};

/// Three total ternary tables Mj1/Mj2/Mn3 over D.
class TernaryTriple {
 public:
  TernaryTriple() : dsize_(0) {}
  explicit TernaryTriple(int domain_size);  // initialized to the projections

  int domain_size() const { return dsize_; }
  int mj1(int a, int b, int c) const { return mj1_[idx(a, b, c)]; }
  int mj2(int a, int b, int c) const { return mj2_[idx(a, b, c)]; }
  int mn3(int a, int b, int c) const { return mn3_[idx(a, b, c)]; }
  void set(int a, int b, int c, int v1, int v2, int v3);

  void apply(std::span<const int> x, std::span<const int> y,
             std::span<const int> z, std::span<int> out1, std::span<int> out2,
             std::span<int> out3) const;

  bool operator==(const TernaryTriple&) const = default;

 private:
  std::size_t idx(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * dsize_ + b) * dsize_ + c;
  }
  int dsize_;
  std::vector<int> mj1_, mj2_, mn3_;
};

/// A single ternary operation table (used for the derived majority).
class TernaryOp {
 public:
  TernaryOp() : dsize_(0) {}
  explicit TernaryOp(int domain_size)
      : dsize_(domain_size),
        table_(static_cast<std::size_t>(domain_size) * domain_size *
               domain_size) {}

  int domain_size() const { return dsize_; }
  int operator()(int a, int b, int c) const {
    return table_[(static_cast<std::size_t>(a) * dsize_ + b) * dsize_ + c];
  }
  void set(int a, int b, int c, int v) {
    table_[(static_cast<std::size_t>(a) * dsize_ + b) * dsize_ + c] = v;
  }

 private:
  int dsize_;
  std::vector<int> table_;
};

/// True iff the pair and triple satisfy every shape invariant against M
/// (and its complement). Throws StructuralError on a table size mismatch.
bool check_shapes(const BinaryPair& pair, const TernaryTriple& triple,
                  const PairSet& m);

/// First counterexample to f(x meet y) + f(x join y) <= f(x) + f(y) or to the
/// ternary inequality, in deterministic scan order.
struct Violation {
  std::string function;
  int order;  // 2 = binary inequality, 3 = ternary inequality
  std::vector<int> x, y, z;  // z empty for the binary inequality
  Cost lhs, rhs;
};

std::optional<Violation> verify_pair(const Language& language,
                                     const BinaryPair& pair);
std::optional<Violation> verify_triple(const Language& language,
                                       const TernaryTriple& triple);
std::optional<Violation> verify_multimorphism(const Language& language,
                                              const BinaryPair& pair,
                                              const TernaryTriple& triple);

struct Witness {
  PairSet m;
  BinaryPair pair;
  TernaryTriple triple;
};

struct ClassifyBudget {
  std::uint64_t max_nodes = 50'000'000;
  std::chrono::milliseconds time_limit{120'000};
  int domain_cap = 4;
  bool reverse_order = false;  // alternate complete search order
};

struct Classification {
  enum class Verdict { Tractable, NPHard, Unknown };
  Verdict verdict = Verdict::Unknown;
  std::optional<Witness> witness;
  std::uint64_t nodes = 0;
};

/// Complete backtracking search for a complementary STP/MJN pair.
/// Deterministic; Unknown only on budget exhaustion.
Classification classify(const Language& language,
                        const ClassifyBudget& budget = {});

/// The MJN triple that is forced on mbar pairs and defaults to
/// (a meet b, a join b, c) elsewhere. Shape-valid for any shape-valid pair.
TernaryTriple canonical_mjn(const BinaryPair& pair, const PairSet& m);

/// Derived ternary operation acting as a majority on every two-element
/// triple.
TernaryOp build_majority(const BinaryPair& pair, const TernaryTriple& triple);

/// Componentwise dom-preservation of a ternary operation.
bool is_polymorphism(const TernaryOp& op, const CostFunction& f);

}  // namespace cvcsp
