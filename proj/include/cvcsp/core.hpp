#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvcsp/cost.hpp"

namespace cvcsp {

/// Ordered set of labels with unique display names. Labels are represented
/// as indices 0..size()-1 everywhere else.
class Domain {
 public:
  Domain() = default;
  explicit Domain(std::vector<std::string> names);
  static Domain of_size(int n);  // names "0", "1", ...

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int label) const;
  std::optional<int> find(std::string_view name) const;

  bool operator==(const Domain&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Total table D^m -> Cost. Dense storage for arity <= 3 and |D| <= 8,
/// a sparse map with an explicit default otherwise (the algorithms walk
/// all of dom f, which stays small in the sparse regime).
class CostFunction {
 public:
  CostFunction(int arity, int domain_size, const Cost& fill = Cost());

  int arity() const { return arity_; }
  int domain_size() const { return dsize_; }
  std::uint64_t tuple_count() const { return count_; }

  Cost at(std::span<const int> args) const { return at_index(index_of(args)); }
  Cost at_index(std::uint64_t index) const;
  void set(std::span<const int> args, const Cost& value) {
    set_index(index_of(args), value);
  }
  void set_index(std::uint64_t index, const Cost& value);

  bool in_dom(std::span<const int> args) const { return at(args).finite(); }
  bool crisp() const;
  bool finite_valued() const;

  /// Big-endian mixed radix: args[0] is the most significant digit, so
  /// index order is lexicographic tuple order.
  std::uint64_t index_of(std::span<const int> args) const;
  void decode(std::uint64_t index, std::span<int> out) const;

  bool operator==(const CostFunction& other) const;

 private:
  int arity_;
  int dsize_;
  std::uint64_t count_;
  bool dense_;
  std::vector<Cost> table_;                  // dense mode
  Cost default_;                             // sparse mode
  std::map<std::uint64_t, Cost> sparse_;     // sparse mode, entries != default_
};

/// A named set of cost functions over one domain. The conservative flag
/// states that the language semantically includes every {0,1}-valued unary
/// function; those are never materialized.
class Language {
 public:
  explicit Language(Domain domain, bool conservative = true);

  void add(std::string name, CostFunction fn);

  const Domain& domain() const { return domain_; }
  bool conservative() const { return conservative_; }
  int size() const { return static_cast<int>(fns_.size()); }
  const std::string& name(int i) const { return fns_[i].first; }
  const CostFunction& function(int i) const { return fns_[i].second; }
  int index_of(std::string_view name) const;  // -1 when absent
  const CostFunction* find(std::string_view name) const;

 private:
  Domain domain_;
  bool conservative_;
  std::vector<std::pair<std::string, CostFunction>> fns_;
};

struct Term {
  int function;            // index into the language
  std::vector<int> scope;  // variable indices, length == arity; repeats legal
};

using Assignment = std::vector<int>;

/// A sum of language terms over num_vars() variables. Immutable once built
/// apart from add_term during construction.
class Instance {
 public:
  Instance(std::shared_ptr<const Language> language, int num_vars);

  void add_term(std::string_view function_name, std::vector<int> scope);

  int num_vars() const { return num_vars_; }
  const Language& language() const { return *language_; }
  const std::shared_ptr<const Language>& language_ptr() const {
    return language_;
  }
  std::span<const Term> terms() const { return terms_; }

 private:
  std::shared_ptr<const Language> language_;
  int num_vars_;
  std::vector<Term> terms_;
};

/// Sum of term costs under saturating cost arithmetic.
Cost eval_instance(const Instance& instance, const Assignment& x);

struct SolveOutput {
  Assignment assignment;
  Cost cost;
};

/// Exhaustive oracle: lexicographically least assignment of minimum cost.
/// Throws BudgetError when |D|^|V| exceeds the guard.
SolveOutput brute_force_solve(const Instance& instance,
                              std::uint64_t guard = 10'000'000);

}  // namespace cvcsp
