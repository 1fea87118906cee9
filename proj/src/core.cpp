#include "cvcsp/core.hpp"

#include <algorithm>
#include <set>

namespace cvcsp {

Domain::Domain(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw StructuralError("domain must be non-empty");
  std::set<std::string_view> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second)
      throw StructuralError("duplicate domain label name: " + n);
}

Domain Domain::of_size(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return Domain(std::move(names));
}

const std::string& Domain::name(int label) const {
  if (label < 0 || label >= size())
    throw StructuralError("label id out of range");
  return names_[label];
}

std::optional<int> Domain::find(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

namespace {

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base)
      throw BudgetError("tuple space too large");
    r *= base;
  }
  return r;
}

}  // namespace

CostFunction::CostFunction(int arity, int domain_size, const Cost& fill)
    : arity_(arity), dsize_(domain_size) {
  if (arity_ < 1) throw StructuralError("arity must be positive");
  if (dsize_ < 1) throw StructuralError("domain size must be positive");
  count_ = pow_u64(dsize_, arity_);
  dense_ = arity_ <= 3 && dsize_ <= 8;
  if (dense_)
    table_.assign(count_, fill);
  else
    default_ = fill;
}

Cost CostFunction::at_index(std::uint64_t index) const {
  if (index >= count_) throw StructuralError("tuple index out of range");
  if (dense_) return table_[index];
  auto it = sparse_.find(index);
  return it == sparse_.end() ? default_ : it->second;
}

void CostFunction::set_index(std::uint64_t index, const Cost& value) {
  if (index >= count_) throw StructuralError("tuple index out of range");
  if (dense_) {
    table_[index] = value;
  } else if (value == default_) {
    sparse_.erase(index);
  } else {
    sparse_[index] = value;
  }
}

bool CostFunction::crisp() const {
  for (std::uint64_t i = 0; i < count_; ++i) {
    Cost c = at_index(i);
    if (c.finite() && !c.is_zero()) return false;
  }
  return true;
}

bool CostFunction::finite_valued() const {
  if (!dense_ && !default_.finite() && sparse_.size() < count_) return false;
  for (std::uint64_t i = 0; i < count_; ++i)
    if (!at_index(i).finite()) return false;
  return true;
}

std::uint64_t CostFunction::index_of(std::span<const int> args) const {
  if (static_cast<int>(args.size()) != arity_)
    throw StructuralError("argument count does not match arity");
  std::uint64_t idx = 0;
  for (int k = 0; k < arity_; ++k) {
    if (args[k] < 0 || args[k] >= dsize_)
      throw StructuralError("label out of domain range");
    idx = idx * dsize_ + static_cast<std::uint64_t>(args[k]);
  }
  return idx;
}

void CostFunction::decode(std::uint64_t index, std::span<int> out) const {
  for (int k = arity_ - 1; k >= 0; --k) {
    out[k] = static_cast<int>(index % dsize_);
    index /= dsize_;
  }
}

bool CostFunction::operator==(const CostFunction& other) const {
  if (arity_ != other.arity_ || dsize_ != other.dsize_) return false;
  for (std::uint64_t i = 0; i < count_; ++i)
    if (at_index(i) != other.at_index(i)) return false;
  return true;
}

Language::Language(Domain domain, bool conservative)
    : domain_(std::move(domain)), conservative_(conservative) {}

void Language::add(std::string name, CostFunction fn) {
  if (fn.domain_size() != domain_.size())
    throw StructuralError("function domain size does not match the language");
  if (index_of(name) >= 0)
    throw StructuralError("duplicate function name: " + name);
  fns_.emplace_back(std::move(name), std::move(fn));
}

int Language::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (fns_[i].first == name) return i;
  return -1;
}

const CostFunction* Language::find(std::string_view name) const {
  int i = index_of(name);
  return i < 0 ? nullptr : &fns_[i].second;
}

Instance::Instance(std::shared_ptr<const Language> language, int num_vars)
    : language_(std::move(language)), num_vars_(num_vars) {
  if (!language_) throw StructuralError("instance requires a language");
  if (num_vars_ < 0) throw StructuralError("negative variable count");
}

void Instance::add_term(std::string_view function_name,
                        std::vector<int> scope) {
  int fi = language_->index_of(function_name);
  if (fi < 0)
    throw StructuralError("unknown function in term: " +
                          std::string(function_name));
  const CostFunction& fn = language_->function(fi);
  if (static_cast<int>(scope.size()) != fn.arity())
    throw StructuralError("scope length does not match function arity");
  for (int v : scope)
    if (v < 0 || v >= num_vars_)
      throw StructuralError("scope variable index out of range");
  terms_.push_back(Term{fi, std::move(scope)});
}

Cost eval_instance(const Instance& instance, const Assignment& x) {
  if (static_cast<int>(x.size()) != instance.num_vars())
    throw StructuralError("assignment length does not match variable count");
  int d = instance.language().domain().size();
  for (int v : x)
    if (v < 0 || v >= d) throw StructuralError("assignment label out of range");
  Cost total;
  std::vector<int> args;
  for (const Term& t : instance.terms()) {
    args.clear();
    for (int v : t.scope) args.push_back(x[v]);
    total += instance.language().function(t.function).at(args);
    if (!total.finite()) return total;
  }
  return total;
}

SolveOutput brute_force_solve(const Instance& instance, std::uint64_t guard) {
  const int n = instance.num_vars();
  const int d = instance.language().domain().size();
  std::uint64_t space = 1;
  for (int i = 0; i < n; ++i) {
    if (space > guard / static_cast<std::uint64_t>(d))
      throw BudgetError("brute force guard exceeded");
    space *= static_cast<std::uint64_t>(d);
  }
  Assignment x(n, 0);
  Assignment best = x;
  Cost best_cost = eval_instance(instance, x);
  for (std::uint64_t it = 1; it < space; ++it) {
    // next assignment in lexicographic order
    for (int k = n - 1; k >= 0; --k) {
      if (++x[k] < d) break;
      x[k] = 0;
    }
    Cost c = eval_instance(instance, x);
    if (c < best_cost) {
      best_cost = c;
      best = x;
    }
  }
  return SolveOutput{std::move(best), best_cost};
}

}  // namespace cvcsp
