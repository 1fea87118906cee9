#include "cvcsp/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace cvcsp {

ClassificationError::ClassificationError(Classification::Verdict v)
    : std::runtime_error(v == Classification::Verdict::NPHard
                             ? "language classifies as NP-hard"
                             : "classification budget exhausted"),
      verdict(v) {}

std::optional<Classification> WitnessCache::lookup(
    const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void WitnessCache::store(const std::string& key, const Classification& c) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.emplace(key, c);
}

std::string language_cache_key(const Language& language) {
  std::ostringstream os;
  os << language.domain().size() << '|' << language.conservative() << '|';
  for (int i = 0; i < language.size(); ++i) {
    const CostFunction& f = language.function(i);
    os << language.name(i) << ':' << f.arity() << ':';
    for (std::uint64_t t = 0; t < f.tuple_count(); ++t)
      os << f.at_index(t).str() << ',';
    os << '|';
  }
  return os.str();
}

namespace {

// Plugs fixed labels into a table, producing the restriction to the free
// positions (minimizing out nothing: the positions are fixed, not summed).
CostFunction slice_function(const CostFunction& f,
                            const std::vector<int>& scope,
                            const std::vector<int>& fixed_labels,
                            const std::vector<int>& free_positions) {
  const int d = f.domain_size();
  CostFunction out(static_cast<int>(free_positions.size()), d);
  std::vector<int> args(f.arity());
  for (std::size_t k = 0; k < scope.size(); ++k) args[k] = fixed_labels[scope[k]];
  std::vector<int> sub(free_positions.size());
  for (std::uint64_t t = 0; t < out.tuple_count(); ++t) {
    out.decode(t, sub);
    for (std::size_t k = 0; k < free_positions.size(); ++k)
      args[free_positions[k]] = sub[k];
    out.set_index(t, f.at(args));
  }
  return out;
}

Classification obtain_witness(const Instance& instance,
                              std::optional<Classification> witness,
                              const PipelineOptions& options,
                              SolveTrace& trace) {
  if (!witness) {
    std::string key;
    if (options.cache) {
      key = language_cache_key(instance.language());
      if (auto cached = options.cache->lookup(key)) {
        trace.witness_cached = true;
        witness = std::move(cached);
      }
    }
    if (!witness) {
      witness = classify(instance.language(), options.classify_budget);
      if (options.cache) options.cache->store(key, *witness);
    }
  }
  trace.classify_nodes = witness->nodes;
  if (witness->verdict != Classification::Verdict::Tractable)
    throw ClassificationError(witness->verdict);
  if (!witness->witness)
    throw StructuralError("tractable classification carries no witness");
  return *witness;
}

}  // namespace

SolveResult solve(const Instance& instance,
                  std::optional<Classification> witness,
                  const PipelineOptions& options) {
  SolveTrace trace;
  Classification cls = obtain_witness(instance, std::move(witness), options, trace);
  const Witness& w = *cls.witness;
  const int n = instance.num_vars();
  const int d = instance.language().domain().size();

  if (n == 0) {
    trace.backend = "empty";
    return Solution{{}, Cost(), "empty", trace};
  }

  // Stage 1: microstructure and strong 3-consistency.
  Microstructure micro = build_microstructure(instance);
  if (enforce_strong3(micro) == Strong3::Infeasible) return Infeasible{};

  TernaryOp mu = build_majority(w.pair, w.triple);
  for (int i = 0; i < instance.language().size(); ++i)
    assert_decomposable(instance.language().function(i), mu,
                        instance.language().name(i));

  // Substitute out variables pinned to a single label.
  std::vector<int> fixed_label(n, -1);
  std::vector<int> kept;  // old variable ids, ascending
  for (int i = 0; i < n; ++i) {
    std::uint32_t di = micro.domain(i);
    if (std::popcount(di) == 1)
      fixed_label[i] = std::countr_zero(di);
    else
      kept.push_back(i);
  }
  trace.fixed_variables = n - static_cast<int>(kept.size());

  Assignment full(n, 0);
  for (int i = 0; i < n; ++i)
    if (fixed_label[i] >= 0) full[i] = fixed_label[i];

  if (kept.empty()) {
    Cost cost = eval_instance(instance, full);
    if (!cost.finite())
      throw InternalError("consistent instance evaluated to infinity");
    trace.backend = "fixed";
    return Solution{std::move(full), cost, "fixed", trace};
  }

  std::vector<int> new_id(n, -1);
  for (std::size_t i = 0; i < kept.size(); ++i) new_id[kept[i]] = static_cast<int>(i);

  auto reduced_language = std::make_shared<Language>(
      instance.language().domain(), instance.language().conservative());
  Instance reduced(reduced_language, static_cast<int>(kept.size()));
  {
    int counter = 0;
    for (const Term& t : instance.terms()) {
      std::vector<int> free_positions;
      std::vector<int> new_scope;
      for (std::size_t k = 0; k < t.scope.size(); ++k)
        if (fixed_label[t.scope[k]] < 0) {
          free_positions.push_back(static_cast<int>(k));
          new_scope.push_back(new_id[t.scope[k]]);
        }
      if (free_positions.empty()) continue;  // constant term, re-added by eval
      const CostFunction& f = instance.language().function(t.function);
      if (free_positions.size() == t.scope.size()) {
        std::string nm = "t" + std::to_string(counter++);
        reduced_language->add(nm, f);
        reduced.add_term(nm, std::move(new_scope));
      } else {
        std::string nm = "t" + std::to_string(counter++);
        reduced_language->add(
            nm, slice_function(f, t.scope, fixed_label, free_positions));
        reduced.add_term(nm, std::move(new_scope));
      }
    }
  }

  // Shrink the microstructure to the kept variables.
  Microstructure rmicro(static_cast<int>(kept.size()), d);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    rmicro.set_domain(static_cast<int>(i), micro.domain(kept[i]));
    for (std::size_t j = i + 1; j < kept.size(); ++j)
      rmicro.set_rel(static_cast<int>(i), static_cast<int>(j),
                     micro.rel(kept[i], kept[j]));
  }

  // Stage 2: grow the commutative sets until the pair is an STP everywhere.
  Stage2State state = Stage2State::from_witness(std::move(rmicro), w);
  Stage2Config s2cfg{options.debug_checks};
  trace.stage2 = run_stage2(state, options.debug_checks ? &reduced : nullptr,
                            s2cfg);
  trace.stage2_iterations = static_cast<int>(trace.stage2.steps.size());

  // Stage 3: minimize.
  Stage3Options s3;
  s3.brute_guard = options.brute_guard;
  s3.require_mincut = options.backend == SolveBackend::MinCutOnly;
  std::vector<std::uint32_t> masks(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    masks[i] = state.micro.domain(static_cast<int>(i));
  Stage3Result s3r = solve_stage3(reduced, state.pairs, masks, s3);

  for (std::size_t i = 0; i < kept.size(); ++i) full[kept[i]] = s3r.assignment[i];
  Cost cost = eval_instance(instance, full);
  trace.backend =
      s3r.backend == Stage3Result::Backend::MinCut ? "mincut" : "brute";
  trace.augmentations = s3r.augmentations;
  Solution s{std::move(full), cost, trace.backend, trace};
  if (!verify_solution(instance, s))
    throw InternalError("solution failed cost re-verification");
  return s;
}

bool verify_solution(const Instance& instance, const Solution& s) {
  return eval_instance(instance, s.assignment) == s.cost;
}

}  // namespace cvcsp
