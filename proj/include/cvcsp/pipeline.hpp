#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "cvcsp/consistency.hpp"
#include "cvcsp/core.hpp"
#include "cvcsp/mmorph.hpp"
#include "cvcsp/stage2.hpp"
#include "cvcsp/submod.hpp"

namespace cvcsp {

/// Raised when the language classifies NP-hard or Unknown, so the
/// polynomial pipeline cannot run.
struct ClassificationError : std::runtime_error {
  explicit ClassificationError(Classification::Verdict v);
  Classification::Verdict verdict;
};

struct SolveTrace {
  bool witness_cached = false;
  std::uint64_t classify_nodes = 0;
  int fixed_variables = 0;          // substituted out after stage 1
  int stage2_iterations = 0;
  Stage2Trace stage2;
  std::string backend;              // "mincut", "brute", "fixed", "empty"
  std::uint64_t augmentations = 0;
};

struct Solution {
  Assignment assignment;
  Cost cost;
  std::string provenance;  // backend that produced the assignment
  SolveTrace trace;
};

struct Infeasible {};

using SolveResult = std::variant<Solution, Infeasible>;

/// Per-language classification cache keyed by the canonical language text.
class WitnessCache {
 public:
  std::optional<Classification> lookup(const std::string& key) const;
  void store(const std::string& key, const Classification& c);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Classification> entries_;
};

enum class SolveBackend { Auto, MinCutOnly };

struct PipelineOptions {
  ClassifyBudget classify_budget;
  std::uint64_t brute_guard = 10'000'000;
  bool debug_checks = true;
  SolveBackend backend = SolveBackend::Auto;
  WitnessCache* cache = nullptr;
};

/// Stage 1 consistency, stage 2 commutativity growth, stage 3 minimization.
/// The witness argument short-circuits classification when provided.
SolveResult solve(const Instance& instance,
                  std::optional<Classification> witness = std::nullopt,
                  const PipelineOptions& options = {});

/// Cost-level re-verification of a solution.
bool verify_solution(const Instance& instance, const Solution& s);

/// Canonical cache key for a language (stable across runs).
std::string language_cache_key(const Language& language);

}  // namespace cvcsp
