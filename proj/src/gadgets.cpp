#include "cvcsp/gadgets.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace cvcsp {

SimpleGraph make_simple_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 0) throw StructuralError("negative vertex count");
  std::set<std::pair<int, int>> seen;
  for (auto& [u, v] : edges) {
    if (u == v) throw StructuralError("self-loop in graph");
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n) throw StructuralError("edge endpoint out of range");
    if (!seen.insert({u, v}).second)
      throw StructuralError("duplicate edge in graph");
  }
  std::sort(edges.begin(), edges.end());
  return SimpleGraph{n, std::move(edges)};
}

SimpleGraph parse_edge_list(std::istream& in) {
  int n, m;
  if (!(in >> n >> m)) throw StructuralError("edge list: expected \"n m\"");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(m);
  for (int i = 0; i < m; ++i) {
    int u, v;
    if (!(in >> u >> v))
      throw StructuralError("edge list: expected \"u v\" line");
    edges.emplace_back(u, v);
  }
  return make_simple_graph(n, std::move(edges));
}

std::string format_edge_list(const SimpleGraph& g) {
  std::ostringstream os;
  os << g.n << " " << g.edges.size() << "\n";
  for (auto [u, v] : g.edges) os << u << " " << v << "\n";
  return os.str();
}

std::shared_ptr<const Language> xor_language() {
  Language lang(Domain({"a", "b"}), true);
  CostFunction h(2, 2);
  h.set(std::array{0, 0}, Cost::ratio(1));
  h.set(std::array{1, 1}, Cost::ratio(1));
  h.set(std::array{0, 1}, Cost());
  h.set(std::array{1, 0}, Cost());
  lang.add("h", std::move(h));
  return std::make_shared<const Language>(std::move(lang));
}

Instance mis_instance(const SimpleGraph& g) {
  Language lang(Domain({"a", "b"}), true);
  CostFunction edge_fn(2, 2);
  edge_fn.set(std::array{1, 1}, Cost::infinity());
  lang.add("g", std::move(edge_fn));
  CostFunction vertex_fn(1, 2);
  vertex_fn.set(std::array{0}, Cost::ratio(1));
  vertex_fn.set(std::array{1}, Cost());
  lang.add("h", std::move(vertex_fn));

  Instance inst(std::make_shared<const Language>(std::move(lang)), g.n);
  for (auto [u, v] : g.edges) inst.add_term("g", {u, v});
  for (int v = 0; v < g.n; ++v) inst.add_term("h", {v});
  return inst;
}

namespace {

// Unbiased bounded draw by rejection; avoids the implementation-defined
// std::uniform_int_distribution so streams are stable everywhere.
std::uint64_t bounded(std::mt19937_64& eng, std::uint64_t m) {
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % m;
}

}  // namespace

Instance random_instance(std::shared_ptr<const Language> language, int vars,
                         int terms, std::uint64_t seed) {
  if (!language || language->size() == 0)
    throw StructuralError("generator requires a non-empty language");
  if (vars < 0 || terms < 0)
    throw StructuralError("negative generator parameter");
  std::mt19937_64 eng(seed);
  Instance inst(language, vars);
  for (int t = 0; t < terms; ++t) {
    int fi = static_cast<int>(bounded(eng, language->size()));
    int ar = language->function(fi).arity();
    if (ar > vars)
      throw StructuralError("sampled function arity exceeds variable count");
    // Partial Fisher-Yates draw of `ar` distinct variables, in draw order.
    std::vector<int> pool(vars);
    for (int i = 0; i < vars; ++i) pool[i] = i;
    std::vector<int> scope;
    scope.reserve(ar);
    for (int k = 0; k < ar; ++k) {
      std::size_t pick = k + bounded(eng, vars - k);
      std::swap(pool[k], pool[pick]);
      scope.push_back(pool[k]);
    }
    inst.add_term(language->name(fi), std::move(scope));
  }
  return inst;
}

}  // namespace cvcsp
