#include "cvcsp/ggraph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace cvcsp {

namespace {

using detail::Rat;

// Rational extended by a signed count of infinity units; ordered
// lexicographically by (units, finite part). Exact arithmetic for deriving
// the composed-witness shift constants.
struct SInf {
  Rat fin{};
  long long units = 0;

  static SInf from_cost(const Cost& c) {
    if (!c.finite()) return SInf{Rat{}, 1};
    return SInf{Rat{c.num(), c.den()}, 0};
  }
  friend SInf operator+(const SInf& a, const SInf& b) {
    return SInf{a.fin + b.fin, a.units + b.units};
  }
  friend SInf operator-(const SInf& a, const SInf& b) {
    return SInf{a.fin - b.fin, a.units - b.units};
  }
  friend std::strong_ordering operator<=>(const SInf& a, const SInf& b) {
    if (auto c = a.units <=> b.units; c != 0) return c;
    return a.fin <=> b.fin;
  }
  friend bool operator==(const SInf&, const SInf&) = default;
};

std::string table_key(const CostFunction& f) {
  std::ostringstream os;
  for (std::uint64_t i = 0; i < f.tuple_count(); ++i)
    os << f.at_index(i).str() << ';';
  return os.str();
}

// Subtracts the minimum finite value; the edge inequality is invariant
// under additive constants, so this canonicalizes for deduplication.
CostFunction normalize(const CostFunction& f) {
  Cost min_fin = Cost::infinity();
  for (std::uint64_t i = 0; i < f.tuple_count(); ++i) {
    Cost c = f.at_index(i);
    if (c.finite() && c < min_fin) min_fin = c;
  }
  if (!min_fin.finite() || min_fin.is_zero()) return f;
  CostFunction out(f.arity(), f.domain_size());
  Rat m{min_fin.num(), min_fin.den()};
  for (std::uint64_t i = 0; i < f.tuple_count(); ++i) {
    Cost c = f.at_index(i);
    if (!c.finite()) {
      out.set_index(i, Cost::infinity());
    } else {
      Rat r = Rat{c.num(), c.den()} - m;
      out.set_index(i, Cost::ratio(r.num, r.den));
    }
  }
  return out;
}

CostFunction symmetrize(const CostFunction& f) {
  const int d = f.domain_size();
  CostFunction out(2, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      std::array<int, 2> xy{x, y}, yx{y, x};
      out.set(xy, f.at(xy) + f.at(yx));
    }
  return out;
}

CostFunction pointwise_sum(const CostFunction& f, const CostFunction& g) {
  const int d = f.domain_size();
  CostFunction out(2, d);
  for (std::uint64_t i = 0; i < out.tuple_count(); ++i)
    out.set_index(i, f.at_index(i) + g.at_index(i));
  return out;
}

CostFunction add_unary(const CostFunction& f, std::uint32_t mask,
                       const Cost& outside, int side) {
  const int d = f.domain_size();
  CostFunction out(2, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      std::array<int, 2> xy{x, y};
      int arg = side == 0 ? x : y;
      Cost u = (mask >> arg) & 1u ? Cost() : outside;
      out.set(xy, f.at(xy) + u);
    }
  return out;
}

CostFunction chain_compose(const CostFunction& f, const CostFunction& g) {
  const int d = f.domain_size();
  CostFunction out(2, d, Cost::infinity());
  for (int x = 0; x < d; ++x)
    for (int z = 0; z < d; ++z) {
      Cost best = Cost::infinity();
      for (int y = 0; y < d; ++y) {
        std::array<int, 2> xy{x, y}, yz{y, z};
        Cost c = f.at(xy) + g.at(yz);
        if (c < best) best = c;
      }
      std::array<int, 2> xz{x, z};
      out.set(xz, best);
    }
  return out;
}

}  // namespace

ClosureResult close_binary(const Language& language, int depth,
                           std::size_t size_cap) {
  const int d = language.domain().size();
  ClosureResult result;
  std::set<std::string> seen;
  auto push = [&](const CostFunction& f) -> bool {
    if (result.functions.size() >= size_cap) {
      result.truncated = true;
      return false;
    }
    CostFunction n = normalize(f);
    if (seen.insert(table_key(n)).second) result.functions.push_back(std::move(n));
    return true;
  };

  bool has_binary = false;
  for (int i = 0; i < language.size(); ++i) {
    const CostFunction& f = language.function(i);
    if (f.arity() != 2) continue;
    has_binary = true;
    if (!push(f) || !push(symmetrize(f))) return result;
  }
  if (!has_binary) return result;

  const std::uint32_t full_mask = (1u << d) - 1u;
  for (int round = 0; round < depth; ++round) {
    const std::size_t snapshot = result.functions.size();
    for (std::size_t i = 0; i < snapshot; ++i)
      if (!push(symmetrize(result.functions[i]))) return result;
    for (std::size_t i = 0; i < snapshot; ++i)
      for (std::size_t j = i; j < snapshot; ++j)
        if (!push(pointwise_sum(result.functions[i], result.functions[j])))
          return result;
    for (std::size_t i = 0; i < snapshot; ++i)
      for (std::uint32_t mask = 0; mask <= full_mask; ++mask)
        for (int side = 0; side < 2; ++side) {
          if (!push(add_unary(result.functions[i], mask, Cost::ratio(1), side)))
            return result;
          if (!push(add_unary(result.functions[i], mask, Cost::infinity(), side)))
            return result;
        }
    for (std::size_t i = 0; i < snapshot; ++i)
      for (std::size_t j = 0; j < snapshot; ++j)
        if (!push(chain_compose(result.functions[i], result.functions[j])))
          return result;
    if (result.functions.size() == snapshot) break;  // fixpoint
  }
  return result;
}

bool GammaGraph::has_soft_self_loop() const {
  for (const auto& [key, e] : edges)
    if (key.first == key.second && e.soft) return true;
  return false;
}

bool GammaGraph::witness_verifies(const Edge& e) const {
  const CostFunction& f = witness_pool[e.witness.fn];
  int a1 = e.witness.p.first, b1 = e.witness.p.second;
  int a2 = e.witness.q.first, b2 = e.witness.q.second;
  std::array<int, 2> aa{a1, a2}, bb{b1, b2}, ab{a1, b2}, ba{b1, a2};
  Cost faa = f.at(aa), fbb = f.at(bb), fab = f.at(ab), fba = f.at(ba);
  if (faa != e.witness.faa || fbb != e.witness.fbb || fab != e.witness.fab ||
      fba != e.witness.fba)
    return false;
  if (!fab.finite() || !fba.finite()) return false;
  if (!(faa + fbb > fab + fba)) return false;
  bool soft = faa.finite() || fbb.finite();
  return soft == e.soft;
}

namespace {

class Saturator {
 public:
  Saturator(std::span<const CostFunction> fns, int d) : d_(d) {
    g_.domain_size = d;
    g_.witness_pool.assign(fns.begin(), fns.end());
  }

  GammaGraph run() {
    detect();
    saturate();
    return std::move(g_);
  }

 private:
  struct NodePair {
    int a, b;
  };

  bool valid_node(int n) const { return n / d_ != n % d_; }

  // Attempts to certify the oriented node pair (p, q) with pool function fn.
  std::optional<GammaGraph::EdgeWitness> make_witness(int fn, int p,
                                                      int q) const {
    const CostFunction& f = g_.witness_pool[fn];
    auto [a1, b1] = g_.labels(p);
    auto [a2, b2] = g_.labels(q);
    std::array<int, 2> aa{a1, a2}, bb{b1, b2}, ab{a1, b2}, ba{b1, a2};
    Cost faa = f.at(aa), fbb = f.at(bb), fab = f.at(ab), fba = f.at(ba);
    if (!fab.finite() || !fba.finite()) return std::nullopt;
    if (!(faa + fbb > fab + fba)) return std::nullopt;
    return GammaGraph::EdgeWitness{fn, {a1, b1}, {a2, b2}, faa, fbb, fab, fba};
  }

  static bool witness_soft(const GammaGraph::EdgeWitness& w) {
    return w.faa.finite() || w.fbb.finite();
  }

  // Inserts or soft-upgrades; returns true when something changed.
  bool store(int p, int q, const GammaGraph::EdgeWitness& w) {
    std::pair<int, int> key{std::min(p, q), std::max(p, q)};
    bool soft = witness_soft(w);
    auto it = g_.edges.find(key);
    if (it == g_.edges.end()) {
      g_.edges.emplace(key, GammaGraph::Edge{soft, w});
      work_.push_back(key);
      return true;
    }
    if (!it->second.soft && soft) {
      it->second = GammaGraph::Edge{true, w};
      work_.push_back(key);
      return true;
    }
    return false;
  }

  void detect() {
    const int n = d_ * d_;
    for (int fn = 0; fn < static_cast<int>(g_.witness_pool.size()); ++fn) {
      if (g_.witness_pool[fn].arity() != 2) continue;
      for (int p = 0; p < n; ++p) {
        if (!valid_node(p)) continue;
        for (int q = 0; q < n; ++q) {
          if (!valid_node(q)) continue;
          auto key = std::pair{std::min(p, q), std::max(p, q)};
          auto it = g_.edges.find(key);
          if (it != g_.edges.end() && it->second.soft) continue;
          if (auto w = make_witness(fn, p, q)) store(p, q, *w);
        }
      }
    }
  }

  // Reads the premise witness oriented so that `first` supplies the first
  // argument; flip swaps the roles of the stored orientation.
  struct Oriented {
    const CostFunction* f;
    bool flip;
    Cost at(int x, int y) const {
      std::array<int, 2> args = flip ? std::array<int, 2>{y, x}
                                     : std::array<int, 2>{x, y};
      return f->at(args);
    }
  };

  Oriented orient(const GammaGraph::Edge& e, int first_node) const {
    int stored_first = g_.node(e.witness.p.first, e.witness.p.second);
    return Oriented{&g_.witness_pool[e.witness.fn], stored_first != first_node};
  }

  // Lemma 15(b) composition: from edges {p,q} and {q,r} build a binary
  // function certifying {p, bar r}. The shift constants on the shared
  // variable are chosen so that the strict inequality provably transfers.
  void derive_transitive(int p, int q, int r, const GammaGraph::Edge& e1,
                         const GammaGraph::Edge& e2) {
    int rb = g_.bar(r);
    auto key = std::pair{std::min(p, rb), std::max(p, rb)};
    bool derived_soft = e1.soft || e2.soft;
    auto it = g_.edges.find(key);
    if (it != g_.edges.end() && (it->second.soft || !derived_soft)) return;

    auto [a1, b1] = g_.labels(p);
    auto [a2, b2] = g_.labels(q);
    auto [a3, b3] = g_.labels(r);
    Oriented f = orient(e1, p);
    Oriented g = orient(e2, q);
    SInf alpha = SInf::from_cost(f.at(a1, a2));
    SInf alphap = SInf::from_cost(f.at(b1, b2));
    SInf gamma1 = SInf::from_cost(f.at(a1, b2));
    SInf gamma2 = SInf::from_cost(f.at(b1, a2));
    SInf beta = SInf::from_cost(g.at(a2, a3));
    SInf betap = SInf::from_cost(g.at(b2, b3));
    SInf delta1 = SInf::from_cost(g.at(a2, b3));
    SInf delta2 = SInf::from_cost(g.at(b2, a3));

    SInf A = alpha + beta, B = alphap + betap;
    SInf C = gamma1 + delta2, E = gamma2 + delta1;
    SInf f12a = alpha + delta1, f12b = gamma1 + betap;
    SInf f21a = gamma2 + beta, f21b = alphap + delta2;

    // u = t - s must satisfy: u >= E-B, u <= A-C (cross paths realize the
    // diagonal of the derived pair) and strictly
    // C+E-(f12b+f21b) < u < f12a+f21a-(C+E).
    std::optional<Rat> lo, hi;
    auto raise_lo = [&](const SInf& v) {
      if (v.units < 0) return;  // minus infinity: no constraint
      if (!lo || v.fin > *lo) lo = v.fin;
    };
    auto lower_hi = [&](const SInf& v) {
      if (v.units > 0) return;  // plus infinity: no constraint
      if (!hi || v.fin < *hi) hi = v.fin;
    };
    raise_lo(E - B);
    raise_lo(C + E - (f12b + f21b));
    lower_hi(A - C);
    lower_hi(f12a + f21a - (C + E));
    Rat u{};
    if (lo && hi)
      u = Rat::make((*lo + *hi).num, (*lo + *hi).den * 2);
    else if (lo)
      u = *lo + Rat{1, 1};
    else if (hi)
      u = *hi - Rat{1, 1};
    Cost s = u.num >= 0 ? Cost() : Cost::ratio(-u.num, u.den);
    Cost t = u.num >= 0 ? Cost::ratio(u.num, u.den) : Cost();

    CostFunction h(2, d_, Cost::infinity());
    for (int x = 0; x < d_; ++x)
      for (int z = 0; z < d_; ++z) {
        Cost via_a2 = f.at(x, a2) + s + g.at(a2, z);
        Cost via_b2 = f.at(x, b2) + t + g.at(b2, z);
        std::array<int, 2> xz{x, z};
        h.set(xz, std::min(via_a2, via_b2));
      }
    int hn = static_cast<int>(g_.witness_pool.size());
    g_.witness_pool.push_back(std::move(h));
    auto w = make_witness(hn, p, rb);
    if (!w || witness_soft(*w) != derived_soft)
      throw InternalError("transitive edge witness failed to verify");
    store(p, rb, *w);
  }

  void apply_rules(const std::pair<int, int>& e1_key) {
    auto e1_it = g_.edges.find(e1_key);
    if (e1_it == g_.edges.end()) return;
    GammaGraph::Edge e1 = e1_it->second;  // copy; pool may grow

    // Rule (a): bar-symmetry reuses the same witness function.
    {
      int pb = g_.bar(e1_key.first), qb = g_.bar(e1_key.second);
      auto key = std::pair{std::min(pb, qb), std::max(pb, qb)};
      auto it = g_.edges.find(key);
      if (it == g_.edges.end() || (!it->second.soft && e1.soft)) {
        int first = g_.node(e1.witness.p.first, e1.witness.p.second);
        int wp = g_.bar(first);
        int wq = g_.bar(first == e1_key.first ? e1_key.second : e1_key.first);
        auto w = make_witness(e1.witness.fn, wp, wq);
        if (!w || witness_soft(*w) != e1.soft)
          throw InternalError("bar-symmetric witness failed to verify");
        store(wp, wq, *w);
      }
    }

    // Rule (b): pair with every known edge sharing a node, in both roles.
    std::vector<std::pair<int, int>> keys;
    keys.reserve(g_.edges.size());
    for (const auto& [k, e] : g_.edges) keys.push_back(k);
    for (const auto& k2 : keys) {
      auto it2 = g_.edges.find(k2);
      if (it2 == g_.edges.end()) continue;
      GammaGraph::Edge e2 = it2->second;
      const std::array<std::pair<int, int>, 2> o1{
          std::pair{e1_key.first, e1_key.second},
          std::pair{e1_key.second, e1_key.first}};
      const std::array<std::pair<int, int>, 2> o2{
          std::pair{k2.first, k2.second}, std::pair{k2.second, k2.first}};
      for (auto [x, y] : o1)
        for (auto [y2, z] : o2)
          if (y == y2) derive_transitive(x, y, z, e1, e2);
    }
  }

  void saturate() {
    for (const auto& [k, e] : g_.edges) work_.push_back(k);
    // Seeds were enqueued by store() during detection as well; duplicates
    // are harmless because the rules are idempotent.
    while (!work_.empty()) {
      auto key = work_.front();
      work_.pop_front();
      apply_rules(key);
    }
  }

  int d_;
  GammaGraph g_;
  std::deque<std::pair<int, int>> work_;
};

}  // namespace

GammaGraph detect_and_saturate(std::span<const CostFunction> fns,
                               int domain_size) {
  for (const CostFunction& f : fns)
    if (f.domain_size() != domain_size)
      throw StructuralError("function domain size mismatch");
  return Saturator(fns, domain_size).run();
}

StpResult stp_from_graph(const GammaGraph& g) {
  const int d = g.domain_size;
  const int n = d * d;
  auto valid = [&](int node) { return node / d != node % d; };

  for (const auto& [key, e] : g.edges)
    if (key.first == key.second && e.soft) return SoftSelfLoop{key.first};

  std::vector<bool> in_m(n, false);
  for (int node = 0; node < n; ++node)
    if (valid(node))
      in_m[node] = !g.has_edge(node, node) && !g.has_edge(g.bar(node), g.bar(node));

  // 2-color the self-loop-free subgraph; p and bar(p) are linked so the
  // isolated-node rule comes out of the same traversal.
  std::vector<int> sigma(n, 0), parent(n, -1);
  auto neighbours = [&](int u) {
    std::vector<int> out;
    out.push_back(g.bar(u));
    for (const auto& [key, e] : g.edges) {
      if (key.first == u && in_m[key.second]) out.push_back(key.second);
      if (key.second == u && in_m[key.first]) out.push_back(key.first);
    }
    return out;
  };
  for (int root = 0; root < n; ++root) {
    if (!valid(root) || !in_m[root] || sigma[root] != 0) continue;
    sigma[root] = +1;
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : neighbours(u)) {
        if (sigma[v] == 0) {
          sigma[v] = -sigma[u];
          parent[v] = u;
          stack.push_back(v);
        } else if (sigma[v] == sigma[u]) {
          // Odd cycle: walk both endpoints to the root and splice.
          std::vector<int> up, vp;
          for (int w = u; w != -1; w = parent[w]) up.push_back(w);
          for (int w = v; w != -1; w = parent[w]) vp.push_back(w);
          while (up.size() > 1 && vp.size() > 1 &&
                 up[up.size() - 2] == vp[vp.size() - 2]) {
            up.pop_back();
            vp.pop_back();
          }
          std::vector<int> cycle(up.begin(), up.end());
          for (auto it = vp.rbegin() + 1; it != vp.rend(); ++it)
            cycle.push_back(*it);
          return OddCycle{std::move(cycle)};
        }
      }
    }
  }

  StpWitness out{BinaryPair(d), PairSet(d), sigma};
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      if (in_m[g.node(a, b)]) {
        out.m.insert(a, b);
        int lo = sigma[g.node(a, b)] == +1 ? a : b;
        int hi = lo == a ? b : a;
        out.pair.set(a, b, lo, hi);
        out.pair.set(b, a, lo, hi);
      }
      // Pairs outside M keep the first-projection initialization.
    }
  return out;
}

}  // namespace cvcsp
