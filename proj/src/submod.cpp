#include "cvcsp/submod.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <sstream>

namespace cvcsp {

using detail::Rat;

TournamentOrder tournament_order(const BinaryPair& pair,
                                 std::uint32_t domain_mask) {
  const int d = pair.domain_size();
  std::vector<int> labels;
  for (int a = 0; a < d; ++a)
    if ((domain_mask >> a) & 1u) labels.push_back(a);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      int a = labels[i], b = labels[j];
      bool commutative =
          pair.meet(a, b) == pair.meet(b, a) && pair.join(a, b) == pair.join(b, a);
      bool conservative = std::minmax(pair.meet(a, b), pair.join(a, b)) ==
                          std::minmax(a, b);
      if (!commutative || !conservative)
        throw StructuralError(
            "tournament order requires a commutative conservative pair");
    }

  TournamentOrder out;
  std::vector<int> remaining = labels;
  while (!remaining.empty()) {
    int least = -1;
    for (int a : remaining) {
      bool ok = true;
      for (int b : remaining)
        if (b != a && pair.join(a, b) != b) {
          ok = false;
          break;
        }
      if (ok) {
        least = a;
        break;
      }
    }
    if (least == -1) {
      // No earliest element: the tournament restricted to `remaining`
      // contains a directed 3-cycle.
      for (int a : remaining)
        for (int b : remaining)
          for (int c : remaining) {
            if (a == b || b == c || a == c) continue;
            if (pair.join(a, b) == b && pair.join(b, c) == c &&
                pair.join(c, a) == a) {
              out.cycle = {a, b, c};
              return out;
            }
          }
      throw InternalError("tournament has neither a least element nor a 3-cycle");
    }
    out.order.push_back(least);
    std::erase(remaining, least);
  }
  return out;
}

NotSubmodular::NotSubmodular(int term_index, std::vector<int> x_tuple,
                             std::vector<int> y_tuple)
    : std::runtime_error("pairwise table is not submodular under the orders"),
      term(term_index),
      x(std::move(x_tuple)),
      y(std::move(y_tuple)) {}

FlowValue FlowValue::from_cost(const Cost& c) {
  if (!c.finite()) return FlowValue{Rat{}, 1};
  return FlowValue{Rat{c.num(), c.den()}, 0};
}

Cost FlowValue::to_cost() const {
  if (units > 0) return Cost::infinity();
  if (units < 0 || fin.num < 0)
    throw InternalError("negative flow value cannot be a cost");
  return Cost::ratio(fin.num, fin.den);
}

bool FlowValue::negative() const {
  return units < 0 || (units == 0 && fin.num < 0);
}

FlowValue operator+(const FlowValue& a, const FlowValue& b) {
  return FlowValue{a.fin + b.fin, a.units + b.units};
}

FlowValue operator-(const FlowValue& a, const FlowValue& b) {
  return FlowValue{a.fin - b.fin, a.units - b.units};
}

std::strong_ordering operator<=>(const FlowValue& a, const FlowValue& b) {
  if (auto c = a.units <=> b.units; c != 0) return c;
  return a.fin <=> b.fin;
}

std::string FlowValue::str() const {
  if (units == 0) return fin.str();
  std::string s = std::to_string(units) + "inf";
  if (fin.num != 0) s += "+" + fin.str();
  return s;
}

FlowNetwork::FlowNetwork() : adjacency_(2) {}

int FlowNetwork::add_node() {
  adjacency_.emplace_back();
  return static_cast<int>(adjacency_.size()) - 1;
}

void FlowNetwork::add_arc(int from, int to, const FlowValue& capacity) {
  if (capacity.negative()) throw InternalError("negative arc capacity");
  if (from == to) return;
  Arc fwd{to, static_cast<int>(adjacency_[to].size()), capacity};
  Arc bwd{from, static_cast<int>(adjacency_[from].size()), FlowValue{}};
  adjacency_[from].push_back(fwd);
  adjacency_[to].push_back(bwd);
  solved_ = false;
}

bool FlowNetwork::bfs_augment() {
  const int n = num_nodes();
  std::vector<std::pair<int, int>> pred(n, {-1, -1});  // node, arc index
  std::vector<bool> seen(n, false);
  std::deque<int> queue{source()};
  seen[source()] = true;
  while (!queue.empty() && !seen[sink()]) {
    int u = queue.front();
    queue.pop_front();
    for (std::size_t ai = 0; ai < adjacency_[u].size(); ++ai) {
      const Arc& arc = adjacency_[u][ai];
      if (seen[arc.to] || arc.residual.zero()) continue;
      seen[arc.to] = true;
      pred[arc.to] = {u, static_cast<int>(ai)};
      queue.push_back(arc.to);
    }
  }
  if (!seen[sink()]) return false;
  // Bottleneck along the path, then push it.
  std::optional<FlowValue> bottleneck;
  for (int v = sink(); v != source();) {
    auto [u, ai] = pred[v];
    const FlowValue& r = adjacency_[u][ai].residual;
    if (!bottleneck || r < *bottleneck) bottleneck = r;
    v = u;
  }
  for (int v = sink(); v != source();) {
    auto [u, ai] = pred[v];
    Arc& fwd = adjacency_[u][ai];
    Arc& bwd = adjacency_[fwd.to][fwd.rev];
    fwd.residual = fwd.residual - *bottleneck;
    bwd.residual = bwd.residual + *bottleneck;
    v = u;
  }
  flow_ = flow_ + *bottleneck;
  ++augmentations_;
  return true;
}

const FlowValue& FlowNetwork::max_flow() {
  if (!solved_) {
    while (bfs_augment()) {
    }
    solved_ = true;
  }
  return flow_;
}

std::vector<bool> FlowNetwork::min_cut_side() {
  max_flow();
  // Maximal source side: everything that cannot reach the sink in the
  // residual graph. Ties therefore resolve to the earliest order level.
  std::vector<bool> reaches_sink(num_nodes(), false);
  std::deque<int> queue{sink()};
  reaches_sink[sink()] = true;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const Arc& a : adjacency_[v]) {
      int u = a.to;  // candidate tail of an incoming arc u -> v
      if (reaches_sink[u]) continue;
      if (!adjacency_[u][a.rev].residual.zero()) {
        reaches_sink[u] = true;
        queue.push_back(u);
      }
    }
  }
  std::vector<bool> side(num_nodes());
  for (int v = 0; v < num_nodes(); ++v) side[v] = !reaches_sink[v];
  return side;
}

std::string FlowNetwork::dump() const {
  std::ostringstream os;
  os << "nodes " << num_nodes() << " offset " << offset.str() << "\n";
  for (int u = 0; u < num_nodes(); ++u)
    for (const Arc& arc : adjacency_[u])
      os << u << " " << arc.to << " " << arc.residual.str() << "\n";
  return os.str();
}

namespace {

// Distinct variables of a scope, ascending.
std::vector<int> distinct_vars(const std::vector<int>& scope) {
  std::vector<int> vars = scope;
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

// Table value with every position of `var` set to the level label.
Cost eval_term_at(const CostFunction& f, const std::vector<int>& scope,
                  std::span<const int> vars, std::span<const int> labels) {
  std::vector<int> args(scope.size());
  for (std::size_t k = 0; k < scope.size(); ++k) {
    auto it = std::lower_bound(vars.begin(), vars.end(), scope[k]);
    args[k] = labels[it - vars.begin()];
  }
  return f.at(args);
}

}  // namespace

MinCutModel build_mincut(const Instance& instance,
                         std::span<const TournamentOrder> orders,
                         std::span<const std::uint32_t> domain_masks) {
  const int n = instance.num_vars();
  const Language& lang = instance.language();
  MinCutModel model;
  FlowNetwork& net = model.network;

  std::vector<std::vector<FlowValue>> lambda(n);
  model.level_nodes.assign(n, {});
  for (int i = 0; i < n; ++i) {
    if (!orders[i].total())
      throw StructuralError("min-cut encoding requires total orders");
    int levels = static_cast<int>(orders[i].order.size());
    if (levels != std::popcount(domain_masks[i]))
      throw StructuralError("order does not cover the live domain");
    lambda[i].assign(levels, FlowValue{});
    for (int q = 1; q < levels; ++q)
      model.level_nodes[i].push_back(net.add_node());
    for (int q = 1; q + 1 < levels; ++q)
      net.add_arc(model.level_nodes[i][q - 1], model.level_nodes[i][q],
                  FlowValue{Rat{}, 1});
  }

  for (std::size_t ti = 0; ti < instance.terms().size(); ++ti) {
    const Term& t = instance.terms()[ti];
    const CostFunction& f = lang.function(t.function);
    std::vector<int> vars = distinct_vars(t.scope);
    if (vars.size() > 2)
      throw StructuralError("min-cut encoding requires at most two variables per term");
    if (vars.size() == 1) {
      int i = vars[0];
      const auto& ord = orders[i].order;
      auto value = [&](int r) {
        std::array<int, 1> lbl{ord[r]};
        return FlowValue::from_cost(eval_term_at(f, t.scope, vars, lbl));
      };
      net.offset = net.offset + value(0);
      for (std::size_t q = 1; q < ord.size(); ++q)
        lambda[i][q] = lambda[i][q] + (value(static_cast<int>(q)) -
                                       value(static_cast<int>(q) - 1));
    } else if (vars.size() == 2) {
      int i = vars[0], j = vars[1];
      const auto& oi = orders[i].order;
      const auto& oj = orders[j].order;
      auto value = [&](int r, int s) {
        std::array<int, 2> lbl{oi[r], oj[s]};
        return FlowValue::from_cost(eval_term_at(f, t.scope, vars, lbl));
      };
      net.offset = net.offset + value(0, 0);
      for (std::size_t q = 1; q < oi.size(); ++q)
        lambda[i][q] = lambda[i][q] + (value(static_cast<int>(q), 0) -
                                       value(static_cast<int>(q) - 1, 0));
      for (std::size_t u = 1; u < oj.size(); ++u)
        lambda[j][u] = lambda[j][u] + (value(0, static_cast<int>(u)) -
                                       value(0, static_cast<int>(u) - 1));
      for (std::size_t q = 1; q < oi.size(); ++q)
        for (std::size_t u = 1; u < oj.size(); ++u) {
          int qq = static_cast<int>(q), uu = static_cast<int>(u);
          FlowValue d2 = value(qq, uu) - value(qq - 1, uu) -
                         value(qq, uu - 1) + value(qq - 1, uu - 1);
          FlowValue cap = FlowValue{} - d2;
          if (cap.negative()) {
            // Name the violating lattice pair in scope order.
            std::vector<int> x, y;
            std::array<int, 2> xl{oi[qq], oj[uu - 1]}, yl{oi[qq - 1], oj[uu]};
            for (int v : t.scope) {
              x.push_back(v == i ? xl[0] : xl[1]);
              y.push_back(v == i ? yl[0] : yl[1]);
            }
            throw NotSubmodular(static_cast<int>(ti), std::move(x),
                                std::move(y));
          }
          lambda[i][q] = lambda[i][q] + d2;
          if (!cap.zero())
            net.add_arc(model.level_nodes[j][u - 1],
                        model.level_nodes[i][q - 1], cap);
        }
    }
  }

  for (int i = 0; i < n; ++i)
    for (std::size_t q = 1; q < lambda[i].size(); ++q) {
      const FlowValue& l = lambda[i][q];
      if (l.negative()) {
        net.offset = net.offset + l;
        net.add_arc(model.level_nodes[i][q - 1], net.sink(), FlowValue{} - l);
      } else if (!l.zero()) {
        net.add_arc(net.source(), model.level_nodes[i][q - 1], l);
      }
    }
  return model;
}

namespace {

Stage3Result brute_stage3(const Instance& instance,
                          std::span<const std::uint32_t> domain_masks,
                          std::uint64_t guard, const std::string& reason) {
  const int n = instance.num_vars();
  std::vector<std::vector<int>> labels(n);
  std::uint64_t space = 1;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < instance.language().domain().size(); ++a)
      if ((domain_masks[i] >> a) & 1u) labels[i].push_back(a);
    if (labels[i].empty())
      throw StructuralError("empty domain in stage-3 fallback");
    if (space > guard / labels[i].size())
      throw BudgetError("stage-3 fallback guard exceeded (" + reason + ")");
    space *= labels[i].size();
  }
  std::vector<int> digit(n, 0);
  Assignment x(n);
  auto materialize = [&]() {
    for (int i = 0; i < n; ++i) x[i] = labels[i][digit[i]];
  };
  materialize();
  Assignment best = x;
  Cost best_cost = eval_instance(instance, x);
  for (std::uint64_t it = 1; it < space; ++it) {
    for (int k = n - 1; k >= 0; --k) {
      if (++digit[k] < static_cast<int>(labels[k].size())) break;
      digit[k] = 0;
    }
    materialize();
    Cost c = eval_instance(instance, x);
    if (c < best_cost) {
      best_cost = c;
      best = x;
    }
  }
  return Stage3Result{std::move(best), best_cost, Stage3Result::Backend::Brute,
                      0};
}

}  // namespace

Stage3Result solve_stage3(const Instance& instance,
                          std::span<const BinaryPair> per_var_pairs,
                          std::span<const std::uint32_t> domain_masks,
                          const Stage3Options& options) {
  const int n = instance.num_vars();
  if (n == 0)
    return Stage3Result{{}, Cost(), Stage3Result::Backend::MinCut, 0};

  std::vector<TournamentOrder> orders;
  orders.reserve(n);
  bool all_total = true;
  for (int i = 0; i < n; ++i) {
    orders.push_back(tournament_order(per_var_pairs[i], domain_masks[i]));
    all_total = all_total && orders.back().total();
  }
  bool binary_only = true;
  for (const Term& t : instance.terms())
    if (distinct_vars(t.scope).size() > 2) binary_only = false;

  if (!all_total || !binary_only) {
    std::string reason = !all_total ? "cyclic tournament order"
                                    : "term touches more than two variables";
    if (options.require_mincut)
      throw BudgetError("min-cut backend unavailable: " + reason);
    return brute_stage3(instance, domain_masks, options.brute_guard, reason);
  }

  MinCutModel model = build_mincut(instance, orders, domain_masks);
  FlowValue total = model.network.offset + model.network.max_flow();
  std::vector<bool> source_side = model.network.min_cut_side();
  Assignment x(n);
  for (int i = 0; i < n; ++i) {
    int level = 0;
    for (int node : model.level_nodes[i])
      if (!source_side[node]) ++level;
    x[i] = orders[i].order[level];
  }
  Cost cost = total.to_cost();
  return Stage3Result{std::move(x), cost, Stage3Result::Backend::MinCut,
                      model.network.augmentations()};
}

Stage3Result solve_stage3(const Instance& instance, const BinaryPair& pair,
                          const Stage3Options& options) {
  const int n = instance.num_vars();
  const int d = instance.language().domain().size();
  std::vector<BinaryPair> pairs(n, pair);
  std::vector<std::uint32_t> masks(n, (1u << d) - 1u);
  return solve_stage3(instance, pairs, masks, options);
}

}  // namespace cvcsp
