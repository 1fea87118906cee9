#include "cvcsp/stage2.hpp"

#include <algorithm>
#include <bit>

namespace cvcsp {

Stage2State Stage2State::from_witness(Microstructure micro, const Witness& w) {
  Stage2State s;
  const int n = micro.num_vars();
  const int d = micro.domain_size();
  if (w.pair.domain_size() != d)
    throw StructuralError("witness domain size does not match microstructure");
  s.micro = std::move(micro);
  s.pairs.assign(n, w.pair);
  s.triples.assign(n, w.triple);
  s.m.reserve(n);
  for (int i = 0; i < n; ++i) {
    PairSet mi(d);
    std::uint32_t di = s.micro.domain(i);
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        if (((di >> a) & 1u) && ((di >> b) & 1u) && w.m.contains(a, b))
          mi.insert(a, b);
    s.m.push_back(std::move(mi));
  }
  return s;
}

std::vector<std::pair<int, int>> Stage2State::mbar_pairs(int i) const {
  std::vector<std::pair<int, int>> out;
  const int d = micro.domain_size();
  std::uint32_t di = micro.domain(i);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (((di >> a) & 1u) && ((di >> b) & 1u) && !m[i].contains(a, b))
        out.emplace_back(a, b);
  return out;
}

BlockResult find_blocks(const Stage2State& state, int k,
                        std::pair<int, int> seed) {
  const Microstructure& micro = state.micro;
  const int n = micro.num_vars();
  auto [a, b] = seed;
  std::uint32_t dk = micro.domain(k);
  if (a == b || !((dk >> a) & 1u) || !((dk >> b) & 1u) ||
      state.m[k].contains(a, b))
    throw StructuralError("seed pair must be a non-commutative in-domain pair");

  BlockResult r;
  r.k = k;
  r.seed = seed;
  r.a_sets.assign(n, 0);
  r.b_sets.assign(n, 0);
  std::vector<bool> in_u(n, false);
  in_u[k] = true;
  r.a_sets[k] = 1u << a;
  r.b_sets[k] = 1u << b;
  std::vector<int> u_members{k};

  auto refresh_images = [&]() {
    for (int j : u_members)
      if (j != k) {
        r.a_sets[j] = micro.image(k, j, r.a_sets[k]);
        r.b_sets[j] = micro.image(k, j, r.b_sets[k]);
      }
  };

  for (;;) {
    int next = -1;
    for (int i = 0; i < n && next == -1; ++i) {
      if (in_u[i]) continue;
      if ((micro.image(k, i, r.a_sets[k]) & micro.image(k, i, r.b_sets[k])) ==
          0)
        next = i;
    }
    if (next == -1) break;
    in_u[next] = true;
    u_members.push_back(next);
    r.a_sets[next] = micro.image(k, next, r.a_sets[k]);
    r.b_sets[next] = micro.image(k, next, r.b_sets[k]);

    // Closure of the A side: pull back through any member of U.
    for (;;) {
      int found = -1;
      for (int i : u_members) {
        if (i == k) continue;
        std::uint32_t pullback = micro.image(i, k, r.a_sets[i]);
        std::uint32_t fresh = pullback & micro.domain(k) & ~r.a_sets[k];
        if (fresh) {
          found = std::countr_zero(fresh);
          break;
        }
      }
      if (found == -1) break;
      r.a_sets[k] |= 1u << found;
      refresh_images();
    }
    // Closure of the B side.
    for (;;) {
      int found = -1;
      for (int i : u_members) {
        if (i == k) continue;
        std::uint32_t pullback = micro.image(i, k, r.b_sets[i]);
        std::uint32_t fresh = pullback & micro.domain(k) & ~r.b_sets[k];
        if (fresh) {
          found = std::countr_zero(fresh);
          break;
        }
      }
      if (found == -1) break;
      r.b_sets[k] |= 1u << found;
      refresh_images();
    }
  }
  std::sort(u_members.begin(), u_members.end());
  r.u = std::move(u_members);
  return r;
}

std::optional<BlockClause> check_block_invariants(const Stage2State& state,
                                                  const BlockResult& blocks) {
  const Microstructure& micro = state.micro;
  const int d = micro.domain_size();
  const int n = micro.num_vars();
  std::vector<bool> in_u(n, false);
  for (int i : blocks.u) in_u[i] = true;

  for (int i : blocks.u) {
    if (blocks.a_sets[i] & blocks.b_sets[i]) return BlockClause::A;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        if (((blocks.a_sets[i] >> a) & 1u) && ((blocks.b_sets[i] >> b) & 1u) &&
            state.m[i].contains(std::min(a, b), std::max(a, b)))
          return BlockClause::B;
  }
  int k = blocks.k;
  for (int i : blocks.u) {
    if (i == k) continue;
    if (micro.image(k, i, blocks.a_sets[k]) != blocks.a_sets[i] ||
        micro.image(k, i, blocks.b_sets[k]) != blocks.b_sets[i] ||
        micro.image(i, k, blocks.a_sets[i]) != blocks.a_sets[k] ||
        micro.image(i, k, blocks.b_sets[i]) != blocks.b_sets[k])
      return BlockClause::C;
  }
  for (int i : blocks.u)
    for (int j = 0; j < n; ++j) {
      if (in_u[j] || j == i) continue;
      std::uint32_t ab = blocks.a_sets[i] | blocks.b_sets[i];
      std::uint32_t reach_any = 0;
      bool first = true;
      bool equal = true;
      for (int c = 0; c < d; ++c) {
        if (!((ab >> c) & 1u)) continue;
        std::uint32_t row = micro.image(i, j, 1u << c);
        if (first) {
          reach_any = row;
          first = false;
        } else if (row != reach_any) {
          equal = false;
        }
      }
      if (!equal) return BlockClause::D;
    }
  return std::nullopt;
}

bool check_cross_coherence(const Stage2State& state) {
  const Microstructure& micro = state.micro;
  const int d = micro.domain_size();
  const int n = micro.num_vars();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      for (auto [a, b] : state.mbar_pairs(i))
        for (int ap = 0; ap < d; ++ap)
          for (int bp = 0; bp < d; ++bp) {
            if (ap == bp) continue;
            if (!((micro.domain(j) >> ap) & 1u) ||
                !((micro.domain(j) >> bp) & 1u))
              continue;
            if (!micro.rel_contains(i, j, a, ap) ||
                !micro.rel_contains(i, j, b, bp))
              continue;
            bool cross1 = micro.rel_contains(i, j, a, bp);
            bool cross2 = micro.rel_contains(i, j, b, ap);
            if (cross1 != cross2) return false;
            if (!cross1) {
              if (state.m[j].contains(std::min(ap, bp), std::max(ap, bp)))
                return false;
            }
          }
    }
  return true;
}

std::optional<Violation> verify_instance_pair(const Instance& instance,
                                              const Stage2State& state) {
  const Language& lang = instance.language();
  for (const Term& t : instance.terms()) {
    const CostFunction& f = lang.function(t.function);
    const int ar = f.arity();
    std::vector<int> x(ar), y(ar), lo(ar), hi(ar);
    // Tuples restricted to the live domains of the scope variables.
    std::vector<std::uint64_t> dom;
    for (std::uint64_t i = 0; i < f.tuple_count(); ++i) {
      if (!f.at_index(i).finite()) continue;
      f.decode(i, x);
      bool live = true;
      for (int kk = 0; kk < ar && live; ++kk)
        live = (state.micro.domain(t.scope[kk]) >> x[kk]) & 1u;
      if (live) dom.push_back(i);
    }
    for (std::uint64_t xi : dom)
      for (std::uint64_t yi : dom) {
        if (xi == yi) continue;
        f.decode(xi, x);
        f.decode(yi, y);
        for (int kk = 0; kk < ar; ++kk) {
          const BinaryPair& p = state.pairs[t.scope[kk]];
          lo[kk] = p.meet(x[kk], y[kk]);
          hi[kk] = p.join(x[kk], y[kk]);
        }
        Cost lhs = f.at(lo) + f.at(hi);
        Cost rhs = f.at(x) + f.at(y);
        if (lhs > rhs)
          return Violation{lang.name(t.function), 2, x, y, {}, lhs, rhs};
      }
  }
  return std::nullopt;
}

void apply_update(Stage2State& state, const BlockResult& blocks,
                  const Stage2Config& config, const Instance* debug_instance) {
  if (config.debug_checks) {
    if (auto clause = check_block_invariants(state, blocks)) {
      static const char* names[] = {"(a)", "(b)", "(c)", "(d)"};
      throw InternalError(std::string("block invariant ") +
                          names[static_cast<int>(*clause)] + " violated");
    }
  }
  const int d = state.micro.domain_size();
  for (int i : blocks.u) {
    for (int a = 0; a < d; ++a) {
      if (!((blocks.a_sets[i] >> a) & 1u)) continue;
      for (int b = 0; b < d; ++b) {
        if (!((blocks.b_sets[i] >> b) & 1u)) continue;
        state.m[i].insert(a, b);
        state.pairs[i].set(a, b, a, b);
        state.pairs[i].set(b, a, a, b);
      }
    }
  }
  if (config.debug_checks && debug_instance) {
    if (auto v = verify_instance_pair(*debug_instance, state))
      throw InternalError("update broke the binary inequality on function " +
                          v->function);
  }
}

Stage2Trace run_stage2(Stage2State& state, const Instance* debug_instance,
                       const Stage2Config& config) {
  Stage2Trace trace;
  const int n = state.micro.num_vars();
  std::uint64_t max_iterations = 1;
  for (int i = 0; i < n; ++i) {
    int di = std::popcount(state.micro.domain(i));
    max_iterations += static_cast<std::uint64_t>(di) * (di - 1) / 2;
  }
  for (std::uint64_t iter = 0; iter <= max_iterations; ++iter) {
    int k = -1;
    std::pair<int, int> seed{-1, -1};
    for (int i = 0; i < n && k == -1; ++i) {
      auto pairs = state.mbar_pairs(i);
      if (!pairs.empty()) {
        k = i;
        seed = pairs.front();
      }
    }
    if (k == -1) return trace;  // M_i = P_i everywhere
    BlockResult blocks = find_blocks(state, k, seed);
    apply_update(state, blocks, config, debug_instance);
    Stage2Trace::Step step;
    step.k = k;
    step.seed = seed;
    step.u = blocks.u;
    for (int i : blocks.u)
      step.ab.emplace_back(blocks.a_sets[i], blocks.b_sets[i]);
    trace.steps.push_back(std::move(step));
    if (config.debug_checks && !check_cross_coherence(state))
      throw InternalError("cross-pair coherence lost after update");
  }
  throw InternalError("commutativity growth failed to terminate");
}

}  // namespace cvcsp
