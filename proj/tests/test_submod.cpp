#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>

#include "cvcsp/submod.hpp"

using namespace cvcsp;

namespace {

// Random binary submodular tables built constructively: non-positive
// second differences accumulated over the grid on top of modular parts.
CostFunction random_submodular(int d, std::mt19937_64& eng) {
  std::vector<std::vector<long long>> v(d, std::vector<long long>(d, 0));
  std::vector<long long> row(d, 0), col(d, 0);
  for (int r = 1; r < d; ++r)
    row[r] = row[r - 1] + static_cast<long long>(eng() % 7);
  for (int s = 1; s < d; ++s)
    col[s] = col[s - 1] + static_cast<long long>(eng() % 7);
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) v[r][s] = row[r] + col[s];
  for (int r = 1; r < d; ++r)
    for (int s = 1; s < d; ++s) {
      long long d2 = -static_cast<long long>(eng() % 5);
      v[r][s] = v[r - 1][s] + v[r][s - 1] - v[r - 1][s - 1] + d2;
    }
  long long min_v = 0;
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s) min_v = std::min(min_v, v[r][s]);
  CostFunction f(2, d);
  for (int r = 0; r < d; ++r)
    for (int s = 0; s < d; ++s)
      f.set(std::array{r, s}, Cost::ratio(v[r][s] - min_v));
  return f;
}

CostFunction random_unary(int d, std::mt19937_64& eng) {
  CostFunction u(1, d);
  for (int a = 0; a < d; ++a) u.set(std::array{a}, Cost::ratio(eng() % 9));
  return u;
}

Instance random_submodular_instance(int d, int vars, int binary_terms,
                                    std::mt19937_64& eng) {
  Language lang(Domain::of_size(d));
  for (int t = 0; t < binary_terms; ++t)
    lang.add("b" + std::to_string(t), random_submodular(d, eng));
  for (int i = 0; i < vars; ++i)
    lang.add("u" + std::to_string(i), random_unary(d, eng));
  Instance inst(std::make_shared<const Language>(std::move(lang)), vars);
  for (int t = 0; t < binary_terms; ++t) {
    int i = static_cast<int>(eng() % vars);
    int j = static_cast<int>(eng() % (vars - 1));
    if (j >= i) ++j;
    inst.add_term("b" + std::to_string(t), {i, j});
  }
  for (int i = 0; i < vars; ++i)
    inst.add_term("u" + std::to_string(i), {i});
  return inst;
}

}  // namespace

TEST_CASE("tournament order: min/max sorts ascending") {
  TournamentOrder t = tournament_order(BinaryPair::min_max(3), 0b111);
  REQUIRE(t.total());
  CHECK(t.order == std::vector<int>{0, 1, 2});
}

TEST_CASE("tournament order: restricted domain") {
  TournamentOrder t = tournament_order(BinaryPair::min_max(3), 0b101);
  REQUIRE(t.total());
  CHECK(t.order == std::vector<int>{0, 2});
}

TEST_CASE("tournament order: rock-paper-scissors reports a 3-cycle") {
  BinaryPair p(3);
  auto orient = [&](int lo, int hi) {  // lo beats into hi: lo join hi = hi
    p.set(lo, hi, lo, hi);
    p.set(hi, lo, lo, hi);
  };
  orient(0, 1);
  orient(1, 2);
  orient(2, 0);
  TournamentOrder t = tournament_order(p, 0b111);
  REQUIRE_FALSE(t.total());
  auto [a, b, c] = *t.cycle;
  CHECK(p.join(a, b) == b);
  CHECK(p.join(b, c) == c);
  CHECK(p.join(c, a) == a);
}

TEST_CASE("tournament order: both Boolean orientations") {
  BinaryPair hi_lo(2);
  hi_lo.set(0, 1, 1, 0);
  hi_lo.set(1, 0, 1, 0);
  CHECK(tournament_order(hi_lo, 0b11).order == std::vector<int>{1, 0});
  CHECK(tournament_order(BinaryPair::min_max(2), 0b11).order ==
        std::vector<int>{0, 1});
}

TEST_CASE("tournament order requires commutativity") {
  CHECK_THROWS_AS(tournament_order(BinaryPair::projections(2), 0b11),
                  StructuralError);
}

TEST_CASE("single unary: two threshold nodes, cut value is the minimum") {
  Language lang(Domain::of_size(3));
  CostFunction u(1, 3);
  u.set(std::array{0}, Cost::ratio(5));
  u.set(std::array{1}, Cost::ratio(2));
  u.set(std::array{2}, Cost::ratio(7));
  lang.add("u", std::move(u));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 1);
  inst.add_term("u", {0});

  std::vector<TournamentOrder> orders{
      tournament_order(BinaryPair::min_max(3), 0b111)};
  std::vector<std::uint32_t> masks{0b111};
  MinCutModel model = build_mincut(inst, orders, masks);
  CHECK(model.level_nodes[0].size() == 2);
  FlowValue total = model.network.offset + model.network.max_flow();
  CHECK(total.to_cost() == Cost::ratio(2));
}

TEST_CASE("two-variable example matches the exhaustive oracle") {
  Language lang(Domain::of_size(2));
  CostFunction u1(1, 2), u2(1, 2), diff(2, 2);
  u1.set(std::array{0}, Cost());
  u1.set(std::array{1}, Cost::ratio(2));
  u2.set(std::array{0}, Cost::ratio(1));
  u2.set(std::array{1}, Cost());
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      diff.set(std::array{a, b}, a == b ? Cost() : Cost::ratio(1));
  lang.add("u1", std::move(u1));
  lang.add("u2", std::move(u2));
  lang.add("diff", std::move(diff));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
  inst.add_term("u1", {0});
  inst.add_term("u2", {1});
  inst.add_term("diff", {0, 1});

  Stage3Result r = solve_stage3(inst, BinaryPair::min_max(2));
  CHECK(r.backend == Stage3Result::Backend::MinCut);
  CHECK(r.cost == Cost::ratio(1));
  CHECK(r.cost == brute_force_solve(inst).cost);
  CHECK(eval_instance(inst, r.assignment) == r.cost);
}

TEST_CASE("all-zero instance decodes to the first label in order") {
  Language lang(Domain::of_size(3));
  CostFunction z(2, 3);
  lang.add("z", std::move(z));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 3);
  inst.add_term("z", {0, 1});
  inst.add_term("z", {1, 2});
  Stage3Result r = solve_stage3(inst, BinaryPair::min_max(3));
  CHECK(r.cost == Cost());
  CHECK(r.assignment == Assignment{0, 0, 0});
}

TEST_CASE("infinite barrier forces a label") {
  Language lang(Domain::of_size(2));
  CostFunction pin(1, 2, Cost::infinity());
  pin.set(std::array{1}, Cost());
  lang.add("pin", std::move(pin));
  CostFunction prefer0(1, 2);
  prefer0.set(std::array{1}, Cost::ratio(3));
  lang.add("prefer0", std::move(prefer0));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
  inst.add_term("pin", {0});
  inst.add_term("prefer0", {0});
  inst.add_term("prefer0", {1});
  Stage3Result r = solve_stage3(inst, BinaryPair::min_max(2));
  CHECK(r.assignment[0] == 1);  // forced by the barrier
  CHECK(r.assignment[1] == 0);
  CHECK(r.cost == Cost::ratio(3));
}

TEST_CASE("infinite minimum signals infeasibility") {
  Language lang(Domain::of_size(2));
  CostFunction never(1, 2, Cost::infinity());
  lang.add("never", std::move(never));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 1);
  inst.add_term("never", {0});
  Stage3Result r = solve_stage3(inst, BinaryPair::min_max(2));
  CHECK(r.cost == Cost::infinity());
}

TEST_CASE("supermodular tables raise NotSubmodular with the tuple pair") {
  Language lang(Domain::of_size(2));
  CostFunction cut(2, 2);
  cut.set(std::array{0, 0}, Cost::ratio(1));
  cut.set(std::array{1, 1}, Cost::ratio(1));
  lang.add("cut", std::move(cut));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
  inst.add_term("cut", {0, 1});
  try {
    solve_stage3(inst, BinaryPair::min_max(2));
    FAIL("expected NotSubmodular");
  } catch (const NotSubmodular& e) {
    CHECK(e.term == 0);
    // the violating lattice pair under the ascending orders
    CHECK(e.x == std::vector<int>{1, 0});
    CHECK(e.y == std::vector<int>{0, 1});
  }
}

TEST_CASE("NotSubmodular fires iff the lattice inequality fails") {
  std::mt19937_64 eng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(eng() % 3);
    CostFunction f(2, d);
    for (std::uint64_t t = 0; t < f.tuple_count(); ++t)
      f.set_index(t, Cost::ratio(eng() % 6));
    Language lang(Domain::of_size(d));
    lang.add("f", f);
    Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
    inst.add_term("f", {0, 1});

    // direct scan of the lattice inequality under ascending orders
    bool submodular = true;
    for (int x1 = 0; x1 < d; ++x1)
      for (int x2 = 0; x2 < d; ++x2)
        for (int y1 = 0; y1 < d; ++y1)
          for (int y2 = 0; y2 < d; ++y2) {
            std::array lo{std::min(x1, y1), std::min(x2, y2)};
            std::array hi{std::max(x1, y1), std::max(x2, y2)};
            std::array x{x1, x2}, y{y1, y2};
            if (f.at(lo) + f.at(hi) > f.at(x) + f.at(y)) submodular = false;
          }
    bool threw = false;
    try {
      std::vector<TournamentOrder> orders(
          2, tournament_order(BinaryPair::min_max(d), (1u << d) - 1u));
      std::vector<std::uint32_t> masks(2, (1u << d) - 1u);
      build_mincut(inst, orders, masks);
    } catch (const NotSubmodular&) {
      threw = true;
    }
    CHECK(threw == !submodular);
  }
}

TEST_CASE("deliberately supermodular inputs always raise NotSubmodular") {
  std::mt19937_64 eng(53);
  int fired = 0;
  const int cases = 120;
  for (int trial = 0; trial < cases; ++trial) {
    const int d = 2 + static_cast<int>(eng() % 3);
    // strictly positive second difference somewhere
    CostFunction f(2, d);
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s)
        f.set(std::array{r, s},
              Cost::ratio(static_cast<long long>(r) * s * (1 + eng() % 3)));
    Language lang(Domain::of_size(d));
    lang.add("f", std::move(f));
    Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
    inst.add_term("f", {0, 1});
    try {
      solve_stage3(inst, BinaryPair::min_max(d));
    } catch (const NotSubmodular&) {
      ++fired;
    }
  }
  CHECK(fired == cases);
}

TEST_CASE("min-cut path equals brute force on random submodular instances") {
  std::mt19937_64 eng(59);
  for (int trial = 0; trial < 400; ++trial) {
    const int d = 2 + static_cast<int>(eng() % 3);  // up to 4 labels
    const int vars = 2 + static_cast<int>(eng() % 6);
    Instance inst =
        random_submodular_instance(d, vars, 1 + static_cast<int>(eng() % 6), eng);
    Stage3Result r = solve_stage3(inst, BinaryPair::min_max(d));
    CHECK(r.backend == Stage3Result::Backend::MinCut);
    SolveOutput oracle = brute_force_solve(inst);
    CHECK(r.cost == oracle.cost);
    CHECK(eval_instance(inst, r.assignment) == r.cost);
  }
}

TEST_CASE("mixed per-variable orientations handle crisp disequality") {
  Language lang(Domain::of_size(2));
  CostFunction ne(2, 2, Cost::infinity());
  ne.set(std::array{0, 1}, Cost());
  ne.set(std::array{1, 0}, Cost());
  lang.add("ne", std::move(ne));
  CostFunction u(1, 2);
  u.set(std::array{1}, Cost::ratio(1));
  lang.add("u", std::move(u));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 2);
  inst.add_term("ne", {0, 1});
  inst.add_term("u", {0});
  inst.add_term("u", {1});

  // Variable 0 ordered (0,1), variable 1 ordered (1,0): the disequality
  // becomes submodular under the mixed orders.
  std::vector<BinaryPair> pairs;
  pairs.push_back(BinaryPair::min_max(2));
  BinaryPair rev(2);
  rev.set(0, 1, 1, 0);
  rev.set(1, 0, 1, 0);
  pairs.push_back(rev);
  std::vector<std::uint32_t> masks(2, 0b11);
  Stage3Result r = solve_stage3(inst, pairs, masks);
  CHECK(r.backend == Stage3Result::Backend::MinCut);
  CHECK(r.cost == Cost::ratio(1));
  CHECK(eval_instance(inst, r.assignment) == Cost::ratio(1));
}

TEST_CASE("fallback: cyclic tournament routes to brute force") {
  BinaryPair p(3);
  auto orient = [&](int lo, int hi) {
    p.set(lo, hi, lo, hi);
    p.set(hi, lo, lo, hi);
  };
  orient(0, 1);
  orient(1, 2);
  orient(2, 0);
  Language lang(Domain::of_size(3));
  CostFunction u(1, 3);
  u.set(std::array{0}, Cost::ratio(2));
  u.set(std::array{1}, Cost::ratio(1));
  u.set(std::array{2}, Cost::ratio(3));
  lang.add("u", std::move(u));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 1);
  inst.add_term("u", {0});
  Stage3Result r = solve_stage3(inst, p);
  CHECK(r.backend == Stage3Result::Backend::Brute);
  CHECK(r.cost == Cost::ratio(1));

  Stage3Options strict;
  strict.require_mincut = true;
  CHECK_THROWS_AS(solve_stage3(inst, p, strict), BudgetError);
}

TEST_CASE("fallback: ternary terms route to brute force") {
  Language lang(Domain::of_size(2));
  CostFunction t3(3, 2);
  t3.set(std::array{1, 1, 1}, Cost::ratio(5));
  lang.add("t3", std::move(t3));
  Instance inst(std::make_shared<const Language>(std::move(lang)), 3);
  inst.add_term("t3", {0, 1, 2});
  Stage3Result r = solve_stage3(inst, BinaryPair::min_max(2));
  CHECK(r.backend == Stage3Result::Backend::Brute);
  CHECK(r.cost == Cost());
}

TEST_CASE("max flow is deterministic") {
  std::mt19937_64 eng(61);
  Instance inst = random_submodular_instance(3, 5, 4, eng);
  Stage3Result a = solve_stage3(inst, BinaryPair::min_max(3));
  Stage3Result b = solve_stage3(inst, BinaryPair::min_max(3));
  CHECK(a.cost == b.cost);
  CHECK(a.assignment == b.assignment);
  CHECK(a.augmentations == b.augmentations);
}

TEST_CASE("flow network dump lists arcs") {
  FlowNetwork net;
  int n = net.add_node();
  net.add_arc(net.source(), n, FlowValue::from_cost(Cost::ratio(3)));
  net.add_arc(n, net.sink(), FlowValue::from_cost(Cost::infinity()));
  std::string text = net.dump();
  CHECK(text.find("nodes 3") != std::string::npos);
  CHECK(text.find("1inf") != std::string::npos);
}
