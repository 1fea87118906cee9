#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>

#include "cvcsp/gadgets.hpp"
#include "cvcsp/stage2.hpp"

using namespace cvcsp;

namespace {

Witness projection_witness(int d) {
  BinaryPair p = BinaryPair::projections(d);
  PairSet m(d);
  return Witness{m, p, canonical_mjn(p, m)};
}

Microstructure full_micro(int n, int d) {
  Microstructure m(n, d);
  std::uint32_t full = (1u << d) - 1u;
  for (int i = 0; i < n; ++i) m.set_domain(i, full);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m.set_rel(i, j, m.full_rel(full, full));
  return m;
}

std::uint64_t rel_bits(int d, std::initializer_list<std::pair<int, int>> pairs) {
  std::uint64_t bits = 0;
  for (auto [a, b] : pairs) bits |= 1ull << (a * d + b);
  return bits;
}

// Crisp disequality with a unary bias; classifies tractable with an empty
// commutative set, so stage 2 has real work to do.
std::shared_ptr<const Language> diseq_language() {
  Language lang(Domain::of_size(2));
  CostFunction ne(2, 2, Cost::infinity());
  ne.set(std::array{0, 1}, Cost());
  ne.set(std::array{1, 0}, Cost());
  lang.add("ne", std::move(ne));
  CostFunction u(1, 2);
  u.set(std::array{0}, Cost::ratio(1));
  u.set(std::array{1}, Cost());
  lang.add("u", std::move(u));
  return std::make_shared<const Language>(std::move(lang));
}

// Crisp band relation + linear distance cost on three labels (the Potts
// table is not submodular beyond two labels, so the soft part is the
// convex distance instead).
std::shared_ptr<const Language> mixed_language() {
  Language lang(Domain::of_size(3));
  CostFunction iv(2, 3, Cost::infinity());
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      if (std::abs(x - y) <= 1) iv.set(std::array{x, y}, Cost());
  lang.add("iv", std::move(iv));
  CostFunction dist(2, 3);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      dist.set(std::array{x, y}, Cost::ratio(std::abs(x - y), 2));
  lang.add("dist", std::move(dist));
  CostFunction u(1, 3);
  u.set(std::array{0}, Cost());
  u.set(std::array{1}, Cost::ratio(1, 2));
  u.set(std::array{2}, Cost::ratio(2));
  lang.add("u", std::move(u));
  return std::make_shared<const Language>(std::move(lang));
}

}  // namespace

TEST_CASE("find_blocks: full relations stop at the seed variable") {
  Stage2State s = Stage2State::from_witness(full_micro(3, 2),
                                            projection_witness(2));
  BlockResult r = find_blocks(s, 0, {0, 1});
  CHECK(r.u == std::vector<int>{0});
  CHECK(r.a_sets[0] == 0b01);
  CHECK(r.b_sets[0] == 0b10);
  CHECK_FALSE(check_block_invariants(s, r).has_value());
}

TEST_CASE("find_blocks: a perfect matching pulls the other variable in") {
  Microstructure m = full_micro(2, 2);
  m.set_rel(0, 1, rel_bits(2, {{0, 0}, {1, 1}}));
  Stage2State s = Stage2State::from_witness(std::move(m),
                                            projection_witness(2));
  BlockResult r = find_blocks(s, 0, {0, 1});
  CHECK(r.u == std::vector<int>{0, 1});
  CHECK(r.a_sets[1] == 0b01);
  CHECK(r.b_sets[1] == 0b10);
  CHECK_FALSE(check_block_invariants(s, r).has_value());
}

TEST_CASE("find_blocks: closure adds a label on the seed side") {
  // D_k = {0,1,2}, D_i = {0,1}, rel = {(0,0),(2,0),(1,1)}.
  Microstructure m(2, 3);
  m.set_domain(0, 0b111);
  m.set_domain(1, 0b011);
  m.set_rel(0, 1, rel_bits(3, {{0, 0}, {2, 0}, {1, 1}}));
  Stage2State s = Stage2State::from_witness(std::move(m),
                                            projection_witness(3));
  BlockResult r = find_blocks(s, 0, {0, 1});
  CHECK(r.u == std::vector<int>{0, 1});
  CHECK(r.a_sets[0] == 0b101);  // {0, 2}
  CHECK(r.b_sets[0] == 0b010);  // {1}
  CHECK(r.a_sets[1] == 0b001);
  CHECK(r.b_sets[1] == 0b010);
}

TEST_CASE("find_blocks rejects a commutative or out-of-domain seed") {
  Stage2State s = Stage2State::from_witness(full_micro(2, 2),
                                            projection_witness(2));
  s.m[0].insert(0, 1);
  CHECK_THROWS_AS(find_blocks(s, 0, {0, 1}), StructuralError);
  CHECK_THROWS_AS(find_blocks(s, 1, {0, 0}), StructuralError);
}

TEST_CASE("apply_update: seed pair becomes commutative with the A side low") {
  Stage2State s = Stage2State::from_witness(full_micro(3, 2),
                                            projection_witness(2));
  BlockResult r = find_blocks(s, 0, {0, 1});
  int before = s.m[0].size();
  apply_update(s, r);
  CHECK(s.m[0].size() == before + 1);
  CHECK(s.m[0].contains(0, 1));
  CHECK(s.pairs[0].meet(0, 1) == 0);
  CHECK(s.pairs[0].meet(1, 0) == 0);
  CHECK(s.pairs[0].join(0, 1) == 1);
  // other variables untouched
  CHECK(s.m[1].size() == 0);
}

TEST_CASE("run_stage2: already commutative everywhere is a no-op") {
  Microstructure m = full_micro(2, 2);
  BinaryPair p = BinaryPair::min_max(2);
  PairSet full(2);
  full.insert(0, 1);
  Witness w{full, p, canonical_mjn(p, full)};
  Stage2State s = Stage2State::from_witness(std::move(m), w);
  Stage2Trace t = run_stage2(s, nullptr);
  CHECK(t.steps.empty());
  CHECK(s.pairs[0] == p);
}

TEST_CASE("run_stage2: one Boolean pair takes one iteration") {
  Stage2State s = Stage2State::from_witness(full_micro(1, 2),
                                            projection_witness(2));
  Stage2Trace t = run_stage2(s, nullptr);
  CHECK(t.steps.size() == 1);
  CHECK(t.steps[0].k == 0);
  CHECK(t.steps[0].seed == std::pair{0, 1});
  CHECK(s.mbar_pairs(0).empty());
}

TEST_CASE("run_stage2 on seeded instances keeps every invariant") {
  std::mt19937_64 eng(41);
  int consistent_runs = 0;
  for (auto lang : {diseq_language(), mixed_language()}) {
    Classification cls = classify(*lang);
    REQUIRE(cls.verdict == Classification::Verdict::Tractable);
    for (int trial = 0; trial < 120; ++trial) {
      Instance inst = random_instance(lang, 2 + trial % 5, 1 + trial % 7,
                                      eng());
      Microstructure micro = build_microstructure(inst);
      if (enforce_strong3(micro) == Strong3::Infeasible) continue;
      bool nonempty = true;
      for (int i = 0; i < micro.num_vars(); ++i)
        nonempty = nonempty && micro.domain(i) != 0;
      REQUIRE(nonempty);
      ++consistent_runs;

      Stage2State state = Stage2State::from_witness(micro, *cls.witness);
      std::uint64_t bound = 0;
      for (int i = 0; i < micro.num_vars(); ++i) {
        int di = std::popcount(micro.domain(i));
        bound += static_cast<std::uint64_t>(di) * (di - 1) / 2;
      }
      // debug_checks asserts the block clauses, the cross-pair coherence
      // and the full binary-inequality sweep after every update
      Stage2Trace t = run_stage2(state, &inst, Stage2Config{true});
      CHECK(t.steps.size() <= bound);
      for (int i = 0; i < micro.num_vars(); ++i)
        CHECK(state.mbar_pairs(i).empty());
      CHECK_FALSE(verify_instance_pair(inst, state).has_value());
      CHECK(state.micro == micro);  // relations and domains frozen
    }
  }
  CHECK(consistent_runs >= 200);
}

TEST_CASE("total commutative mass grows strictly every iteration") {
  auto lang = diseq_language();
  Classification cls = classify(*lang);
  REQUIRE(cls.verdict == Classification::Verdict::Tractable);
  std::mt19937_64 eng(43);
  for (int trial = 0; trial < 20; ++trial) {
    Instance inst = random_instance(lang, 4, 5, eng());
    Microstructure micro = build_microstructure(inst);
    if (enforce_strong3(micro) == Strong3::Infeasible) continue;
    Stage2State state = Stage2State::from_witness(micro, *cls.witness);
    int mass = 0;
    for (const PairSet& m : state.m) mass += m.size();
    for (;;) {
      int k = -1;
      std::pair<int, int> seed{-1, -1};
      for (int i = 0; i < micro.num_vars() && k == -1; ++i) {
        auto pairs = state.mbar_pairs(i);
        if (!pairs.empty()) {
          k = i;
          seed = pairs.front();
        }
      }
      if (k == -1) break;
      apply_update(state, find_blocks(state, k, seed), Stage2Config{true},
                   &inst);
      int new_mass = 0;
      for (const PairSet& m : state.m) new_mass += m.size();
      CHECK(new_mass > mass);
      mass = new_mass;
    }
  }
}
