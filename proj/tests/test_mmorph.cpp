#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>

#include "cvcsp/mmorph.hpp"

using namespace cvcsp;

namespace {

Language single_fn_language(CostFunction f, const char* name = "f") {
  Language lang(Domain::of_size(f.domain_size()));
  lang.add(name, std::move(f));
  return lang;
}

CostFunction boolean_binary(Cost c00, Cost c01, Cost c10, Cost c11) {
  CostFunction f(2, 2);
  f.set(std::array{0, 0}, c00);
  f.set(std::array{0, 1}, c01);
  f.set(std::array{1, 0}, c10);
  f.set(std::array{1, 1}, c11);
  return f;
}

CostFunction f_eq() {
  return boolean_binary(Cost(), Cost::ratio(1), Cost::ratio(1), Cost());
}
CostFunction f_cut() {
  return boolean_binary(Cost::ratio(1), Cost(), Cost(), Cost::ratio(1));
}
CostFunction crisp_ne() {
  return boolean_binary(Cost::infinity(), Cost(), Cost(), Cost::infinity());
}

// Conservative pair tables driven by per-pair behavior digits (0 =
// commutative low, 1 = first projection, 2 = second projection, 3 =
// commutative high).
BinaryPair pair_from_digits(int d, const std::vector<int>& digits) {
  BinaryPair p(d);
  int idx = 0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b, ++idx) {
      switch (digits[idx]) {
        case 0: p.set(a, b, a, b); p.set(b, a, a, b); break;
        case 1: p.set(a, b, a, b); p.set(b, a, b, a); break;
        case 2: p.set(a, b, b, a); p.set(b, a, a, b); break;
        default: p.set(a, b, b, a); p.set(b, a, b, a); break;
      }
    }
  return p;
}

PairSet m_from_digits(int d, const std::vector<int>& digits) {
  PairSet m(d);
  int idx = 0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b, ++idx)
      if (digits[idx] == 0 || digits[idx] == 3) m.insert(a, b);
  return m;
}

template <typename Fn>
void for_each_conservative_pair(int d, Fn&& fn) {
  const int np = d * (d - 1) / 2;
  std::vector<int> digits(np, 0);
  std::uint64_t total = 1;
  for (int i = 0; i < np; ++i) total *= 4;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int i = 0; i < np; ++i) {
      digits[i] = static_cast<int>(c % 4);
      c /= 4;
    }
    fn(pair_from_digits(d, digits), m_from_digits(d, digits));
  }
}

}  // namespace

TEST_CASE("pair set basics") {
  PairSet m(3);
  CHECK(m.size() == 0);
  m.insert(2, 0);
  CHECK(m.contains(0, 2));
  CHECK(m.contains(2, 0));
  CHECK_FALSE(m.contains(0, 1));
  CHECK(m.complement().size() == 2);
  CHECK(m.pairs() == std::vector<std::pair<int, int>>{{0, 2}});
  CHECK_THROWS_AS(m.contains(1, 1), StructuralError);
}

TEST_CASE("check_shapes: min/max is an STP on the full pair set") {
  BinaryPair p = BinaryPair::min_max(2);
  PairSet m(2);
  m.insert(0, 1);
  TernaryTriple t = canonical_mjn(p, m);
  CHECK(check_shapes(p, t, m));
}

TEST_CASE("check_shapes: projections fail commutativity on M") {
  BinaryPair p = BinaryPair::projections(2);
  PairSet m(2);
  m.insert(0, 1);
  TernaryTriple t = canonical_mjn(p, m);
  CHECK_FALSE(check_shapes(p, t, m));
  PairSet empty(2);
  TernaryTriple t2 = canonical_mjn(p, empty);
  CHECK(check_shapes(p, t2, empty));
}

TEST_CASE("check_shapes: minority in a majority slot is rejected") {
  BinaryPair p = BinaryPair::projections(2);
  PairSet empty(2);
  TernaryTriple t = canonical_mjn(p, empty);
  t.set(0, 0, 1, 1, 0, 0);
  CHECK_FALSE(check_shapes(p, t, empty));
}

TEST_CASE("check_shapes: size mismatch is a structural error") {
  BinaryPair p = BinaryPair::min_max(2);
  TernaryTriple t(3);
  PairSet m(2);
  CHECK_THROWS_AS(check_shapes(p, t, m), StructuralError);
}

TEST_CASE("verify: equality function under min/max is a multimorphism") {
  Language lang = single_fn_language(f_eq());
  BinaryPair p = BinaryPair::min_max(2);
  PairSet m(2);
  m.insert(0, 1);
  TernaryTriple t = canonical_mjn(p, m);
  CHECK_FALSE(verify_multimorphism(lang, p, t).has_value());
}

TEST_CASE("verify: the parity function violates min/max at the diagonal pair") {
  Language lang = single_fn_language(f_cut());
  BinaryPair p = BinaryPair::min_max(2);
  auto v = verify_pair(lang, p);
  REQUIRE(v.has_value());
  CHECK(v->order == 2);
  CHECK(v->x == std::vector<int>{0, 1});
  CHECK(v->y == std::vector<int>{1, 0});
  CHECK(v->lhs == Cost::ratio(2));
  CHECK(v->rhs == Cost());
}

TEST_CASE("verify: conservative ops are exact on unary functions") {
  Language lang(Domain::of_size(3));
  CostFunction u(1, 3);
  u.set(std::array{0}, Cost::ratio(7));
  u.set(std::array{1}, Cost::infinity());
  u.set(std::array{2}, Cost::ratio(1, 2));
  lang.add("u", std::move(u));
  BinaryPair p = BinaryPair::min_max(3);
  PairSet m = p.commutative_pairs();
  TernaryTriple t = canonical_mjn(p, m);
  CHECK_FALSE(verify_multimorphism(lang, p, t).has_value());
}

TEST_CASE("classify: parity language is NP-hard under both search orders") {
  Language lang = single_fn_language(f_cut());
  Classification c = classify(lang);
  CHECK(c.verdict == Classification::Verdict::NPHard);
  CHECK_FALSE(c.witness.has_value());

  ClassifyBudget reversed;
  reversed.reverse_order = true;
  CHECK(classify(lang, reversed).verdict == Classification::Verdict::NPHard);
}

TEST_CASE("classify: equality language with the min/max witness") {
  Language lang = single_fn_language(f_eq());
  Classification c = classify(lang);
  REQUIRE(c.verdict == Classification::Verdict::Tractable);
  const Witness& w = *c.witness;
  CHECK(w.m.contains(0, 1));
  CHECK(w.pair == BinaryPair::min_max(2));
  CHECK(check_shapes(w.pair, w.triple, w.m));
  CHECK_FALSE(verify_multimorphism(lang, w.pair, w.triple).has_value());
}

TEST_CASE("classify: crisp disequality needs the projection pair") {
  Language lang = single_fn_language(crisp_ne());
  Classification c = classify(lang);
  REQUIRE(c.verdict == Classification::Verdict::Tractable);
  const Witness& w = *c.witness;
  CHECK(w.m.size() == 0);
  CHECK(w.pair == BinaryPair::projections(2));
  CHECK(w.triple.mj1(0, 0, 1) == 0);
  CHECK(w.triple.mn3(0, 0, 1) == 1);
  CHECK_FALSE(verify_multimorphism(lang, w.pair, w.triple).has_value());
}

TEST_CASE("classify: determinism") {
  Language lang = single_fn_language(f_eq());
  Classification a = classify(lang);
  Classification b = classify(lang);
  CHECK(a.nodes == b.nodes);
  CHECK(a.witness->pair == b.witness->pair);
  CHECK(a.witness->triple == b.witness->triple);
  CHECK(a.witness->m == b.witness->m);
}

TEST_CASE("classify: domain cap raises a budget error") {
  Language lang(Domain::of_size(5));
  CHECK_THROWS_AS(classify(lang), BudgetError);
}

TEST_CASE("classify: node budget exhaustion yields Unknown") {
  Language lang = single_fn_language(f_cut());
  ClassifyBudget tiny;
  tiny.max_nodes = 2;
  Classification c = classify(lang, tiny);
  CHECK(c.verdict == Classification::Verdict::Unknown);
  CHECK(c.nodes == 3);
}

TEST_CASE("corollary-13 cross-check on all {0,1,2}-valued Boolean tables") {
  for (int c00 = 0; c00 < 3; ++c00)
    for (int c01 = 0; c01 < 3; ++c01)
      for (int c10 = 0; c10 < 3; ++c10)
        for (int c11 = 0; c11 < 3; ++c11) {
          Language lang = single_fn_language(
              boolean_binary(Cost::ratio(c00), Cost::ratio(c01),
                             Cost::ratio(c10), Cost::ratio(c11)));
          bool submodular = c00 + c11 <= c01 + c10;
          Classification c = classify(lang);
          CHECK(c.verdict == (submodular
                                  ? Classification::Verdict::Tractable
                                  : Classification::Verdict::NPHard));
        }
}

// The four absorption identities presuppose the first-projection
// orientation on non-commutative pairs (the orientation the graph
// construction emits); the second orientation genuinely breaks
// a meet (b join a) = a. Enumerate behaviors {commutative-low, first
// projection, commutative-high} exhaustively.
TEST_CASE("absorption identities, exhaustive over normal-form pairs, |D| <= 5") {
  for (int d = 2; d <= 5; ++d) {
    const int np = d * (d - 1) / 2;
    std::uint64_t total = 1;
    for (int i = 0; i < np; ++i) total *= 3;
    long long failures = 0;
    std::vector<int> digits(np);
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      for (int i = 0; i < np; ++i) {
        static const int kBehaviors[3] = {0, 1, 3};
        digits[i] = kBehaviors[c % 3];
        c /= 3;
      }
      BinaryPair p = pair_from_digits(d, digits);
      PairSet m = m_from_digits(d, digits);
      TernaryTriple t = canonical_mjn(p, m);
      REQUIRE(check_shapes(p, t, m));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (p.meet(a, p.join(a, b)) != a) ++failures;
          if (p.meet(a, p.join(b, a)) != a) ++failures;
          if (p.join(p.meet(a, b), a) != a) ++failures;
          if (p.join(p.meet(b, a), a) != a) ++failures;
        }
    }
    CHECK(failures == 0);
  }
}

// The second projection is shape-valid but breaks two of the four
// identities; this pins the normal-form restriction above.
TEST_CASE("second projection orientation violates an absorption identity") {
  BinaryPair p(2);
  p.set(0, 1, 1, 0);
  p.set(1, 0, 0, 1);
  PairSet empty(2);
  TernaryTriple t = canonical_mjn(p, empty);
  CHECK(check_shapes(p, t, empty));
  CHECK(p.meet(0, p.join(1, 0)) != 0);
}

TEST_CASE("derived majority: formula spot checks under min/max") {
  BinaryPair p = BinaryPair::min_max(2);
  PairSet m(2);
  m.insert(0, 1);
  TernaryTriple t = canonical_mjn(p, m);
  TernaryOp mu = build_majority(p, t);
  CHECK(mu(0, 0, 1) == 0);
  CHECK(mu(1, 0, 1) == 1);
  for (int a = 0; a < 2; ++a) CHECK(mu(a, a, a) == a);
}

TEST_CASE("derived majority satisfies the majority law, exhaustive |D| <= 4") {
  for (int d = 2; d <= 4; ++d) {
    long long failures = 0;
    for_each_conservative_pair(d, [&](const BinaryPair& p, const PairSet& m) {
      TernaryTriple t = canonical_mjn(p, m);
      REQUIRE(check_shapes(p, t, m));
      TernaryOp mu = build_majority(p, t);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (a == b) continue;
          if (mu(a, a, b) != a || mu(a, b, a) != a || mu(b, a, a) != a)
            ++failures;
        }
    });
    CHECK(failures == 0);
  }
}

TEST_CASE("derived majority preserves dom f for witnessed languages") {
  for (CostFunction fn : {f_eq(), crisp_ne(), f_cut()}) {
    Language lang = single_fn_language(std::move(fn));
    Classification c = classify(lang);
    if (c.verdict != Classification::Verdict::Tractable) continue;
    TernaryOp mu = build_majority(c.witness->pair, c.witness->triple);
    for (int i = 0; i < lang.size(); ++i)
      CHECK(is_polymorphism(mu, lang.function(i)));
  }
}

TEST_CASE("classify handles a mixed crisp-plus-unary language") {
  Language lang(Domain::of_size(2));
  lang.add("ne", crisp_ne());
  CostFunction u(1, 2);
  u.set(std::array{0}, Cost::ratio(3));
  u.set(std::array{1}, Cost());
  lang.add("u", std::move(u));
  Classification c = classify(lang);
  REQUIRE(c.verdict == Classification::Verdict::Tractable);
  CHECK(check_shapes(c.witness->pair, c.witness->triple, c.witness->m));
  CHECK_FALSE(
      verify_multimorphism(lang, c.witness->pair, c.witness->triple));
}
