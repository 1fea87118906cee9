#include "cvcsp/mmorph.hpp"

#include <algorithm>
#include <array>

namespace cvcsp {

PairSet::PairSet(int domain_size)
    : dsize_(domain_size),
      bits_(static_cast<std::size_t>(domain_size) * (domain_size - 1) / 2) {
  if (domain_size < 1) throw StructuralError("domain size must be positive");
}

int PairSet::index(int a, int b) const {
  if (a == b || a < 0 || b < 0 || a >= dsize_ || b >= dsize_)
    throw StructuralError("invalid label pair");
  if (a > b) std::swap(a, b);
  // triangular index of (a, b) with a < b
  return a * dsize_ - a * (a + 1) / 2 + (b - a - 1);
}

bool PairSet::contains(int a, int b) const { return bits_[index(a, b)]; }
void PairSet::insert(int a, int b) { bits_[index(a, b)] = true; }
void PairSet::erase(int a, int b) { bits_[index(a, b)] = false; }

int PairSet::size() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), true));
}

PairSet PairSet::complement() const {
  PairSet out(dsize_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = !bits_[i];
  return out;
}

std::vector<std::pair<int, int>> PairSet::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < dsize_; ++a)
    for (int b = a + 1; b < dsize_; ++b)
      if (bits_[index(a, b)]) out.emplace_back(a, b);
  return out;
}

BinaryPair::BinaryPair(int domain_size)
    : dsize_(domain_size),
      meet_(static_cast<std::size_t>(domain_size) * domain_size),
      join_(meet_.size()) {
  if (domain_size < 1) throw StructuralError("domain size must be positive");
  for (int a = 0; a < dsize_; ++a)
    for (int b = 0; b < dsize_; ++b) {
      meet_[a * dsize_ + b] = a;
      join_[a * dsize_ + b] = b;
    }
}

BinaryPair BinaryPair::projections(int domain_size) {
  return BinaryPair(domain_size);
}

BinaryPair BinaryPair::min_max(int domain_size) {
  BinaryPair p(domain_size);
  for (int a = 0; a < domain_size; ++a)
    for (int b = 0; b < domain_size; ++b)
      p.set(a, b, std::min(a, b), std::max(a, b));
  return p;
}

void BinaryPair::set(int a, int b, int meet_value, int join_value) {
  meet_[a * dsize_ + b] = meet_value;
  join_[a * dsize_ + b] = join_value;
}

void BinaryPair::apply(std::span<const int> x, std::span<const int> y,
                       std::span<int> meet_out, std::span<int> join_out) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    meet_out[k] = meet(x[k], y[k]);
    join_out[k] = join(x[k], y[k]);
  }
}

PairSet BinaryPair::commutative_pairs() const {
  PairSet m(dsize_);
  for (int a = 0; a < dsize_; ++a)
    for (int b = a + 1; b < dsize_; ++b)
      if (meet(a, b) == meet(b, a) && join(a, b) == join(b, a)) m.insert(a, b);
  return m;
}

TernaryTriple::TernaryTriple(int domain_size)
    : dsize_(domain_size),
      mj1_(static_cast<std::size_t>(domain_size) * domain_size * domain_size),
      mj2_(mj1_.size()),
      mn3_(mj1_.size()) {
  if (domain_size < 1) throw StructuralError("domain size must be positive");
  for (int a = 0; a < dsize_; ++a)
    for (int b = 0; b < dsize_; ++b)
      for (int c = 0; c < dsize_; ++c) {
        mj1_[idx(a, b, c)] = a;
        mj2_[idx(a, b, c)] = b;
        mn3_[idx(a, b, c)] = c;
      }
}

void TernaryTriple::set(int a, int b, int c, int v1, int v2, int v3) {
  mj1_[idx(a, b, c)] = v1;
  mj2_[idx(a, b, c)] = v2;
  mn3_[idx(a, b, c)] = v3;
}

void TernaryTriple::apply(std::span<const int> x, std::span<const int> y,
                          std::span<const int> z, std::span<int> out1,
                          std::span<int> out2, std::span<int> out3) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    out1[k] = mj1(x[k], y[k], z[k]);
    out2[k] = mj2(x[k], y[k], z[k]);
    out3[k] = mn3(x[k], y[k], z[k]);
  }
}

namespace {

// Majority element of a triple with exactly two distinct values.
int majority_of(int a, int b, int c) { return a == b || a == c ? a : b; }
int minority_of(int a, int b, int c) {
  if (a == b) return c;
  if (a == c) return b;
  return a;
}

bool same_multiset3(std::array<int, 3> u, std::array<int, 3> v) {
  std::sort(u.begin(), u.end());
  std::sort(v.begin(), v.end());
  return u == v;
}

}  // namespace

bool check_shapes(const BinaryPair& pair, const TernaryTriple& triple,
                  const PairSet& m) {
  const int d = pair.domain_size();
  if (triple.domain_size() != d || m.domain_size() != d)
    throw StructuralError("operation table sizes do not match");
  for (int a = 0; a < d; ++a)
    if (pair.meet(a, a) != a || pair.join(a, a) != a) return false;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      int lo = pair.meet(a, b), hi = pair.join(a, b);
      if (std::minmax(lo, hi) != std::minmax(a, b)) return false;  // conservative
      if (a == b) continue;
      bool commutative = pair.meet(a, b) == pair.meet(b, a) &&
                         pair.join(a, b) == pair.join(b, a);
      if (m.contains(a, b) != commutative) return false;
    }
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        int v1 = triple.mj1(a, b, c), v2 = triple.mj2(a, b, c),
            v3 = triple.mn3(a, b, c);
        if (!same_multiset3({v1, v2, v3}, {a, b, c})) return false;
        int lo = std::min({a, b, c}), hi = std::max({a, b, c});
        if (lo != hi && (a == b || a == c || b == c) && !m.contains(lo, hi)) {
          int maj = majority_of(a, b, c), mn = minority_of(a, b, c);
          if (v1 != maj || v2 != maj || v3 != mn) return false;
        }
      }
  return true;
}

namespace {

// Evaluates the binary inequality for one ordered pair of dom-f tuples.
// Returns the violation data when it fails.
std::optional<Violation> eq1_violation(const Language& lang, int fn,
                                       const BinaryPair& pair,
                                       std::uint64_t xi, std::uint64_t yi) {
  const CostFunction& f = lang.function(fn);
  const int a = f.arity();
  std::vector<int> x(a), y(a), lo(a), hi(a);
  f.decode(xi, x);
  f.decode(yi, y);
  pair.apply(x, y, lo, hi);
  Cost lhs = f.at(lo) + f.at(hi);
  Cost rhs = f.at(x) + f.at(y);
  if (lhs <= rhs) return std::nullopt;
  return Violation{lang.name(fn), 2, x, y, {}, lhs, rhs};
}

std::optional<Violation> eq2_violation(const Language& lang, int fn,
                                       const TernaryTriple& triple,
                                       std::uint64_t xi, std::uint64_t yi,
                                       std::uint64_t zi) {
  const CostFunction& f = lang.function(fn);
  const int a = f.arity();
  std::vector<int> x(a), y(a), z(a), o1(a), o2(a), o3(a);
  f.decode(xi, x);
  f.decode(yi, y);
  f.decode(zi, z);
  triple.apply(x, y, z, o1, o2, o3);
  Cost lhs = f.at(o1) + f.at(o2) + f.at(o3);
  Cost rhs = f.at(x) + f.at(y) + f.at(z);
  if (lhs <= rhs) return std::nullopt;
  return Violation{lang.name(fn), 3, x, y, z, lhs, rhs};
}

std::vector<std::uint64_t> dom_indices(const CostFunction& f) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < f.tuple_count(); ++i)
    if (f.at_index(i).finite()) out.push_back(i);
  return out;
}

}  // namespace

std::optional<Violation> verify_pair(const Language& language,
                                     const BinaryPair& pair) {
  if (pair.domain_size() != language.domain().size())
    throw StructuralError("operation table sizes do not match");
  for (int fn = 0; fn < language.size(); ++fn) {
    auto dom = dom_indices(language.function(fn));
    for (std::uint64_t xi : dom)
      for (std::uint64_t yi : dom) {
        if (xi == yi) continue;
        if (auto v = eq1_violation(language, fn, pair, xi, yi)) return v;
      }
  }
  return std::nullopt;
}

std::optional<Violation> verify_triple(const Language& language,
                                       const TernaryTriple& triple) {
  if (triple.domain_size() != language.domain().size())
    throw StructuralError("operation table sizes do not match");
  for (int fn = 0; fn < language.size(); ++fn) {
    auto dom = dom_indices(language.function(fn));
    for (std::uint64_t xi : dom)
      for (std::uint64_t yi : dom)
        for (std::uint64_t zi : dom) {
          if (xi == yi && yi == zi) continue;
          if (auto v = eq2_violation(language, fn, triple, xi, yi, zi))
            return v;
        }
  }
  return std::nullopt;
}

std::optional<Violation> verify_multimorphism(const Language& language,
                                              const BinaryPair& pair,
                                              const TernaryTriple& triple) {
  if (auto v = verify_pair(language, pair)) return v;
  return verify_triple(language, triple);
}

namespace {

struct Eq1Constraint {
  int fn;
  std::uint32_t xi, yi;
};

struct Eq2Constraint {
  int fn;
  std::uint32_t xi, yi, zi;
};

class ClassifySearch {
 public:
  ClassifySearch(const Language& lang, const ClassifyBudget& budget)
      : lang_(lang),
        budget_(budget),
        d_(lang.domain().size()),
        pair_(d_),
        triple_(d_),
        m_(d_) {
    for (int a = 0; a < d_; ++a)
      for (int b = a + 1; b < d_; ++b) pair_list_.emplace_back(a, b);
    deadline_ = std::chrono::steady_clock::now() + budget_.time_limit;
    build_constraints();
  }

  Classification run() {
    dfs_pairs(0);
    Classification out;
    out.nodes = nodes_;
    if (found_) {
      out.verdict = Classification::Verdict::Tractable;
      out.witness = std::move(found_);
    } else if (aborted_) {
      out.verdict = Classification::Verdict::Unknown;
    } else {
      out.verdict = Classification::Verdict::NPHard;
    }
    return out;
  }

 private:
  int pair_index(int a, int b) const {
    if (a > b) std::swap(a, b);
    return a * d_ - a * (a + 1) / 2 + (b - a - 1);
  }

  void build_constraints() {
    eq1_buckets_.resize(pair_list_.size());
    eq2_buckets_.resize(static_cast<std::size_t>(d_) * d_ * d_);
    for (int fn = 0; fn < lang_.size(); ++fn) {
      const CostFunction& f = lang_.function(fn);
      // Conservative operations meet both inequalities with equality on
      // unary functions, so those constraints are skipped here.
      if (f.arity() == 1) continue;
      auto dom = dom_indices(f);
      const int ar = f.arity();
      std::vector<int> x(ar), y(ar), z(ar);
      for (std::uint64_t xi : dom)
        for (std::uint64_t yi : dom) {
          if (xi == yi) continue;
          f.decode(xi, x);
          f.decode(yi, y);
          int max_pair = -1;
          for (int k = 0; k < ar; ++k)
            if (x[k] != y[k]) max_pair = std::max(max_pair, pair_index(x[k], y[k]));
          eq1_buckets_[max_pair].push_back(
              Eq1Constraint{fn, static_cast<std::uint32_t>(xi),
                            static_cast<std::uint32_t>(yi)});
        }
      for (std::uint64_t xi : dom)
        for (std::uint64_t yi : dom)
          for (std::uint64_t zi : dom) {
            if (xi == yi && yi == zi) continue;
            f.decode(xi, x);
            f.decode(yi, y);
            f.decode(zi, z);
            std::size_t max_t = 0;
            for (int k = 0; k < ar; ++k) {
              std::size_t t =
                  (static_cast<std::size_t>(x[k]) * d_ + y[k]) * d_ + z[k];
              max_t = std::max(max_t, t);
            }
            eq2_buckets_[max_t].push_back(
                Eq2Constraint{fn, static_cast<std::uint32_t>(xi),
                              static_cast<std::uint32_t>(yi),
                              static_cast<std::uint32_t>(zi)});
          }
    }
  }

  // One search step; false aborts the whole search on budget exhaustion.
  bool tick() {
    ++nodes_;
    if (nodes_ > budget_.max_nodes) {
      aborted_ = true;
      return false;
    }
    if ((nodes_ & 0x1fff) == 0 &&
        std::chrono::steady_clock::now() > deadline_) {
      aborted_ = true;
      return false;
    }
    return true;
  }

  bool eq1_bucket_ok(int pi) {
    for (const Eq1Constraint& c : eq1_buckets_[pi])
      if (eq1_violation(lang_, c.fn, pair_, c.xi, c.yi)) return false;
    return true;
  }

  bool eq2_bucket_ok(std::size_t ti) {
    for (const Eq2Constraint& c : eq2_buckets_[ti])
      if (eq2_violation(lang_, c.fn, triple_, c.xi, c.yi, c.zi)) return false;
    return true;
  }

  // Returns true to stop unwinding (witness found or budget exhausted).
  bool dfs_pairs(std::size_t pi) {
    if (pi == pair_list_.size()) return dfs_triples(0, true);
    auto [a, b] = pair_list_[pi];
    // Canonical behavior order, keyed by (meet(a,b), meet(b,a)):
    // commutative-low, first projection, second projection, commutative-high.
    std::array<std::pair<int, int>, 4> behaviors = {
        std::pair{a, a}, {a, b}, {b, a}, {b, b}};
    for (int step = 0; step < 4; ++step) {
      int choice = budget_.reverse_order ? 3 - step : step;
      auto [mab, mba] = behaviors[choice];
      if (!tick()) return true;
      pair_.set(a, b, mab, mab == a ? b : a);
      pair_.set(b, a, mba, mba == a ? b : a);
      bool commutative = mab == mba;
      if (commutative)
        m_.insert(a, b);
      else
        m_.erase(a, b);
      if (eq1_bucket_ok(static_cast<int>(pi)) && dfs_pairs(pi + 1))
        return true;
      if (aborted_) return true;
    }
    return false;
  }

  bool dfs_triples(std::size_t ti, bool eq_prefix) {
    const std::size_t total = static_cast<std::size_t>(d_) * d_ * d_;
    if (ti == total) {
      finish();
      return true;
    }
    int u = static_cast<int>(ti / (d_ * d_));
    int v = static_cast<int>(ti / d_ % d_);
    int w = static_cast<int>(ti % d_);
    std::array<int, 3> sorted = {u, v, w};
    std::sort(sorted.begin(), sorted.end());
    // Enumerate conservative output options in lexicographic order.
    std::array<std::array<int, 3>, 6> options;
    int options_count = 0;
    if (sorted[0] == sorted[2]) {
      options[options_count++] = {u, u, u};
    } else if (sorted[0] == sorted[1] || sorted[1] == sorted[2]) {
      if (!m_.contains(sorted[0], sorted[2])) {
        int maj = majority_of(u, v, w), mn = minority_of(u, v, w);
        options[options_count++] = {maj, maj, mn};
      } else {
        std::array<int, 3> perm = sorted;
        do {
          options[options_count++] = perm;
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    } else {
      std::array<int, 3> perm = sorted;
      do {
        options[options_count++] = perm;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    for (int step = 0; step < options_count; ++step) {
      const auto& o =
          options[budget_.reverse_order ? options_count - 1 - step : step];
      // Mj1/Mj2 exchange symmetry: require the flattened mj1 table to stay
      // lexicographically <= mj2.
      if (eq_prefix && o[0] > o[1]) continue;
      if (!tick()) return true;
      triple_.set(u, v, w, o[0], o[1], o[2]);
      if (eq2_bucket_ok(ti) &&
          dfs_triples(ti + 1, eq_prefix && o[0] == o[1]))
        return true;
      if (aborted_) return true;
    }
    return false;
  }

  void finish() {
    Witness w{m_, pair_, triple_};
    if (!check_shapes(w.pair, w.triple, w.m))
      throw InternalError("classifier produced a shape-invalid witness");
    if (verify_multimorphism(lang_, w.pair, w.triple))
      throw InternalError("classifier witness fails re-verification");
    found_ = std::move(w);
  }

  const Language& lang_;
  ClassifyBudget budget_;
  int d_;
  std::vector<std::pair<int, int>> pair_list_;
  std::vector<std::vector<Eq1Constraint>> eq1_buckets_;
  std::vector<std::vector<Eq2Constraint>> eq2_buckets_;
  BinaryPair pair_;
  TernaryTriple triple_;
  PairSet m_;
  std::uint64_t nodes_ = 0;
  std::chrono::steady_clock::time_point deadline_;
  bool aborted_ = false;
  std::optional<Witness> found_;
};

}  // namespace

Classification classify(const Language& language,
                        const ClassifyBudget& budget) {
  if (language.domain().size() > budget.domain_cap)
    throw BudgetError("classification domain cap exceeded");
  return ClassifySearch(language, budget).run();
}

TernaryTriple canonical_mjn(const BinaryPair& pair, const PairSet& m) {
  const int d = pair.domain_size();
  TernaryTriple t(d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        int lo = std::min({a, b, c}), hi = std::max({a, b, c});
        bool two_valued = lo != hi && (a == b || a == c || b == c);
        if (two_valued && !m.contains(lo, hi)) {
          int maj = majority_of(a, b, c), mn = minority_of(a, b, c);
          t.set(a, b, c, maj, maj, mn);
        } else {
          t.set(a, b, c, pair.meet(a, b), pair.join(a, b), c);
        }
      }
  return t;
}

TernaryOp build_majority(const BinaryPair& pair, const TernaryTriple& triple) {
  const int d = pair.domain_size();
  auto mu_bar = [&](int x, int y, int z) {
    return pair.meet(pair.meet(pair.join(y, x), pair.join(y, z)),
                     pair.join(x, z));
  };
  TernaryOp mu(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        mu.set(x, y, z,
               triple.mj1(mu_bar(x, y, z), mu_bar(y, z, x), mu_bar(z, x, y)));
  return mu;
}

bool is_polymorphism(const TernaryOp& op, const CostFunction& f) {
  auto dom = dom_indices(f);
  const int ar = f.arity();
  std::vector<int> x(ar), y(ar), z(ar), o(ar);
  for (std::uint64_t xi : dom)
    for (std::uint64_t yi : dom)
      for (std::uint64_t zi : dom) {
        f.decode(xi, x);
        f.decode(yi, y);
        f.decode(zi, z);
        for (int k = 0; k < ar; ++k) o[k] = op(x[k], y[k], z[k]);
        if (!f.in_dom(o)) return false;
      }
  return true;
}

}  // namespace cvcsp
