#include "cvcsp/consistency.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace cvcsp {

Microstructure::Microstructure(int num_vars, int domain_size)
    : dsize_(domain_size), domains_(num_vars, 0) {
  if (domain_size < 1 || domain_size > 8)
    throw StructuralError("microstructure supports 1 <= |D| <= 8");
  if (num_vars < 0) throw StructuralError("negative variable count");
  rels_.assign(static_cast<std::size_t>(num_vars) * (num_vars - 1) / 2, 0);
}

std::size_t Microstructure::tri(int i, int j) const {
  if (i > j) std::swap(i, j);
  return static_cast<std::size_t>(i) * num_vars() - i * (i + 1) / 2 +
         (j - i - 1);
}

std::uint64_t Microstructure::transpose(std::uint64_t bits) const {
  std::uint64_t out = 0;
  for (int a = 0; a < dsize_; ++a)
    for (int b = 0; b < dsize_; ++b)
      if ((bits >> (a * dsize_ + b)) & 1u) out |= 1ull << (b * dsize_ + a);
  return out;
}

std::uint64_t Microstructure::rel(int i, int j) const {
  if (i == j) throw StructuralError("relation requires distinct variables");
  std::uint64_t bits = rels_[tri(i, j)];
  return i < j ? bits : transpose(bits);
}

void Microstructure::set_rel(int i, int j, std::uint64_t bits) {
  if (i == j) throw StructuralError("relation requires distinct variables");
  rels_[tri(i, j)] = i < j ? bits : transpose(bits);
}

void Microstructure::intersect_rel(int i, int j, std::uint64_t bits) {
  set_rel(i, j, rel(i, j) & bits);
}

std::uint32_t Microstructure::image(int i, int j,
                                    std::uint32_t labels_of_i) const {
  std::uint64_t bits = rel(i, j);
  std::uint32_t out = 0;
  std::uint32_t row_mask = (1u << dsize_) - 1u;
  for (int a = 0; a < dsize_; ++a)
    if ((labels_of_i >> a) & 1u)
      out |= static_cast<std::uint32_t>(bits >> (a * dsize_)) & row_mask;
  return out;
}

std::uint64_t Microstructure::full_rel(std::uint32_t di,
                                       std::uint32_t dj) const {
  std::uint64_t out = 0;
  for (int a = 0; a < dsize_; ++a)
    if ((di >> a) & 1u)
      out |= static_cast<std::uint64_t>(dj) << (a * dsize_);
  return out;
}

namespace {

// Feasibility projections of one term onto its distinct variables,
// respecting repeated scope positions.
struct TermProjection {
  std::vector<int> vars;                      // distinct, ascending
  std::vector<std::uint32_t> unary;           // parallel to vars
  std::vector<std::uint64_t> pairwise;        // (u,v) with u < v in vars order
};

TermProjection project_term(const CostFunction& f,
                            const std::vector<int>& scope, int d) {
  TermProjection out;
  out.vars = scope;
  std::sort(out.vars.begin(), out.vars.end());
  out.vars.erase(std::unique(out.vars.begin(), out.vars.end()),
                 out.vars.end());
  const int nv = static_cast<int>(out.vars.size());
  out.unary.assign(nv, 0);
  out.pairwise.assign(static_cast<std::size_t>(nv) * (nv - 1) / 2, 0);
  auto var_pos = [&](int v) {
    return static_cast<int>(std::lower_bound(out.vars.begin(), out.vars.end(),
                                             v) -
                            out.vars.begin());
  };
  const int ar = f.arity();
  std::vector<int> args(ar);
  std::vector<int> labels(nv);
  for (std::uint64_t t = 0; t < f.tuple_count(); ++t) {
    if (!f.at_index(t).finite()) continue;
    f.decode(t, args);
    bool consistent = true;
    std::fill(labels.begin(), labels.end(), -1);
    for (int k = 0; k < ar && consistent; ++k) {
      int& slot = labels[var_pos(scope[k])];
      if (slot == -1)
        slot = args[k];
      else if (slot != args[k])
        consistent = false;  // repeated variable with conflicting labels
    }
    if (!consistent) continue;
    for (int u = 0; u < nv; ++u) out.unary[u] |= 1u << labels[u];
    std::size_t pc = 0;
    for (int u = 0; u < nv; ++u)
      for (int v = u + 1; v < nv; ++v, ++pc)
        out.pairwise[pc] |= 1ull << (labels[u] * d + labels[v]);
  }
  return out;
}

}  // namespace

Microstructure build_microstructure(const Instance& instance) {
  const int n = instance.num_vars();
  const int d = instance.language().domain().size();
  Microstructure m(n, d);
  const std::uint32_t full = (1u << d) - 1u;
  for (int i = 0; i < n; ++i) m.set_domain(i, full);
  std::vector<std::vector<bool>> co_occur(n, std::vector<bool>(n, false));

  for (const Term& t : instance.terms()) {
    const CostFunction& f = instance.language().function(t.function);
    TermProjection proj = project_term(f, t.scope, d);
    const int nv = static_cast<int>(proj.vars.size());
    for (int u = 0; u < nv; ++u)
      m.set_domain(proj.vars[u], m.domain(proj.vars[u]) & proj.unary[u]);
    std::size_t pc = 0;
    for (int u = 0; u < nv; ++u)
      for (int v = u + 1; v < nv; ++v, ++pc) {
        int i = proj.vars[u], j = proj.vars[v];
        if (!co_occur[i][j]) {
          co_occur[i][j] = co_occur[j][i] = true;
          m.set_rel(i, j, proj.pairwise[pc]);
        } else {
          m.intersect_rel(i, j, proj.pairwise[pc]);
        }
      }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!co_occur[i][j]) m.set_rel(i, j, m.full_rel(full, full));
      m.intersect_rel(i, j, m.full_rel(m.domain(i), m.domain(j)));
    }
  return m;
}

namespace {

struct Schedule {
  std::vector<std::pair<int, int>> arcs;            // ordered (i, j), i != j
  std::vector<std::array<int, 3>> paths;            // (i, j, k), i < j, k != i,j
};

Schedule canonical_schedule(int n) {
  Schedule s;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s.arcs.emplace_back(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (k != i && k != j) s.paths.push_back({i, j, k});
  return s;
}

Strong3 enforce(Microstructure& m, const Schedule& sched) {
  const int n = m.num_vars();
  const int d = m.domain_size();
  if (n == 0) return Strong3::Consistent;
  bool changed = true;
  while (changed) {
    changed = false;
    // Arc consistency: drop labels without support, keep relations inside
    // the current domain boxes.
    for (auto [i, j] : sched.arcs) {
      std::uint64_t r = m.rel(i, j) & m.full_rel(m.domain(i), m.domain(j));
      if (r != m.rel(i, j)) {
        m.set_rel(i, j, r);
        changed = true;
      }
      std::uint32_t di = m.domain(i);
      std::uint32_t supported = 0;
      for (int a = 0; a < d; ++a)
        if ((di >> a) & 1u) {
          std::uint32_t row =
              static_cast<std::uint32_t>(r >> (a * d)) & ((1u << d) - 1u);
          if (row & m.domain(j)) supported |= 1u << a;
        }
      if (supported != di) {
        m.set_domain(i, supported);
        changed = true;
      }
      if (m.domain(i) == 0) return Strong3::Infeasible;
    }
    // Path consistency.
    for (const auto& [i, j, k] : sched.paths) {
      std::uint64_t r = m.rel(i, j);
      if (r == 0) return Strong3::Infeasible;
      std::uint64_t pruned = r;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (!((r >> (a * d + b)) & 1u)) continue;
          std::uint32_t via =
              m.image(i, k, 1u << a) & m.image(j, k, 1u << b) & m.domain(k);
          if (via == 0) pruned &= ~(1ull << (a * d + b));
        }
      if (pruned != r) {
        m.set_rel(i, j, pruned);
        changed = true;
        if (pruned == 0) return Strong3::Infeasible;
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (m.domain(i) == 0) return Strong3::Infeasible;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (m.rel(i, j) == 0) return Strong3::Infeasible;
  return Strong3::Consistent;
}

}  // namespace

Strong3 enforce_strong3(Microstructure& m) {
  return enforce(m, canonical_schedule(m.num_vars()));
}

Strong3 enforce_strong3_shuffled(Microstructure& m, std::uint64_t order_seed) {
  Schedule s = canonical_schedule(m.num_vars());
  std::mt19937_64 eng(order_seed);
  std::shuffle(s.arcs.begin(), s.arcs.end(), eng);
  std::shuffle(s.paths.begin(), s.paths.end(), eng);
  return enforce(m, s);
}

bool check_decomposition(const CostFunction& f) {
  const int ar = f.arity();
  const int d = f.domain_size();
  if (d > 8) throw StructuralError("decomposition check supports |D| <= 8");
  std::vector<std::uint32_t> unary(ar, 0);
  std::vector<std::vector<std::uint64_t>> pairwise(
      ar, std::vector<std::uint64_t>(ar, 0));
  std::vector<int> args(ar);
  for (std::uint64_t t = 0; t < f.tuple_count(); ++t) {
    if (!f.at_index(t).finite()) continue;
    f.decode(t, args);
    for (int k = 0; k < ar; ++k) unary[k] |= 1u << args[k];
    for (int k = 0; k < ar; ++k)
      for (int l = k + 1; l < ar; ++l)
        pairwise[k][l] |= 1ull << (args[k] * d + args[l]);
  }
  for (std::uint64_t t = 0; t < f.tuple_count(); ++t) {
    if (f.at_index(t).finite()) continue;
    f.decode(t, args);
    bool joins = true;
    for (int k = 0; k < ar && joins; ++k)
      if (!((unary[k] >> args[k]) & 1u)) joins = false;
    for (int k = 0; k < ar && joins; ++k)
      for (int l = k + 1; l < ar && joins; ++l)
        if (!((pairwise[k][l] >> (args[k] * d + args[l])) & 1u)) joins = false;
    if (joins) return false;  // projections allow a tuple outside dom f
  }
  return true;
}

void assert_decomposable(const CostFunction& f, const TernaryOp& mu,
                         const std::string& name) {
  if (!is_polymorphism(mu, f))
    throw StructuralError("function '" + name +
                          "' is not preserved by the witness majority");
  if (!check_decomposition(f))
    throw StructuralError("function '" + name +
                          "' is not decomposable into binary relations");
}

}  // namespace cvcsp
