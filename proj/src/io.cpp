#include "cvcsp/io.hpp"

#include <fstream>

#include "cvcsp/submod.hpp"

namespace cvcsp::io {

namespace {

Cost parse_cost(const json& j, const std::string& where) {
  if (!j.is_string())
    throw StructuralError(where + ": costs are strings like \"3/2\" or \"inf\"");
  auto c = Cost::parse(j.get<std::string>());
  if (!c) throw StructuralError(where + ": cannot parse cost '" +
                                j.get<std::string>() + "'");
  return *c;
}

int parse_label(const json& j, const Domain& domain, const std::string& where) {
  if (!j.is_string()) throw StructuralError(where + ": labels are name strings");
  auto l = domain.find(j.get<std::string>());
  if (!l) throw StructuralError(where + ": unknown label '" +
                                j.get<std::string>() + "'");
  return *l;
}

const json& require(const json& doc, const char* key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw StructuralError(where + ": missing field \"" + key + "\"");
  return *it;
}

}  // namespace

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json parse_text(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw StructuralError("malformed JSON document");
  return doc;
}

json load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_text(text);
}

json language_to_json(const Language& language) {
  const Domain& domain = language.domain();
  json doc;
  doc["conservative"] = language.conservative();
  json names = json::array();
  for (int a = 0; a < domain.size(); ++a) names.push_back(domain.name(a));
  doc["domain"] = names;
  json fns = json::array();
  for (int i = 0; i < language.size(); ++i) {
    const CostFunction& f = language.function(i);
    json fn;
    fn["name"] = language.name(i);
    fn["arity"] = f.arity();
    json table = json::array();
    std::vector<int> args(f.arity());
    // Full listing in tuple order for small tables, non-infinite entries
    // plus an infinite default for large ones.
    bool full = f.tuple_count() <= 4096;
    if (!full) fn["default_cost"] = "inf";
    for (std::uint64_t t = 0; t < f.tuple_count(); ++t) {
      Cost c = f.at_index(t);
      if (!full && !c.finite()) continue;
      f.decode(t, args);
      json row;
      json names_row = json::array();
      for (int a : args) names_row.push_back(domain.name(a));
      row["args"] = names_row;
      row["cost"] = c.str();
      table.push_back(row);
    }
    fn["table"] = table;
    fns.push_back(fn);
  }
  doc["functions"] = fns;
  return doc;
}

Language language_from_json(const json& doc) {
  if (!doc.is_object()) throw StructuralError("language: expected an object");
  const json& dom = require(doc, "domain", "language");
  if (!dom.is_array() || dom.empty())
    throw StructuralError("language.domain: expected a non-empty array");
  std::vector<std::string> names;
  for (const json& n : dom) {
    if (!n.is_string())
      throw StructuralError("language.domain: label names are strings");
    names.push_back(n.get<std::string>());
  }
  bool conservative = true;
  if (auto it = doc.find("conservative"); it != doc.end()) {
    if (!it->is_boolean())
      throw StructuralError("language.conservative: expected a boolean");
    conservative = it->get<bool>();
  }
  Language lang(Domain(std::move(names)), conservative);
  const Domain& domain = lang.domain();

  const json& fns = require(doc, "functions", "language");
  if (!fns.is_array())
    throw StructuralError("language.functions: expected an array");
  for (const json& fn : fns) {
    std::string where = "language.functions[]";
    const json& jn = require(fn, "name", where);
    if (!jn.is_string()) throw StructuralError(where + ".name: expected string");
    where = "function '" + jn.get<std::string>() + "'";
    const json& ja = require(fn, "arity", where);
    if (!ja.is_number_integer() || ja.get<int>() < 1)
      throw StructuralError(where + ".arity: expected a positive integer");
    int arity = ja.get<int>();
    Cost fill = Cost::infinity();
    bool has_default = fn.contains("default_cost");
    if (has_default) fill = parse_cost(fn["default_cost"], where);
    CostFunction f(arity, domain.size(), fill);
    std::vector<bool> covered(f.tuple_count(), false);
    const json& table = require(fn, "table", where);
    if (!table.is_array()) throw StructuralError(where + ".table: expected array");
    for (const json& row : table) {
      const json& jargs = require(row, "args", where + ".table[]");
      if (!jargs.is_array() || static_cast<int>(jargs.size()) != arity)
        throw StructuralError(where + ".table[].args: expected " +
                              std::to_string(arity) + " labels");
      std::vector<int> args;
      for (const json& a : jargs)
        args.push_back(parse_label(a, domain, where + ".table[].args"));
      std::uint64_t idx = f.index_of(args);
      if (covered[idx])
        throw StructuralError(where + ": tuple listed twice");
      covered[idx] = true;
      f.set_index(idx, parse_cost(require(row, "cost", where + ".table[]"), where));
    }
    if (!has_default)
      for (std::uint64_t t = 0; t < f.tuple_count(); ++t)
        if (!covered[t])
          throw StructuralError(where +
                                ": table incomplete and no default_cost");
    lang.add(jn.get<std::string>(), std::move(f));
  }
  return lang;
}

json instance_to_json(const Instance& instance) {
  json doc;
  doc["language"] = language_to_json(instance.language());
  doc["variables"] = instance.num_vars();
  json terms = json::array();
  for (const Term& t : instance.terms()) {
    json jt;
    jt["function"] = instance.language().name(t.function);
    jt["scope"] = t.scope;
    terms.push_back(jt);
  }
  doc["terms"] = terms;
  return doc;
}

Instance instance_from_json(const json& doc,
                            const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw StructuralError("instance: expected an object");
  const json& jl = require(doc, "language", "instance");
  Language lang = [&] {
    if (jl.is_string())
      return language_from_json(load_file(base_dir / jl.get<std::string>()));
    return language_from_json(jl);
  }();
  const json& jv = require(doc, "variables", "instance");
  if (!jv.is_number_integer() || jv.get<int>() < 0)
    throw StructuralError("instance.variables: expected a non-negative integer");
  Instance inst(std::make_shared<const Language>(std::move(lang)),
                jv.get<int>());
  const json& jt = require(doc, "terms", "instance");
  if (!jt.is_array()) throw StructuralError("instance.terms: expected an array");
  for (const json& t : jt) {
    const json& jf = require(t, "function", "instance.terms[]");
    if (!jf.is_string())
      throw StructuralError("instance.terms[].function: expected a string");
    const json& js = require(t, "scope", "instance.terms[]");
    if (!js.is_array())
      throw StructuralError("instance.terms[].scope: expected an array");
    std::vector<int> scope;
    for (const json& v : js) {
      if (!v.is_number_integer())
        throw StructuralError("instance.terms[].scope: expected integers");
      scope.push_back(v.get<int>());
    }
    inst.add_term(jf.get<std::string>(), std::move(scope));
  }
  return inst;
}

namespace {

json binary_table_to_json(const Domain& domain, const BinaryPair& pair,
                          bool meet) {
  json rows = json::array();
  for (int a = 0; a < domain.size(); ++a) {
    json row = json::array();
    for (int b = 0; b < domain.size(); ++b)
      row.push_back(domain.name(meet ? pair.meet(a, b) : pair.join(a, b)));
    rows.push_back(row);
  }
  return rows;
}

json ternary_table_to_json(const Domain& domain, const TernaryTriple& t,
                           int which) {
  json cube = json::array();
  for (int a = 0; a < domain.size(); ++a) {
    json plane = json::array();
    for (int b = 0; b < domain.size(); ++b) {
      json row = json::array();
      for (int c = 0; c < domain.size(); ++c) {
        int v = which == 0 ? t.mj1(a, b, c)
                           : which == 1 ? t.mj2(a, b, c) : t.mn3(a, b, c);
        row.push_back(domain.name(v));
      }
      plane.push_back(row);
    }
    cube.push_back(plane);
  }
  return cube;
}

}  // namespace

json classification_to_json(const Classification& c, const Domain& domain) {
  json doc;
  switch (c.verdict) {
    case Classification::Verdict::Tractable: doc["verdict"] = "tractable"; break;
    case Classification::Verdict::NPHard: doc["verdict"] = "np-hard"; break;
    case Classification::Verdict::Unknown: doc["verdict"] = "unknown"; break;
  }
  doc["nodes"] = c.nodes;
  if (c.witness) {
    const Witness& w = *c.witness;
    json jw;
    json m = json::array();
    for (auto [a, b] : w.m.pairs())
      m.push_back(json::array({domain.name(a), domain.name(b)}));
    jw["m"] = m;
    jw["meet"] = binary_table_to_json(domain, w.pair, true);
    jw["join"] = binary_table_to_json(domain, w.pair, false);
    jw["mj1"] = ternary_table_to_json(domain, w.triple, 0);
    jw["mj2"] = ternary_table_to_json(domain, w.triple, 1);
    jw["mn3"] = ternary_table_to_json(domain, w.triple, 2);
    doc["witness"] = jw;
  }
  return doc;
}

Classification classification_from_json(const json& doc, const Domain& domain) {
  Classification c;
  const json& jv = require(doc, "verdict", "classification");
  std::string v = jv.get<std::string>();
  if (v == "np-hard") {
    c.verdict = Classification::Verdict::NPHard;
  } else if (v == "unknown") {
    c.verdict = Classification::Verdict::Unknown;
  } else if (v == "tractable") {
    c.verdict = Classification::Verdict::Tractable;
  } else {
    throw StructuralError("classification.verdict: unknown value '" + v + "'");
  }
  if (doc.contains("nodes")) c.nodes = doc["nodes"].get<std::uint64_t>();
  if (c.verdict != Classification::Verdict::Tractable) return c;

  const json& jw = require(doc, "witness", "classification");
  const int d = domain.size();
  Witness w{PairSet(d), BinaryPair(d), TernaryTriple(d)};
  for (const json& p : require(jw, "m", "witness")) {
    if (!p.is_array() || p.size() != 2)
      throw StructuralError("witness.m: expected label pairs");
    w.m.insert(parse_label(p[0], domain, "witness.m"),
               parse_label(p[1], domain, "witness.m"));
  }
  auto read_binary = [&](const char* key, bool meet) {
    const json& rows = require(jw, key, "witness");
    if (!rows.is_array() || static_cast<int>(rows.size()) != d)
      throw StructuralError(std::string("witness.") + key + ": expected " +
                            std::to_string(d) + " rows");
    for (int a = 0; a < d; ++a) {
      const json& row = rows[a];
      if (!row.is_array() || static_cast<int>(row.size()) != d)
        throw StructuralError(std::string("witness.") + key + ": ragged table");
      for (int b = 0; b < d; ++b) {
        int v2 = parse_label(row[b], domain, std::string("witness.") + key);
        if (meet)
          w.pair.set(a, b, v2, w.pair.join(a, b));
        else
          w.pair.set(a, b, w.pair.meet(a, b), v2);
      }
    }
  };
  read_binary("meet", true);
  read_binary("join", false);
  auto read_ternary = [&](const char* key, int which) {
    const json& cube = require(jw, key, "witness");
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int cc = 0; cc < d; ++cc) {
          const json& cell = cube.at(a).at(b).at(cc);
          int v2 = parse_label(cell, domain, std::string("witness.") + key);
          int m1 = w.triple.mj1(a, b, cc), m2 = w.triple.mj2(a, b, cc),
              m3 = w.triple.mn3(a, b, cc);
          if (which == 0) m1 = v2;
          if (which == 1) m2 = v2;
          if (which == 2) m3 = v2;
          w.triple.set(a, b, cc, m1, m2, m3);
        }
  };
  read_ternary("mj1", 0);
  read_ternary("mj2", 1);
  read_ternary("mn3", 2);
  c.witness = std::move(w);
  return c;
}

json violation_to_json(const Violation& v, const Domain& domain) {
  json doc;
  doc["status"] = "violation";
  doc["function"] = v.function;
  doc["order"] = v.order;
  auto tuple = [&](const std::vector<int>& t) {
    json out = json::array();
    for (int a : t) out.push_back(domain.name(a));
    return out;
  };
  doc["x"] = tuple(v.x);
  doc["y"] = tuple(v.y);
  if (!v.z.empty()) doc["z"] = tuple(v.z);
  doc["lhs"] = v.lhs.str();
  doc["rhs"] = v.rhs.str();
  return doc;
}

json solution_to_json(const Solution& s, const Domain& domain, bool verbose) {
  json doc;
  doc["status"] = "optimal";
  doc["cost"] = s.cost.str();
  json assignment = json::array();
  for (int a : s.assignment) assignment.push_back(domain.name(a));
  doc["assignment"] = assignment;
  doc["provenance"] = s.provenance;
  if (verbose) {
    json trace;
    trace["witness_cached"] = s.trace.witness_cached;
    trace["classify_nodes"] = s.trace.classify_nodes;
    trace["fixed_variables"] = s.trace.fixed_variables;
    trace["stage2_iterations"] = s.trace.stage2_iterations;
    json steps = json::array();
    for (const auto& st : s.trace.stage2.steps) {
      json js;
      js["variable"] = st.k;
      js["seed"] = json::array(
          {domain.name(st.seed.first), domain.name(st.seed.second)});
      js["u"] = st.u;
      json ab = json::array();
      for (std::size_t i = 0; i < st.u.size(); ++i) {
        json sets;
        json a = json::array(), b = json::array();
        for (int l = 0; l < domain.size(); ++l) {
          if ((st.ab[i].first >> l) & 1u) a.push_back(domain.name(l));
          if ((st.ab[i].second >> l) & 1u) b.push_back(domain.name(l));
        }
        sets["a"] = a;
        sets["b"] = b;
        ab.push_back(sets);
      }
      js["blocks"] = ab;
      steps.push_back(js);
    }
    trace["stage2_steps"] = steps;
    trace["augmentations"] = s.trace.augmentations;
    doc["trace"] = trace;
  }
  return doc;
}

json graph_report(const GammaGraph& g, bool truncated, const Domain& domain) {
  json doc;
  json names = json::array();
  for (int a = 0; a < domain.size(); ++a) names.push_back(domain.name(a));
  doc["domain"] = names;
  doc["truncated"] = truncated;
  doc["closure_size"] = g.witness_pool.size();
  auto node_name = [&](int node) {
    auto [a, b] = g.labels(node);
    return json::array({domain.name(a), domain.name(b)});
  };
  json edges = json::array();
  json soft_loop = nullptr;
  for (const auto& [key, e] : g.edges) {
    if (key.first == key.second && e.soft && soft_loop.is_null())
      soft_loop = node_name(key.first);
    json je;
    je["p"] = node_name(key.first);
    je["q"] = node_name(key.second);
    je["soft"] = e.soft;
    json w;
    w["p"] = json::array({domain.name(e.witness.p.first),
                          domain.name(e.witness.p.second)});
    w["q"] = json::array({domain.name(e.witness.q.first),
                          domain.name(e.witness.q.second)});
    w["values"] = json::array({e.witness.faa.str(), e.witness.fbb.str(),
                               e.witness.fab.str(), e.witness.fba.str()});
    const CostFunction& f = g.witness_pool[e.witness.fn];
    json table = json::array();
    for (int a = 0; a < domain.size(); ++a) {
      json row = json::array();
      for (int b = 0; b < domain.size(); ++b)
        row.push_back(f.at(std::array{a, b}).str());
      table.push_back(row);
    }
    w["table"] = table;
    je["witness"] = w;
    edges.push_back(je);
  }
  doc["edges"] = edges;
  doc["soft_self_loop"] = soft_loop;
  return doc;
}

}  // namespace cvcsp::io
