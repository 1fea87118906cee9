#include <pybind11/pybind11.h>

#include <sstream>

#include "cvcsp/gadgets.hpp"
#include "cvcsp/ggraph.hpp"
#include "cvcsp/io.hpp"
#include "cvcsp/pipeline.hpp"

namespace py = pybind11;
using namespace cvcsp;

namespace {

// The python surface mirrors the CLI: JSON documents in, JSON documents
// out. Dict plumbing lives in the pure-python wrapper.

std::string classify_json(const std::string& language_doc,
                          std::uint64_t max_nodes, std::uint64_t time_ms,
                          bool reverse_order) {
  Language lang = io::language_from_json(io::parse_text(language_doc));
  ClassifyBudget budget;
  if (max_nodes) budget.max_nodes = max_nodes;
  if (time_ms) budget.time_limit = std::chrono::milliseconds(time_ms);
  budget.reverse_order = reverse_order;
  return io::dump(io::classification_to_json(classify(lang, budget),
                                             lang.domain()));
}

std::string solve_json(const std::string& instance_doc,
                       const std::string& backend, bool verbose) {
  Instance inst = io::instance_from_json(io::parse_text(instance_doc));
  const Domain& domain = inst.language().domain();
  if (backend == "brute") {
    SolveOutput r = brute_force_solve(inst);
    io::json doc;
    if (!r.cost.finite()) {
      doc["status"] = "infeasible";
    } else {
      Solution s{r.assignment, r.cost, "brute", {}};
      doc = io::solution_to_json(s, domain, verbose);
    }
    return io::dump(doc);
  }
  PipelineOptions opt;
  opt.backend =
      backend == "mincut" ? SolveBackend::MinCutOnly : SolveBackend::Auto;
  static WitnessCache cache;
  opt.cache = &cache;
  try {
    SolveResult r = solve(inst, std::nullopt, opt);
    if (std::holds_alternative<Infeasible>(r)) {
      io::json doc;
      doc["status"] = "infeasible";
      return io::dump(doc);
    }
    return io::dump(
        io::solution_to_json(std::get<Solution>(r), domain, verbose));
  } catch (const ClassificationError& e) {
    io::json doc;
    doc["status"] = "classification-error";
    doc["verdict"] = e.verdict == Classification::Verdict::NPHard
                         ? "np-hard"
                         : "unknown";
    return io::dump(doc);
  }
}

std::string check_json(const std::string& language_doc,
                       const std::string& witness_doc) {
  Language lang = io::language_from_json(io::parse_text(language_doc));
  Classification c = io::classification_from_json(io::parse_text(witness_doc),
                                                  lang.domain());
  if (!c.witness)
    throw StructuralError("witness document carries no operation tables");
  io::json doc;
  if (!check_shapes(c.witness->pair, c.witness->triple, c.witness->m)) {
    doc["status"] = "violation";
    doc["kind"] = "shape";
  } else if (auto v = verify_multimorphism(lang, c.witness->pair,
                                           c.witness->triple)) {
    doc = io::violation_to_json(*v, lang.domain());
  } else {
    doc["status"] = "ok";
  }
  return io::dump(doc);
}

std::string graph_json(const std::string& language_doc, int depth,
                       std::size_t cap) {
  Language lang = io::language_from_json(io::parse_text(language_doc));
  ClosureResult closure = close_binary(lang, depth, cap);
  GammaGraph g = detect_and_saturate(closure.functions, lang.domain().size());
  return io::dump(io::graph_report(g, closure.truncated, lang.domain()));
}

std::string gadget_xor_json() {
  return io::dump(io::language_to_json(*xor_language()));
}

std::string gadget_mis_json(const std::string& edge_list) {
  std::istringstream in(edge_list);
  return io::dump(io::instance_to_json(mis_instance(parse_edge_list(in))));
}

std::string generate_json(const std::string& language_doc, int vars, int terms,
                          std::uint64_t seed) {
  auto lang = std::make_shared<const Language>(
      io::language_from_json(io::parse_text(language_doc)));
  return io::dump(io::instance_to_json(random_instance(lang, vars, terms, seed)));
}

std::string eval_json(const std::string& instance_doc,
                      const std::vector<std::string>& labels) {
  Instance inst = io::instance_from_json(io::parse_text(instance_doc));
  Assignment x;
  for (const std::string& name : labels) {
    auto l = inst.language().domain().find(name);
    if (!l) throw StructuralError("unknown label '" + name + "'");
    x.push_back(*l);
  }
  return eval_instance(inst, x).str();
}

}  // namespace

PYBIND11_MODULE(_cvcsp, m) {
  m.doc() = "conservative valued CSP classifier and solver";

  py::register_exception<StructuralError>(m, "StructuralError");
  py::register_exception<BudgetError>(m, "BudgetError");

  m.def("classify", &classify_json, py::arg("language"),
        py::arg("max_nodes") = 0, py::arg("time_ms") = 0,
        py::arg("reverse_order") = false,
        "Search for a complementary STP/MJN witness; returns the "
        "classification document.");
  m.def("solve", &solve_json, py::arg("instance"), py::arg("backend") = "auto",
        py::arg("verbose") = false,
        "Minimize an instance document; returns the solution document.");
  m.def("brute_force", [](const std::string& doc) {
    return solve_json(doc, "brute", false);
  }, py::arg("instance"), "Exhaustive oracle over the full label space.");
  m.def("check", &check_json, py::arg("language"), py::arg("witness"),
        "Verify a multimorphism witness document against a language.");
  m.def("graph", &graph_json, py::arg("language"), py::arg("depth") = 2,
        py::arg("cap") = 10'000,
        "Bounded label-pair graph diagnostic with per-edge witnesses.");
  m.def("gadget_xor", &gadget_xor_json,
        "The two-label parity language document.");
  m.def("gadget_mis", &gadget_mis_json, py::arg("edge_list"),
        "Independent-set instance from an \"n m\\nu v...\" edge list.");
  m.def("generate", &generate_json, py::arg("language"), py::arg("vars"),
        py::arg("terms"), py::arg("seed"),
        "Seeded random instance document over a language.");
  m.def("eval", &eval_json, py::arg("instance"), py::arg("assignment"),
        "Exact cost string of an assignment given by label names.");
}
