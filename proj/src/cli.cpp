#include "cvcsp/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "cvcsp/gadgets.hpp"
#include "cvcsp/ggraph.hpp"
#include "cvcsp/io.hpp"
#include "cvcsp/pipeline.hpp"

namespace cvcsp::cli {

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInputError = 2;
constexpr int kBudget = 3;

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
  const char* v = std::getenv(name);
  if (!v) return fallback;
  char* end = nullptr;
  unsigned long long parsed = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0') return fallback;
  return parsed;
}

ClassifyBudget default_budget() {
  ClassifyBudget b;
  b.max_nodes = env_u64("CVCSP_CLASSIFY_NODES", b.max_nodes);
  b.time_limit =
      std::chrono::milliseconds(env_u64("CVCSP_CLASSIFY_TIME_MS", 120'000));
  b.domain_cap = static_cast<int>(env_u64("CVCSP_DOMAIN_CAP", b.domain_cap));
  return b;
}

void emit(const io::json& doc, const std::string& out_path, std::ostream& out) {
  std::string text = io::dump(doc);
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw StructuralError("cannot write file: " + out_path);
    f << text;
  }
}

struct Options {
  std::string language_path;
  std::string instance_path;
  std::string witness_path;
  std::string graph_path;
  std::string out_path;
  std::string backend = "auto";
  std::string order = "canonical";
  std::uint64_t nodes = 0;
  std::uint64_t time_ms = 0;
  int depth = 2;
  std::uint64_t cap = 10'000;
  int vars = 0;
  int terms = 0;
  std::uint64_t seed = 0;
  bool verbose = false;
};

int do_classify(const Options& opt, std::ostream& out) {
  Language lang = io::language_from_json(io::load_file(opt.language_path));
  ClassifyBudget budget = default_budget();
  if (opt.nodes) budget.max_nodes = opt.nodes;
  if (opt.time_ms) budget.time_limit = std::chrono::milliseconds(opt.time_ms);
  budget.reverse_order = opt.order == "reverse";
  Classification c = classify(lang, budget);
  emit(io::classification_to_json(c, lang.domain()), opt.out_path, out);
  switch (c.verdict) {
    case Classification::Verdict::Tractable: return kOk;
    case Classification::Verdict::NPHard: return kNegative;
    default: return kBudget;
  }
}

int do_solve(const Options& opt, std::ostream& out) {
  std::filesystem::path path(opt.instance_path);
  Instance inst =
      io::instance_from_json(io::load_file(path), path.parent_path());
  const Domain& domain = inst.language().domain();

  if (opt.backend == "brute") {
    SolveOutput r = brute_force_solve(inst);
    if (!r.cost.finite()) {
      io::json doc;
      doc["status"] = "infeasible";
      emit(doc, opt.out_path, out);
      return kNegative;
    }
    Solution s{r.assignment, r.cost, "brute", {}};
    s.trace.backend = "brute";
    emit(io::solution_to_json(s, domain, opt.verbose), opt.out_path, out);
    return kOk;
  }

  PipelineOptions popt;
  popt.classify_budget = default_budget();
  popt.backend =
      opt.backend == "mincut" ? SolveBackend::MinCutOnly : SolveBackend::Auto;
  static WitnessCache cache;
  popt.cache = &cache;

  std::optional<Classification> witness;
  if (!opt.witness_path.empty())
    witness = io::classification_from_json(io::load_file(opt.witness_path),
                                           domain);
  try {
    SolveResult r = solve(inst, std::move(witness), popt);
    if (std::holds_alternative<Infeasible>(r)) {
      io::json doc;
      doc["status"] = "infeasible";
      emit(doc, opt.out_path, out);
      return kNegative;
    }
    const Solution& s = std::get<Solution>(r);
    emit(io::solution_to_json(s, domain, opt.verbose), opt.out_path, out);
    return kOk;
  } catch (const ClassificationError& e) {
    io::json doc;
    doc["status"] = "classification-error";
    doc["verdict"] = e.verdict == Classification::Verdict::NPHard
                         ? "np-hard"
                         : "unknown";
    emit(doc, opt.out_path, out);
    return e.verdict == Classification::Verdict::NPHard ? kNegative : kBudget;
  }
}

int do_check(const Options& opt, std::ostream& out) {
  Language lang = io::language_from_json(io::load_file(opt.language_path));
  Classification c = io::classification_from_json(
      io::load_file(opt.witness_path), lang.domain());
  if (!c.witness)
    throw StructuralError("witness document carries no operation tables");
  const Witness& w = *c.witness;
  if (!check_shapes(w.pair, w.triple, w.m)) {
    io::json doc;
    doc["status"] = "violation";
    doc["kind"] = "shape";
    emit(doc, opt.out_path, out);
    return kNegative;
  }
  if (auto v = verify_multimorphism(lang, w.pair, w.triple)) {
    emit(io::violation_to_json(*v, lang.domain()), opt.out_path, out);
    return kNegative;
  }
  io::json doc;
  doc["status"] = "ok";
  emit(doc, opt.out_path, out);
  return kOk;
}

int do_graph(const Options& opt, std::ostream& out) {
  Language lang = io::language_from_json(io::load_file(opt.language_path));
  ClosureResult closure = close_binary(lang, opt.depth, opt.cap);
  GammaGraph g =
      detect_and_saturate(closure.functions, lang.domain().size());
  io::json doc = io::graph_report(g, closure.truncated, lang.domain());
  StpResult stp = stp_from_graph(g);
  if (auto* witness = std::get_if<StpWitness>(&stp)) {
    io::json jw;
    io::json m = io::json::array();
    for (auto [a, b] : witness->m.pairs())
      m.push_back(io::json::array(
          {lang.domain().name(a), lang.domain().name(b)}));
    jw["m"] = m;
    doc["stp"] = jw;
  } else if (std::holds_alternative<SoftSelfLoop>(stp)) {
    doc["stp"] = nullptr;
  }
  emit(doc, opt.out_path, out);
  return g.has_soft_self_loop() ? kNegative : kOk;
}

int do_gadget_xor(const Options& opt, std::ostream& out) {
  emit(io::language_to_json(*xor_language()), opt.out_path, out);
  return kOk;
}

int do_gadget_mis(const Options& opt, std::ostream& out) {
  std::ifstream in(opt.graph_path);
  if (!in) throw StructuralError("cannot open file: " + opt.graph_path);
  SimpleGraph g = parse_edge_list(in);
  emit(io::instance_to_json(mis_instance(g)), opt.out_path, out);
  return kOk;
}

int do_gen(const Options& opt, std::ostream& out) {
  Language lang = io::language_from_json(io::load_file(opt.language_path));
  auto shared = std::make_shared<const Language>(std::move(lang));
  Instance inst = random_instance(shared, opt.vars, opt.terms, opt.seed);
  emit(io::instance_to_json(inst), opt.out_path, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"conservative valued CSP classifier and solver"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* classify_cmd =
      app.add_subcommand("classify", "search for an STP/MJN witness");
  classify_cmd->add_option("language", opt.language_path)->required();
  classify_cmd->add_option("--nodes", opt.nodes, "search node budget");
  classify_cmd->add_option("--time-ms", opt.time_ms, "wall clock budget");
  classify_cmd->add_option("--order", opt.order, "canonical|reverse")
      ->check(CLI::IsMember({"canonical", "reverse"}));
  classify_cmd->add_option("--out", opt.out_path);

  CLI::App* solve_cmd = app.add_subcommand("solve", "minimize an instance");
  solve_cmd->add_option("instance", opt.instance_path)->required();
  solve_cmd->add_option("--backend", opt.backend, "auto|mincut|brute")
      ->check(CLI::IsMember({"auto", "mincut", "brute"}));
  solve_cmd->add_option("--witness", opt.witness_path,
                        "classification document to reuse");
  solve_cmd->add_flag("--verbose", opt.verbose, "include the stage trace");
  solve_cmd->add_option("--out", opt.out_path);

  CLI::App* check_cmd =
      app.add_subcommand("check", "verify a multimorphism witness");
  check_cmd->add_option("language", opt.language_path)->required();
  check_cmd->add_option("--mmorph", opt.witness_path)->required();
  check_cmd->add_option("--out", opt.out_path);

  CLI::App* graph_cmd =
      app.add_subcommand("graph", "bounded label-pair graph diagnostic");
  graph_cmd->add_option("language", opt.language_path)->required();
  graph_cmd->add_option("--depth", opt.depth, "closure rounds");
  graph_cmd->add_option("--cap", opt.cap, "closure size cap");
  graph_cmd->add_option("--out", opt.out_path);

  CLI::App* gadget_cmd = app.add_subcommand("gadget", "built-in constructions");
  gadget_cmd->require_subcommand(1);
  CLI::App* gadget_xor =
      gadget_cmd->add_subcommand("xor", "the two-label parity language");
  gadget_xor->add_option("--out", opt.out_path);
  CLI::App* gadget_mis = gadget_cmd->add_subcommand(
      "mis", "maximum-independent-set instance from an edge list");
  gadget_mis->add_option("graph", opt.graph_path)->required();
  gadget_mis->add_option("--out", opt.out_path);

  CLI::App* gen_cmd = app.add_subcommand("gen", "seeded random instance");
  gen_cmd->add_option("language", opt.language_path)->required();
  gen_cmd->add_option("--vars", opt.vars)->required();
  gen_cmd->add_option("--terms", opt.terms)->required();
  gen_cmd->add_option("--seed", opt.seed)->required();
  gen_cmd->add_option("--out", opt.out_path);

  std::vector<const char*> argv;
  argv.push_back("cvcsp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kInputError;
  }

  try {
    if (classify_cmd->parsed()) return do_classify(opt, out);
    if (solve_cmd->parsed()) return do_solve(opt, out);
    if (check_cmd->parsed()) return do_check(opt, out);
    if (graph_cmd->parsed()) return do_graph(opt, out);
    if (gadget_xor->parsed()) return do_gadget_xor(opt, out);
    if (gadget_mis->parsed()) return do_gadget_mis(opt, out);
    if (gen_cmd->parsed()) return do_gen(opt, out);
  } catch (const BudgetError& e) {
    err << "budget: " << e.what() << "\n";
    return kBudget;
  } catch (const StructuralError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace cvcsp::cli
