// homtest — batch front end for the list-homomorphism testing toolkit.
//
// Grammar: homtest {classify|solve|propagate|test|plant|perturb|bench|reduce|
//                   verify-reduction} [flags] [files]
// Global flags: --seed, --output, --quiet.
//
// Exit codes: classify encodes the tier (0 constant, 1 sublinear, 2 linear);
// test encodes the verdict (0 accept, 1 reject, 2 refusal — no sublinear
// tester exists for the target); usage errors exit 64, file/schema/contract
// errors 65, exceeded search budgets 69. Identical argv + input files yield
// byte-identical stdout.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "homtest/homtest.hpp"

namespace ht = homtest;
using ht::json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitFile = 65;
constexpr int kExitBudget = 69;

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string output;
  bool quiet = false;
};

void diag(const GlobalOpts& g, const std::string& msg) {
  if (!g.quiet) std::cerr << "homtest: " << msg << "\n";
}

void emit(const GlobalOpts& g, const std::string& payload) {
  if (g.output.empty()) {
    std::cout << payload << "\n";
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw ht::SchemaError("cannot open output file: " + g.output);
  out << payload << "\n";
}

void emit(const GlobalOpts& g, const json& j) { emit(g, j.dump(2)); }

// classify accepts either a bare graph file or an instance file (take its H).
ht::Graph load_target(const std::string& path) {
  json j = ht::load_json_file(path);
  if (j.is_object() && !j.contains("vertices") && j.contains("H"))
    return ht::parse_graph(j["H"]);
  return ht::parse_graph(j);
}

std::string file_label(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

json dump_verdict(const ht::Instance& inst, const ht::Verdict& v) {
  json out;
  out["decision"] = v.decision == ht::Decision::Accept ? "accept" : "reject";
  out["queries"] = v.queries;
  json tr;
  json samples = json::array();
  for (int s : v.transcript.samples) samples.push_back(inst.g.names[s]);
  tr["samples"] = std::move(samples);
  tr["checks"] = v.transcript.checks;
  tr["first_violation"] =
      v.transcript.first_violation ? json(*v.transcript.first_violation) : json(nullptr);
  tr["notes"] = v.transcript.notes;
  out["transcript"] = std::move(tr);
  return out;
}

// --- classify ---------------------------------------------------------------

int cmd_classify(const GlobalOpts& g, const std::string& file) {
  ht::Graph h = load_target(file);
  ht::TrichotomyVerdict v = ht::classify(h);
  json out;
  out["tier"] = ht::tier_name(v.tier);
  out["class"] = ht::class_name(v.detail);
  if (v.majority) {
    json m;
    m["size"] = v.majority->h;
    m["values"] = v.majority->values;
    out["majority"] = std::move(m);
  }
  if (v.detail == ht::TargetClass::IrreflexiveCompleteBipartite) {
    json a = json::array(), b = json::array();
    for (int x = 0; x < h.size(); ++x) (v.icb.side[x] == 0 ? a : b).push_back(h.names[x]);
    out["parts"] = json::array({std::move(a), std::move(b)});
  }
  emit(g, out);
  switch (v.tier) {
    case ht::Tier::Constant: return 0;
    case ht::Tier::Sublinear: return 1;
    default: return 2;
  }
}

// --- solve ------------------------------------------------------------------

int cmd_solve(const GlobalOpts& g, const std::string& file, const std::string& assignment_file,
              std::size_t limit, std::uint64_t max_nodes) {
  ht::Instance inst = ht::parse_instance(ht::load_json_file(file));
  ht::SearchBudget budget;
  if (max_nodes > 0) budget.max_nodes = max_nodes;
  auto homs = ht::enumerate_list_homs(inst, limit, budget);
  json out;
  out["count"] = homs.size();
  out["count_truncated"] = homs.size() >= limit;
  out["satisfiable"] = !homs.empty();
  out["witness"] = homs.empty() ? json(nullptr) : ht::dump_assignment(inst, homs.front());
  if (!assignment_file.empty()) {
    ht::Assignment f = ht::parse_assignment(ht::load_json_file(assignment_file), inst);
    out["is_homomorphism"] = ht::is_list_homomorphism(inst, f);
    if (homs.empty()) {
      out["distance"] = nullptr;
      out["closest"] = nullptr;
    } else {
      ht::DistanceResult d = ht::distance_to_property(inst, f, budget);
      out["distance"] = d.distance;
      out["closest"] = ht::dump_assignment(inst, d.witness);
    }
  }
  emit(g, out);
  return 0;
}

// --- propagate ----------------------------------------------------------------

int cmd_propagate(const GlobalOpts& g, const std::string& file, int level, bool full, int max_n) {
  ht::Instance inst = ht::parse_instance(ht::load_json_file(file));
  ht::MinimalityOptions opt;
  opt.l = level;
  if (max_n > 0) opt.max_n = max_n;
  ht::ConsistencyFamily fam = ht::run_minimality(inst, opt);
  json out;
  out["unsatisfiable"] = fam.unsatisfiable();
  out["level"] = fam.level();
  json singles = json::object();
  for (int v = 0; v < inst.n(); ++v) {
    json e;
    e["size"] = fam.singleton_count(v);
    if (full) {
      json c = json::array();
      for (int x = 0; x < inst.target_size(); ++x)
        if (fam.singleton_contains(v, x)) c.push_back(inst.h.names[x]);
      e["contents"] = std::move(c);
    }
    singles[inst.g.names[v]] = std::move(e);
  }
  out["singletons"] = std::move(singles);
  json pairs = json::array();
  for (int u = 0; u < inst.n(); ++u)
    for (int v = u + 1; v < inst.n(); ++v) {
      json e;
      e["u"] = inst.g.names[u];
      e["v"] = inst.g.names[v];
      e["size"] = fam.pair_count(u, v);
      if (full) {
        json c = json::array();
        for (auto [xu, xv] : fam.pair_tuples(u, v))
          c.push_back(json::array({inst.h.names[xu], inst.h.names[xv]}));
        e["contents"] = std::move(c);
      }
      pairs.push_back(std::move(e));
    }
  out["pairs"] = std::move(pairs);
  emit(g, out);
  return fam.unsatisfiable() ? 1 : 0;
}

// --- test ---------------------------------------------------------------------

// Mirrors the dispatcher's amplification for an explicitly chosen tester:
// per-trial seeds, cumulative distinct queries, first rejection wins.
template <class OneRun>
ht::Verdict run_trials(ht::CountingOracle& oracle, const ht::TesterConfig& cfg, OneRun one) {
  if (cfg.trials <= 1) return one(cfg);
  ht::Verdict last;
  for (int t = 0; t < cfg.trials; ++t) {
    ht::TesterConfig per = cfg;
    per.trials = 1;
    per.seed = ht::mix64(cfg.seed, static_cast<std::uint64_t>(t));
    ht::Verdict v = one(per);
    v.transcript.notes.insert(v.transcript.notes.begin(), "trial " + std::to_string(t));
    v.queries = oracle.distinct_queries();
    if (v.decision == ht::Decision::Reject) return v;
    last = std::move(v);
  }
  return last;
}

int cmd_test(const GlobalOpts& g, const std::string& inst_file, const std::string& f_file,
             const std::string& tester, double epsilon, int trials, std::uint64_t seed) {
  ht::Instance inst = ht::parse_instance(ht::load_json_file(inst_file));
  ht::Assignment f = ht::parse_assignment(ht::load_json_file(f_file), inst);
  ht::CountingOracle oracle(f);
  ht::TesterConfig cfg;
  cfg.epsilon = epsilon;
  cfg.seed = seed;
  cfg.trials = trials;
  ht::Verdict v;
  if (tester == "auto") {
    ht::TestContext ctx = ht::prepare_test(inst);
    try {
      v = ht::run_prepared(ctx, inst, oracle, cfg);
    } catch (const ht::NoSublinearTesterError& e) {
      json out;
      out["decision"] = "refuse";
      out["reason"] = e.what();
      emit(g, out);
      return 2;
    }
  } else if (tester == "reflexive-complete") {
    v = run_trials(oracle, cfg,
                   [&](const ht::TesterConfig& c) { return ht::test_reflexive_complete(inst, oracle, c); });
  } else if (tester == "k2") {
    v = run_trials(oracle, cfg,
                   [&](const ht::TesterConfig& c) { return ht::test_k2(inst, oracle, c); });
  } else if (tester == "bipartite") {
    v = run_trials(oracle, cfg,
                   [&](const ht::TesterConfig& c) { return ht::test_icb(inst, oracle, c); });
  } else {
    ht::ConsistencyFamily fam = ht::run_minimality(inst);
    v = run_trials(oracle, cfg, [&](const ht::TesterConfig& c) {
      return ht::test_biarc_with_family(inst, fam, oracle, c);
    });
  }
  emit(g, dump_verdict(inst, v));
  return v.decision == ht::Decision::Accept ? 0 : 1;
}

// --- plant / perturb ----------------------------------------------------------

int default_edge_count(int n) {
  const long long cap = static_cast<long long>(n) * (n - 1) / 2;
  return static_cast<int>(std::min<long long>(2 * n, cap));
}

int cmd_plant(const GlobalOpts& g, const std::string& target_file, int n, int m, double density,
              bool connected, std::uint64_t seed) {
  ht::Graph h = load_target(target_file);
  ht::PlantParams p;
  p.n = n;
  p.m = m >= 0 ? m : default_edge_count(n);
  p.list_density = density;
  p.ensure_connected = connected;
  ht::Planted planted = ht::plant_instance(h, p, seed);
  json out;
  out["instance"] = ht::dump_instance(planted.instance);
  out["planted"] = ht::dump_assignment(planted.instance, planted.planted);
  emit(g, out);
  return 0;
}

int cmd_perturb(const GlobalOpts& g, const std::string& inst_file, const std::string& f_file,
                double epsilon, std::uint64_t seed) {
  ht::Instance inst = ht::parse_instance(ht::load_json_file(inst_file));
  ht::Assignment f = ht::parse_assignment(ht::load_json_file(f_file), inst);
  ht::FarCertificate cert = ht::perturb_to_far(inst, f, epsilon, seed);
  json out;
  out["assignment"] = ht::dump_assignment(inst, cert.f);
  out["distance"] = cert.distance;
  emit(g, out);
  return 0;
}

// --- bench --------------------------------------------------------------------

int cmd_bench(const GlobalOpts& g, const std::string& target_file, const std::string& label_flag,
              std::vector<int> sizes, double epsilon, int trials, bool far, bool profile,
              double density, bool connected, std::uint64_t seed) {
  ht::Graph h = load_target(target_file);
  const std::string label = label_flag.empty() ? file_label(target_file) : label_flag;
  if (sizes.empty()) sizes = {100};
  std::string out;
  if (profile) {
    auto rows = ht::query_profile(h, label, sizes, epsilon, seed, density);
    out += ht::profile_csv_header();
    for (const auto& r : rows) out += "\n" + ht::profile_csv_row(r);
    emit(g, out);
    return 0;
  }
  out += ht::bench_csv_header();
  for (int n : sizes) {
    ht::PlantParams p;
    p.n = n;
    p.m = default_edge_count(n);
    p.list_density = density;
    p.ensure_connected = connected && p.m >= n - 1;
    ht::Planted planted = ht::plant_instance(h, p, ht::mix64(seed, n, 1));
    ht::Assignment f = planted.planted;
    if (far) f = ht::perturb_to_far(planted.instance, f, epsilon, ht::mix64(seed, n, 3)).f;
    ht::TestContext ctx = ht::prepare_test(planted.instance);
    if (ctx.cls.detail == ht::TargetClass::NotBiArc) {
      diag(g, "target admits no sublinear-query tester");
      return 2;
    }
    ht::TesterConfig cfg;
    cfg.epsilon = epsilon;
    auto rep = ht::estimate_rejection(ctx, planted.instance, f, cfg, trials,
                                      ht::mix64(seed, n, 2));
    out += "\n" + ht::bench_csv_row(ht::tester_id_for(ctx.cls), label, n, epsilon, rep, seed);
  }
  emit(g, out);
  return 0;
}

// --- reduce / verify-reduction --------------------------------------------------

ht::ReducedInput build_reduction(const ht::RelInstance& j, const ht::ReduceSpec& spec) {
  if (std::holds_alternative<ht::SimpleSpec>(spec))
    return ht::transform_simple(j, std::get<ht::SimpleSpec>(spec));
  if (std::holds_alternative<ht::VarietySpec>(spec))
    return ht::variety_reduction(j, std::get<ht::VarietySpec>(spec));
  return ht::equality_contraction_instance(j, std::get<std::string>(spec));
}

int cmd_reduce(const GlobalOpts& g, const std::string& case_id, const std::string& spec_file,
               const std::string& input_file, const std::string& assignment_file,
               std::optional<double> epsilon, std::uint64_t seed) {
  ht::RelInstance j = ht::parse_rel_instance(ht::load_json_file(input_file));
  ht::ReduceSpec spec = ht::parse_reduce_spec(case_id, ht::load_json_file(spec_file));
  if (std::holds_alternative<std::string>(spec)) {
    // Equality contraction runs its sampling pre-check against the supplied
    // assignment first; a pre-check rejection is itself a verdict (exit 1).
    if (assignment_file.empty() || !epsilon) {
      diag(g, "--case 5 needs --assignment and --epsilon");
      return kExitUsage;
    }
    std::vector<int> f = ht::parse_rel_assignment(ht::load_json_file(assignment_file), j);
    ht::Assignment a{f};
    ht::CountingOracle oracle(a);
    auto rej = ht::equality_precheck(j, std::get<std::string>(spec), oracle, *epsilon, seed);
    if (rej) {
      json out;
      out["precheck"] = "reject";
      out["first"] = rej->first;
      out["second"] = rej->second;
      emit(g, out);
      return 1;
    }
  }
  ht::ReducedInput red = build_reduction(j, spec);
  json out;
  out["instance"] = ht::dump_rel_instance(red.inst);
  out["provenance"] = ht::dump_provenance(red.prov);
  emit(g, out);
  return 0;
}

int cmd_verify_reduction(const GlobalOpts& g, const std::string& case_id,
                         const std::string& spec_file, const std::string& input_file,
                         double epsilon, int trials, int max_homs, int max_far,
                         std::uint64_t seed) {
  ht::RelInstance j = ht::parse_rel_instance(ht::load_json_file(input_file));
  ht::ReduceSpec spec = ht::parse_reduce_spec(case_id, ht::load_json_file(spec_file));
  ht::ReducedInput red = build_reduction(j, spec);

  auto homs = ht::enumerate_rel_homs(j, static_cast<std::size_t>(max_homs));
  std::vector<std::vector<int>> far_maps;
  if (ht::rel_satisfiable(j)) {
    ht::Rng rng(ht::mix64(seed, 0x7a));
    for (int att = 0; att < 60 * max_far && static_cast<int>(far_maps.size()) < max_far; ++att) {
      std::vector<int> f(j.n);
      for (int& x : f) x = rng.next_int(j.target.universe);
      if (ht::rel_distance(j, f).distance >= epsilon) far_maps.push_back(std::move(f));
    }
  }
  ht::ReductionReport rep = ht::verify_reduction(j, red, homs, far_maps, epsilon, trials, seed);
  const bool far_ok = rep.far_trials == 0 ||
                      (red.prov.deterministic ? rep.far_rate == 1.0 : rep.far_rate > 0.0);
  const bool pass = rep.size_ok && rep.hom_preserved && rep.c2_ok && far_ok;
  json out = ht::dump_reduction_report(rep);
  out["provenance"] = ht::dump_provenance(red.prov);
  out["pass"] = pass;
  emit(g, out);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"property testers for list homomorphisms between graphs"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "base RNG seed");
  app.add_option("--output", g.output, "write the payload to a file instead of stdout");
  app.add_flag("--quiet", g.quiet, "suppress stderr diagnostics");

  std::string in_file, f_file, spec_file, tester = "auto", case_id, label;
  std::string assignment_file;
  double epsilon = 0.1, density = 0.5;
  std::optional<double> reduce_epsilon;
  int trials = 1, level = 3, max_n = 0, n = 0, m = -1;
  int max_homs = 50, max_far = 5;
  std::size_t limit = 1000000;
  std::uint64_t max_nodes = 0;
  bool full = false, connected = false, far = false, profile = false;
  std::vector<int> sizes;

  auto* classify = app.add_subcommand("classify", "trichotomy tier of a target graph");
  classify->add_option("target", in_file, "target graph JSON")->required();

  auto* solve = app.add_subcommand("solve", "exact solving: count, witness, distance");
  solve->add_option("instance", in_file, "instance JSON")->required();
  solve->add_option("--assignment", assignment_file, "assignment JSON to measure distance for");
  solve->add_option("--limit", limit, "enumeration cap");
  solve->add_option("--max-nodes", max_nodes, "search-node budget");

  auto* propagate = app.add_subcommand("propagate", "run (2,l)-minimality and dump the family");
  propagate->add_option("instance", in_file, "instance JSON")->required();
  propagate->add_option("--level", level, "family level l (2 or 3)")->check(CLI::Range(2, 3));
  propagate->add_flag("--full", full, "dump set contents, not just sizes");
  propagate->add_option("--max-n", max_n, "raise the size guard");

  auto* test = app.add_subcommand("test", "run a property tester against an assignment oracle");
  test->add_option("instance", in_file, "instance JSON")->required();
  test->add_option("assignment", f_file, "assignment JSON (the oracle)")->required();
  test->add_option("--tester", tester, "tester selection")
      ->check(CLI::IsMember({"auto", "reflexive-complete", "k2", "bipartite", "biarc"}));
  test->add_option("--epsilon", epsilon, "proximity parameter")->check(CLI::Range(1e-9, 1.0));
  test->add_option("--trials", trials, "amplification runs");

  auto* plant = app.add_subcommand("plant", "plant a satisfiable instance around a random map");
  plant->add_option("target", in_file, "target graph JSON")->required();
  plant->add_option("--n", n, "vertex count")->required();
  plant->add_option("--m", m, "edge count (default min(2n, n(n-1)/2))");
  plant->add_option("--density", density, "list keep probability");
  plant->add_flag("--connected", connected, "grow a spanning tree first");

  auto* perturb = app.add_subcommand("perturb", "push an assignment to a certified far point");
  perturb->add_option("instance", in_file, "instance JSON")->required();
  perturb->add_option("assignment", f_file, "starting assignment JSON")->required();
  perturb->add_option("--epsilon", epsilon, "distance target")->required();

  auto* bench = app.add_subcommand("bench", "rejection-rate / query-profile CSV");
  bench->add_option("target", in_file, "target graph JSON")->required();
  bench->add_option("--epsilon", epsilon, "proximity parameter")->required();
  bench->add_option("--n", sizes, "instance sizes (repeatable)");
  bench->add_option("--trials", trials, "trials per row");
  bench->add_option("--label", label, "value for the CSV target column");
  bench->add_option("--density", density, "list keep probability");
  bench->add_flag("--connected", connected, "plant connected instances");
  bench->add_flag("--far", far, "perturb the planted map to an epsilon-far one first");
  bench->add_flag("--profile", profile, "emit per-size query counts instead of rates");

  auto* reduce = app.add_subcommand("reduce", "apply a gap-preserving local reduction");
  reduce->add_option("--case", case_id, "1..6, subalgebra, quotient, or power")->required();
  reduce->add_option("--spec", spec_file, "reduction spec JSON")->required();
  reduce->add_option("--assignment", assignment_file, "assignment JSON (case 5 pre-check)");
  reduce->add_option("--epsilon", reduce_epsilon, "proximity parameter (case 5 pre-check)");
  reduce->add_option("input", in_file, "relational instance JSON")->required();

  auto* verify = app.add_subcommand("verify-reduction", "check a reduction's contract");
  verify->add_option("--case", case_id, "1..6, subalgebra, quotient, or power")->required();
  verify->add_option("--spec", spec_file, "reduction spec JSON")->required();
  verify->add_option("--epsilon", epsilon, "far threshold");
  verify->add_option("--trials", trials, "adapter draws per map");
  verify->add_option("--homs", max_homs, "homomorphisms to enumerate");
  verify->add_option("--far-maps", max_far, "certified far maps to collect");
  verify->add_option("input", in_file, "relational instance JSON")->required();

  for (auto* sub : {classify, solve, propagate, test, plant, perturb, bench, reduce, verify})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(classify)) return cmd_classify(g, in_file);
    if (app.got_subcommand(solve)) return cmd_solve(g, in_file, assignment_file, limit, max_nodes);
    if (app.got_subcommand(propagate)) return cmd_propagate(g, in_file, level, full, max_n);
    if (app.got_subcommand(test)) return cmd_test(g, in_file, f_file, tester, epsilon, trials, g.seed);
    if (app.got_subcommand(plant)) return cmd_plant(g, in_file, n, m, density, connected, g.seed);
    if (app.got_subcommand(perturb)) return cmd_perturb(g, in_file, f_file, epsilon, g.seed);
    if (app.got_subcommand(bench))
      return cmd_bench(g, in_file, label, sizes, epsilon, trials, far, profile, density,
                       connected, g.seed);
    if (app.got_subcommand(reduce))
      return cmd_reduce(g, case_id, spec_file, in_file, assignment_file, reduce_epsilon, g.seed);
    if (app.got_subcommand(verify))
      return cmd_verify_reduction(g, case_id, spec_file, in_file, epsilon, trials, max_homs,
                                  max_far, g.seed);
  } catch (const ht::BudgetError& e) {
    diag(g, std::string("budget exceeded: ") + e.what());
    return kExitBudget;
  } catch (const ht::SchemaError& e) {
    diag(g, std::string("input error: ") + e.what());
    return kExitFile;
  } catch (const ht::ContractError& e) {
    diag(g, std::string("contract violation: ") + e.what());
    return kExitFile;
  } catch (const ht::UnsatisfiableError& e) {
    diag(g, std::string("unsatisfiable input: ") + e.what());
    return kExitFile;
  }
  return kExitUsage;
}
