// Acceptance gate: runs the ten end-to-end checks and prints one line per
// criterion. Exit code 0 only if every criterion passes. Tolerances and
// budgets are pinned inline next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "brute.hpp"
#include "homtest/homtest.hpp"

using namespace homtest;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Budget bookkeeping shared between the one-sided / soundness suites and the
// query-budget criterion: every single tester run must stay within formula.
struct BudgetLedger {
  long runs = 0;
  long violations = 0;

  void record(long queries, long budget) {
    ++runs;
    if (queries > budget) ++violations;
  }
} g_budgets;

Graph reflexive_complete(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) edges.push_back({i, j});
  return Graph::build(names, edges);
}

Graph complete_bipartite(int a, int b) {
  std::vector<std::string> names;
  for (int i = 0; i < a + b; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < a; ++i)
    for (int j = a; j < a + b; ++j) edges.push_back({i, j});
  return Graph::build(names, edges);
}

Graph reflexive_path(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, i});
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph::build(names, edges);
}

Graph irreflexive_path(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph::build(names, edges);
}

Graph triangle() { return Graph::build({"a", "b", "c"}, {{0, 1}, {1, 2}, {0, 2}}); }

// --- criterion 1: the three two-vertex gadget relations --------------------

Outcome criterion1() {
  using PairSet = std::set<std::pair<int, int>>;
  auto project = [](const Instance& inst) {
    auto rel = relation_between(inst, 0, 1);
    return PairSet(rel.begin(), rel.end());
  };

  // Gadget A: single edge into the reflexive path a-b-c with lists
  // {a,b} / {b,c} realizes exactly {(a,b),(b,b),(b,c)}.
  Graph edge = Graph::build({"u", "v"}, {{0, 1}});
  Instance ga = make_instance(edge, reflexive_path(3), {{0, 1}, {1, 2}});
  const PairSet expect_a = {{0, 1}, {1, 1}, {1, 2}};

  // Gadget B: single edge into the irreflexive path a-b-c-d with lists
  // {a,c} / {b,d} realizes exactly {(a,b),(c,b),(c,d)}.
  Instance gb = make_instance(edge, irreflexive_path(4), {{0, 2}, {1, 3}});
  const PairSet expect_b = {{0, 1}, {2, 1}, {2, 3}};

  // Gadget C: single edge into the loop-edge target (a-b plus a loop at b)
  // with full lists realizes exactly {(a,b),(b,b),(b,a)}.
  Graph loop_edge = Graph::build({"a", "b"}, {{0, 1}, {1, 1}});
  Instance gc = make_instance(edge, loop_edge, {{0, 1}, {0, 1}});
  const PairSet expect_c = {{0, 1}, {1, 1}, {1, 0}};

  const bool ok = project(ga) == expect_a && project(gb) == expect_b &&
                  project(gc) == expect_c;
  return {ok, "three gadget relations reproduced exactly"};
}

// --- criterion 2: trichotomy classifier on the canonical family ------------

Outcome criterion2() {
  int checked = 0;
  for (int n = 1; n <= 5; ++n) {
    if (classify(reflexive_complete(n)).tier != Tier::Constant)
      return {false, "reflexive K_" + std::to_string(n) + " not constant"};
    ++checked;
  }
  for (int a = 1; a <= 5; ++a)
    for (int b = 1; a + b <= 6; ++b) {
      if (classify(complete_bipartite(a, b)).tier != Tier::Constant)
        return {false, "K_{" + std::to_string(a) + "," + std::to_string(b) + "} not constant"};
      ++checked;
    }
  if (classify(triangle()).tier != Tier::Linear) return {false, "triangle not linear"};
  ++checked;

  for (const Graph& h : {reflexive_path(3), irreflexive_path(4)}) {
    TrichotomyVerdict v = classify(h);
    if (v.tier != Tier::Sublinear || !v.majority)
      return {false, "path target not placed in the sublinear tier"};
    // Independent verification over every ordered triple of target vertices.
    std::string why;
    if (!check_majority_table(h, *v.majority, &why))
      return {false, "majority witness failed verification: " + why};
    ++checked;
  }
  return {true, std::to_string(checked) + " targets placed, witnesses verified"};
}

// --- criteria 3-5: one-sided error, soundness, and budgets -----------------

struct TierSetup {
  const char* name;
  Graph target;
  int max_n;
  long (*budget)(const TesterConfig&, int n);
};

long rc_budget(const TesterConfig& cfg, int) { return budget_reflexive_complete(cfg); }
long icb_budget(const TesterConfig& cfg, int) { return budget_icb(cfg, 1); }
long biarc_budget_for(const TesterConfig& cfg, int n) { return budget_biarc(cfg, n); }

std::vector<TierSetup> tier_setups() {
  return {{"reflexive-complete", reflexive_complete(3), 200, rc_budget},
          {"bipartite", complete_bipartite(2, 3), 200, icb_budget},
          {"biarc", reflexive_path(3), 100, biarc_budget_for}};
}

Planted plant_for(const Graph& h, int n, std::uint64_t seed) {
  PlantParams p;
  p.n = n;
  p.m = std::min(2 * n, n * (n - 1) / 2);
  p.list_density = 0.5;
  p.ensure_connected = true;  // keeps the bipartite wrapper on one component
  return plant_instance(h, p, seed);
}

Outcome criterion3() {
  const double eps = 0.2;
  long rejections = 0, runs = 0;
  for (const TierSetup& tier : tier_setups()) {
    for (int i = 0; i < 100; ++i) {
      const int n = 10 + (i * (tier.max_n - 10)) / 99;
      Planted planted = plant_for(tier.target, n, mix64(0xc3, i));
      TestContext ctx = prepare_test(planted.instance);
      TesterConfig cfg;
      cfg.epsilon = eps;
      const long budget = tier.budget(cfg, planted.instance.n());
      for (int t = 0; t < 50; ++t) {
        cfg.seed = mix64(0xc3, i, t);
        CountingOracle oracle(planted.planted);
        Verdict v = run_prepared(ctx, planted.instance, oracle, cfg);
        ++runs;
        rejections += v.decision == Decision::Reject;
        g_budgets.record(v.queries, budget);
      }
    }
  }
  return {rejections == 0,
          std::to_string(runs) + " runs on planted maps, " + std::to_string(rejections) +
              " rejections (zero tolerance)"};
}

Outcome criterion4() {
  const double eps = 0.2;
  double min_rate = 1.0;
  double min_ci_lo = 1.0;
  bool all_ok = true;
  for (const TierSetup& tier : tier_setups()) {
    for (int i = 0; i < 20; ++i) {
      const int n = 20 + 2 * i;  // 20..58
      Planted planted = plant_for(tier.target, n, mix64(0xc4, i));
      FarCertificate far =
          perturb_to_far(planted.instance, planted.planted, eps, mix64(0xc4, i, 1));
      TestContext ctx = prepare_test(planted.instance);
      TesterConfig cfg;
      cfg.epsilon = eps;
      RejectionReport rep =
          estimate_rejection(ctx, planted.instance, far.f, cfg, 300, mix64(0xc4, i, 2));
      g_budgets.record(rep.max_queries, tier.budget(cfg, planted.instance.n()));
      min_rate = std::min(min_rate, rep.rate);
      min_ci_lo = std::min(min_ci_lo, rep.ci_lo);
      if (rep.rate < 0.60) all_ok = false;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "60 certified 0.2-far instances x 300 trials; min rate %.3f (min CI lo %.3f), "
                "threshold 0.60",
                min_rate, min_ci_lo);
  return {all_ok, buf};
}

Outcome criterion5() {
  const bool ran = g_budgets.runs > 0;
  return {ran && g_budgets.violations == 0,
          std::to_string(g_budgets.runs) + " tester runs audited, " +
              std::to_string(g_budgets.violations) + " budget violations (hard bound)"};
}

// --- criterion 6: sublinear scaling of the propagation-backed tester -------

Outcome criterion6() {
  auto rows = query_profile(reflexive_path(3), "path", {100, 400, 1600, 6400}, 0.1, 2024);
  for (const auto& r : rows) {
    if (r.q_total > r.budget)
      return {false, "profile exceeded budget at n=" + std::to_string(r.n)};
  }
  const double slope = fit_log_slope(rows);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "totals %ld/%ld/%ld/%ld, log-log slope %.4f in [0.45, 0.55]",
                rows[0].q_total, rows[1].q_total, rows[2].q_total, rows[3].q_total, slope);
  return {slope >= 0.45 && slope <= 0.55, buf};
}

// --- criterion 7: propagation soundness and pairwise-consistency extension --

Outcome criterion7() {
  Rng rng(0xc7);
  long hom_projections = 0, partials_checked = 0, helly_instances = 0;
  for (int round = 0; round < 200; ++round) {
    // Keep (h+1)^n enumerable so the extension check can cover every partial.
    const int h_size = 2 + rng.next_int(3);  // 2..4
    const int n_cap = h_size == 2 ? 8 : h_size == 3 ? 7 : 6;
    Instance inst = brute::random_instance(rng, n_cap, h_size);
    ConsistencyFamily fam = run_minimality(inst);

    auto homs = enumerate_list_homs(inst, 5000);
    for (const auto& f : homs) {
      for (int v = 0; v < inst.n(); ++v)
        if (!fam.singleton_contains(v, f[v])) return {false, "hom escaped a singleton set"};
      for (int u = 0; u < inst.n(); ++u)
        for (int v = u + 1; v < inst.n(); ++v)
          if (!fam.pair_contains(u, v, f[u], f[v])) return {false, "hom escaped a pair set"};
      if (fam.level() >= 3 && !fam.unsatisfiable()) {
        for (int u = 0; u < inst.n(); ++u)
          for (int v = u + 1; v < inst.n(); ++v)
            for (int w = v + 1; w < inst.n(); ++w)
              if (!fam.triple_contains(u, v, w, f[u], f[v], f[w]))
                return {false, "hom escaped a triple set"};
      }
      ++hom_projections;
    }

    // For majority targets: a partial with no violating vertex or pair must
    // extend to a full list-homomorphism (checked for every partial map).
    if (!find_conservative_majority(inst.h)) continue;
    if (fam.unsatisfiable()) {
      // Empty sets certify unsatisfiability; there is nothing to extend, but
      // the certificate itself must be sound.
      if (satisfiable(inst)) return {false, "empty family on a satisfiable instance"};
      continue;
    }
    ++helly_instances;
    std::vector<int> partial(inst.n(), -1);
    while (true) {
      if (violations(fam, partial).empty()) {
        ++partials_checked;
        if (!is_extendable(inst, partial))
          return {false, "violation-free partial failed to extend"};
      }
      int v = inst.n() - 1;
      while (v >= 0 && partial[v] == inst.target_size() - 1) partial[v--] = -1;
      if (v < 0) break;
      ++partial[v];
    }
  }
  return {true, std::to_string(hom_projections) + " hom projections, " +
                    std::to_string(partials_checked) + " violation-free partials extended on " +
                    std::to_string(helly_instances) + " majority targets"};
}

// --- criterion 8: distances decompose over connected components ------------

Outcome criterion8() {
  Rng rng(0xc8);
  int checked = 0;
  double worst_gap = 0.0;
  while (checked < 100) {
    Instance inst = brute::random_instance(rng, 8, 4);
    if (connected_components(inst.g).size() < 2) continue;
    if (!satisfiable(inst)) continue;
    std::vector<int> f(inst.n());
    for (int& x : f) x = rng.next_int(inst.target_size());
    const double whole = distance_to_property(inst, Assignment{f}).distance;
    double combined = 0.0;
    for (const auto& comp : connected_components(inst.g)) {
      double mass = 0.0;
      for (int v : comp) mass += inst.weights[v];
      if (mass <= 0.0) continue;  // weightless components cost nothing
      Restriction r = restrict_to(inst, comp);
      std::vector<int> sub(r.instance.n());
      for (int i = 0; i < r.instance.n(); ++i) sub[i] = f[r.origin[i]];
      combined += mass * distance_to_property(r.instance, Assignment{sub}).distance;
    }
    worst_gap = std::max(worst_gap, std::fabs(whole - combined));
    if (std::fabs(whole - combined) > 1e-9) {
      char buf[120];
      std::snprintf(buf, sizeof buf, "decomposition gap %.3e on instance %d", worst_gap,
                    checked);
      return {false, buf};
    }
    ++checked;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "100 disconnected instances, worst gap %.2e (tol 1e-9)",
                worst_gap);
  return {true, buf};
}

// --- criterion 9: reduction contracts ---------------------------------------

namespace c9 {

Relation random_relation(Rng& rng, const std::string& name, int arity, int universe) {
  std::set<std::vector<int>> tuples;
  const int want = 1 + rng.next_int(std::min(8, static_cast<int>(std::pow(universe, arity))));
  while (static_cast<int>(tuples.size()) < want) {
    std::vector<int> t(arity);
    for (int& x : t) x = rng.next_int(universe);
    tuples.insert(t);
  }
  return Relation{name, arity, {tuples.begin(), tuples.end()}};
}

struct Round {
  RelInstance j;
  Relation extra;  // fresh relation for the restoration case
};

Round random_round(Rng& rng) {
  const int universe = 2 + rng.next_int(4);  // 2..5
  Relation r = random_relation(rng, "r", 2, universe);
  Relation s = random_relation(rng, "s", 2, universe);
  std::vector<std::vector<int>> cap;
  for (const auto& t : r.tuples)
    if (s.contains(t)) cap.push_back(t);
  std::vector<std::vector<int>> prod;
  for (const auto& a : r.tuples)
    for (const auto& b : s.tuples) prod.push_back({a[0], a[1], b[0], b[1]});
  std::set<std::vector<int>> proj;
  for (const auto& t : r.tuples) proj.insert({t[0]});

  Structure st = make_structure(
      universe, {r, s, Relation{"cap", 2, cap}, Relation{"prod", 4, prod},
                 Relation{"proj", 1, {proj.begin(), proj.end()}}});
  const int n = 3 + rng.next_int(3);
  std::vector<Constraint> cons;
  const int mc = 1 + rng.next_int(4);
  for (int i = 0; i < mc; ++i) {
    const int rel = rng.next_int(5);
    Constraint c;
    c.rel = rel;
    const int arity = st.relations[rel].arity;
    c.scope.resize(arity);
    for (int& v : c.scope) v = rng.next_int(n);
    cons.push_back(std::move(c));
  }
  // Full lists: the power construction requires them, and shared inputs keep
  // the per-case comparisons aligned.
  return {make_rel_instance(st, n, cons), random_relation(rng, "extra", 2, universe)};
}

// Checks hom-transfer and the distance contract for one reduction.
bool check(const RelInstance& j, const ReducedInput& red, bool expect_equal, double c1,
           Rng& rng, std::string* why) {
  auto homs = enumerate_rel_homs(j, 200);
  for (std::size_t i = 0; i < homs.size(); ++i) {
    auto fi = materialize_adapter(red, homs[i], mix64(0xc9, i));
    if (!is_rel_hom(red.inst, fi)) {
      *why = "hom did not transfer through " + red.prov.kind;
      return false;
    }
  }
  if (!homs.empty()) {
    for (int t = 0; t < 4; ++t) {
      std::vector<int> f(j.n);
      for (int& x : f) x = rng.next_int(j.target.universe);
      const double dj = rel_distance(j, f).distance;
      auto fi = materialize_adapter(red, f, mix64(0xc9, 77, t));
      const double di = rel_distance(red.inst, fi).distance;
      if (expect_equal && std::fabs(di - dj) > 1e-9) {
        *why = "distance drifted through " + red.prov.kind;
        return false;
      }
      if (di + 1e-9 < c1 * dj) {
        *why = "distance fell below the " + red.prov.kind + " floor";
        return false;
      }
    }
  }
  return true;
}

}  // namespace c9

Outcome criterion9() {
  Rng rng(0xc9);
  std::string why;
  long reductions_checked = 0;
  for (int round = 0; round < 50; ++round) {
    c9::Round r = c9::random_round(rng);
    const RelInstance& j = r.j;

    SimpleSpec remove;
    remove.kind = SimpleCase::RemoveRelation;
    remove.added = r.extra;
    SimpleSpec permute;
    permute.kind = SimpleCase::PermuteVariables;
    permute.relation = "r";
    permute.r_name = "r_perm";
    permute.perm = {1, 0};
    SimpleSpec inter;
    inter.kind = SimpleCase::Intersection;
    inter.relation = "cap";
    inter.r_name = "r";
    inter.s_name = "s";
    SimpleSpec prod;
    prod.kind = SimpleCase::Product;
    prod.relation = "prod";
    prod.r_name = "r";
    prod.s_name = "s";
    SimpleSpec proj;
    proj.kind = SimpleCase::Projection;
    proj.relation = "proj";
    proj.r_name = "r";

    for (const SimpleSpec& spec : {remove, permute, inter, prod, proj}) {
      ReducedInput red = transform_simple(j, spec);
      if (!c9::check(j, red, true, 1.0, rng, &why))
        return {false, why + " (round " + std::to_string(round) + ")"};
      ++reductions_checked;
    }

    VarietySpec power;
    power.kind = VarietyKind::Power;
    if (j.target.universe == 4) {
      power.base = 2;
      power.k = 2;
    } else {
      power.base = j.target.universe;
      power.k = 1;
    }
    ReducedInput red = variety_reduction(j, power);
    if (!c9::check(j, red, false, 1.0 / power.k, rng, &why))
      return {false, why + " (round " + std::to_string(round) + ")"};
    ++reductions_checked;
  }

  // Equality contraction, two-variable example: weights 1/2 each, assignment
  // split across the forced-equal pair, proximity parameter 0.2.
  Structure eqs = make_structure(2, {Relation{"eq", 2, {{0, 0}, {1, 1}}}});
  RelInstance j2 = make_rel_instance(eqs, 2, {Constraint{0, {0, 1}}});
  std::vector<int> split = {0, 1};
  Assignment split_a{split};
  int precheck_rejections = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CountingOracle oracle(split_a);
    if (equality_precheck(j2, "eq", oracle, 0.2, seed)) ++precheck_rejections;
  }
  if (precheck_rejections < 200)
    return {false, "equality pre-check rejected only " +
                       std::to_string(precheck_rejections) + "/300"};

  // Block-consistent assignment: the adapter must be lossless on average.
  ReducedInput contraction = equality_contraction_instance(j2, "eq");
  std::vector<int> consistent = {1, 1};
  double total_dist = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    auto fi = materialize_adapter(contraction, consistent, mix64(0xc9, 5, draw));
    // Lift the contracted assignment back and measure weighted disagreement.
    double d = 0.0;
    for (int v = 0; v < j2.n; ++v)
      if (consistent[v] != fi[0]) d += j2.weights[v];
    total_dist += d;
  }
  const double mean_dist = total_dist / 1000.0;
  if (!(mean_dist < 0.02))
    return {false, "adapter drift " + std::to_string(mean_dist) + " >= 0.02"};

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%ld reductions checked; pre-check rejected %d/300; adapter drift %.4f",
                reductions_checked, precheck_rejections, mean_dist);
  return {true, buf};
}

// --- criterion 10: the parity structure and a toy linear system -------------

Outcome criterion10() {
  Structure s = three_lin();
  const Relation& even = s.relation("even");
  const Relation& odd = s.relation("odd");
  const std::vector<std::vector<int>> expect_even = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  const std::vector<std::vector<int>> expect_odd = {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 1, 1}};
  if (even.tuples != expect_even || odd.tuples != expect_odd)
    return {false, "parity relations differ from the two 4-tuple sets"};

  // x+y+z = 0, y+z+w = 1, z+w+x = 0 over GF(2).
  RelInstance sys = make_rel_instance(
      s, 4,
      {Constraint{0, {0, 1, 2}}, Constraint{1, {1, 2, 3}}, Constraint{0, {2, 3, 0}}});
  auto solutions = enumerate_rel_homs(sys);
  if (solutions.empty()) return {false, "toy system unexpectedly unsatisfiable"};
  for (const auto& f : solutions) {
    if (!is_rel_hom(sys, f)) return {false, "solution failed the homomorphism check"};
    if ((f[0] + f[1] + f[2]) % 2 != 0 || (f[1] + f[2] + f[3]) % 2 != 1 ||
        (f[2] + f[3] + f[0]) % 2 != 0)
      return {false, "solution violates the linear system"};
  }
  return {true, std::to_string(solutions.size()) + " solutions, all verified homomorphisms"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    double limit_seconds;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, 1.0, criterion1},   {2, 30.0, criterion2},  {3, 300.0, criterion3},
      {4, 600.0, criterion4}, {5, 600.0, criterion5}, {6, 300.0, criterion6},
      {7, 300.0, criterion7}, {8, 60.0, criterion8},  {9, 600.0, criterion9},
      {10, 1.0, criterion10},
  };

  bool all_pass = true;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool timely = secs <= c.limit_seconds;
    const bool pass = out.pass && timely;
    all_pass = all_pass && pass;
    std::printf("criterion %2d: %s (%.1fs%s) — %s\n", c.id, pass ? "PASS" : "FAIL", secs,
                timely ? "" : ", over time limit", out.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
