#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homtest/algebra.hpp"
#include "homtest/errors.hpp"
#include "homtest/graph.hpp"
#include "homtest/instance.hpp"
#include "homtest/minimality.hpp"
#include "homtest/oracle.hpp"
#include "homtest/rng.hpp"

namespace homtest {

struct TesterConfig {
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  double c_scalar = 4.0;  // scalar sample-count constant
  double c_pair = 8.0;    // pair sample-count constant
  int trials = 1;         // independent repetitions; reject if any run rejects
};

enum class Decision { Accept, Reject };

struct Transcript {
  std::vector<int> samples;  // queried vertices, in draw order, root indexing
  long checks = 0;           // membership/equality checks performed
  std::optional<std::string> first_violation;
  std::vector<std::string> notes;  // deterministic stage markers
};

struct Verdict {
  Decision decision = Decision::Accept;
  long queries = 0;  // distinct oracle queries at return
  Transcript transcript;
};

// ---------------------------------------------------------------------------
// Query budgets. The testers assert these internally on every run, so the
// formulas below are the single source of truth.

inline void validate_epsilon(double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ContractError("epsilon must lie in (0, 1]");
}

inline long sample_count(double c, double eps) {
  return static_cast<long>(std::ceil(c / eps));
}

inline long pair_sample_count(double c, double eps, int n) {
  return static_cast<long>(std::ceil(c * std::sqrt(static_cast<double>(n) / eps)));
}

inline long budget_reflexive_complete(const TesterConfig& cfg) {
  return sample_count(cfg.c_scalar, cfg.epsilon);
}

// The bipartite pipeline: one list stage at epsilon, then per inspected
// component a two-sided constancy stage at epsilon/2.
inline long budget_icb(const TesterConfig& cfg, long components_inspected = 1) {
  return sample_count(cfg.c_scalar, cfg.epsilon) +
         components_inspected * 2 * sample_count(cfg.c_scalar, cfg.epsilon / 2);
}

inline long budget_biarc(const TesterConfig& cfg, int n) {
  return sample_count(cfg.c_scalar, cfg.epsilon) +
         2 * pair_sample_count(cfg.c_pair, cfg.epsilon, n);
}

inline long budget_k2(const TesterConfig& cfg) {
  return 2 * sample_count(cfg.c_scalar, cfg.epsilon);
}

namespace detail {

inline std::vector<int> identity_origin(int n) {
  std::vector<int> o(n);
  for (int i = 0; i < n; ++i) o[i] = i;
  return o;
}

// An inner stage runs on a (possibly restricted) instance. `origin[i]` names
// local vertex i in the root instance for transcripts; `view` reads f in
// local indexing. Returns true to reject.
using InnerCore = std::function<bool(const Instance&, const std::vector<int>&, VertexOracle&,
                                     const TesterConfig&, std::uint64_t, Transcript&)>;

// Reject when a sampled vertex leaves its list.
inline bool list_stage(const Instance& inst, const std::vector<int>& origin, VertexOracle& view,
                       const TesterConfig& cfg, std::uint64_t seed, Transcript& tr) {
  WeightedSampler sampler(inst.weights);
  Rng rng(seed);
  const long s = sample_count(cfg.c_scalar, cfg.epsilon);
  for (long i = 0; i < s; ++i) {
    const int v = sampler.sample(rng);
    tr.samples.push_back(origin[v]);
    const int x = view.value(v);
    tr.checks += 1;
    if (!inst.in_list(v, x)) {
      std::ostringstream msg;
      msg << "list violation at vertex " << origin[v];
      tr.first_violation = msg.str();
      return true;
    }
  }
  return false;
}

// Two-sided constancy check against a two-element irreflexive target. Expects
// the restriction to one component; a non-two-colorable component rejects
// outright with no queries.
inline bool k2_core(const Instance& inst, const std::vector<int>& origin, VertexOracle& view,
                    const TesterConfig& cfg, std::uint64_t seed, Transcript& tr) {
  if (inst.h.size() != 2 || !inst.h.is_irreflexive() || inst.h.edges.size() != 1)
    throw ContractError("k2 stage needs the two-vertex single-edge target");
  Bipartition parts = two_color(inst.g);
  if (!parts.ok) {
    tr.first_violation = "component is not two-colorable";
    return true;
  }
  std::array<std::vector<int>, 2> part_vertices;
  std::array<double, 2> part_weight{0.0, 0.0};
  for (int v = 0; v < inst.n(); ++v) {
    part_vertices[parts.side[v]].push_back(v);
    part_weight[parts.side[v]] += inst.weights[v];
  }
  const long s = sample_count(cfg.c_scalar, cfg.epsilon);
  std::array<int, 2> constant{-1, -1};
  for (int p = 0; p < 2; ++p) {
    if (part_vertices[p].empty() || part_weight[p] <= 0.0) continue;
    WeightedSampler sampler(inst.weights, part_vertices[p]);
    Rng rng(mix64(seed, static_cast<std::uint64_t>(p) + 1));
    for (long i = 0; i < s; ++i) {
      const int v = sampler.sample(rng);
      tr.samples.push_back(origin[v]);
      const int x = view.value(v);
      if (constant[p] == -1) {
        constant[p] = x;
        continue;
      }
      tr.checks += 1;
      if (x != constant[p]) {
        std::ostringstream msg;
        msg << "side " << p << " is not constant: vertex " << origin[v];
        tr.first_violation = msg.str();
        return true;
      }
    }
  }
  if (constant[0] != -1 && constant[1] != -1) {
    tr.checks += 1;
    if (constant[0] == constant[1]) {
      tr.first_violation = "the two sides map to the same value";
      return true;
    }
  }
  return false;
}

// Compose an oracle and lists through a full homomorphism into a smaller
// target, then run the inner stage at the same parameter.
inline InnerCore via_full_hom_core(Graph target, std::vector<int> hmap, InnerCore inner) {
  return [target = std::move(target), hmap = std::move(hmap), inner = std::move(inner)](
             const Instance& inst, const std::vector<int>& origin, VertexOracle& view,
             const TesterConfig& cfg, std::uint64_t seed, Transcript& tr) {
    Instance mapped;
    mapped.g = inst.g;
    mapped.h = target;
    mapped.weights = inst.weights;
    mapped.lists.assign(inst.n(), 0);
    for (int v = 0; v < inst.n(); ++v) {
      std::uint64_t m = 0;
      for (int x = 0; x < inst.target_size(); ++x)
        if (inst.in_list(v, x)) m |= std::uint64_t{1} << hmap[x];
      mapped.lists[v] = m;
    }
    MappedOracle mapped_view(view, hmap);
    return inner(mapped, origin, mapped_view, cfg, mix64(seed, 0x11), tr);
  };
}

// Draw component representatives by weight (free, no queries), then run the
// inner stage once per distinct component hit, in canonical order.
inline bool component_stage(const Instance& inst, const std::vector<int>& origin,
                            VertexOracle& view, const TesterConfig& cfg, std::uint64_t seed,
                            Transcript& tr, const InnerCore& inner, long* components_run) {
  const auto comps = connected_components(inst.g);
  std::vector<int> comp_of(inst.n(), -1);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
  WeightedSampler sampler(inst.weights);
  Rng rng(mix64(seed, 0x21));
  const long picks = sample_count(cfg.c_scalar, cfg.epsilon);
  std::vector<int> chosen;
  for (long i = 0; i < picks; ++i) chosen.push_back(comp_of[sampler.sample(rng)]);
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  if (components_run) *components_run = static_cast<long>(chosen.size());
  for (int c : chosen) {
    Restriction sub = restrict_to(inst, comps[c]);
    std::vector<int> sub_origin(sub.origin.size());
    for (std::size_t i = 0; i < sub.origin.size(); ++i) sub_origin[i] = origin[sub.origin[i]];
    SubsetOracle sub_view(view, sub.origin);
    std::ostringstream note;
    note << "component " << origin[comps[c].front()];
    tr.notes.push_back(note.str());
    if (inner(sub.instance, sub_origin, sub_view, cfg,
              mix64(seed, 0x22, static_cast<std::uint64_t>(comps[c].front())), tr))
      return true;
  }
  return false;
}

inline Verdict finish(bool rejected, const CountingOracle& oracle, Transcript tr) {
  Verdict v;
  v.decision = rejected ? Decision::Reject : Decision::Accept;
  v.queries = static_cast<long>(oracle.distinct_queries());
  v.transcript = std::move(tr);
  return v;
}

inline void assert_budget(const CountingOracle& oracle, long budget, const char* who) {
  if (static_cast<long>(oracle.distinct_queries()) > budget)
    throw ContractError(std::string(who) + ": query budget exceeded");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tier testers. Each accepts every list homomorphism with probability one and
// rejects epsilon-far functions with probability >= 2/3 for the default
// constants.

// Reflexive complete target: list membership is the whole property.
inline Verdict test_reflexive_complete(const Instance& inst, CountingOracle& oracle,
                                       const TesterConfig& cfg) {
  validate_epsilon(cfg.epsilon);
  if (!is_reflexive_complete(inst.h))
    throw ContractError("test_reflexive_complete: target is not reflexive complete");
  Transcript tr;
  const long before = static_cast<long>(oracle.distinct_queries());
  const bool rejected =
      detail::list_stage(inst, detail::identity_origin(inst.n()), oracle, cfg, mix64(cfg.seed, 0), tr);
  if (static_cast<long>(oracle.distinct_queries()) - before > budget_reflexive_complete(cfg))
    throw ContractError("test_reflexive_complete: query budget exceeded");
  return detail::finish(rejected, oracle, std::move(tr));
}

// Bare two-part constancy tester for the two-vertex single-edge target.
// Requires connected input; soundness against list violations comes from the
// wrapped pipeline, not from this op.
inline Verdict test_k2(const Instance& inst, CountingOracle& oracle, const TesterConfig& cfg) {
  validate_epsilon(cfg.epsilon);
  if (inst.h.size() != 2 || !inst.h.is_irreflexive() || inst.h.edges.size() != 1)
    throw ContractError("test_k2: target must be the two-vertex single-edge graph");
  if (connected_components(inst.g).size() > 1)
    throw ContractError("test_k2: input graph must be connected");
  Transcript tr;
  const long before = static_cast<long>(oracle.distinct_queries());
  const bool rejected =
      detail::k2_core(inst, detail::identity_origin(inst.n()), oracle, cfg, mix64(cfg.seed, 1), tr);
  if (static_cast<long>(oracle.distinct_queries()) - before > budget_k2(cfg))
    throw ContractError("test_k2: query budget exceeded");
  return detail::finish(rejected, oracle, std::move(tr));
}

// Irreflexive complete bipartite target: list stage at epsilon, then on the
// list-repaired function a component stage at epsilon/2 whose inner check maps
// everything through the full homomorphism onto the two-vertex target.
inline Verdict test_icb(const Instance& inst, CountingOracle& oracle, const TesterConfig& cfg) {
  validate_epsilon(cfg.epsilon);
  IcbParts parts = icb_parts(inst.h);
  if (!parts.ok) throw ContractError("test_icb: target is not irreflexive complete bipartite");
  Transcript tr;
  const long before = static_cast<long>(oracle.distinct_queries());
  const auto origin = detail::identity_origin(inst.n());
  bool rejected = detail::list_stage(inst, origin, oracle, cfg, mix64(cfg.seed, 0), tr);
  long components_run = 0;
  if (!rejected) {
    if (inst.h.edges.empty()) {
      // Edgeless target: every list-respecting function is a homomorphism
      // whenever the instance is satisfiable, which the dispatcher checks.
      tr.notes.push_back("edgeless target: list stage only");
    } else {
      TesterConfig half = cfg;
      half.epsilon = cfg.epsilon / 2;
      ListRepairOracle repaired(oracle, inst);
      Graph k2 = Graph::build({"a", "b"}, {{0, 1}});
      detail::InnerCore inner =
          detail::via_full_hom_core(k2, full_hom_to_k2(inst.h), detail::InnerCore(detail::k2_core));
      rejected = detail::component_stage(inst, origin, repaired, half, mix64(cfg.seed, 2), tr,
                                         inner, &components_run);
    }
  }
  if (static_cast<long>(oracle.distinct_queries()) - before >
      budget_icb(cfg, std::max(components_run, 1L)))
    throw ContractError("test_icb: query budget exceeded");
  return detail::finish(rejected, oracle, std::move(tr));
}

// General bi-arc target: consistency propagation (zero queries), then a
// scalar stage against singleton supports and a pair stage against pair
// supports.
inline Verdict test_biarc_with_family(const Instance& inst, const ConsistencyFamily& family,
                                      CountingOracle& oracle, const TesterConfig& cfg) {
  validate_epsilon(cfg.epsilon);
  Transcript tr;
  if (family.unsatisfiable()) {
    tr.first_violation = "instance is unsatisfiable";
    return detail::finish(true, oracle, std::move(tr));
  }
  const long before = static_cast<long>(oracle.distinct_queries());
  WeightedSampler sampler(inst.weights);
  const long s = sample_count(cfg.c_scalar, cfg.epsilon);
  {
    Rng rng(mix64(cfg.seed, 0));
    for (long i = 0; i < s; ++i) {
      const int v = sampler.sample(rng);
      tr.samples.push_back(v);
      const int x = oracle.value(v);
      tr.checks += 1;
      if (!family.singleton_contains(v, x)) {
        std::ostringstream msg;
        msg << "vertex " << v << " leaves its singleton support";
        tr.first_violation = msg.str();
        if (static_cast<long>(oracle.distinct_queries()) - before > budget_biarc(cfg, inst.n()))
          throw ContractError("test_biarc: query budget exceeded");
        return detail::finish(true, oracle, std::move(tr));
      }
    }
  }
  const long q = pair_sample_count(cfg.c_pair, cfg.epsilon, inst.n());
  std::vector<std::pair<int, int>> ys, zs;  // (vertex, value)
  {
    Rng rng(mix64(cfg.seed, 1));
    for (long i = 0; i < q; ++i) {
      const int v = sampler.sample(rng);
      tr.samples.push_back(v);
      ys.emplace_back(v, oracle.value(v));
    }
  }
  {
    Rng rng(mix64(cfg.seed, 2));
    for (long i = 0; i < q; ++i) {
      const int v = sampler.sample(rng);
      tr.samples.push_back(v);
      zs.emplace_back(v, oracle.value(v));
    }
  }
  bool rejected = false;
  for (std::size_t i = 0; i < ys.size() && !rejected; ++i)
    for (std::size_t j = 0; j < zs.size() && !rejected; ++j) {
      const auto [v, x] = ys[i];
      const auto [u, y] = zs[j];
      tr.checks += 1;
      const bool ok = v == u ? (x == y && family.singleton_contains(v, x))
                             : family.pair_contains(v, u, x, y);
      if (!ok) {
        std::ostringstream msg;
        msg << "pair (" << v << ", " << u << ") leaves its pair support";
        tr.first_violation = msg.str();
        rejected = true;
      }
    }
  if (static_cast<long>(oracle.distinct_queries()) - before > budget_biarc(cfg, inst.n()))
    throw ContractError("test_biarc: query budget exceeded");
  return detail::finish(rejected, oracle, std::move(tr));
}

inline Verdict test_biarc(const Instance& inst, CountingOracle& oracle, const TesterConfig& cfg,
                          MinimalityOptions opt = {}) {
  ConsistencyFamily family = run_minimality(inst, opt);
  return test_biarc_with_family(inst, family, oracle, cfg);
}

// ---------------------------------------------------------------------------
// Dispatcher. Classification and the query-free satisfiability decision are
// computed once per instance and reused across runs.

struct TestContext {
  TrichotomyVerdict cls;
  bool satisfiable = false;
  std::shared_ptr<const ConsistencyFamily> family;  // sublinear tier only
};

namespace detail {

// Exact satisfiability for an irreflexive complete bipartite target: each
// component must be two-colorable and admit one of the two side orientations
// list-wise.
inline bool icb_satisfiable(const Instance& inst, const IcbParts& parts) {
  std::array<std::uint64_t, 2> side_mask{0, 0};
  for (int x = 0; x < inst.target_size(); ++x)
    side_mask[parts.side[x]] |= std::uint64_t{1} << x;
  for (const auto& comp : connected_components(inst.g)) {
    Restriction sub = restrict_to(inst, comp);
    bool has_edge = !sub.instance.g.edges.empty();
    if (!has_edge) {
      // Lists are nonempty by construction, so isolated vertices are fine.
      continue;
    }
    Bipartition colors = two_color(sub.instance.g);
    if (!colors.ok) return false;
    bool feasible = false;
    for (int o = 0; o < 2 && !feasible; ++o) {
      bool ok = true;
      for (int v = 0; v < sub.instance.n() && ok; ++v)
        if ((sub.instance.lists[v] & side_mask[colors.side[v] ^ o]) == 0) ok = false;
      feasible = ok;
    }
    if (!feasible) return false;
  }
  return true;
}

}  // namespace detail

inline TestContext prepare_test(const Instance& inst, MajoritySearchOptions majority_opt = {},
                                MinimalityOptions minimality_opt = {}) {
  TestContext ctx;
  ctx.cls = classify(inst.h, majority_opt);
  switch (ctx.cls.detail) {
    case TargetClass::ReflexiveComplete:
      // Lists are nonempty, every list-respecting function works.
      ctx.satisfiable = true;
      break;
    case TargetClass::IrreflexiveCompleteBipartite:
      ctx.satisfiable = detail::icb_satisfiable(inst, ctx.cls.icb);
      break;
    case TargetClass::BiArcOther: {
      auto fam = std::make_shared<ConsistencyFamily>(run_minimality(inst, minimality_opt));
      ctx.satisfiable = !fam->unsatisfiable();
      ctx.family = std::move(fam);
      break;
    }
    case TargetClass::NotBiArc:
      ctx.satisfiable = false;  // never consulted; run_prepared refuses first
      break;
  }
  return ctx;
}

inline Verdict run_prepared(const TestContext& ctx, const Instance& inst, CountingOracle& oracle,
                            const TesterConfig& cfg) {
  if (ctx.cls.detail == TargetClass::NotBiArc)
    throw NoSublinearTesterError("target admits no sublinear-query tester");
  validate_epsilon(cfg.epsilon);
  if (!ctx.satisfiable) {
    Transcript tr;
    tr.first_violation = "instance is unsatisfiable";
    return detail::finish(true, oracle, std::move(tr));
  }
  const int trials = std::max(cfg.trials, 1);
  Verdict last;
  for (int t = 0; t < trials; ++t) {
    TesterConfig one = cfg;
    one.trials = 1;
    one.seed = trials == 1 ? cfg.seed : mix64(cfg.seed, static_cast<std::uint64_t>(t));
    Verdict v;
    switch (ctx.cls.detail) {
      case TargetClass::ReflexiveComplete:
        v = test_reflexive_complete(inst, oracle, one);
        break;
      case TargetClass::IrreflexiveCompleteBipartite:
        v = test_icb(inst, oracle, one);
        break;
      default:
        v = test_biarc_with_family(inst, *ctx.family, oracle, one);
        break;
    }
    if (trials > 1) {
      std::ostringstream note;
      note << "trial " << t;
      v.transcript.notes.insert(v.transcript.notes.begin(), note.str());
    }
    if (v.decision == Decision::Reject) return v;
    last = std::move(v);
  }
  return last;
}

// One-shot dispatcher: classify, decide satisfiability with zero queries,
// then run the tier tester. Rejects unsatisfiable instances without querying;
// refuses targets outside the sublinear regime.
inline Verdict test(const Instance& inst, CountingOracle& oracle, const TesterConfig& cfg,
                    MajoritySearchOptions majority_opt = {},
                    MinimalityOptions minimality_opt = {}) {
  TestContext ctx = prepare_test(inst, majority_opt, minimality_opt);
  return run_prepared(ctx, inst, oracle, cfg);
}

}  // namespace homtest
