#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"
#include "homtest/minimality.hpp"
#include "homtest/oracle.hpp"
#include "homtest/rng.hpp"
#include "homtest/solver.hpp"
#include "homtest/testers.hpp"

namespace homtest {

// ---------------------------------------------------------------------------
// Planting: a random map first, then edges only between pairs of vertices
// whose images are adjacent, so the map is a solution by construction.

struct PlantParams {
  int n = 0;
  int m = 0;
  double list_density = 0.5;     // chance of keeping each non-planted value
  bool ensure_connected = false;  // grow a spanning tree first (needs m >= n-1)
};

struct Planted {
  Instance instance;
  Assignment planted;
};

inline Planted plant_instance(const Graph& h, const PlantParams& p, std::uint64_t seed) {
  if (p.n <= 0) throw ContractError("plant_instance: need at least one vertex");
  if (p.m < 0 || static_cast<long long>(p.m) > static_cast<long long>(p.n) * (p.n - 1) / 2)
    throw ContractError("plant_instance: edge count out of range");
  Rng rng(mix64(seed, 0xa1));
  std::vector<int> g(p.n);
  for (int v = 0; v < p.n; ++v) g[v] = rng.next_int(h.size());
  std::vector<std::pair<int, int>> edges;
  auto present = [&](int u, int v) {
    return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) != edges.end();
  };
  if (p.ensure_connected) {
    if (p.m < p.n - 1) throw ContractError("plant_instance: too few edges to connect");
    for (int v = 1; v < p.n; ++v) {
      const int u = rng.next_int(v);
      const auto& nb = h.adj[g[u]];
      if (nb.empty())
        throw ContractError("plant_instance: image vertex has no neighbors; cannot connect");
      g[v] = nb[rng.next_int(static_cast<int>(nb.size()))];
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  long attempts = 0;
  const long cap = 200L * std::max(p.m, 1) + 1000;
  while (static_cast<int>(edges.size()) < p.m) {
    if (++attempts > cap) throw ContractError("plant_instance: could not place the requested edges");
    int u = rng.next_int(p.n), v = rng.next_int(p.n);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!h.has_edge(g[u], g[v]) || present(u, v)) continue;
    edges.emplace_back(u, v);
  }
  std::vector<std::string> names(p.n);
  for (int v = 0; v < p.n; ++v) names[v] = std::to_string(v);
  Graph gg = Graph::build(std::move(names), edges);
  std::vector<std::vector<int>> lists(p.n);
  for (int v = 0; v < p.n; ++v) {
    for (int x = 0; x < h.size(); ++x) {
      if (x == g[v] || rng.next_double() < p.list_density) lists[v].push_back(x);
    }
  }
  Planted out;
  out.instance = make_instance(std::move(gg), h, lists);
  out.planted.values = std::move(g);
  if (!is_list_homomorphism(out.instance, out.planted))
    throw ContractError("plant_instance: planted map is not a solution");
  return out;
}

// ---------------------------------------------------------------------------
// Far certificates: perturb away from the nearest solution until the exact
// distance reaches epsilon, re-verifying with the solver each round.

struct FarCertificate {
  Assignment f;
  double distance = 0.0;
};

inline FarCertificate perturb_to_far(const Instance& inst, const Assignment& start, double eps,
                                     std::uint64_t seed, SearchBudget budget = {}) {
  if (!(eps > 0.0) || eps > 1.0) throw ContractError("epsilon must lie in (0, 1]");
  {
    // If every assignment satisfies the property there is nothing to reach.
    bool full_lists = true;
    for (int v = 0; v < inst.n() && full_lists; ++v)
      if (inst.list_size(v) != inst.target_size()) full_lists = false;
    const bool edges_free = inst.g.edges.empty() || is_reflexive_complete(inst.h);
    if (full_lists && edges_free)
      throw ContractError("perturb_to_far: every assignment satisfies the property");
  }
  Rng rng(mix64(seed, 0xfa));
  WeightedSampler sampler(inst.weights);
  Assignment cur = start;
  const int rounds_cap = 400;
  for (int round = 0; round < rounds_cap; ++round) {
    DistanceResult d = distance_to_property(inst, cur, budget);
    if (d.distance >= eps - 1e-12) return {cur, d.distance};
    const int batch =
        std::max(1, static_cast<int>(std::ceil((eps - d.distance) * inst.n())));
    for (int i = 0; i < batch; ++i) {
      const int v = sampler.sample(rng);
      const int avoid = d.witness[v];
      if (inst.target_size() == 1)
        throw ContractError("perturb_to_far: single-element target admits no far functions");
      int x = rng.next_int(inst.target_size() - 1);
      if (x >= avoid) ++x;
      cur.values[v] = x;
    }
  }
  throw ContractError("perturb_to_far: could not reach the requested distance");
}

// ---------------------------------------------------------------------------
// Monte-Carlo rejection estimation.

struct RejectionReport {
  int trials = 0;
  int rejections = 0;
  double rate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% Wilson interval
  double mean_queries = 0.0;
  long max_queries = 0;
};

inline void wilson_interval(int hits, int trials, double* lo, double* hi) {
  const double z = 1.959963984540054;
  const double nn = trials, p = static_cast<double>(hits) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  *lo = std::max(0.0, center - half);
  *hi = std::min(1.0, center + half);
}

// Runs the prepared tester `trials` times with independent per-trial seeds
// and one fresh oracle per run, so query counts are per-run.
inline RejectionReport estimate_rejection(const TestContext& ctx, const Instance& inst,
                                          const Assignment& f, const TesterConfig& base,
                                          int trials, std::uint64_t seed) {
  RejectionReport rep;
  rep.trials = trials;
  if (trials <= 0) {
    rep.trials = 0;
    rep.rate = rep.ci_lo = rep.ci_hi = std::numeric_limits<double>::quiet_NaN();
    rep.mean_queries = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  double qsum = 0.0;
  for (int t = 0; t < trials; ++t) {
    TesterConfig cfg = base;
    cfg.trials = 1;
    cfg.seed = mix64(seed, static_cast<std::uint64_t>(t));
    CountingOracle oracle(f);
    Verdict v = run_prepared(ctx, inst, oracle, cfg);
    if (v.decision == Decision::Reject) ++rep.rejections;
    qsum += static_cast<double>(v.queries);
    rep.max_queries = std::max(rep.max_queries, v.queries);
  }
  rep.rate = static_cast<double>(rep.rejections) / trials;
  wilson_interval(rep.rejections, trials, &rep.ci_lo, &rep.ci_hi);
  rep.mean_queries = qsum / trials;
  return rep;
}

// ---------------------------------------------------------------------------
// Query profiling across input sizes. Runs each tester once on a planted
// solution, so the full sample budget is exercised. Pair supports are kept in
// the derived (level-2) form: on accepting runs the query trace is identical
// to the materialized family's, and the quadratic storage never materializes.

struct ProfileRow {
  std::string tester;
  std::string target;
  int n = 0;
  double epsilon = 0.0;
  long q_total = 0;
  long q_distinct = 0;
  long budget = 0;
  std::uint64_t seed = 0;
};

inline const char* tester_id_for(const TrichotomyVerdict& cls) {
  switch (cls.detail) {
    case TargetClass::ReflexiveComplete: return "reflexive-complete";
    case TargetClass::IrreflexiveCompleteBipartite: return "bipartite";
    case TargetClass::BiArcOther: return "biarc";
    default: return "none";
  }
}

inline std::vector<ProfileRow> query_profile(const Graph& h, const std::string& target_label,
                                             const std::vector<int>& sizes, double epsilon,
                                             std::uint64_t seed, double list_density = 0.4) {
  std::vector<ProfileRow> rows;
  for (int n : sizes) {
    PlantParams pp;
    pp.n = n;
    pp.m = std::min(2 * n, n * (n - 1) / 2);
    pp.list_density = list_density;
    pp.ensure_connected = n >= 2;
    Planted planted = plant_instance(h, pp, mix64(seed, static_cast<std::uint64_t>(n), 1));
    MinimalityOptions mo;
    mo.l = 2;
    mo.max_n = std::max(n + 1, mo.max_n);
    TestContext ctx = prepare_test(planted.instance, {}, mo);
    TesterConfig cfg;
    cfg.epsilon = epsilon;
    cfg.seed = mix64(seed, static_cast<std::uint64_t>(n), 2);
    CountingOracle oracle(planted.planted);
    Verdict v = run_prepared(ctx, planted.instance, oracle, cfg);
    if (v.decision != Decision::Accept)
      throw ContractError("query_profile: tester rejected a planted solution");
    ProfileRow row;
    row.tester = tester_id_for(ctx.cls);
    row.target = target_label;
    row.n = n;
    row.epsilon = epsilon;
    row.q_total = static_cast<long>(oracle.total_accesses());
    row.q_distinct = static_cast<long>(oracle.distinct_queries());
    switch (ctx.cls.detail) {
      case TargetClass::ReflexiveComplete: row.budget = budget_reflexive_complete(cfg); break;
      case TargetClass::IrreflexiveCompleteBipartite: row.budget = budget_icb(cfg); break;
      default: row.budget = budget_biarc(cfg, n); break;
    }
    row.seed = cfg.seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Least-squares slope of log(total accesses) against log(n).
inline double fit_log_slope(const std::vector<ProfileRow>& rows) {
  if (rows.size() < 2) throw ContractError("fit_log_slope: need at least two rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const double x = std::log(static_cast<double>(r.n));
    const double y = std::log(static_cast<double>(r.q_total));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(rows.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Lifting an instance into a larger target that contains the current one as
// an induced subgraph. Solution sets and distances carry over exactly.

inline Instance embed_target(const Instance& inst, const Graph& big,
                             const std::vector<int>& iota) {
  if (static_cast<int>(iota.size()) != inst.target_size())
    throw ContractError("embed_target: map must cover the current target");
  std::vector<char> hit(big.size(), 0);
  for (int x : iota) {
    if (x < 0 || x >= big.size()) throw ContractError("embed_target: image out of range");
    if (hit[x]++) throw ContractError("embed_target: map must be injective");
  }
  for (int x = 0; x < inst.target_size(); ++x)
    for (int y = x; y < inst.target_size(); ++y)
      if (inst.h.has_edge(x, y) != big.has_edge(iota[x], iota[y]))
        throw ContractError("embed_target: image is not an induced copy");
  std::vector<std::vector<int>> lists(inst.n());
  for (int v = 0; v < inst.n(); ++v)
    for (int x = 0; x < inst.target_size(); ++x)
      if (inst.in_list(v, x)) lists[v].push_back(iota[x]);
  return make_instance(inst.g, big, lists, inst.weights);
}

// ---------------------------------------------------------------------------
// CSV emitters with pinned headers.

inline std::string bench_csv_header() {
  return "tester,H,n,epsilon,trials,rate,ci_lo,ci_hi,mean_q,max_q,seed";
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string bench_csv_row(const std::string& tester, const std::string& target, int n,
                                 double epsilon, const RejectionReport& rep, std::uint64_t seed) {
  std::string out;
  out += tester;
  out += ',';
  out += target;
  out += ',';
  out += std::to_string(n);
  out += ',';
  out += format_double(epsilon);
  out += ',';
  out += std::to_string(rep.trials);
  out += ',';
  out += format_double(rep.rate);
  out += ',';
  out += format_double(rep.ci_lo);
  out += ',';
  out += format_double(rep.ci_hi);
  out += ',';
  out += format_double(rep.mean_queries);
  out += ',';
  out += std::to_string(rep.max_queries);
  out += ',';
  out += std::to_string(seed);
  return out;
}

inline std::string profile_csv_header() {
  return "tester,H,n,epsilon,q_total,q_distinct,budget,seed";
}

inline std::string profile_csv_row(const ProfileRow& r) {
  std::string out;
  out += r.tester;
  out += ',';
  out += r.target;
  out += ',';
  out += std::to_string(r.n);
  out += ',';
  out += format_double(r.epsilon);
  out += ',';
  out += std::to_string(r.q_total);
  out += ',';
  out += std::to_string(r.q_distinct);
  out += ',';
  out += std::to_string(r.budget);
  out += ',';
  out += std::to_string(r.seed);
  return out;
}

}  // namespace homtest
