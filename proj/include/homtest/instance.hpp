#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/graph.hpp"

namespace homtest {

inline constexpr double kWeightTolerance = 1e-9;

// Total map V(G) -> V(H), stored as dense value indices.
struct Assignment {
  std::vector<int> values;

  int operator[](int v) const { return values[v]; }
  int size() const { return static_cast<int>(values.size()); }
};

// A list-homomorphism instance: input graph g, target graph h, one nonempty
// list per input vertex (bitmask over V(h)), and a normalized weight per input
// vertex. Zero weights are permitted; the total is 1 within kWeightTolerance.
struct Instance {
  Graph g;
  Graph h;
  std::vector<std::uint64_t> lists;
  std::vector<double> weights;

  int n() const { return g.size(); }
  int target_size() const { return h.size(); }

  bool in_list(int v, int x) const { return (lists[v] >> x) & 1u; }

  int list_size(int v) const { return std::popcount(lists[v]); }

  // Smallest listed value; lists are nonempty by construction.
  int list_min(int v) const { return std::countr_zero(lists[v]); }
};

// Validates and normalizes. `raw_lists` holds value indices per vertex;
// `raw_weights` is unnormalized (empty means uniform).
inline Instance make_instance(Graph g, Graph h,
                              const std::vector<std::vector<int>>& raw_lists,
                              std::vector<double> raw_weights = {}) {
  if (h.size() > 64) throw SchemaError("target graphs with more than 64 vertices are not supported");
  Instance inst;
  const int n = g.size();
  if (static_cast<int>(raw_lists.size()) != n)
    throw SchemaError("need exactly one list per input vertex");
  inst.lists.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int x : raw_lists[v]) {
      if (x < 0 || x >= h.size()) throw SchemaError("list entry out of range at " + g.names[v]);
      inst.lists[v] |= std::uint64_t{1} << x;
    }
    if (inst.lists[v] == 0) throw SchemaError("empty list at " + g.names[v]);
  }
  if (raw_weights.empty()) raw_weights.assign(n, 1.0);
  if (static_cast<int>(raw_weights.size()) != n)
    throw SchemaError("need exactly one weight per input vertex");
  double total = 0.0;
  for (int v = 0; v < n; ++v) {
    if (!(raw_weights[v] >= 0.0) || !std::isfinite(raw_weights[v]))
      throw SchemaError("weights must be finite and nonnegative; offending vertex " + g.names[v]);
    total += raw_weights[v];
  }
  if (total <= 0.0) throw SchemaError("total weight must be positive");
  inst.weights.resize(n);
  for (int v = 0; v < n; ++v) inst.weights[v] = raw_weights[v] / total;
  double check = 0.0;
  for (double w : inst.weights) check += w;
  if (std::abs(check - 1.0) > kWeightTolerance)
    throw SchemaError("weight normalization failed");
  inst.g = std::move(g);
  inst.h = std::move(h);
  return inst;
}

// Weighted fraction of vertices where the two assignments disagree.
inline double weighted_distance(const Instance& inst, const Assignment& a, const Assignment& b) {
  if (a.size() != inst.n() || b.size() != inst.n())
    throw ContractError("weighted_distance: assignment domain mismatch");
  double d = 0.0;
  for (int v = 0; v < inst.n(); ++v)
    if (a[v] != b[v]) d += inst.weights[v];
  return d;
}

inline bool is_list_homomorphism(const Instance& inst, const Assignment& f) {
  if (f.size() != inst.n()) throw ContractError("assignment domain mismatch");
  for (int v = 0; v < inst.n(); ++v) {
    if (f[v] < 0 || f[v] >= inst.target_size() || !inst.in_list(v, f[v])) return false;
  }
  for (auto [u, v] : inst.g.edges)
    if (!inst.h.has_edge(f[u], f[v])) return false;
  return true;
}

// Sub-instance induced on a vertex subset, with weights renormalized to the
// subset's mass. `origin[i]` maps new indices back to the original instance.
struct Restriction {
  Instance instance;
  std::vector<int> origin;
};

inline Restriction restrict_to(const Instance& inst, std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.empty()) throw ContractError("restrict_to: empty vertex subset");
  double mass = 0.0;
  for (int v : subset) {
    if (v < 0 || v >= inst.n()) throw ContractError("restrict_to: vertex out of range");
    mass += inst.weights[v];
  }
  if (mass <= 0.0) throw ContractError("restrict_to: subset has zero total weight");
  Restriction r;
  r.origin = subset;
  r.instance.g = induced_subgraph(inst.g, subset);
  r.instance.h = inst.h;
  r.instance.lists.reserve(subset.size());
  r.instance.weights.reserve(subset.size());
  for (int v : subset) {
    r.instance.lists.push_back(inst.lists[v]);
    r.instance.weights.push_back(inst.weights[v] / mass);
  }
  return r;
}

}  // namespace homtest
