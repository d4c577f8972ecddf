#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"
#include "homtest/solver.hpp"

namespace homtest {

// Relational structures over a finite universe {0, ..., universe-1}, used by
// the reduction layer. Tuples are kept sorted and deduplicated.
struct Relation {
  std::string name;
  int arity = 0;
  std::vector<std::vector<int>> tuples;

  bool contains(const std::vector<int>& t) const {
    return std::binary_search(tuples.begin(), tuples.end(), t);
  }

  bool operator==(const Relation&) const = default;
};

struct Structure {
  int universe = 0;
  std::vector<Relation> relations;

  int find_relation(const std::string& name) const {
    for (std::size_t i = 0; i < relations.size(); ++i)
      if (relations[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const Relation& relation(const std::string& name) const {
    const int i = find_relation(name);
    if (i < 0) throw SchemaError("unknown relation: " + name);
    return relations[i];
  }

  bool operator==(const Structure&) const = default;
};

inline Relation make_relation(std::string name, int arity,
                              std::vector<std::vector<int>> tuples, int universe) {
  if (arity <= 0) throw SchemaError("relation arity must be positive");
  for (const auto& t : tuples) {
    if (static_cast<int>(t.size()) != arity)
      throw SchemaError("tuple arity mismatch in relation " + name);
    for (int x : t)
      if (x < 0 || x >= universe) throw SchemaError("tuple entry out of range in " + name);
  }
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  return Relation{std::move(name), arity, std::move(tuples)};
}

inline Structure make_structure(int universe, std::vector<Relation> relations) {
  if (universe <= 0 || universe > 64)
    throw SchemaError("structure universe must have between 1 and 64 elements");
  Structure s;
  s.universe = universe;
  for (auto& r : relations) {
    if (s.find_relation(r.name) >= 0) throw SchemaError("duplicate relation name: " + r.name);
    s.relations.push_back(make_relation(r.name, r.arity, std::move(r.tuples), universe));
  }
  return s;
}

struct Constraint {
  int rel = 0;                // index into target.relations
  std::vector<int> scope;     // variable ids, repetition allowed

  bool operator==(const Constraint&) const = default;
};

// Instance of the list-homomorphism problem over a relational structure.
// Unlike graph instances, empty lists are representable: reductions may
// legitimately produce unsatisfiable outputs.
struct RelInstance {
  Structure target;
  int n = 0;
  std::vector<std::uint64_t> lists;
  std::vector<Constraint> constraints;
  std::vector<double> weights;

  bool in_list(int v, int x) const { return (lists[v] >> x) & 1u; }
  std::uint64_t full_mask() const {
    return target.universe == 64 ? ~std::uint64_t{0}
                                 : (std::uint64_t{1} << target.universe) - 1;
  }
};

inline RelInstance make_rel_instance(Structure target, int n,
                                     std::vector<Constraint> constraints,
                                     std::vector<std::uint64_t> lists = {},
                                     std::vector<double> weights = {}) {
  RelInstance inst;
  inst.target = std::move(target);
  if (n <= 0) throw SchemaError("instance needs at least one variable");
  inst.n = n;
  if (lists.empty()) {
    const std::uint64_t full = inst.target.universe == 64
                                   ? ~std::uint64_t{0}
                                   : (std::uint64_t{1} << inst.target.universe) - 1;
    lists.assign(n, full);
  }
  if (static_cast<int>(lists.size()) != n) throw SchemaError("need one list per variable");
  for (std::uint64_t m : lists)
    if (inst.target.universe < 64 && (m >> inst.target.universe) != 0)
      throw SchemaError("list entry out of range");
  inst.lists = std::move(lists);
  for (auto& c : constraints) {
    if (c.rel < 0 || c.rel >= static_cast<int>(inst.target.relations.size()))
      throw SchemaError("constraint names a missing relation");
    if (static_cast<int>(c.scope.size()) != inst.target.relations[c.rel].arity)
      throw SchemaError("constraint scope does not match relation arity");
    for (int v : c.scope)
      if (v < 0 || v >= n) throw SchemaError("constraint scope variable out of range");
  }
  inst.constraints = std::move(constraints);
  if (weights.empty()) weights.assign(n, 1.0);
  if (static_cast<int>(weights.size()) != n) throw SchemaError("need one weight per variable");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw SchemaError("weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw SchemaError("total weight must be positive");
  inst.weights.resize(n);
  for (int v = 0; v < n; ++v) inst.weights[v] = weights[v] / total;
  return inst;
}

inline bool is_rel_hom(const RelInstance& inst, const std::vector<int>& f) {
  if (static_cast<int>(f.size()) != inst.n) return false;
  for (int v = 0; v < inst.n; ++v)
    if (f[v] < 0 || f[v] >= inst.target.universe || !inst.in_list(v, f[v])) return false;
  std::vector<int> t;
  for (const auto& c : inst.constraints) {
    const Relation& r = inst.target.relations[c.rel];
    t.clear();
    for (int v : c.scope) t.push_back(f[v]);
    if (!r.contains(t)) return false;
  }
  return true;
}

namespace detail {

// Backtracking over variables in canonical order; a constraint fires once its
// highest-indexed variable is assigned.
class RelSearch {
 public:
  RelSearch(const RelInstance& inst, SearchBudget budget) : inst_(&inst), budget_(budget) {
    by_last_.resize(inst.n);
    for (std::size_t i = 0; i < inst.constraints.size(); ++i) {
      int last = 0;
      for (int v : inst.constraints[i].scope) last = std::max(last, v);
      by_last_[last].push_back(static_cast<int>(i));
    }
    values_.resize(inst.target.universe);
    for (int x = 0; x < inst.target.universe; ++x) values_[x] = x;
  }

  // Enumerate assignments; cb returns false to stop early.
  template <class Cb>
  void enumerate(const Cb& cb) {
    f_.assign(inst_->n, -1);
    stop_ = false;
    dfs_enumerate(0, cb);
  }

  // Exact weighted distance from f to the solution set, canonical witness.
  DistanceResult distance(const std::vector<int>& f) {
    double best = std::numeric_limits<double>::infinity();
    f_.assign(inst_->n, -1);
    dfs_distance(0, f, 0.0, &best);
    if (!std::isfinite(best)) throw UnsatisfiableError("instance has no solution");
    std::vector<int> witness;
    f_.assign(inst_->n, -1);
    dfs_witness(0, f, 0.0, best, &witness);
    if (witness.empty() && inst_->n > 0)
      throw ContractError("distance witness pass found nothing");
    DistanceResult out;
    out.distance = best;
    out.witness.values = std::move(witness);
    return out;
  }

 private:
  bool consistent_at(int v) const {
    std::vector<int> t;
    for (int ci : by_last_[v]) {
      const Constraint& c = inst_->constraints[ci];
      const Relation& r = inst_->target.relations[c.rel];
      t.clear();
      for (int u : c.scope) t.push_back(f_[u]);
      if (!r.contains(t)) return false;
    }
    return true;
  }

  void charge() {
    if (++nodes_ > budget_.max_nodes) throw BudgetError("relational search budget exceeded");
  }

  template <class Cb>
  void dfs_enumerate(int v, const Cb& cb) {
    if (stop_) return;
    if (v == inst_->n) {
      if (!cb(f_)) stop_ = true;
      return;
    }
    for (int x : values_) {
      if (!inst_->in_list(v, x)) continue;
      charge();
      f_[v] = x;
      if (consistent_at(v)) dfs_enumerate(v + 1, cb);
      f_[v] = -1;
      if (stop_) return;
    }
  }

  void dfs_distance(int v, const std::vector<int>& ref, double cost, double* best) {
    if (cost >= *best - 1e-15) return;
    if (v == inst_->n) {
      *best = cost;
      return;
    }
    // Reference value first homes in on the minimum quickly.
    auto try_value = [&](int x) {
      if (!inst_->in_list(v, x)) return;
      const double add = x == ref[v] ? 0.0 : inst_->weights[v];
      if (cost + add >= *best - 1e-15) return;
      charge();
      f_[v] = x;
      if (consistent_at(v)) dfs_distance(v + 1, ref, cost + add, best);
      f_[v] = -1;
    };
    try_value(ref[v]);
    for (int x : values_)
      if (x != ref[v]) try_value(x);
  }

  void dfs_witness(int v, const std::vector<int>& ref, double cost, double best,
                   std::vector<int>* out) {
    if (!out->empty()) return;
    if (cost > best + 1e-12) return;
    if (v == inst_->n) {
      *out = f_;
      return;
    }
    for (int x : values_) {
      if (!inst_->in_list(v, x)) continue;
      const double add = x == ref[v] ? 0.0 : inst_->weights[v];
      if (cost + add > best + 1e-12) continue;
      charge();
      f_[v] = x;
      if (consistent_at(v)) dfs_witness(v + 1, ref, cost + add, best, out);
      f_[v] = -1;
      if (!out->empty()) return;
    }
  }

  const RelInstance* inst_;
  SearchBudget budget_;
  std::vector<std::vector<int>> by_last_;
  std::vector<int> values_;
  std::vector<int> f_;
  std::uint64_t nodes_ = 0;
  bool stop_ = false;
};

}  // namespace detail

inline std::vector<std::vector<int>> enumerate_rel_homs(const RelInstance& inst,
                                                        std::size_t limit = SIZE_MAX,
                                                        SearchBudget budget = {}) {
  std::vector<std::vector<int>> out;
  detail::RelSearch search(inst, budget);
  search.enumerate([&](const std::vector<int>& f) {
    out.push_back(f);
    return out.size() < limit;
  });
  return out;
}

inline bool rel_satisfiable(const RelInstance& inst, SearchBudget budget = {}) {
  bool found = false;
  detail::RelSearch search(inst, budget);
  search.enumerate([&](const std::vector<int>&) {
    found = true;
    return false;
  });
  return found;
}

// Exact weighted distance from f to the nearest solution, with the canonical
// first minimizer as witness. Throws UnsatisfiableError when no solution
// exists.
inline DistanceResult rel_distance(const RelInstance& inst, const std::vector<int>& f,
                                   SearchBudget budget = {}) {
  if (static_cast<int>(f.size()) != inst.n)
    throw ContractError("rel_distance: assignment size mismatch");
  for (int x : f)
    if (x < 0 || x >= inst.target.universe)
      throw ContractError("rel_distance: assignment value out of range");
  detail::RelSearch search(inst, budget);
  return search.distance(f);
}

inline double rel_weighted_distance(const RelInstance& inst, const std::vector<int>& a,
                                    const std::vector<int>& b) {
  double d = 0.0;
  for (int v = 0; v < inst.n; ++v)
    if (a[v] != b[v]) d += inst.weights[v];
  return d;
}

// Graph instances as relational ones: a single symmetric binary relation.
inline RelInstance to_relational(const Instance& inst) {
  std::vector<std::vector<int>> tuples;
  for (auto [u, v] : inst.h.edges) {
    tuples.push_back({u, v});
    if (u != v) tuples.push_back({v, u});
  }
  Structure s = make_structure(
      std::max(inst.target_size(), 1),
      {Relation{"edge", 2, std::move(tuples)}});
  std::vector<Constraint> cons;
  for (auto [u, v] : inst.g.edges) cons.push_back({0, {u, v}});
  return make_rel_instance(std::move(s), inst.n(), std::move(cons), inst.lists, inst.weights);
}

// The two-element structure with the even- and odd-parity ternary relations.
inline Structure three_lin() {
  return make_structure(
      2, {Relation{"even", 3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}}},
          Relation{"odd", 3, {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}, {1, 1, 1}}}});
}

}  // namespace homtest
