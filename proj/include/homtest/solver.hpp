#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"

namespace homtest {

// Node cap for exact searches. Exceeding it raises BudgetError; it never
// silently degrades a result.
struct SearchBudget {
  std::uint64_t max_nodes = 10'000'000;
};

struct DistanceResult {
  double distance = 0.0;
  Assignment witness;
};

namespace detail {

// Backtracking over vertices in canonical order with forward checking.
// Domains are value bitmasks; a trail records domain shrinks for undo. In
// distance mode the engine also maintains the partial disagreement cost and a
// lower bound: the total weight of unassigned vertices whose domain no longer
// contains the reference value (each must deviate in any completion).
class SearchEngine {
 public:
  SearchEngine(const Instance& inst, std::uint64_t* nodes, std::uint64_t max_nodes)
      : inst_(inst),
        hadj_(adjacency_masks(inst.h)),
        nodes_(nodes),
        max_nodes_(max_nodes) {
    const int n = inst.n();
    dom_.resize(n);
    std::uint64_t loop_values = 0;
    for (int x = 0; x < inst.target_size(); ++x)
      if (inst.h.has_loop(x)) loop_values |= std::uint64_t{1} << x;
    for (int v = 0; v < n; ++v) {
      dom_[v] = inst.lists[v];
      if (inst.g.has_loop(v)) dom_[v] &= loop_values;
    }
    assigned_.assign(n, -1);
    flag_.assign(n, 0);
  }

  // Restrict a vertex to one value before the search starts.
  void force(int v, int x) { dom_[v] &= std::uint64_t{1} << x; }

  // Install the reference assignment for distance mode.
  void set_reference(const Assignment& f) {
    ref_ = &f;
    lb_ = 0.0;
    for (int v = 0; v < inst_.n(); ++v) {
      flag_[v] = ((dom_[v] >> f[v]) & 1u) ? 0 : 1;
      if (flag_[v]) lb_ += inst_.weights[v];
    }
  }

  bool empty_domain_at_root() const {
    for (std::uint64_t d : dom_)
      if (d == 0) return true;
    return false;
  }

  std::uint64_t domain(int v) const { return dom_[v]; }
  double partial_cost() const { return cost_; }
  double bound() const { return cost_ + lb_; }
  const std::vector<int>& assigned() const { return assigned_; }

  // Assign v <- x, propagate to unassigned neighbors; false on a wiped-out
  // domain (frame stays open either way; call undo()).
  bool assign(int v, int x) {
    if (++*nodes_ > max_nodes_) throw BudgetError("solver node budget exceeded");
    marks_.push_back(trail_.size());
    frame_.push_back(v);
    if (ref_) {
      set_flag(v, 0);
      if (x != (*ref_)[v]) cost_ += inst_.weights[v];
    }
    assigned_[v] = x;
    bool ok = true;
    for (int u : inst_.g.adj[v]) {
      if (assigned_[u] != -1 || u == v) continue;
      const std::uint64_t nm = dom_[u] & hadj_[x];
      if (nm != dom_[u]) {
        set_dom(u, nm);
        if (nm == 0) ok = false;
      }
    }
    return ok;
  }

  void undo() {
    const int v = frame_.back();
    frame_.pop_back();
    if (ref_ && assigned_[v] != (*ref_)[v]) cost_ -= inst_.weights[v];
    assigned_[v] = -1;
    const std::size_t mark = marks_.back();
    marks_.pop_back();
    while (trail_.size() > mark) {
      const TrailEntry e = trail_.back();
      trail_.pop_back();
      dom_[e.v] = e.old_dom;
      if (flag_[e.v] != e.old_flag) {
        lb_ += inst_.weights[e.v] * (e.old_flag - flag_[e.v]);
        flag_[e.v] = e.old_flag;
      }
    }
  }

 private:
  struct TrailEntry {
    int v;
    std::uint64_t old_dom;
    char old_flag;
  };

  void set_dom(int v, std::uint64_t m) {
    trail_.push_back({v, dom_[v], flag_[v]});
    dom_[v] = m;
    if (ref_ && assigned_[v] == -1) {
      const char nf = ((m >> (*ref_)[v]) & 1u) ? 0 : 1;
      if (nf != flag_[v]) {
        lb_ += inst_.weights[v] * (nf - flag_[v]);
        flag_[v] = nf;
      }
    }
  }

  void set_flag(int v, char nf) {
    trail_.push_back({v, dom_[v], flag_[v]});
    if (nf != flag_[v]) {
      lb_ += inst_.weights[v] * (nf - flag_[v]);
      flag_[v] = nf;
    }
  }

  const Instance& inst_;
  std::vector<std::uint64_t> hadj_;
  std::vector<std::uint64_t> dom_;
  std::vector<int> assigned_;
  std::vector<char> flag_;
  std::vector<TrailEntry> trail_;
  std::vector<std::size_t> marks_;
  std::vector<int> frame_;
  const Assignment* ref_ = nullptr;
  double cost_ = 0.0;
  double lb_ = 0.0;
  std::uint64_t* nodes_;
  std::uint64_t max_nodes_;
};

// Depth-first enumeration in canonical vertex/value order. The callback
// returns false to stop the search.
template <typename OnSolution>
inline bool dfs_enumerate(SearchEngine& e, const Instance& inst, int pos, const OnSolution& cb) {
  if (pos == inst.n()) return cb(e.assigned());
  std::uint64_t m = e.domain(pos);
  while (m) {
    const int x = std::countr_zero(m);
    m &= m - 1;
    const bool open = e.assign(pos, x);
    const bool go_on = !open || dfs_enumerate(e, inst, pos + 1, cb);
    e.undo();
    if (open && !go_on) return false;
  }
  return true;
}

}  // namespace detail

// All list-homomorphisms in canonical (lexicographic) order, capped at
// `limit`.
inline std::vector<Assignment> enumerate_list_homs(
    const Instance& inst, std::size_t limit = std::numeric_limits<std::size_t>::max(),
    SearchBudget budget = {}) {
  std::uint64_t nodes = 0;
  detail::SearchEngine e(inst, &nodes, budget.max_nodes);
  std::vector<Assignment> out;
  if (limit == 0) return out;
  detail::dfs_enumerate(e, inst, 0, [&](const std::vector<int>& sol) {
    out.push_back(Assignment{sol});
    return out.size() < limit;
  });
  return out;
}

inline bool satisfiable(const Instance& inst, SearchBudget budget = {}) {
  std::uint64_t nodes = 0;
  detail::SearchEngine e(inst, &nodes, budget.max_nodes);
  bool found = false;
  detail::dfs_enumerate(e, inst, 0, [&](const std::vector<int>&) {
    found = true;
    return false;
  });
  return found;
}

// Can the partial map (-1 = undefined) be completed to a list-homomorphism?
inline bool extendable(const Instance& inst, const std::vector<int>& partial,
                       SearchBudget budget = {}) {
  if (static_cast<int>(partial.size()) != inst.n())
    throw ContractError("extendable: partial map domain mismatch");
  std::uint64_t nodes = 0;
  detail::SearchEngine e(inst, &nodes, budget.max_nodes);
  for (int v = 0; v < inst.n(); ++v) {
    if (partial[v] == -1) continue;
    if (partial[v] < 0 || partial[v] >= inst.target_size())
      throw ContractError("extendable: value out of range");
    e.force(v, partial[v]);
  }
  if (e.empty_domain_at_root()) return false;
  bool found = false;
  detail::dfs_enumerate(e, inst, 0, [&](const std::vector<int>&) {
    found = true;
    return false;
  });
  return found;
}

// Exact weighted distance from f to the nearest list-homomorphism, with the
// first minimizer in canonical enumeration order as witness. Two passes: a
// warm branch-and-bound pass (reference value tried first) establishes the
// exact minimum, then a canonical-order pass retrieves the witness. Raises
// UnsatisfiableError when no list-homomorphism exists.
inline DistanceResult distance_to_property(const Instance& inst, const Assignment& f,
                                           SearchBudget budget = {}) {
  if (f.size() != inst.n()) throw ContractError("distance_to_property: domain mismatch");
  std::uint64_t nodes = 0;
  const double kTol = 1e-12;
  double best = std::numeric_limits<double>::infinity();

  {
    detail::SearchEngine e(inst, &nodes, budget.max_nodes);
    e.set_reference(f);
    // Value order: f(v) first, then ascending. Explores near-f completions
    // early so the cost bound bites.
    auto rec = [&](auto&& self, int pos) -> void {
      if (pos == inst.n()) {
        best = std::min(best, e.partial_cost());
        return;
      }
      std::uint64_t m = e.domain(pos);
      const int fx = f[pos];
      std::uint64_t order[2] = {((m >> fx) & 1u) ? (std::uint64_t{1} << fx) : 0, m & ~(std::uint64_t{1} << fx)};
      for (std::uint64_t group : order) {
        while (group) {
          const int x = std::countr_zero(group);
          group &= group - 1;
          const bool open = e.assign(pos, x);
          if (open && e.bound() < best) self(self, pos + 1);
          e.undo();
        }
      }
    };
    rec(rec, 0);
  }
  if (!std::isfinite(best))
    throw UnsatisfiableError("no list-homomorphism exists; distance undefined");

  detail::SearchEngine e(inst, &nodes, budget.max_nodes);
  e.set_reference(f);
  DistanceResult out;
  bool found = false;
  auto rec = [&](auto&& self, int pos) -> bool {  // true = keep searching
    if (pos == inst.n()) {
      if (e.partial_cost() <= best + kTol) {
        out.distance = e.partial_cost();
        out.witness = Assignment{e.assigned()};
        found = true;
        return false;
      }
      return true;
    }
    std::uint64_t m = e.domain(pos);
    while (m) {
      const int x = std::countr_zero(m);
      m &= m - 1;
      const bool open = e.assign(pos, x);
      const bool go_on = !open || e.bound() > best + kTol || self(self, pos + 1);
      e.undo();
      if (!go_on) return false;
    }
    return true;
  };
  rec(rec, 0);
  if (!found) throw ContractError("internal: witness pass found no minimizer");
  return out;
}

// The set of value pairs (f(u), f(v)) realized by list-homomorphisms, sorted.
// One satisfiability probe per candidate pair; cross-checked in tests against
// the projection of full enumeration.
inline std::vector<std::pair<int, int>> relation_between(const Instance& inst, int u, int v,
                                                         SearchBudget budget = {}) {
  if (u < 0 || v < 0 || u >= inst.n() || v >= inst.n() || u == v)
    throw ContractError("relation_between needs two distinct vertices");
  std::uint64_t nodes = 0;
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x < inst.target_size(); ++x) {
    if (!inst.in_list(u, x)) continue;
    for (int y = 0; y < inst.target_size(); ++y) {
      if (!inst.in_list(v, y)) continue;
      detail::SearchEngine e(inst, &nodes, budget.max_nodes);
      e.force(u, x);
      e.force(v, y);
      if (e.empty_domain_at_root()) continue;
      bool found = false;
      detail::dfs_enumerate(e, inst, 0, [&](const std::vector<int>&) {
        found = true;
        return false;
      });
      if (found) out.emplace_back(x, y);
    }
  }
  return out;
}

}  // namespace homtest
