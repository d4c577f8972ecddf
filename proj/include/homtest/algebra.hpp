#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/graph.hpp"

namespace homtest {

// Total ternary operation on V(H), flattened as values[(x*h + y)*h + z].
struct MajorityTable {
  int h = 0;
  std::vector<int> values;

  int at(int x, int y, int z) const { return values[(static_cast<std::size_t>(x) * h + y) * h + z]; }
};

// Independent verifier: majority identities, conservativity, and preservation
// of the edge relation under component-wise application.
inline bool check_majority_table(const Graph& h, const MajorityTable& m,
                                 std::string* why = nullptr) {
  const int n = h.size();
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (m.h != n || m.values.size() != static_cast<std::size_t>(n) * n * n)
    return fail("table size mismatch");
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        const int v = m.at(x, y, z);
        if (v < 0 || v >= n) return fail("value out of range");
        if (v != x && v != y && v != z) return fail("not conservative");
      }
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (m.at(x, x, y) != x || m.at(x, y, x) != x || m.at(y, x, x) != x)
        return fail("majority identity fails");
  // Ordered adjacent pairs, loops included once.
  std::vector<std::pair<int, int>> arcs;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (h.has_edge(u, v)) arcs.emplace_back(u, v);
  for (auto [a1, b1] : arcs)
    for (auto [a2, b2] : arcs)
      for (auto [a3, b3] : arcs)
        if (!h.has_edge(m.at(a1, a2, a3), m.at(b1, b2, b3)))
          return fail("edge relation not preserved");
  return true;
}

struct MajoritySearchOptions {
  int max_target = 8;                    // |V(H)| cap; variables grow as h(h-1)(h-2)
  long long max_nodes = 2'000'000;       // backtracking assignment budget
};

namespace detail {

// Backtracking search for a conservative majority operation. Variables are
// the triples with three distinct entries (everything else is forced by the
// majority identities); each domain is a subset of the triple's own entries.
class MajoritySearch {
 public:
  MajoritySearch(const Graph& h, const MajoritySearchOptions& opt) : h_(h), opt_(opt) {
    n_ = h.size();
    hadj_ = adjacency_masks(h);
    vid_.assign(static_cast<std::size_t>(n_) * n_ * n_, -1);
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y)
        for (int z = 0; z < n_; ++z)
          if (x != y && x != z && y != z) {
            vid_[(static_cast<std::size_t>(x) * n_ + y) * n_ + z] =
                static_cast<int>(triples_.size());
            triples_.push_back({x, y, z});
          }
    dom_.assign(triples_.size(), 0b111);
    neighbors_.resize(triples_.size());
  }

  // Fixed value under the majority identities; -1 when the triple is a
  // genuine variable.
  static int determined(int x, int y, int z) {
    if (x == y || x == z) return x;
    if (y == z) return y;
    return -1;
  }

  std::optional<MajorityTable> run() {
    if (!collect_constraints()) return std::nullopt;
    if (!initial_arc_consistency()) return std::nullopt;
    assignment_.assign(triples_.size(), -1);
    if (!dfs(0)) return std::nullopt;
    MajorityTable m;
    m.h = n_;
    m.values.assign(static_cast<std::size_t>(n_) * n_ * n_, 0);
    for (int x = 0; x < n_; ++x)
      for (int y = 0; y < n_; ++y)
        for (int z = 0; z < n_; ++z) {
          const int d = determined(x, y, z);
          const std::size_t key = (static_cast<std::size_t>(x) * n_ + y) * n_ + z;
          m.values[key] = d >= 0 ? d : triples_[vid_[key]][assignment_[vid_[key]]];
        }
    return m;
  }

 private:
  bool adj(int a, int b) const { return (hadj_[a] >> b) & 1u; }

  int value_of(int var, int j) const { return triples_[var][j]; }

  // Enumerate all component-wise adjacent triple pairs; const-const pairs are
  // checked immediately, const-var pairs prune a domain, var-var pairs become
  // "values adjacent in H" constraints.
  bool collect_constraints() {
    std::vector<std::pair<int, int>> arcs;
    for (int u = 0; u < n_; ++u)
      for (int v = 0; v < n_; ++v)
        if (h_.has_edge(u, v)) arcs.emplace_back(u, v);
    std::vector<char> seen;
    seen.assign(triples_.size() * triples_.size(), 0);
    for (auto [a1, b1] : arcs)
      for (auto [a2, b2] : arcs)
        for (auto [a3, b3] : arcs) {
          const int da = determined(a1, a2, a3), db = determined(b1, b2, b3);
          if (da >= 0 && db >= 0) {
            if (!adj(da, db)) return false;
            continue;
          }
          if (da >= 0) {
            const int v = vid_[(static_cast<std::size_t>(b1) * n_ + b2) * n_ + b3];
            for (int j = 0; j < 3; ++j)
              if ((dom_[v] >> j) & 1 && !adj(da, value_of(v, j))) dom_[v] &= ~(1 << j);
            if (dom_[v] == 0) return false;
            continue;
          }
          if (db >= 0) {
            const int v = vid_[(static_cast<std::size_t>(a1) * n_ + a2) * n_ + a3];
            for (int j = 0; j < 3; ++j)
              if ((dom_[v] >> j) & 1 && !adj(value_of(v, j), db)) dom_[v] &= ~(1 << j);
            if (dom_[v] == 0) return false;
            continue;
          }
          const int va = vid_[(static_cast<std::size_t>(a1) * n_ + a2) * n_ + a3];
          const int vb = vid_[(static_cast<std::size_t>(b1) * n_ + b2) * n_ + b3];
          if (va == vb) {
            // m(A) must be self-adjacent (all three components are looped).
            for (int j = 0; j < 3; ++j)
              if ((dom_[va] >> j) & 1 && !adj(value_of(va, j), value_of(va, j)))
                dom_[va] &= ~(1 << j);
            if (dom_[va] == 0) return false;
            continue;
          }
          const int lo = std::min(va, vb), hi = std::max(va, vb);
          if (!seen[static_cast<std::size_t>(lo) * triples_.size() + hi]) {
            seen[static_cast<std::size_t>(lo) * triples_.size() + hi] = 1;
            neighbors_[lo].push_back(hi);
            neighbors_[hi].push_back(lo);
          }
        }
    for (auto& nb : neighbors_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return true;
  }

  // Keep only values of u with an adjacent partner at v.
  bool revise(int u, int v) {
    int nd = dom_[u];
    for (int j = 0; j < 3; ++j) {
      if (!((nd >> j) & 1)) continue;
      bool ok = false;
      for (int j2 = 0; j2 < 3 && !ok; ++j2)
        if ((dom_[v] >> j2) & 1 && adj(value_of(u, j), value_of(v, j2))) ok = true;
      if (!ok) nd &= ~(1 << j);
    }
    if (nd == dom_[u]) return false;
    dom_[u] = nd;
    return true;
  }

  bool propagate(std::deque<int> queue) {
    std::vector<char> inq(triples_.size(), 0);
    for (int v : queue) inq[v] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      inq[v] = 0;
      for (int u : neighbors_[v]) {
        if (revise(u, v)) {
          if (dom_[u] == 0) return false;
          if (!inq[u]) {
            inq[u] = 1;
            queue.push_back(u);
          }
        }
      }
    }
    return true;
  }

  bool initial_arc_consistency() {
    std::deque<int> all;
    for (std::size_t i = 0; i < triples_.size(); ++i) all.push_back(static_cast<int>(i));
    return propagate(std::move(all));
  }

  bool dfs(std::size_t var) {
    if (var == triples_.size()) return true;
    if (assignment_[var] >= 0) return dfs(var + 1);
    const int saved_mask = dom_[var];
    for (int j = 0; j < 3; ++j) {
      if (!((saved_mask >> j) & 1)) continue;
      if (++nodes_ > opt_.max_nodes)
        throw BudgetError("majority search budget exceeded");
      std::vector<int> saved_dom = dom_;
      dom_[var] = 1 << j;
      assignment_[var] = j;
      if (propagate({static_cast<int>(var)}) && dfs(var + 1)) return true;
      assignment_[var] = -1;
      dom_ = std::move(saved_dom);
    }
    return false;
  }

  const Graph& h_;
  MajoritySearchOptions opt_;
  int n_ = 0;
  long long nodes_ = 0;
  std::vector<std::uint64_t> hadj_;
  std::vector<std::array<int, 3>> triples_;
  std::vector<int> vid_;
  std::vector<int> dom_;
  std::vector<int> assignment_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace detail

// First conservative majority operation on H in canonical order, or nullopt
// if exhaustive search proves none exists.
inline std::optional<MajorityTable> find_conservative_majority(const Graph& h,
                                                               MajoritySearchOptions opt = {}) {
  if (h.size() > opt.max_target)
    throw BudgetError("majority search cap exceeded: |V(H)| > " + std::to_string(opt.max_target));
  if (h.size() == 0) {
    return MajorityTable{0, {}};
  }
  detail::MajoritySearch search(h, opt);
  auto m = search.run();
  if (m) {
    std::string why;
    if (!check_majority_table(h, *m, &why)) throw ContractError("majority search bug: " + why);
  }
  return m;
}

inline bool is_reflexive_complete(const Graph& h) {
  for (int v = 0; v < h.size(); ++v)
    if (!h.has_loop(v)) return false;
  for (int u = 0; u < h.size(); ++u)
    for (int v = u + 1; v < h.size(); ++v)
      if (!h.has_edge(u, v)) return false;
  return true;
}

// Bipartition witness for an irreflexive complete bipartite graph. An
// edgeless irreflexive graph counts (one empty side).
struct IcbParts {
  bool ok = false;
  std::vector<int> side;  // 0/1 per vertex of H
};

inline IcbParts icb_parts(const Graph& h) {
  IcbParts out;
  if (!h.is_irreflexive()) return out;
  out.side.assign(h.size(), 0);
  if (h.edges.empty()) {
    out.ok = true;
    return out;
  }
  const auto [eu, ev] = h.edges.front();
  // Side A = N(ev) contains eu; side B = N(eu).
  std::vector<char> in_a(h.size(), 0), in_b(h.size(), 0);
  for (int x : h.adj[ev]) in_a[x] = 1;
  for (int x : h.adj[eu]) in_b[x] = 1;
  std::size_t a = 0, b = 0;
  for (int v = 0; v < h.size(); ++v) {
    if (in_a[v] && in_b[v]) return out;  // sides must be disjoint
    if (!in_a[v] && !in_b[v]) return out;  // and cover V(H)
    out.side[v] = in_a[v] ? 0 : 1;
    (in_a[v] ? a : b) += 1;
  }
  if (h.edges.size() != a * b) return out;  // completeness across sides
  for (auto [x, y] : h.edges)
    if (out.side[x] == out.side[y]) return out;
  out.ok = true;
  return out;
}

// Full homomorphism H -> K2 for an irreflexive complete bipartite H: the side
// holding the canonical minimum vertex maps to K2's first vertex.
inline std::vector<int> full_hom_to_k2(const Graph& h) {
  IcbParts parts = icb_parts(h);
  if (!parts.ok) throw ContractError("full_hom_to_k2: target is not irreflexive complete bipartite");
  std::vector<int> map = parts.side;
  if (h.size() > 0 && map[0] == 1)
    for (int& s : map) s ^= 1;
  return map;
}

enum class Tier { Constant, Sublinear, Linear };
enum class TargetClass { ReflexiveComplete, IrreflexiveCompleteBipartite, BiArcOther, NotBiArc };

inline const char* tier_name(Tier t) {
  switch (t) {
    case Tier::Constant: return "constant";
    case Tier::Sublinear: return "sublinear";
    default: return "linear";
  }
}

inline const char* class_name(TargetClass c) {
  switch (c) {
    case TargetClass::ReflexiveComplete: return "reflexive-complete";
    case TargetClass::IrreflexiveCompleteBipartite: return "irreflexive-complete-bipartite";
    case TargetClass::BiArcOther: return "bi-arc";
    default: return "not-bi-arc";
  }
}

struct TrichotomyVerdict {
  Tier tier = Tier::Linear;
  TargetClass detail = TargetClass::NotBiArc;
  std::optional<MajorityTable> majority;  // witness for the sublinear tier
  IcbParts icb;                           // witness for the bipartite constant tier
};

// Constant tier: direct structure checks. Sublinear tier: a conservative
// majority operation exists (the algebraic stand-in for the arc-based class).
// Linear tier: exhaustive search refutes one.
inline TrichotomyVerdict classify(const Graph& h, MajoritySearchOptions opt = {}) {
  TrichotomyVerdict out;
  if (is_reflexive_complete(h)) {
    out.tier = Tier::Constant;
    out.detail = TargetClass::ReflexiveComplete;
    return out;
  }
  out.icb = icb_parts(h);
  if (out.icb.ok) {
    out.tier = Tier::Constant;
    out.detail = TargetClass::IrreflexiveCompleteBipartite;
    return out;
  }
  out.majority = find_conservative_majority(h, opt);
  if (out.majority) {
    out.tier = Tier::Sublinear;
    out.detail = TargetClass::BiArcOther;
  } else {
    out.tier = Tier::Linear;
    out.detail = TargetClass::NotBiArc;
  }
  return out;
}

}  // namespace homtest
