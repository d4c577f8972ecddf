#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"
#include "homtest/rng.hpp"
#include "homtest/solver.hpp"

namespace homtest {

namespace detail {
class MinimalityEngine;
}

struct MinimalityOptions {
  int k = 2;
  int l = 3;
  int max_n = 2000;                              // size guard on |V(G)|
  std::size_t max_bytes = std::size_t{1} << 30;  // materialization guard
  // Test hook: shuffles the initial work-list order. The fixpoint must not
  // depend on it.
  std::optional<std::uint64_t> worklist_shuffle_seed;
};

// Solution sets of small vertex subsets after propagation to a fixpoint:
// S_{v} per vertex, S_{u,v} per pair, and (level 3) S_{u,v,w} per triple.
// Level 3 materializes everything; level <= 2 keeps singleton sets and derives
// pair sets on demand (identical fixpoint, no quadratic storage). A tuple
// lists values in ascending-vertex order. If any set is empty the instance
// has no list-homomorphism and `unsatisfiable()` is set.
class ConsistencyFamily {
 public:
  bool unsatisfiable() const { return unsat_; }
  int k() const { return k_; }
  int level() const { return l_; }
  int n() const { return n_; }
  int target_size() const { return h_; }

  std::uint64_t singleton_mask(int v) const { return singles_[v]; }

  bool singleton_contains(int v, int x) const {
    return x >= 0 && x < h_ && ((singles_[v] >> x) & 1u);
  }

  bool pair_contains(int u, int v, int xu, int xv) const {
    if (u == v) throw ContractError("pair_contains needs distinct vertices");
    if (xu < 0 || xv < 0 || xu >= h_ || xv >= h_) return false;
    if (u > v) {
      std::swap(u, v);
      std::swap(xu, xv);
    }
    if (materialized_) {
      const std::uint64_t* w = pair_words(u, v);
      const int bit = xu * h_ + xv;
      return (w[bit >> 6] >> (bit & 63)) & 1u;
    }
    if (!singleton_contains(u, xu) || !singleton_contains(v, xv)) return false;
    return !has_g_edge(u, v) || ((hadj_[xu] >> xv) & 1u);
  }

  std::vector<std::pair<int, int>> pair_tuples(int u, int v) const {
    if (u > v) {
      auto flipped = pair_tuples(v, u);
      for (auto& t : flipped) std::swap(t.first, t.second);
      std::sort(flipped.begin(), flipped.end());
      return flipped;
    }
    std::vector<std::pair<int, int>> out;
    for (int x = 0; x < h_; ++x)
      for (int y = 0; y < h_; ++y)
        if (pair_contains(u, v, x, y)) out.emplace_back(x, y);
    return out;
  }

  bool triple_contains(int u, int v, int w, int xu, int xv, int xw) const {
    if (!materialized_) throw ContractError("triple sets need level 3");
    if (u == v || u == w || v == w) throw ContractError("triple needs distinct vertices");
    // Sort the three (vertex, value) pairs by vertex.
    std::array<std::pair<int, int>, 3> t{{{u, xu}, {v, xv}, {w, xw}}};
    std::sort(t.begin(), t.end());
    for (auto [vtx, val] : t)
      if (val < 0 || val >= h_) return false;
    const std::uint64_t* words = triple_words(t[0].first, t[1].first, t[2].first);
    const int bit = (t[0].second * h_ + t[1].second) * h_ + t[2].second;
    return (words[bit >> 6] >> (bit & 63)) & 1u;
  }

  std::vector<std::array<int, 3>> triple_tuples(int u, int v, int w) const {
    std::vector<std::array<int, 3>> out;
    for (int x = 0; x < h_; ++x)
      for (int y = 0; y < h_; ++y)
        for (int z = 0; z < h_; ++z)
          if (triple_contains(u, v, w, x, y, z)) out.push_back({x, y, z});
    return out;
  }

  std::size_t singleton_count(int v) const { return std::popcount(singles_[v]); }

  std::size_t pair_count(int u, int v) const {
    std::size_t c = 0;
    for (int x = 0; x < h_; ++x)
      for (int y = 0; y < h_; ++y)
        if (pair_contains(u, v, x, y)) ++c;
    return c;
  }

 private:
  friend ConsistencyFamily run_minimality(const Instance&, MinimalityOptions);
  friend class detail::MinimalityEngine;

  bool has_g_edge(int u, int v) const {
    const auto& a = gadj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  std::size_t pair_index(int u, int v) const {  // u < v
    return static_cast<std::size_t>(u) * n_ - static_cast<std::size_t>(u) * (u + 1) / 2 +
           (v - u - 1);
  }

  std::size_t triple_index(int u, int v, int w) const {  // u < v < w
    const int m = n_ - u - 1;  // vertices after u
    const int a = v - u - 1, b = w - u - 1;
    const std::size_t inner =
        static_cast<std::size_t>(a) * m - static_cast<std::size_t>(a) * (a + 1) / 2 + (b - a - 1);
    return triple_base_[u] + inner;
  }

  const std::uint64_t* pair_words(int u, int v) const {
    return pairs_.data() + pair_index(u, v) * w2_;
  }
  std::uint64_t* pair_words(int u, int v) {
    return pairs_.data() + pair_index(u, v) * w2_;
  }
  const std::uint64_t* triple_words(int u, int v, int w) const {
    return triples_.data() + triple_index(u, v, w) * w3_;
  }
  std::uint64_t* triple_words(int u, int v, int w) {
    return triples_.data() + triple_index(u, v, w) * w3_;
  }

  int n_ = 0, h_ = 0, k_ = 2, l_ = 3;
  bool unsat_ = false;
  bool materialized_ = false;
  int w2_ = 0, w3_ = 0;
  std::vector<std::uint64_t> singles_;
  std::vector<std::uint64_t> pairs_;
  std::vector<std::uint64_t> triples_;
  std::vector<std::size_t> triple_base_;
  std::vector<std::uint64_t> hadj_;
  std::vector<std::vector<int>> gadj_;
};

namespace detail {

// Propagation work-list driver for the materialized (level 3) family.
class MinimalityEngine {
 public:
  MinimalityEngine(ConsistencyFamily& f, int k) : f_(f), k_(k) {
    n_ = f_.n_;
    npairs_ = static_cast<std::size_t>(n_) * (n_ - 1) / 2;
    ntriples_ = f_.triples_.size() / std::max(1, f_.w3_);
    inq_.assign(n_ + npairs_ + ntriples_, 0);
  }

  // Set ids: [0,n) singles, [n, n+npairs) pairs, then triples.
  std::size_t pair_id(int u, int v) const { return n_ + f_.pair_index(u, v); }
  std::size_t triple_id(int u, int v, int w) const {
    return n_ + npairs_ + f_.triple_index(u, v, w);
  }

  void enqueue(std::size_t id) {
    if (!inq_[id]) {
      inq_[id] = 1;
      queue_.push_back(id);
    }
  }

  void enqueue_pairs_containing(int u) {
    for (int v = 0; v < n_; ++v)
      if (v != u) enqueue(pair_id(std::min(u, v), std::max(u, v)));
  }

  void enqueue_triples_containing(int u, int v) {  // u < v
    for (int w = 0; w < n_; ++w) {
      if (w == u || w == v) continue;
      int a = u, b = v, c = w;
      if (c < a) std::swap(a, c);
      if (c < b) std::swap(b, c);
      if (a > b) std::swap(a, b);
      enqueue(triple_id(a, b, c));
    }
  }

  void enqueue_triples_containing_vertex(int u) {
    for (int v = 0; v < n_; ++v) {
      if (v == u) continue;
      const int a = std::min(u, v), b = std::max(u, v);
      enqueue_triples_containing(a, b);
    }
  }

  // After singleton c shrank.
  void on_single_changed(int c) {
    if (f_.singles_[c] == 0) {
      f_.unsat_ = true;
      return;
    }
    enqueue_pairs_containing(c);
    if (k_ == 1 && ntriples_ > 0) enqueue_triples_containing_vertex(c);
  }

  bool process_pair(int u, int v) {  // u < v; false once unsatisfiable
    std::uint64_t* words = f_.pair_words(u, v);
    const int h = f_.h_;
    std::uint64_t seen_u = 0, seen_v = 0;
    bool changed = false, any = false;
    for (int wi = 0; wi < f_.w2_; ++wi) {
      std::uint64_t cur = words[wi], keep = cur;
      while (cur) {
        const int bit = wi * 64 + std::countr_zero(cur);
        cur &= cur - 1;
        const int xu = bit / h, xv = bit % h;
        if (!f_.singleton_contains(u, xu) || !f_.singleton_contains(v, xv)) {
          keep &= ~(std::uint64_t{1} << (bit & 63));
          changed = true;
        } else {
          seen_u |= std::uint64_t{1} << xu;
          seen_v |= std::uint64_t{1} << xv;
        }
      }
      words[wi] = keep;
      if (keep) any = true;
    }
    if (!any) {
      f_.unsat_ = true;
      return false;
    }
    if (changed) enqueue_triples_containing(u, v);
    for (auto [c, seen] : {std::pair{u, seen_u}, std::pair{v, seen_v}}) {
      const std::uint64_t ns = f_.singles_[c] & seen;
      if (ns != f_.singles_[c]) {
        f_.singles_[c] = ns;
        on_single_changed(c);
        if (f_.unsat_) return false;
      }
    }
    return true;
  }

  bool process_triple(int u, int v, int w) {  // u < v < w
    const int h = f_.h_;
    std::uint64_t* words = f_.triple_words(u, v, w);
    bool changed = false, any = false;
    if (k_ >= 2) {
      std::array<std::uint64_t, 4> seen_uv{}, seen_uw{}, seen_vw{};
      std::uint64_t* puv = f_.pair_words(u, v);
      std::uint64_t* puw = f_.pair_words(u, w);
      std::uint64_t* pvw = f_.pair_words(v, w);
      for (int wi = 0; wi < f_.w3_; ++wi) {
        std::uint64_t cur = words[wi], keep = cur;
        while (cur) {
          const int rel = std::countr_zero(cur);
          cur &= cur - 1;
          const int bit = wi * 64 + rel;
          const int xw = bit % h, rest = bit / h;
          const int xv = rest % h, xu = rest / h;
          const int buv = xu * h + xv, buw = xu * h + xw, bvw = xv * h + xw;
          if (!((puv[buv >> 6] >> (buv & 63)) & 1u) || !((puw[buw >> 6] >> (buw & 63)) & 1u) ||
              !((pvw[bvw >> 6] >> (bvw & 63)) & 1u)) {
            keep &= ~(std::uint64_t{1} << rel);
            changed = true;
          } else {
            seen_uv[buv >> 6] |= std::uint64_t{1} << (buv & 63);
            seen_uw[buw >> 6] |= std::uint64_t{1} << (buw & 63);
            seen_vw[bvw >> 6] |= std::uint64_t{1} << (bvw & 63);
          }
        }
        words[wi] = keep;
        if (keep) any = true;
      }
      if (!any) {
        f_.unsat_ = true;
        return false;
      }
      (void)changed;  // the triple has no parents; shrinking it needs no re-enqueue
      struct Child {
        int a, b;
        std::uint64_t* words;
        const std::array<std::uint64_t, 4>* seen;
      };
      const Child children[3] = {
          {u, v, puv, &seen_uv}, {u, w, puw, &seen_uw}, {v, w, pvw, &seen_vw}};
      for (const Child& c : children) {
        bool child_changed = false, child_any = false;
        for (int wi = 0; wi < f_.w2_; ++wi) {
          const std::uint64_t ns = c.words[wi] & (*c.seen)[wi];
          if (ns != c.words[wi]) {
            c.words[wi] = ns;
            child_changed = true;
          }
          if (ns) child_any = true;
        }
        if (!child_any) {
          f_.unsat_ = true;
          return false;
        }
        if (child_changed) {
          enqueue(pair_id(c.a, c.b));
          enqueue_triples_containing(c.a, c.b);
        }
      }
      return true;
    }
    // k == 1: sync the triple against its three singleton children.
    std::uint64_t seen[3] = {0, 0, 0};
    const int verts[3] = {u, v, w};
    for (int wi = 0; wi < f_.w3_; ++wi) {
      std::uint64_t cur = words[wi], keep = cur;
      while (cur) {
        const int rel = std::countr_zero(cur);
        cur &= cur - 1;
        const int bit = wi * 64 + rel;
        const int xw = bit % h, rest = bit / h;
        const int xv = rest % h, xu = rest / h;
        if (!f_.singleton_contains(u, xu) || !f_.singleton_contains(v, xv) ||
            !f_.singleton_contains(w, xw)) {
          keep &= ~(std::uint64_t{1} << rel);
          changed = true;
        } else {
          seen[0] |= std::uint64_t{1} << xu;
          seen[1] |= std::uint64_t{1} << xv;
          seen[2] |= std::uint64_t{1} << xw;
        }
      }
      words[wi] = keep;
      if (keep) any = true;
    }
    if (!any) {
      f_.unsat_ = true;
      return false;
    }
    for (int i = 0; i < 3; ++i) {
      const std::uint64_t ns = f_.singles_[verts[i]] & seen[i];
      if (ns != f_.singles_[verts[i]]) {
        f_.singles_[verts[i]] = ns;
        on_single_changed(verts[i]);
        if (f_.unsat_) return false;
      }
    }
    return true;
  }

  void run(std::optional<std::uint64_t> shuffle_seed) {
    std::vector<std::size_t> initial;
    initial.reserve(npairs_ + ntriples_);
    for (std::size_t i = 0; i < npairs_ + ntriples_; ++i) initial.push_back(n_ + i);
    if (shuffle_seed) {
      Rng rng(*shuffle_seed);
      for (std::size_t i = initial.size(); i > 1; --i)
        std::swap(initial[i - 1], initial[rng.next_int(static_cast<int>(i))]);
    }
    for (std::size_t id : initial) enqueue(id);
    while (!queue_.empty() && !f_.unsat_) {
      const std::size_t id = queue_.front();
      queue_.pop_front();
      inq_[id] = 0;
      if (id < static_cast<std::size_t>(n_)) continue;  // singles have no children
      if (id < n_ + npairs_) {
        const auto [u, v] = pair_from_index(id - n_);
        process_pair(u, v);
      } else {
        const auto [u, v, w] = triple_from_index(id - n_ - npairs_);
        process_triple(u, v, w);
      }
    }
  }

 private:
  std::pair<int, int> pair_from_index(std::size_t idx) const {
    // Invert pair_index by scanning rows; n is small enough that this is fine.
    int u = 0;
    std::size_t row = n_ - 1;
    while (idx >= row) {
      idx -= row;
      --row;
      ++u;
    }
    return {u, u + 1 + static_cast<int>(idx)};
  }

  std::tuple<int, int, int> triple_from_index(std::size_t idx) const {
    int u = 0;
    while (u + 1 < n_ && f_.triple_base_[u + 1] <= idx) ++u;
    idx -= f_.triple_base_[u];
    const int m = n_ - u - 1;
    int a = 0;
    std::size_t row = m - 1;
    while (idx >= row) {
      idx -= row;
      --row;
      ++a;
    }
    return {u, u + 1 + a, u + 1 + a + 1 + static_cast<int>(idx)};
  }

  ConsistencyFamily& f_;
  int k_, n_ = 0;
  std::size_t npairs_ = 0, ntriples_ = 0;
  std::deque<std::size_t> queue_;
  std::vector<char> inq_;
};

}  // namespace detail

// Computes the solution-set family at the requested level and propagates to
// the unique fixpoint (the work-list order cannot change it: every rule only
// shrinks sets, so the greatest consistent family below the initial one is
// reached regardless of scheduling).
inline ConsistencyFamily run_minimality(const Instance& inst, MinimalityOptions opt = {}) {
  if (opt.k < 1 || opt.l < opt.k) throw ContractError("run_minimality needs 1 <= k <= l");
  if (opt.l > 3) throw ContractError("propagation levels above 3 are not supported");
  if (inst.n() > opt.max_n)
    throw BudgetError("propagation size guard exceeded: n > " + std::to_string(opt.max_n));

  ConsistencyFamily f;
  f.n_ = inst.n();
  f.h_ = inst.target_size();
  f.k_ = opt.k;
  f.l_ = opt.l;
  f.hadj_ = adjacency_masks(inst.h);
  f.gadj_.resize(inst.n());
  for (int v = 0; v < inst.n(); ++v) f.gadj_[v] = inst.g.adj[v];

  // Singleton sets: list values, restricted to looped target values under a
  // loop in G.
  std::uint64_t loop_values = 0;
  for (int x = 0; x < f.h_; ++x)
    if (inst.h.has_loop(x)) loop_values |= std::uint64_t{1} << x;
  f.singles_.resize(inst.n());
  for (int v = 0; v < inst.n(); ++v) {
    f.singles_[v] = inst.lists[v];
    if (inst.g.has_loop(v)) f.singles_[v] &= loop_values;
    if (f.singles_[v] == 0) f.unsat_ = true;
  }
  if (f.unsat_) return f;

  if (opt.l <= 2) {
    // Lazy mode: arc-consistency fixpoint over the singleton sets; pair sets
    // are derived on demand. Level 1 skips even that.
    f.materialized_ = false;
    if (opt.l == 2) {
      std::deque<int> queue;
      std::vector<char> inq(inst.n(), 1);
      for (int v = 0; v < inst.n(); ++v) queue.push_back(v);
      while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        inq[v] = 0;
        for (int u : inst.g.adj[v]) {
          if (u == v) continue;
          // Keep values of u that still have a partner at v.
          std::uint64_t nu = 0, mu = f.singles_[u];
          while (mu) {
            const int x = std::countr_zero(mu);
            mu &= mu - 1;
            if (f.hadj_[x] & f.singles_[v]) nu |= std::uint64_t{1} << x;
          }
          if (nu != f.singles_[u]) {
            f.singles_[u] = nu;
            if (nu == 0) {
              f.unsat_ = true;
              return f;
            }
            if (!inq[u]) {
              inq[u] = 1;
              queue.push_back(u);
            }
          }
        }
      }
    }
    return f;
  }

  // Level 3: materialize pair and triple sets.
  if (f.h_ > 16)
    throw BudgetError("propagation size guard: level 3 supports at most 16 target vertices");
  const std::size_t n = inst.n();
  const std::size_t npairs = n * (n - 1) / 2;
  const std::size_t ntriples = n >= 3 ? n * (n - 1) * (n - 2) / 6 : 0;
  f.w2_ = static_cast<int>((static_cast<std::size_t>(f.h_) * f.h_ + 63) / 64);
  f.w3_ = static_cast<int>((static_cast<std::size_t>(f.h_) * f.h_ * f.h_ + 63) / 64);
  const std::size_t bytes = (npairs * f.w2_ + ntriples * f.w3_ + n) * sizeof(std::uint64_t);
  if (bytes > opt.max_bytes)
    throw BudgetError("propagation size guard: materialization needs " + std::to_string(bytes) +
                      " bytes");
  f.materialized_ = true;
  f.pairs_.assign(npairs * f.w2_, 0);
  f.triples_.assign(ntriples * f.w3_, 0);
  f.triple_base_.assign(n, 0);
  for (std::size_t u = 0; u + 1 < n; ++u) {
    const std::size_t m = n - u - 1;
    f.triple_base_[u + 1] = f.triple_base_[u] + m * (m - 1) / 2;
  }

  // Pair sets: partial-instance solutions on {u,v}.
  for (int u = 0; u < static_cast<int>(n); ++u) {
    for (int v = u + 1; v < static_cast<int>(n); ++v) {
      std::uint64_t* words = f.pair_words(u, v);
      const bool edge = f.has_g_edge(u, v);
      bool any = false;
      std::uint64_t mu = f.singles_[u];
      while (mu) {
        const int x = std::countr_zero(mu);
        mu &= mu - 1;
        std::uint64_t mv = f.singles_[v];
        if (edge) mv &= f.hadj_[x];
        while (mv) {
          const int y = std::countr_zero(mv);
          mv &= mv - 1;
          const int bit = x * f.h_ + y;
          words[bit >> 6] |= std::uint64_t{1} << (bit & 63);
          any = true;
        }
      }
      if (!any) {
        f.unsat_ = true;
        return f;
      }
    }
  }

  // Triple sets: conjunction of the three pair sets (internal constraints of
  // a triple are exactly its loops, its pairwise edges, and its lists).
  for (int u = 0; u < static_cast<int>(n); ++u) {
    for (int v = u + 1; v < static_cast<int>(n); ++v) {
      for (int w = v + 1; w < static_cast<int>(n); ++w) {
        std::uint64_t* words = f.triple_words(u, v, w);
        bool any = false;
        for (int x = 0; x < f.h_; ++x) {
          if (!f.singleton_contains(u, x)) continue;
          for (int y = 0; y < f.h_; ++y) {
            if (!f.pair_contains(u, v, x, y)) continue;
            for (int z = 0; z < f.h_; ++z) {
              if (!f.pair_contains(u, w, x, z) || !f.pair_contains(v, w, y, z)) continue;
              const int bit = (x * f.h_ + y) * f.h_ + z;
              words[bit >> 6] |= std::uint64_t{1} << (bit & 63);
              any = true;
            }
          }
        }
        if (!any) {
          f.unsat_ = true;
          return f;
        }
      }
    }
  }

  detail::MinimalityEngine engine(f, opt.k);
  engine.run(opt.worklist_shuffle_seed);
  return f;
}

// A consistency finding against a partial map: a queried vertex whose value
// left its singleton set, or a queried pair whose value pair left its pair
// set. Findings are reported in canonical order (vertices ascending, then
// pairs lexicographically).
struct Violation {
  int v = -1;
  int u = -1;  // -1: singleton finding at v
  bool is_pair() const { return u >= 0; }
};

inline std::vector<Violation> violations(const ConsistencyFamily& family,
                                         const std::vector<int>& partial) {
  if (static_cast<int>(partial.size()) != family.n())
    throw ContractError("violations: partial map domain mismatch");
  std::vector<Violation> out;
  std::vector<int> defined;
  for (int v = 0; v < family.n(); ++v) {
    if (partial[v] == -1) continue;
    defined.push_back(v);
    if (!family.singleton_contains(v, partial[v])) out.push_back({v, -1});
  }
  for (std::size_t i = 0; i < defined.size(); ++i) {
    for (std::size_t j = i + 1; j < defined.size(); ++j) {
      const int v = defined[i], u = defined[j];
      if (!family.pair_contains(v, u, partial[v], partial[u])) out.push_back({v, u});
    }
  }
  return out;
}

// Solver-backed extendability of a partial map (-1 = undefined).
inline bool is_extendable(const Instance& inst, const std::vector<int>& partial,
                          SearchBudget budget = {}) {
  return extendable(inst, partial, budget);
}

}  // namespace homtest
