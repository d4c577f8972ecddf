#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/oracle.hpp"
#include "homtest/relational.hpp"
#include "homtest/rng.hpp"

namespace homtest {

// Where a reduced input came from and what the construction guarantees:
// distances scale by at least c1, each adapter access costs at most c2 source
// queries, and the output size respects the recorded bounds.
struct Provenance {
  std::string kind;
  bool deterministic = true;
  double c1 = 1.0;
  int c2 = 1;
  long t1_bound = 0;  // on the number of variables
  long t2_bound = 0;  // on the number of constraints
};

// A reduced instance plus the oracle adapter: given oracle access to f on the
// source instance, `make_adapter` yields oracle access to the induced
// function on the reduced instance. Adapters may be randomized; the seed
// fixes all their draws.
struct ReducedInput {
  RelInstance inst;
  Provenance prov;
  std::function<std::unique_ptr<VertexOracle>(VertexOracle&, std::uint64_t)> make_adapter;
};

namespace detail {

class ForwardOracle final : public VertexOracle {
 public:
  explicit ForwardOracle(VertexOracle& inner) : inner_(&inner) {}
  int value(int v) override { return inner_->value(v); }

 private:
  VertexOracle* inner_;
};

inline std::function<std::unique_ptr<VertexOracle>(VertexOracle&, std::uint64_t)>
identity_adapter() {
  return [](VertexOracle& fj, std::uint64_t) -> std::unique_ptr<VertexOracle> {
    return std::make_unique<ForwardOracle>(fj);
  };
}

inline std::function<std::unique_ptr<VertexOracle>(VertexOracle&, std::uint64_t)>
table_adapter(std::vector<int> table) {
  auto shared = std::make_shared<const std::vector<int>>(std::move(table));
  return [shared](VertexOracle& fj, std::uint64_t) -> std::unique_ptr<VertexOracle> {
    return std::make_unique<MappedOracle>(fj, *shared);
  };
}

inline int remap_rel(const Structure& target, const Structure& source, int rel,
                     const std::string& renamed_from = {},
                     const std::string& renamed_to = {}) {
  std::string name = source.relations[rel].name;
  if (!renamed_from.empty() && name == renamed_from) name = renamed_to;
  const int i = target.find_relation(name);
  if (i < 0) throw ContractError("reduction lost relation " + name);
  return i;
}

}  // namespace detail

enum class SimpleCase { RemoveRelation, PermuteVariables, Intersection, Product, Projection };

// Parameters for the five deterministic one-step transformations. The source
// structure is the one obtained FROM the produced target by the named
// operation; each transform validates that shape before rewriting.
struct SimpleSpec {
  SimpleCase kind = SimpleCase::RemoveRelation;
  Relation added;         // RemoveRelation: the relation restored on the target side
  std::string relation;   // PermuteVariables: S; Intersection/Product: T; Projection: S
  std::string r_name;     // PermuteVariables: new name; others: first operand R
  std::string s_name;     // Intersection/Product: second operand S
  std::vector<int> perm;  // PermuteVariables: pi, with S = { t[pi] : t in R }
};

namespace detail {

inline std::vector<int> permute_tuple(const std::vector<int>& t, const std::vector<int>& pi) {
  std::vector<int> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[pi[i]];
  return out;
}

inline ReducedInput simple_remove_relation(const RelInstance& j, const SimpleSpec& spec) {
  if (spec.added.name.empty()) throw SchemaError("remove-relation needs the restored relation");
  if (j.target.find_relation(spec.added.name) >= 0)
    throw SchemaError("relation name already present: " + spec.added.name);
  Structure a = j.target;
  a.relations.push_back(
      make_relation(spec.added.name, spec.added.arity, spec.added.tuples, a.universe));
  ReducedInput out;
  out.inst = j;
  out.inst.target = std::move(a);
  out.make_adapter = identity_adapter();
  return out;
}

inline ReducedInput simple_permute(const RelInstance& j, const SimpleSpec& spec) {
  const Relation& s = j.target.relation(spec.relation);
  const std::vector<int>& pi = spec.perm;
  if (static_cast<int>(pi.size()) != s.arity)
    throw SchemaError("permutation length must match relation arity");
  {
    std::vector<int> check = pi;
    std::sort(check.begin(), check.end());
    for (int i = 0; i < s.arity; ++i)
      if (check[i] != i) throw SchemaError("not a permutation");
  }
  const std::string new_name = spec.r_name.empty() ? spec.relation : spec.r_name;
  // S = { t[pi] : t in R }, so R is recovered as { t : t[pi] in S }.
  std::vector<std::vector<int>> r_tuples;
  for (const auto& st : s.tuples) {
    std::vector<int> t(st.size());
    for (std::size_t i = 0; i < st.size(); ++i) t[pi[i]] = st[i];
    r_tuples.push_back(std::move(t));
  }
  Structure a;
  a.universe = j.target.universe;
  for (const auto& r : j.target.relations) {
    if (r.name == spec.relation) {
      if (new_name != spec.relation && j.target.find_relation(new_name) >= 0)
        throw SchemaError("relation name already present: " + new_name);
      a.relations.push_back(make_relation(new_name, s.arity, r_tuples, a.universe));
    } else {
      a.relations.push_back(r);
    }
  }
  // A constraint S(x) becomes R(y) with y[pi[i]] = x[i].
  ReducedInput out;
  out.inst = j;
  out.inst.target = a;
  const int s_idx = j.target.find_relation(spec.relation);
  for (auto& c : out.inst.constraints) {
    if (c.rel == s_idx) {
      std::vector<int> y(c.scope.size());
      for (std::size_t i = 0; i < c.scope.size(); ++i) y[pi[i]] = c.scope[i];
      c.scope = std::move(y);
    }
    c.rel = detail::remap_rel(a, j.target, c.rel, spec.relation, new_name);
  }
  out.make_adapter = identity_adapter();
  return out;
}

inline ReducedInput simple_combine(const RelInstance& j, const SimpleSpec& spec, bool product) {
  const Relation& t = j.target.relation(spec.relation);
  const Relation& r = j.target.relation(spec.r_name);
  const Relation& s = j.target.relation(spec.s_name);
  if (product) {
    std::vector<std::vector<int>> expect;
    for (const auto& rt : r.tuples)
      for (const auto& st : s.tuples) {
        std::vector<int> cat = rt;
        cat.insert(cat.end(), st.begin(), st.end());
        expect.push_back(std::move(cat));
      }
    std::sort(expect.begin(), expect.end());
    if (t.arity != r.arity + s.arity || t.tuples != expect)
      throw ContractError("relation is not the claimed product");
  } else {
    if (t.arity != r.arity || s.arity != r.arity)
      throw ContractError("intersection needs equal arities");
    std::vector<std::vector<int>> expect;
    for (const auto& rt : r.tuples)
      if (s.contains(rt)) expect.push_back(rt);
    if (t.tuples != expect) throw ContractError("relation is not the claimed intersection");
  }
  Structure a;
  a.universe = j.target.universe;
  for (const auto& rel : j.target.relations)
    if (rel.name != spec.relation) a.relations.push_back(rel);
  ReducedInput out;
  out.inst = j;
  out.inst.target = a;
  out.inst.constraints.clear();
  const int t_idx = j.target.find_relation(spec.relation);
  const int ra = a.find_relation(spec.r_name), sa = a.find_relation(spec.s_name);
  for (const auto& c : j.constraints) {
    if (c.rel != t_idx) {
      Constraint keep = c;
      keep.rel = detail::remap_rel(a, j.target, c.rel);
      out.inst.constraints.push_back(std::move(keep));
      continue;
    }
    if (product) {
      std::vector<int> first(c.scope.begin(), c.scope.begin() + r.arity);
      std::vector<int> second(c.scope.begin() + r.arity, c.scope.end());
      out.inst.constraints.push_back({ra, std::move(first)});
      out.inst.constraints.push_back({sa, std::move(second)});
    } else {
      out.inst.constraints.push_back({ra, c.scope});
      out.inst.constraints.push_back({sa, c.scope});
    }
  }
  out.make_adapter = identity_adapter();
  return out;
}

inline ReducedInput simple_projection(const RelInstance& j, const SimpleSpec& spec) {
  const Relation& s = j.target.relation(spec.relation);
  const Relation& r = j.target.relation(spec.r_name);
  if (r.arity < 2 || s.arity != r.arity - 1)
    throw ContractError("projection needs arity(S) = arity(R) - 1 >= 1");
  {
    std::vector<std::vector<int>> expect;
    for (const auto& rt : r.tuples)
      expect.emplace_back(rt.begin(), rt.end() - 1);
    std::sort(expect.begin(), expect.end());
    expect.erase(std::unique(expect.begin(), expect.end()), expect.end());
    if (s.tuples != expect)
      throw ContractError("relation is not the projection of the claimed parent");
  }
  Structure a;
  a.universe = j.target.universe;
  for (const auto& rel : j.target.relations)
    if (rel.name != spec.relation) a.relations.push_back(rel);

  const int s_idx = j.target.find_relation(spec.relation);
  // One fresh existential variable per distinct constrained scope.
  std::vector<std::vector<int>> scopes;
  for (const auto& c : j.constraints)
    if (c.rel == s_idx) scopes.push_back(c.scope);
  std::sort(scopes.begin(), scopes.end());
  scopes.erase(std::unique(scopes.begin(), scopes.end()), scopes.end());
  std::map<std::vector<int>, int> fresh;
  for (const auto& sc : scopes) fresh.emplace(sc, j.n + static_cast<int>(fresh.size()));

  const int ra = a.find_relation(spec.r_name);
  std::vector<Constraint> cons;
  for (const auto& c : j.constraints) {
    if (c.rel != s_idx) {
      Constraint keep = c;
      keep.rel = detail::remap_rel(a, j.target, c.rel);
      cons.push_back(std::move(keep));
      continue;
    }
    std::vector<int> scope = c.scope;
    scope.push_back(fresh.at(c.scope));
    cons.push_back({ra, std::move(scope)});
  }
  const int total = j.n + static_cast<int>(fresh.size());
  std::vector<std::uint64_t> lists = j.lists;
  std::vector<double> weights = j.weights;
  const std::uint64_t full =
      a.universe == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << a.universe) - 1;
  lists.resize(total, full);
  weights.resize(total, 0.0);

  ReducedInput out;
  out.inst = make_rel_instance(std::move(a), total, std::move(cons), std::move(lists),
                               std::move(weights));

  // The adapter fills each fresh variable with the canonical least witness
  // completing its scope's values inside R; reading the scope costs
  // arity(R) - 1 source queries.
  struct Shared {
    int n;
    std::vector<std::vector<int>> scopes;  // scope per fresh var, in id order
    std::vector<std::vector<int>> r_tuples;
  };
  auto shared = std::make_shared<Shared>();
  shared->n = j.n;
  shared->scopes.resize(fresh.size());
  for (const auto& [sc, id] : fresh) shared->scopes[id - j.n] = sc;
  shared->r_tuples = r.tuples;

  class Adapter final : public VertexOracle {
   public:
    Adapter(VertexOracle& fj, std::shared_ptr<const Shared> d)
        : fj_(&fj), d_(std::move(d)), cache_(d_->scopes.size(), -1) {}
    int value(int v) override {
      if (v < d_->n) return fj_->value(v);
      int& slot = cache_[v - d_->n];
      if (slot >= 0) return slot;
      const auto& sc = d_->scopes[v - d_->n];
      std::vector<int> prefix;
      prefix.reserve(sc.size() + 1);
      for (int u : sc) prefix.push_back(fj_->value(u));
      // Tuples are sorted, so the first tuple with this prefix carries the
      // least witness. No witness: fall back to the least universe element.
      prefix.push_back(-1);
      auto it = std::upper_bound(d_->r_tuples.begin(), d_->r_tuples.end(), prefix);
      prefix.pop_back();
      int b = 0;
      if (it != d_->r_tuples.end() &&
          std::equal(prefix.begin(), prefix.end(), it->begin())) b = it->back();
      slot = b;
      return slot;
    }

   private:
    VertexOracle* fj_;
    std::shared_ptr<const Shared> d_;
    std::vector<int> cache_;
  };
  out.make_adapter = [shared](VertexOracle& fj, std::uint64_t) -> std::unique_ptr<VertexOracle> {
    return std::make_unique<Adapter>(fj, shared);
  };
  out.prov.c2 = std::max(1, r.arity - 1);
  return out;
}

}  // namespace detail

// The five deterministic transformations. Each scales distances by c1 = 1 and
// keeps |I| <= n + ||J|| and ||I|| <= 2 ||J||.
inline ReducedInput transform_simple(const RelInstance& j, const SimpleSpec& spec) {
  ReducedInput out;
  switch (spec.kind) {
    case SimpleCase::RemoveRelation:
      out = detail::simple_remove_relation(j, spec);
      out.prov.kind = "remove-relation";
      break;
    case SimpleCase::PermuteVariables:
      out = detail::simple_permute(j, spec);
      out.prov.kind = "permute-variables";
      break;
    case SimpleCase::Intersection:
      out = detail::simple_combine(j, spec, false);
      out.prov.kind = "intersection";
      break;
    case SimpleCase::Product:
      out = detail::simple_combine(j, spec, true);
      out.prov.kind = "product";
      break;
    case SimpleCase::Projection:
      out = detail::simple_projection(j, spec);
      out.prov.kind = "projection";
      break;
  }
  out.prov.deterministic = true;
  out.prov.c1 = 1.0;
  if (spec.kind != SimpleCase::Projection) out.prov.c2 = 1;
  out.prov.t1_bound = j.n + static_cast<long>(j.constraints.size());
  out.prov.t2_bound = 2 * static_cast<long>(j.constraints.size());
  return out;
}

// Outcome of the equality-contraction pre-check: two sampled variables of one
// contracted block disagreed, so the source function is rejected outright.
struct PrecheckReject {
  int first = 0, second = 0;  // the disagreeing variables
};

namespace detail {

// Union-find closure of the equality constraints; blocks ordered by least
// member.
struct EqBlocks {
  std::vector<int> block_of;              // variable -> block id
  std::vector<std::vector<int>> members;  // block id -> variables, ascending
};

inline EqBlocks eq_blocks(const RelInstance& j, int eq_idx) {
  std::vector<int> parent(j.n);
  for (int v = 0; v < j.n; ++v) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& c : j.constraints)
    if (c.rel == eq_idx) {
      const int a = find(c.scope[0]), b = find(c.scope[1]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  EqBlocks out;
  out.block_of.assign(j.n, -1);
  std::map<int, int> block_id;
  for (int v = 0; v < j.n; ++v) {
    const int root = find(v);
    auto [it, fresh] = block_id.emplace(root, static_cast<int>(out.members.size()));
    if (fresh) out.members.emplace_back();
    out.block_of[v] = it->second;
    out.members[it->second].push_back(v);
  }
  return out;
}

inline int validated_eq_index(const RelInstance& j, const std::string& eq_name) {
  const int eq_idx = j.target.find_relation(eq_name);
  if (eq_idx < 0) throw SchemaError("unknown relation: " + eq_name);
  const Relation& eq = j.target.relations[eq_idx];
  std::vector<std::vector<int>> expect;
  for (int x = 0; x < j.target.universe; ++x) expect.push_back({x, x});
  if (eq.arity != 2 || eq.tuples != expect)
    throw ContractError("relation is not the equality relation");
  return eq_idx;
}

}  // namespace detail

// The query part of equality contraction: sample ceil(c_scalar/epsilon)
// variables; two sampled variables of one contracted block must agree.
inline std::optional<PrecheckReject> equality_precheck(const RelInstance& j,
                                                       const std::string& eq_name,
                                                       VertexOracle& f_j, double epsilon,
                                                       std::uint64_t seed,
                                                       double c_scalar = 4.0) {
  if (!(epsilon > 0.0) || epsilon > 1.0) throw ContractError("epsilon must lie in (0, 1]");
  const int eq_idx = detail::validated_eq_index(j, eq_name);
  const detail::EqBlocks blocks = detail::eq_blocks(j, eq_idx);
  WeightedSampler sampler(j.weights);
  Rng rng(mix64(seed, 0x5a));
  const long s = static_cast<long>(std::ceil(c_scalar / epsilon));
  std::map<int, std::pair<int, int>> seen;  // block -> (variable, value)
  for (long i = 0; i < s; ++i) {
    const int v = sampler.sample(rng);
    const int x = f_j.value(v);
    auto [it, fresh] = seen.emplace(blocks.block_of[v], std::make_pair(v, x));
    if (!fresh && it->second.second != x) return PrecheckReject{it->second.first, v};
  }
  return std::nullopt;
}

// The instance part of equality contraction: one variable per block, summed
// weights, intersected lists, lifted and deduplicated constraints. Distances
// scale by c1 = 1/2 once the pre-check has passed; the randomized adapter
// answers each block from one weighted representative.
inline ReducedInput equality_contraction_instance(const RelInstance& j,
                                                  const std::string& eq_name) {
  const int eq_idx = detail::validated_eq_index(j, eq_name);
  detail::EqBlocks blocks = detail::eq_blocks(j, eq_idx);
  std::vector<std::vector<int>>& members = blocks.members;
  const int bn = static_cast<int>(members.size());
  const auto& block_of = blocks.block_of;

  Structure a;
  a.universe = j.target.universe;
  for (const auto& rel : j.target.relations)
    if (rel.name != eq_name) a.relations.push_back(rel);

  std::vector<std::uint64_t> lists(bn, ~std::uint64_t{0});
  std::vector<double> weights(bn, 0.0);
  for (int b = 0; b < bn; ++b)
    for (int v : members[b]) {
      lists[b] &= j.lists[v];
      weights[b] += j.weights[v];
    }
  std::vector<Constraint> cons;
  for (const auto& c : j.constraints) {
    if (c.rel == eq_idx) continue;
    Constraint lifted;
    lifted.rel = detail::remap_rel(a, j.target, c.rel);
    for (int v : c.scope) lifted.scope.push_back(block_of[v]);
    cons.push_back(std::move(lifted));
  }
  std::sort(cons.begin(), cons.end(), [](const Constraint& x, const Constraint& y) {
    return std::tie(x.rel, x.scope) < std::tie(y.rel, y.scope);
  });
  cons.erase(std::unique(cons.begin(), cons.end()), cons.end());

  ReducedInput out;
  out.inst = make_rel_instance(std::move(a), bn, std::move(cons), std::move(lists),
                               std::move(weights));
  out.prov.kind = "equality-contraction";
  out.prov.deterministic = false;
  out.prov.c1 = 0.5;
  out.prov.c2 = 1;
  out.prov.t1_bound = j.n + static_cast<long>(j.constraints.size());
  out.prov.t2_bound = 2 * static_cast<long>(j.constraints.size());

  struct Shared {
    std::vector<std::vector<int>> members;
    std::vector<double> weights;  // source weights
  };
  auto shared = std::make_shared<Shared>();
  shared->members = std::move(members);
  shared->weights = j.weights;

  // One weighted representative per block, drawn lazily and cached, so each
  // access costs at most one source query. Zero-weight blocks fall back to
  // their least member.
  class Adapter final : public VertexOracle {
   public:
    Adapter(VertexOracle& fj, std::shared_ptr<const Shared> d, std::uint64_t seed)
        : fj_(&fj), d_(std::move(d)), seed_(seed), cache_(d_->members.size(), -1) {}
    int value(int b) override {
      int& slot = cache_[b];
      if (slot >= 0) return slot;
      const auto& mem = d_->members[b];
      double mass = 0.0;
      for (int v : mem) mass += d_->weights[v];
      int rep = mem.front();
      if (mass > 0.0) {
        WeightedSampler sampler(d_->weights, mem);
        Rng rng(mix64(seed_, static_cast<std::uint64_t>(b)));
        rep = sampler.sample(rng);
      }
      slot = fj_->value(rep);
      return slot;
    }

   private:
    VertexOracle* fj_;
    std::shared_ptr<const Shared> d_;
    std::uint64_t seed_;
    std::vector<int> cache_;
  };
  out.make_adapter = [shared](VertexOracle& fj, std::uint64_t s) -> std::unique_ptr<VertexOracle> {
    return std::make_unique<Adapter>(fj, shared, s);
  };
  return out;
}

// Full equality contraction: run the pre-check, then build the contracted
// input. A PrecheckReject outcome means the source function must be rejected.
inline std::variant<PrecheckReject, ReducedInput> equality_contraction(
    const RelInstance& j, const std::string& eq_name, VertexOracle& f_j, double epsilon,
    std::uint64_t seed, double c_scalar = 4.0) {
  if (auto rej = equality_precheck(j, eq_name, f_j, epsilon, seed, c_scalar))
    return *rej;
  return equality_contraction_instance(j, eq_name);
}

enum class VarietyKind { Subalgebra, Quotient, Power };

struct VarietySpec {
  VarietyKind kind = VarietyKind::Subalgebra;
  int parent_universe = 0;     // Subalgebra, Quotient: |A|
  std::vector<int> embedding;  // Subalgebra: injective B -> A; empty = identity
  std::vector<int> h_map;      // Quotient: surjective A -> B, size |A|
  int base = 0;                // Power: |A|, with |B| = base^k
  int k = 1;                   // Power exponent
};

inline ReducedInput variety_reduction(const RelInstance& j, const VarietySpec& spec) {
  ReducedInput out;
  const long n = j.n, m = static_cast<long>(j.constraints.size());
  switch (spec.kind) {
    case VarietyKind::Subalgebra: {
      const int a_size = spec.parent_universe;
      if (a_size < j.target.universe || a_size > 64)
        throw SchemaError("parent universe must contain the source universe");
      std::vector<int> emb = spec.embedding;
      if (emb.empty()) {
        emb.resize(j.target.universe);
        for (int x = 0; x < j.target.universe; ++x) emb[x] = x;
      }
      if (static_cast<int>(emb.size()) != j.target.universe)
        throw SchemaError("embedding must map every source element");
      {
        std::vector<char> hit(a_size, 0);
        for (int x : emb) {
          if (x < 0 || x >= a_size) throw SchemaError("embedding image out of range");
          if (hit[x]++) throw SchemaError("embedding must be injective");
        }
      }
      Structure a;
      a.universe = a_size;
      for (const auto& rel : j.target.relations) {
        std::vector<std::vector<int>> tuples;
        for (const auto& t : rel.tuples) {
          std::vector<int> mapped(t.size());
          for (std::size_t i = 0; i < t.size(); ++i) mapped[i] = emb[t[i]];
          tuples.push_back(std::move(mapped));
        }
        a.relations.push_back(make_relation(rel.name, rel.arity, std::move(tuples), a_size));
      }
      std::string sub_name = "sub";
      while (a.find_relation(sub_name) >= 0) sub_name += "_";
      {
        std::vector<std::vector<int>> tuples;
        for (int x : emb) tuples.push_back({x});
        a.relations.push_back(make_relation(sub_name, 1, std::move(tuples), a_size));
      }
      const int sub_idx = a.find_relation(sub_name);
      std::vector<Constraint> cons = j.constraints;  // relation order preserved
      for (int v = 0; v < j.n; ++v) cons.push_back({sub_idx, {v}});
      std::vector<std::uint64_t> lists(j.n, 0);
      for (int v = 0; v < j.n; ++v)
        for (int x = 0; x < j.target.universe; ++x)
          if (j.in_list(v, x)) lists[v] |= std::uint64_t{1} << emb[x];
      out.inst = make_rel_instance(std::move(a), j.n, std::move(cons), std::move(lists),
                                   j.weights);
      out.make_adapter = detail::table_adapter(emb);
      out.prov.kind = "subalgebra";
      out.prov.c1 = 1.0;
      out.prov.t1_bound = n;
      out.prov.t2_bound = m + n;
      break;
    }
    case VarietyKind::Quotient: {
      const int a_size = spec.parent_universe;
      const int q = j.target.universe;
      if (a_size <= 0 || a_size > 64) throw SchemaError("parent universe size out of range");
      if (static_cast<int>(spec.h_map.size()) != a_size)
        throw SchemaError("quotient map must cover the parent universe");
      {
        std::vector<char> hit(q, 0);
        for (int x : spec.h_map) {
          if (x < 0 || x >= q) throw SchemaError("quotient map image out of range");
          hit[x] = 1;
        }
        for (int x = 0; x < q; ++x)
          if (!hit[x]) throw SchemaError("quotient map must be surjective");
      }
      Structure a;
      a.universe = a_size;
      for (const auto& rel : j.target.relations) {
        // Preimage relation: tuples whose image lies in the source relation.
        std::vector<std::vector<int>> tuples;
        std::vector<int> t(rel.arity, 0);
        std::function<void(int)> gen = [&](int pos) {
          if (pos == rel.arity) {
            std::vector<int> img(rel.arity);
            for (int i = 0; i < rel.arity; ++i) img[i] = spec.h_map[t[i]];
            if (rel.contains(img)) tuples.push_back(t);
            return;
          }
          for (int x = 0; x < a_size; ++x) {
            t[pos] = x;
            gen(pos + 1);
          }
        };
        gen(0);
        a.relations.push_back(make_relation(rel.name, rel.arity, std::move(tuples), a_size));
      }
      std::vector<int> min_preimage(q, -1);
      for (int x = a_size - 1; x >= 0; --x) min_preimage[spec.h_map[x]] = x;
      std::vector<std::uint64_t> lists(j.n, 0);
      for (int v = 0; v < j.n; ++v)
        for (int x = 0; x < a_size; ++x)
          if (j.in_list(v, spec.h_map[x])) lists[v] |= std::uint64_t{1} << x;
      out.inst = make_rel_instance(std::move(a), j.n, j.constraints, std::move(lists),
                                   j.weights);
      out.make_adapter = detail::table_adapter(min_preimage);
      out.prov.kind = "quotient";
      out.prov.c1 = 1.0;
      out.prov.t1_bound = n;
      out.prov.t2_bound = m;
      break;
    }
    case VarietyKind::Power: {
      const int base = spec.base, k = spec.k;
      if (base <= 0 || k <= 0) throw SchemaError("power needs a positive base and exponent");
      long pow = 1;
      for (int i = 0; i < k; ++i) {
        pow *= base;
        if (pow > 64) throw SchemaError("power universe exceeds the supported range");
      }
      if (pow != j.target.universe)
        throw SchemaError("source universe is not the claimed power");
      const std::uint64_t full_src = j.full_mask();
      for (std::uint64_t l : j.lists)
        if (l != full_src)
          throw ContractError("power reduction requires full lists");
      // beta decodes big-endian: coordinate i is (beta / base^(k-1-i)) mod base.
      std::vector<long> shift(k, 1);
      for (int i = k - 2; i >= 0; --i) shift[i] = shift[i + 1] * base;
      auto coord = [&](int beta, int i) { return static_cast<int>((beta / shift[i]) % base); };
      Structure a;
      a.universe = base;
      for (const auto& rel : j.target.relations) {
        // Copy-major flattening: coordinates of copy i for all of the scope,
        // then copy i+1.
        std::vector<std::vector<int>> tuples;
        for (const auto& t : rel.tuples) {
          std::vector<int> flat;
          flat.reserve(static_cast<std::size_t>(rel.arity) * k);
          for (int i = 0; i < k; ++i)
            for (int x : t) flat.push_back(coord(x, i));
          tuples.push_back(std::move(flat));
        }
        a.relations.push_back(make_relation(rel.name, rel.arity * k, std::move(tuples), base));
      }
      // Variable (copy i, source v) gets id i*n + v.
      std::vector<Constraint> cons;
      for (const auto& c : j.constraints) {
        std::vector<int> scope;
        scope.reserve(c.scope.size() * k);
        for (int i = 0; i < k; ++i)
          for (int v : c.scope) scope.push_back(i * j.n + v);
        cons.push_back({c.rel, std::move(scope)});
      }
      std::vector<double> weights(static_cast<std::size_t>(k) * j.n);
      for (int i = 0; i < k; ++i)
        for (int v = 0; v < j.n; ++v) weights[static_cast<std::size_t>(i) * j.n + v] = j.weights[v] / k;
      out.inst = make_rel_instance(std::move(a), k * j.n, std::move(cons), {}, std::move(weights));

      struct Shared {
        int n, k;
        std::vector<long> shift;
        int base;
      };
      auto shared = std::make_shared<Shared>(Shared{j.n, k, shift, base});
      class Adapter final : public VertexOracle {
       public:
        Adapter(VertexOracle& fj, std::shared_ptr<const Shared> d) : fj_(&fj), d_(std::move(d)) {}
        int value(int id) override {
          const int i = id / d_->n, v = id % d_->n;
          const int beta = fj_->value(v);
          return static_cast<int>((beta / d_->shift[i]) % d_->base);
        }

       private:
        VertexOracle* fj_;
        std::shared_ptr<const Shared> d_;
      };
      out.make_adapter = [shared](VertexOracle& fj, std::uint64_t) -> std::unique_ptr<VertexOracle> {
        return std::make_unique<Adapter>(fj, shared);
      };
      out.prov.kind = "power";
      out.prov.c1 = 1.0 / k;
      out.prov.t1_bound = static_cast<long>(k) * n;
      out.prov.t2_bound = m;
      break;
    }
  }
  out.prov.deterministic = true;
  out.prov.c2 = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Contract verification. Checks size bounds, that every supplied solution
// maps to a solution, that certified-far functions stay far (fraction
// reported), and that no adapter access exceeds its query bound.

struct ReductionReport {
  bool size_ok = false;
  bool hom_preserved = false;
  int homs_checked = 0;
  double far_rate = 0.0;
  int far_trials = 0;
  int max_adapter_queries = 0;
  bool c2_ok = false;
  bool deterministic = true;
};

namespace detail {

class AccessMeter final : public VertexOracle {
 public:
  explicit AccessMeter(VertexOracle& inner) : inner_(&inner) {}
  int value(int v) override {
    ++count_;
    return inner_->value(v);
  }
  long count() const { return count_; }

 private:
  VertexOracle* inner_;
  long count_ = 0;
};

}  // namespace detail

// Materialize the adapted function, recording the worst per-access source
// query count.
inline std::vector<int> materialize_adapter(const ReducedInput& red, const std::vector<int>& f_j,
                                            std::uint64_t seed, int* max_per_access = nullptr) {
  Assignment a{f_j};
  CountingOracle base(a);
  detail::AccessMeter meter(base);
  auto adapter = red.make_adapter(meter, seed);
  std::vector<int> out(red.inst.n);
  long prev = 0;
  for (int v = 0; v < red.inst.n; ++v) {
    out[v] = adapter->value(v);
    const long used = meter.count() - prev;
    prev = meter.count();
    if (max_per_access && used > *max_per_access) *max_per_access = static_cast<int>(used);
  }
  return out;
}

inline ReductionReport verify_reduction(const RelInstance& j, const ReducedInput& red,
                                        const std::vector<std::vector<int>>& homs,
                                        const std::vector<std::vector<int>>& far_maps,
                                        double epsilon, int trials, std::uint64_t seed,
                                        SearchBudget budget = {}) {
  ReductionReport rep;
  rep.deterministic = red.prov.deterministic;
  rep.size_ok = red.inst.n <= red.prov.t1_bound &&
                static_cast<long>(red.inst.constraints.size()) <= red.prov.t2_bound;
  const int draws = red.prov.deterministic ? 1 : std::max(trials, 1);
  rep.hom_preserved = true;
  int max_q = 0;
  for (const auto& f : homs) {
    if (!is_rel_hom(j, f)) throw ContractError("verify_reduction: supplied map is not a solution");
    for (int t = 0; t < draws; ++t) {
      const auto f_i =
          materialize_adapter(red, f, mix64(seed, 0x40, static_cast<std::uint64_t>(t)), &max_q);
      ++rep.homs_checked;
      if (!is_rel_hom(red.inst, f_i)) rep.hom_preserved = false;
    }
  }
  int far_ok = 0;
  for (std::size_t i = 0; i < far_maps.size(); ++i) {
    const auto& f = far_maps[i];
    const double dj = rel_distance(j, f, budget).distance;
    if (dj < epsilon - 1e-12)
      throw ContractError("verify_reduction: supplied far map is not far enough");
    for (int t = 0; t < draws; ++t) {
      const auto f_i =
          materialize_adapter(red, f, mix64(seed, static_cast<std::uint64_t>(i) + 1, t), &max_q);
      ++rep.far_trials;
      double di;
      try {
        di = rel_distance(red.inst, f_i, budget).distance;
      } catch (const UnsatisfiableError&) {
        di = 1.0;  // no solutions at all: maximally far
      }
      if (di >= red.prov.c1 * epsilon - 1e-12) ++far_ok;
    }
  }
  rep.far_rate = rep.far_trials == 0 ? 1.0 : static_cast<double>(far_ok) / rep.far_trials;
  rep.max_adapter_queries = max_q;
  rep.c2_ok = max_q <= red.prov.c2;
  return rep;
}

}  // namespace homtest
