#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "brute.hpp"
#include "homtest/reductions.hpp"
#include "homtest/relational.hpp"

using namespace homtest;

namespace {

// J over {0,1} with an even-parity constraint and a binary "edge" relation.
RelInstance toy_instance() {
  Structure s = make_structure(
      2, {Relation{"even", 3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}}},
          Relation{"edge", 2, {{0, 1}, {1, 0}}}});
  return make_rel_instance(s, 4,
                           {Constraint{0, {0, 1, 2}}, Constraint{1, {2, 3}}});
}

std::vector<int> materialized(const ReducedInput& red, const std::vector<int>& f,
                              std::uint64_t seed = 1) {
  return materialize_adapter(red, f, seed);
}

// Checks hom ⇒ hom and distance transfer against the naive enumerator.
void check_contract(const RelInstance& j, const ReducedInput& red, bool distance_equal,
                    double c1) {
  for (const auto& f : brute::rel_enumerate(j)) {
    REQUIRE(is_rel_hom(red.inst, materialized(red, f)));
  }
  Rng rng(404);
  for (int t = 0; t < 6; ++t) {
    std::vector<int> f(j.n);
    for (int& x : f) x = rng.next_int(j.target.universe);
    const double dj = brute::rel_distance(j, f);
    if (dj < 0.0) continue;  // unsatisfiable source: nothing to compare
    const double di = brute::rel_distance(red.inst, materialized(red, f));
    if (di < 0.0) continue;
    if (distance_equal) {
      REQUIRE(di == Catch::Approx(dj).margin(1e-12));
    } else {
      REQUIRE(di >= c1 * dj - 1e-12);
    }
  }
}

}  // namespace

TEST_CASE("restoring an unused relation changes nothing") {
  RelInstance j = toy_instance();
  SimpleSpec spec;
  spec.kind = SimpleCase::RemoveRelation;
  spec.added = Relation{"loops", 1, {{0}, {1}}};
  ReducedInput red = transform_simple(j, spec);
  REQUIRE(red.prov.kind == "remove-relation");
  REQUIRE(red.prov.deterministic);
  REQUIRE(red.inst.n == j.n);
  REQUIRE(red.inst.target.relations.size() == j.target.relations.size() + 1);
  REQUIRE(red.inst.constraints.size() == j.constraints.size());
  check_contract(j, red, true, 1.0);

  SimpleSpec dup;
  dup.kind = SimpleCase::RemoveRelation;
  dup.added = Relation{"even", 3, {{0, 0, 0}}};
  REQUIRE_THROWS_AS(transform_simple(j, dup), SchemaError);
}

TEST_CASE("permuting a relation's coordinates preserves the solution set") {
  RelInstance j = toy_instance();
  SimpleSpec spec;
  spec.kind = SimpleCase::PermuteVariables;
  spec.relation = "even";
  spec.r_name = "even_rot";
  spec.perm = {2, 0, 1};
  ReducedInput red = transform_simple(j, spec);
  REQUIRE(red.prov.kind == "permute-variables");
  REQUIRE(red.inst.target.find_relation("even_rot") >= 0);
  REQUIRE(red.inst.target.find_relation("even") < 0);

  auto before = brute::rel_enumerate(j);
  auto after = brute::rel_enumerate(red.inst);
  std::set<std::vector<int>> sb(before.begin(), before.end());
  std::set<std::vector<int>> sa(after.begin(), after.end());
  REQUIRE(sb == sa);  // identity on variables: same maps satisfy both
  check_contract(j, red, true, 1.0);

  SimpleSpec bad = spec;
  bad.perm = {0, 0, 1};
  REQUIRE_THROWS_AS(transform_simple(j, bad), SchemaError);
}

TEST_CASE("intersection and product constraints split into their factors") {
  Structure s = make_structure(
      2, {Relation{"r", 2, {{0, 0}, {0, 1}, {1, 1}}},
          Relation{"s", 2, {{0, 1}, {1, 0}, {1, 1}}},
          Relation{"both", 2, {{0, 1}, {1, 1}}},
          Relation{"pair", 4, {}}});
  // both = r ∩ s; pair = r × s.
  std::vector<std::vector<int>> prod;
  for (const auto& a : s.relations[0].tuples)
    for (const auto& b : s.relations[1].tuples)
      prod.push_back({a[0], a[1], b[0], b[1]});
  s.relations[3] = make_relation("pair", 4, prod, 2);

  RelInstance j = make_rel_instance(s, 4, {Constraint{2, {0, 1}}, Constraint{3, {0, 1, 2, 3}}});

  SimpleSpec ispec;
  ispec.kind = SimpleCase::Intersection;
  ispec.relation = "both";
  ispec.r_name = "r";
  ispec.s_name = "s";
  ReducedInput ired = transform_simple(j, ispec);
  REQUIRE(ired.prov.kind == "intersection");
  REQUIRE(ired.inst.constraints.size() == j.constraints.size() + 1);
  check_contract(j, ired, true, 1.0);

  SimpleSpec pspec;
  pspec.kind = SimpleCase::Product;
  pspec.relation = "pair";
  pspec.r_name = "r";
  pspec.s_name = "s";
  ReducedInput pred = transform_simple(j, pspec);
  REQUIRE(pred.prov.kind == "product");
  check_contract(j, pred, true, 1.0);

  // Validation is exact: a near-miss intersection is refused.
  SimpleSpec wrong = ispec;
  wrong.relation = "s";
  wrong.r_name = "r";
  wrong.s_name = "both";
  REQUIRE_THROWS_AS(transform_simple(j, wrong), ContractError);
}

TEST_CASE("projection introduces fresh witness variables at zero weight") {
  Structure s = make_structure(
      2, {Relation{"r", 3, {{0, 0, 1}, {0, 1, 0}, {1, 1, 1}}},
          Relation{"p", 2, {{0, 0}, {0, 1}, {1, 1}}}});  // p = proj_12(r)
  RelInstance j = make_rel_instance(s, 3, {Constraint{1, {0, 1}}, Constraint{1, {1, 2}}});
  SimpleSpec spec;
  spec.kind = SimpleCase::Projection;
  spec.relation = "p";
  spec.r_name = "r";
  ReducedInput red = transform_simple(j, spec);
  REQUIRE(red.prov.kind == "projection");
  REQUIRE(red.prov.c2 == 2);          // witness lookup reads the defined prefix
  REQUIRE(red.inst.n == 3 + 2);       // one fresh variable per p-constraint scope
  for (int v = 3; v < 5; ++v) REQUIRE(red.inst.weights[v] == 0.0);
  check_contract(j, red, true, 1.0);

  // Adapter witnesses complete partial homs: each materialization is a hom.
  int adapter_max = 0;
  for (const auto& f : brute::rel_enumerate(j)) {
    int per_access = 0;
    auto fi = materialize_adapter(red, f, 9, &per_access);
    adapter_max = std::max(adapter_max, per_access);
    REQUIRE(is_rel_hom(red.inst, fi));
  }
  REQUIRE(adapter_max <= red.prov.c2);
}

TEST_CASE("equality pre-check rejects block disagreements with high probability") {
  // Two variables forced equal, uniform weight, disagreeing assignment.
  Structure s = make_structure(2, {Relation{"eq", 2, {{0, 0}, {1, 1}}},
                                   Relation{"one", 1, {{0}, {1}}}});
  RelInstance j = make_rel_instance(s, 2, {Constraint{0, {0, 1}}});
  std::vector<int> f = {0, 1};
  Assignment a{f};
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    CountingOracle oracle(a);
    auto rej = equality_precheck(j, "eq", oracle, 0.2, seed);
    if (rej) {
      ++rejected;
      REQUIRE(rej->first != rej->second);
    }
  }
  REQUIRE(rejected >= 200);  // ≥ 2/3 of 300

  // A block-consistent assignment never trips the pre-check.
  std::vector<int> g = {1, 1};
  Assignment b{g};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CountingOracle oracle(b);
    REQUIRE(!equality_precheck(j, "eq", oracle, 0.2, seed).has_value());
  }
}

TEST_CASE("equality contraction merges blocks and lifts constraints") {
  Structure s = make_structure(
      2, {Relation{"even", 3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}}},
          Relation{"eq", 2, {{0, 0}, {1, 1}}}});
  RelInstance j = make_rel_instance(
      s, 5,
      {Constraint{1, {0, 1}}, Constraint{1, {1, 2}}, Constraint{0, {2, 3, 4}}});
  ReducedInput red = equality_contraction_instance(j, "eq");
  REQUIRE(red.prov.kind == "equality-contraction");
  REQUIRE(!red.prov.deterministic);
  REQUIRE(red.prov.c1 == Catch::Approx(0.5));
  REQUIRE(red.inst.n == 3);  // {0,1,2} merge; 3 and 4 stay
  REQUIRE(red.inst.target.find_relation("eq") < 0);
  // Block weight is the sum of member weights: 3/5 for the merged block.
  REQUIRE(red.inst.weights[0] == Catch::Approx(0.6));

  // Lifted solutions match the source solutions restricted to blocks.
  std::set<std::vector<int>> expect;
  for (const auto& f : brute::rel_enumerate(j)) expect.insert({f[0], f[3], f[4]});
  std::set<std::vector<int>> got;
  for (const auto& f : brute::rel_enumerate(red.inst)) got.insert(f);
  REQUIRE(got == expect);

  // On block-consistent maps the adapter is lossless in expectation.
  std::vector<int> consistent = {1, 1, 1, 0, 0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto fi = materialize_adapter(red, consistent, seed);
    REQUIRE(fi == std::vector<int>{1, 0, 0});
  }
}

TEST_CASE("contraction tolerates empty intersected lists") {
  Structure s = make_structure(2, {Relation{"eq", 2, {{0, 0}, {1, 1}}}});
  RelInstance j = make_rel_instance(s, 2, {Constraint{0, {0, 1}}},
                                    {std::uint64_t{1}, std::uint64_t{2}});  // {0} and {1}
  ReducedInput red = equality_contraction_instance(j, "eq");
  REQUIRE(red.inst.n == 1);
  REQUIRE(red.inst.lists[0] == 0);  // empty: the contraction is unsatisfiable
  REQUIRE(brute::rel_enumerate(red.inst).empty());
}

TEST_CASE("subalgebra restriction maps through the embedding") {
  Structure parent = make_structure(
      4, {Relation{"link", 2, {{0, 1}, {1, 0}, {2, 3}, {3, 2}, {2, 2}}}});
  RelInstance j = make_rel_instance(
      make_structure(2, {Relation{"link", 2, {{0, 1}, {1, 0}, {0, 0}}}}), 3,
      {Constraint{0, {0, 1}}, Constraint{0, {1, 2}}});
  VarietySpec spec;
  spec.kind = VarietyKind::Subalgebra;
  spec.parent_universe = 4;
  spec.embedding = {2, 3};  // 0 → 2, 1 → 3
  ReducedInput red = variety_reduction(j, spec);
  REQUIRE(red.prov.kind == "subalgebra");
  REQUIRE(red.inst.target.universe == 4);
  // The embedded image is carved out by a fresh unary relation on every var.
  REQUIRE(red.inst.target.find_relation("sub") >= 0);
  for (const auto& f : brute::rel_enumerate(j)) {
    auto fi = materialized(red, f);
    REQUIRE(is_rel_hom(red.inst, fi));
    for (int v = 0; v < j.n; ++v) REQUIRE(fi[v] == spec.embedding[f[v]]);
  }
  check_contract(j, red, true, 1.0);
}

TEST_CASE("quotient lifts through preimages") {
  // Parent {0,1,2,3} with parity map onto {0,1}.
  RelInstance j = make_rel_instance(
      make_structure(2, {Relation{"edge", 2, {{0, 1}, {1, 0}}}}), 3,
      {Constraint{0, {0, 1}}, Constraint{0, {1, 2}}});
  VarietySpec spec;
  spec.kind = VarietyKind::Quotient;
  spec.parent_universe = 4;
  spec.h_map = {0, 1, 0, 1};
  ReducedInput red = variety_reduction(j, spec);
  REQUIRE(red.prov.kind == "quotient");
  REQUIRE(red.inst.target.universe == 4);
  // Each preimage relation blows up by the fiber sizes: 2·2 per tuple.
  REQUIRE(red.inst.target.relations[0].tuples.size() == 2 * 4);
  check_contract(j, red, true, 1.0);

  VarietySpec bad = spec;
  bad.h_map = {0, 0, 0, 0};  // not surjective onto {0,1}
  REQUIRE_THROWS_AS(variety_reduction(j, bad), SchemaError);
}

TEST_CASE("power splits coordinates and scales distance by 1/k") {
  Structure s4 = make_structure(
      4, {Relation{"link", 2, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 0}, {2, 2}}}});
  RelInstance j = make_rel_instance(s4, 3, {Constraint{0, {0, 1}}, Constraint{0, {1, 2}}});
  VarietySpec spec;
  spec.kind = VarietyKind::Power;
  spec.base = 2;
  spec.k = 2;
  ReducedInput red = variety_reduction(j, spec);
  REQUIRE(red.prov.kind == "power");
  REQUIRE(red.prov.c1 == Catch::Approx(0.5));
  REQUIRE(red.inst.target.universe == 2);
  REQUIRE(red.inst.n == 6);
  for (const auto& f : brute::rel_enumerate(j)) {
    auto fi = materialized(red, f);
    REQUIRE(is_rel_hom(red.inst, fi));
    // Big-endian decode: variable (copy i, source v) holds coordinate i.
    for (int v = 0; v < j.n; ++v) REQUIRE(f[v] == 2 * fi[v] + fi[j.n + v]);
  }
  check_contract(j, red, false, 0.5);

  // Partial lists cannot ride through the coordinate split.
  RelInstance listed = make_rel_instance(s4, 2, {Constraint{0, {0, 1}}},
                                         {std::uint64_t{3}, std::uint64_t{15}});
  REQUIRE_THROWS_AS(variety_reduction(listed, spec), ContractError);
}

TEST_CASE("verify_reduction assembles the full report") {
  RelInstance j = toy_instance();
  SimpleSpec spec;
  spec.kind = SimpleCase::PermuteVariables;
  spec.relation = "even";
  spec.perm = {1, 2, 0};
  ReducedInput red = transform_simple(j, spec);

  auto homs = enumerate_rel_homs(j);
  std::vector<std::vector<int>> far;
  Rng rng(7);
  while (far.size() < 3) {
    std::vector<int> f(j.n);
    for (int& x : f) x = rng.next_int(2);
    if (rel_distance(j, f).distance >= 0.25) far.push_back(f);
  }
  ReductionReport rep = verify_reduction(j, red, homs, far, 0.25, 5, 99);
  REQUIRE(rep.size_ok);
  REQUIRE(rep.hom_preserved);
  REQUIRE(rep.homs_checked == static_cast<long>(homs.size()));
  REQUIRE(rep.far_rate == 1.0);
  REQUIRE(rep.far_trials == 3);
  REQUIRE(rep.c2_ok);
  REQUIRE(rep.deterministic);

  // A far map below the threshold is refused outright.
  std::vector<std::vector<int>> close = {homs.front()};
  REQUIRE_THROWS_AS(verify_reduction(j, red, homs, close, 0.25, 5, 99), ContractError);
}
