#pragma once

#include <string>
#include <variant>
#include <vector>

#include "homtest/json_io.hpp"
#include "homtest/reductions.hpp"
#include "homtest/relational.hpp"

namespace homtest {

// {"universe": 2, "relations": [{"name": "even", "arity": 3, "tuples": [[0,0,0], ...]}]}
inline Structure parse_structure(const json& j) {
  if (!j.is_object()) throw SchemaError("structure must be an object");
  if (!j.contains("universe") || !j["universe"].is_number_integer())
    throw SchemaError("structure needs an integer \"universe\" size");
  std::vector<Relation> rels;
  if (j.contains("relations")) {
    if (!j["relations"].is_array()) throw SchemaError("\"relations\" must be an array");
    for (const auto& r : j["relations"]) {
      if (!r.is_object() || !r.contains("name") || !r["name"].is_string() ||
          !r.contains("arity") || !r["arity"].is_number_integer() || !r.contains("tuples") ||
          !r["tuples"].is_array())
        throw SchemaError("each relation needs \"name\", \"arity\", \"tuples\"");
      Relation rel;
      rel.name = r["name"].get<std::string>();
      rel.arity = r["arity"].get<int>();
      for (const auto& t : r["tuples"]) {
        if (!t.is_array()) throw SchemaError("tuples must be arrays");
        std::vector<int> tup;
        for (const auto& x : t) {
          if (!x.is_number_integer()) throw SchemaError("tuple entries must be integers");
          tup.push_back(x.get<int>());
        }
        rel.tuples.push_back(std::move(tup));
      }
      rels.push_back(std::move(rel));
    }
  }
  return make_structure(j["universe"].get<int>(), std::move(rels));
}

inline json dump_structure(const Structure& s) {
  json rels = json::array();
  for (const auto& r : s.relations) {
    json jr;
    jr["name"] = r.name;
    jr["arity"] = r.arity;
    jr["tuples"] = r.tuples;
    rels.push_back(std::move(jr));
  }
  json j;
  j["universe"] = s.universe;
  j["relations"] = std::move(rels);
  return j;
}

// {"structure": {...}, "n": 4, "constraints": [{"rel": "even", "scope": [0,1,2]}],
//  "lists": {"0": [0,1]}, "weights": {"0": 0.25, ...}}
// Lists default to full per missing variable; weights are all-or-none.
inline RelInstance parse_rel_instance(const json& j) {
  if (!j.is_object()) throw SchemaError("relational instance must be an object");
  if (!j.contains("structure")) throw SchemaError("relational instance needs \"structure\"");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw SchemaError("relational instance needs an integer \"n\"");
  Structure s = parse_structure(j["structure"]);
  const int n = j["n"].get<int>();
  if (n <= 0) throw SchemaError("\"n\" must be positive");
  std::vector<Constraint> cons;
  if (j.contains("constraints")) {
    if (!j["constraints"].is_array()) throw SchemaError("\"constraints\" must be an array");
    for (const auto& c : j["constraints"]) {
      if (!c.is_object() || !c.contains("rel") || !c["rel"].is_string() || !c.contains("scope") ||
          !c["scope"].is_array())
        throw SchemaError("each constraint needs \"rel\" and \"scope\"");
      Constraint con;
      con.rel = s.find_relation(c["rel"].get<std::string>());
      if (con.rel < 0) throw SchemaError("constraint names unknown relation " + c["rel"].get<std::string>());
      for (const auto& v : c["scope"]) {
        if (!v.is_number_integer()) throw SchemaError("scope entries must be integers");
        con.scope.push_back(v.get<int>());
      }
      cons.push_back(std::move(con));
    }
  }
  std::vector<std::uint64_t> lists;
  if (j.contains("lists")) {
    if (!j["lists"].is_object()) throw SchemaError("\"lists\" must be an object");
    const std::uint64_t full =
        s.universe == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << s.universe) - 1;
    lists.assign(n, full);
    for (const auto& [key, val] : j["lists"].items()) {
      int v = -1;
      try {
        v = std::stoi(key);
      } catch (...) {
        throw SchemaError("lists: keys must be variable indices");
      }
      if (v < 0 || v >= n) throw SchemaError("lists: variable index out of range: " + key);
      if (!val.is_array()) throw SchemaError("lists: entry for " + key + " must be an array");
      std::uint64_t m = 0;
      for (const auto& x : val) {
        if (!x.is_number_integer()) throw SchemaError("lists: values must be integers");
        const int e = x.get<int>();
        if (e < 0 || e >= s.universe) throw SchemaError("lists: value out of range at " + key);
        m |= std::uint64_t{1} << e;
      }
      lists[v] = m;
    }
  }
  std::vector<double> weights;
  if (j.contains("weights")) {
    if (!j["weights"].is_object()) throw SchemaError("\"weights\" must be an object");
    weights.assign(n, 0.0);
    std::vector<char> present(n, 0);
    for (const auto& [key, val] : j["weights"].items()) {
      int v = -1;
      try {
        v = std::stoi(key);
      } catch (...) {
        throw SchemaError("weights: keys must be variable indices");
      }
      if (v < 0 || v >= n) throw SchemaError("weights: variable index out of range: " + key);
      if (!val.is_number()) throw SchemaError("weights: entry for " + key + " must be a number");
      weights[v] = val.get<double>();
      present[v] = 1;
    }
    for (int v = 0; v < n; ++v)
      if (!present[v]) throw SchemaError("weights: missing weight for variable " + std::to_string(v));
  }
  return make_rel_instance(std::move(s), n, std::move(cons), std::move(lists),
                           std::move(weights));
}

inline json dump_rel_instance(const RelInstance& inst) {
  json j;
  j["structure"] = dump_structure(inst.target);
  j["n"] = inst.n;
  json cons = json::array();
  for (const auto& c : inst.constraints) {
    json jc;
    jc["rel"] = inst.target.relations[c.rel].name;
    jc["scope"] = c.scope;
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  json lists = json::object();
  for (int v = 0; v < inst.n; ++v) {
    json l = json::array();
    for (int x = 0; x < inst.target.universe; ++x)
      if (inst.in_list(v, x)) l.push_back(x);
    lists[std::to_string(v)] = std::move(l);
  }
  j["lists"] = std::move(lists);
  json weights = json::object();
  for (int v = 0; v < inst.n; ++v) weights[std::to_string(v)] = inst.weights[v];
  j["weights"] = std::move(weights);
  return j;
}

// {"f": [0, 1, 1, 0]} — values by variable index.
inline std::vector<int> parse_rel_assignment(const json& j, const RelInstance& inst) {
  if (!j.is_object() || !j.contains("f") || !j["f"].is_array())
    throw SchemaError("relational assignment needs an \"f\" array");
  std::vector<int> f;
  for (const auto& x : j["f"]) {
    if (!x.is_number_integer()) throw SchemaError("assignment values must be integers");
    f.push_back(x.get<int>());
  }
  if (static_cast<int>(f.size()) != inst.n)
    throw SchemaError("assignment length must equal the variable count");
  for (int x : f)
    if (x < 0 || x >= inst.target.universe)
      throw SchemaError("assignment value out of range");
  return f;
}

inline json dump_provenance(const Provenance& p) {
  json j;
  j["kind"] = p.kind;
  j["deterministic"] = p.deterministic;
  j["c1"] = p.c1;
  j["c2"] = p.c2;
  j["t1_bound"] = p.t1_bound;
  j["t2_bound"] = p.t2_bound;
  return j;
}

inline json dump_reduction_report(const ReductionReport& r) {
  json j;
  j["size_ok"] = r.size_ok;
  j["hom_preserved"] = r.hom_preserved;
  j["homs_checked"] = r.homs_checked;
  j["far_rate"] = r.far_rate;
  j["far_trials"] = r.far_trials;
  j["max_adapter_queries"] = r.max_adapter_queries;
  j["c2_ok"] = r.c2_ok;
  j["deterministic"] = r.deterministic;
  return j;
}

// Parsed form of a `--case` + spec-file pair: either one of the five simple
// transformations, the name of the equality relation to contract, or a
// variety construction.
using ReduceSpec = std::variant<SimpleSpec, std::string, VarietySpec>;

inline ReduceSpec parse_reduce_spec(const std::string& case_id, const json& j) {
  auto need_string = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string())
      throw SchemaError(std::string("reduction spec needs string \"") + key + "\"");
    return j[key].get<std::string>();
  };
  auto need_int = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw SchemaError(std::string("reduction spec needs integer \"") + key + "\"");
    return j[key].get<int>();
  };
  auto need_ints = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array())
      throw SchemaError(std::string("reduction spec needs array \"") + key + "\"");
    std::vector<int> out;
    for (const auto& x : j[key]) {
      if (!x.is_number_integer()) throw SchemaError("entries must be integers");
      out.push_back(x.get<int>());
    }
    return out;
  };
  if (case_id == "1" || case_id == "remove-relation") {
    SimpleSpec sp;
    sp.kind = SimpleCase::RemoveRelation;
    if (!j.contains("relation") || !j["relation"].is_object())
      throw SchemaError("remove-relation spec needs a \"relation\" object");
    const json& r = j["relation"];
    if (!r.contains("name") || !r["name"].is_string() || !r.contains("arity") ||
        !r.contains("tuples"))
      throw SchemaError("restored relation needs \"name\", \"arity\", \"tuples\"");
    sp.added.name = r["name"].get<std::string>();
    sp.added.arity = r["arity"].get<int>();
    for (const auto& t : r["tuples"]) {
      std::vector<int> tup;
      for (const auto& x : t) tup.push_back(x.get<int>());
      sp.added.tuples.push_back(std::move(tup));
    }
    return sp;
  }
  if (case_id == "2" || case_id == "permute-variables") {
    SimpleSpec sp;
    sp.kind = SimpleCase::PermuteVariables;
    sp.relation = need_string("relation");
    if (j.contains("name")) sp.r_name = need_string("name");
    sp.perm = need_ints("perm");
    return sp;
  }
  if (case_id == "3" || case_id == "intersection" || case_id == "4" || case_id == "product") {
    SimpleSpec sp;
    sp.kind = (case_id == "3" || case_id == "intersection") ? SimpleCase::Intersection
                                                            : SimpleCase::Product;
    sp.relation = need_string("relation");
    sp.r_name = need_string("r");
    sp.s_name = need_string("s");
    return sp;
  }
  if (case_id == "5" || case_id == "equality-contraction") {
    return need_string("relation");
  }
  if (case_id == "6" || case_id == "projection") {
    SimpleSpec sp;
    sp.kind = SimpleCase::Projection;
    sp.relation = need_string("relation");
    sp.r_name = need_string("r");
    return sp;
  }
  if (case_id == "subalgebra") {
    VarietySpec vs;
    vs.kind = VarietyKind::Subalgebra;
    vs.parent_universe = need_int("parent_universe");
    if (j.contains("embedding")) vs.embedding = need_ints("embedding");
    return vs;
  }
  if (case_id == "quotient") {
    VarietySpec vs;
    vs.kind = VarietyKind::Quotient;
    vs.parent_universe = need_int("parent_universe");
    vs.h_map = need_ints("map");
    return vs;
  }
  if (case_id == "power") {
    VarietySpec vs;
    vs.kind = VarietyKind::Power;
    vs.base = need_int("base");
    vs.k = need_int("k");
    return vs;
  }
  throw SchemaError("unknown reduction case: " + case_id);
}

}  // namespace homtest
