#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"

namespace homtest {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

// {"vertices": ["a", ...], "edges": [["a","b"], ...]}
inline Graph parse_graph(const json& j, const std::string& what = "graph") {
  if (!j.is_object()) throw SchemaError(what + " must be an object");
  if (!j.contains("vertices") || !j["vertices"].is_array())
    throw SchemaError(what + " needs a \"vertices\" array");
  std::vector<std::string> names;
  for (const auto& v : j["vertices"]) {
    if (!v.is_string()) throw SchemaError(what + ": vertex names must be strings");
    names.push_back(v.get<std::string>());
  }
  Graph g;
  {
    // Build the index first so edges can be resolved by name.
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (!index.emplace(names[i], static_cast<int>(i)).second)
        throw SchemaError(what + ": duplicate vertex name: " + names[i]);
    std::vector<std::pair<int, int>> edges;
    if (j.contains("edges")) {
      if (!j["edges"].is_array()) throw SchemaError(what + ": \"edges\" must be an array");
      for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
          throw SchemaError(what + ": each edge must be a pair of vertex names");
        auto iu = index.find(e[0].get<std::string>());
        auto iv = index.find(e[1].get<std::string>());
        if (iu == index.end()) throw SchemaError(what + ": edge references unknown vertex " + e[0].get<std::string>());
        if (iv == index.end()) throw SchemaError(what + ": edge references unknown vertex " + e[1].get<std::string>());
        edges.emplace_back(iu->second, iv->second);
      }
    }
    g = Graph::build(std::move(names), edges);
  }
  return g;
}

inline json dump_graph(const Graph& g) {
  json j;
  j["vertices"] = g.names;
  json edges = json::array();
  for (auto [u, v] : g.edges) edges.push_back({g.names[u], g.names[v]});
  j["edges"] = std::move(edges);
  return j;
}

// {"H": graph, "G": graph, "lists": {"u": ["a",...], ...}, "weights": {"u": w, ...}}
// A missing "lists" object (or a missing vertex key) means the full list; a
// missing "weights" object means uniform weights.
inline Instance parse_instance(const json& j) {
  if (!j.is_object()) throw SchemaError("instance must be an object");
  if (!j.contains("H")) throw SchemaError("instance needs target graph \"H\"");
  if (!j.contains("G")) throw SchemaError("instance needs input graph \"G\"");
  Graph h = parse_graph(j["H"], "H");
  Graph g = parse_graph(j["G"], "G");

  std::vector<std::vector<int>> lists(g.size());
  std::vector<int> full(h.size());
  for (int x = 0; x < h.size(); ++x) full[x] = x;
  for (int v = 0; v < g.size(); ++v) lists[v] = full;
  if (j.contains("lists")) {
    if (!j["lists"].is_object()) throw SchemaError("\"lists\" must be an object");
    for (const auto& [key, val] : j["lists"].items()) {
      const int v = g.find(key);
      if (v < 0) throw SchemaError("lists: unknown vertex " + key);
      if (!val.is_array()) throw SchemaError("lists: entry for " + key + " must be an array");
      lists[v].clear();
      for (const auto& name : val) {
        if (!name.is_string()) throw SchemaError("lists: values must be vertex names of H");
        const int x = h.find(name.get<std::string>());
        if (x < 0) throw SchemaError("lists: unknown target vertex " + name.get<std::string>() + " at " + key);
        lists[v].push_back(x);
      }
    }
  }

  std::vector<double> weights;
  if (j.contains("weights")) {
    if (!j["weights"].is_object()) throw SchemaError("\"weights\" must be an object");
    weights.assign(g.size(), 0.0);
    std::vector<char> present(g.size(), 0);
    for (const auto& [key, val] : j["weights"].items()) {
      const int v = g.find(key);
      if (v < 0) throw SchemaError("weights: unknown vertex " + key);
      if (!val.is_number()) throw SchemaError("weights: entry for " + key + " must be a number");
      weights[v] = val.get<double>();
      present[v] = 1;
    }
    for (int v = 0; v < g.size(); ++v)
      if (!present[v]) throw SchemaError("weights: missing weight for " + g.names[v]);
  }
  return make_instance(std::move(g), std::move(h), lists, std::move(weights));
}

inline json dump_instance(const Instance& inst) {
  json j;
  j["H"] = dump_graph(inst.h);
  j["G"] = dump_graph(inst.g);
  json lists = json::object();
  for (int v = 0; v < inst.n(); ++v) {
    json l = json::array();
    for (int x = 0; x < inst.target_size(); ++x)
      if (inst.in_list(v, x)) l.push_back(inst.h.names[x]);
    lists[inst.g.names[v]] = std::move(l);
  }
  j["lists"] = std::move(lists);
  json weights = json::object();
  for (int v = 0; v < inst.n(); ++v) weights[inst.g.names[v]] = inst.weights[v];
  j["weights"] = std::move(weights);
  return j;
}

// {"f": {"u": "a", ...}} — every input vertex must be assigned.
inline Assignment parse_assignment(const json& j, const Instance& inst) {
  if (!j.is_object() || !j.contains("f") || !j["f"].is_object())
    throw SchemaError("assignment needs an \"f\" object");
  Assignment f;
  f.values.assign(inst.n(), -1);
  for (const auto& [key, val] : j["f"].items()) {
    const int v = inst.g.find(key);
    if (v < 0) throw SchemaError("assignment: unknown vertex " + key);
    if (!val.is_string()) throw SchemaError("assignment: values must be vertex names of H");
    const int x = inst.h.find(val.get<std::string>());
    if (x < 0) throw SchemaError("assignment: unknown target vertex " + val.get<std::string>());
    f.values[v] = x;
  }
  for (int v = 0; v < inst.n(); ++v)
    if (f.values[v] < 0) throw SchemaError("assignment: missing value for " + inst.g.names[v]);
  return f;
}

inline json dump_assignment(const Instance& inst, const Assignment& f) {
  json m = json::object();
  for (int v = 0; v < inst.n(); ++v) m[inst.g.names[v]] = inst.h.names[f[v]];
  json j;
  j["f"] = std::move(m);
  return j;
}

}  // namespace homtest
