#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "homtest/errors.hpp"

namespace homtest {

// Finite undirected graph, loops allowed. Vertices are kept in document order
// and addressed by dense indices; names are retained for I/O. Used both for
// input graphs G and target graphs H.
struct Graph {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  std::vector<std::pair<int, int>> edges;  // normalized u <= v, sorted, unique
  std::vector<std::vector<int>> adj;       // sorted neighbor lists; loop puts v into adj[v]

  int size() const { return static_cast<int>(names.size()); }

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }

  bool has_edge(int u, int v) const {
    const auto& a = adj[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  bool has_loop(int v) const { return has_edge(v, v); }

  bool is_reflexive() const {
    for (int v = 0; v < size(); ++v)
      if (!has_loop(v)) return false;
    return true;
  }

  bool is_irreflexive() const {
    for (int v = 0; v < size(); ++v)
      if (has_loop(v)) return false;
    return true;
  }

  static Graph build(std::vector<std::string> vertex_names,
                     const std::vector<std::pair<int, int>>& edge_list) {
    Graph g;
    g.names = std::move(vertex_names);
    if (g.names.empty()) throw SchemaError("graph needs at least one vertex");
    for (int i = 0; i < g.size(); ++i) {
      if (!g.index.emplace(g.names[i], i).second)
        throw SchemaError("duplicate vertex name: " + g.names[i]);
    }
    g.adj.resize(g.names.size());
    std::vector<std::pair<int, int>> es;
    es.reserve(edge_list.size());
    for (auto [u, v] : edge_list) {
      if (u < 0 || v < 0 || u >= g.size() || v >= g.size())
        throw SchemaError("edge endpoint out of range");
      if (u > v) std::swap(u, v);
      es.emplace_back(u, v);
    }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    g.edges = std::move(es);
    for (auto [u, v] : g.edges) {
      g.adj[u].push_back(v);
      if (u != v) g.adj[v].push_back(u);
    }
    for (auto& a : g.adj) std::sort(a.begin(), a.end());
    return g;
  }
};

// Adjacency rows as bitmasks; requires size <= 64.
inline std::vector<std::uint64_t> adjacency_masks(const Graph& g) {
  if (g.size() > 64) throw ContractError("adjacency masks need |V| <= 64");
  std::vector<std::uint64_t> rows(g.size(), 0);
  for (auto [u, v] : g.edges) {
    rows[u] |= std::uint64_t{1} << v;
    rows[v] |= std::uint64_t{1} << u;
  }
  return rows;
}

// Induced subgraph on `keep` (sorted, unique vertex indices); names preserved.
inline Graph induced_subgraph(const Graph& g, const std::vector<int>& keep) {
  std::vector<int> pos(g.size(), -1);
  std::vector<std::string> names;
  names.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const int v = keep[i];
    if (v < 0 || v >= g.size() || pos[v] != -1)
      throw ContractError("induced_subgraph: bad vertex subset");
    pos[v] = static_cast<int>(i);
    names.push_back(g.names[v]);
  }
  std::vector<std::pair<int, int>> es;
  for (auto [u, v] : g.edges)
    if (pos[u] != -1 && pos[v] != -1) es.emplace_back(pos[u], pos[v]);
  return Graph::build(std::move(names), es);
}

// Connected components; each component sorted ascending, components ordered by
// minimum vertex index.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<int> comp(g.size(), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < g.size(); ++s) {
    if (comp[s] != -1) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::deque<int> q{s};
    comp[s] = id;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      out[id].push_back(v);
      for (int u : g.adj[v]) {
        if (comp[u] == -1) {
          comp[u] = id;
          q.push_back(u);
        }
      }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

// Proper 2-coloring attempt. side[v] is 0/1 with the minimum vertex of every
// component on side 0; ok == false if some component has an odd closed walk
// (loops included).
struct Bipartition {
  bool ok = true;
  std::vector<int> side;
};

inline Bipartition two_color(const Graph& g) {
  Bipartition b;
  b.side.assign(g.size(), -1);
  for (int s = 0; s < g.size(); ++s) {
    if (b.side[s] != -1) continue;
    b.side[s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (int u : g.adj[v]) {
        if (u == v) {
          b.ok = false;
          continue;
        }
        if (b.side[u] == -1) {
          b.side[u] = 1 - b.side[v];
          q.push_back(u);
        } else if (b.side[u] == b.side[v]) {
          b.ok = false;
        }
      }
    }
  }
  return b;
}

}  // namespace homtest
