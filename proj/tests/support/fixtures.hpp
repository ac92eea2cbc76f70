#pragma once

// Test fixtures: small graphs built from literals and random DAGs kept as
// plain edge lists so oracles never touch the library's adjacency.

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "disrupt/graph.hpp"

namespace fixtures {

using disrupt::CitationGraph;
using disrupt::Year;

/// Node i has id "n%04d" of i, so library indices equal fixture indices.
struct RawGraph {
  std::vector<Year> years;
  std::vector<std::pair<int, int>> edges;  // (citing, cited), no duplicates

  std::size_t size() const { return years.size(); }
  bool has_edge(int a, int b) const {
    return std::find(edges.begin(), edges.end(), std::pair{a, b}) != edges.end();
  }
};

inline std::string node_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "n%04d", i);
  return buf;
}

inline CitationGraph to_graph(const RawGraph& g) {
  std::vector<disrupt::WorkNode> nodes(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    nodes[i].id = node_id(static_cast<int>(i));
    nodes[i].year = g.years[i];
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (auto [a, b] : g.edges) edges.emplace_back(node_id(a), node_id(b));
  return CitationGraph::from_records(std::move(nodes), edges);
}

/// Random citation DAG: years uniform on [y0, y0 + span), each ordered pair
/// (later-or-same year, earlier) with distinct ends kept with probability p.
inline RawGraph random_dag(std::mt19937_64& rng, int n, int span, double p, Year y0 = 2000) {
  RawGraph g;
  std::uniform_int_distribution<int> year(0, span - 1);
  for (int i = 0; i < n; ++i) g.years.push_back(y0 + year(rng));
  std::bernoulli_distribution keep(p);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && g.years[a] >= g.years[b] && keep(rng)) g.edges.emplace_back(a, b);
  return g;
}

/// Layered fixture: `layers` consecutive years of `width` works each; every
/// work cites each earlier-layer work with probability p.
inline RawGraph layered_dag(std::mt19937_64& rng, int layers, int width, double p, Year y0 = 2000) {
  RawGraph g;
  for (int l = 0; l < layers; ++l)
    for (int w = 0; w < width; ++w) g.years.push_back(y0 + l);
  std::bernoulli_distribution keep(p);
  const int n = layers * width;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (g.years[a] > g.years[b] && keep(rng)) g.edges.emplace_back(a, b);
  return g;
}

inline std::string nodes_csv(const RawGraph& g) {
  std::ostringstream os;
  os << "id,year\n";
  for (std::size_t i = 0; i < g.size(); ++i) os << node_id(static_cast<int>(i)) << ',' << g.years[i] << '\n';
  return os.str();
}

inline std::string edges_csv(const RawGraph& g) {
  std::ostringstream os;
  os << "citing_id,cited_id\n";
  for (auto [a, b] : g.edges) os << node_id(a) << ',' << node_id(b) << '\n';
  return os.str();
}

/// Graph from (id, year) literals and (citing, cited) literals.
inline CitationGraph make_graph(const std::vector<std::pair<std::string, Year>>& nodes,
                                const std::vector<std::pair<std::string, std::string>>& edges,
                                const disrupt::LoadPolicy& policy = disrupt::LoadPolicy::strict()) {
  std::vector<disrupt::WorkNode> ns;
  for (const auto& [id, y] : nodes) {
    disrupt::WorkNode n;
    n.id = id;
    n.year = y;
    ns.push_back(std::move(n));
  }
  return CitationGraph::from_records(std::move(ns), edges, policy);
}

}  // namespace fixtures
