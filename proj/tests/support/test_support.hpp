// Copyright 2026 The geolayout Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only helpers. The checks here are written independently of the
// library's flow code: the max-flow is a plain Edmonds-Karp over a graph
// built straight from the cluster description, and the negative-cycle check
// is textbook Bellman-Ford.

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "geolayout/cluster.hpp"
#include "geolayout/flow_graph.hpp"

namespace geolayout::testing {

// Edmonds-Karp: shortest augmenting paths by BFS over an edge list with
// paired reverse edges.
class ReferenceMaxFlow {
 public:
  explicit ReferenceMaxFlow(std::size_t vertices) : adjacency_(vertices) {}

  void add(std::size_t from, std::size_t to, std::int64_t capacity) {
    adjacency_[from].push_back(edges_.size());
    edges_.push_back({to, capacity});
    adjacency_[to].push_back(edges_.size());
    edges_.push_back({from, 0});
  }

  std::int64_t run(std::size_t s, std::size_t t) {
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::int64_t total = 0;
    std::vector<std::size_t> via(adjacency_.size());
    while (true) {
      std::fill(via.begin(), via.end(), none);
      std::vector<bool> seen(adjacency_.size(), false);
      seen[s] = true;
      std::queue<std::size_t> q;
      q.push(s);
      while (!q.empty() && !seen[t]) {
        std::size_t v = q.front();
        q.pop();
        for (std::size_t e : adjacency_[v]) {
          const std::size_t w = edges_[e].to;
          if (!seen[w] && edges_[e].residual > 0) {
            seen[w] = true;
            via[w] = e;
            q.push(w);
          }
        }
      }
      if (!seen[t]) return total;
      std::int64_t push = std::numeric_limits<std::int64_t>::max();
      for (std::size_t v = t; v != s; v = edges_[via[v] ^ 1].to) {
        push = std::min(push, edges_[via[v]].residual);
      }
      for (std::size_t v = t; v != s; v = edges_[via[v] ^ 1].to) {
        edges_[via[v]].residual -= push;
        edges_[via[v] ^ 1].residual += push;
      }
      total += push;
    }
  }

 private:
  struct Edge {
    std::size_t to;
    std::int64_t residual;
  };
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Max flow value of the placement graph for partition size `size`, built
// here from scratch rather than through build_graph.
inline std::int64_t reference_placement_flow(const ClusterSpec& spec, std::int64_t size) {
  std::map<std::string, std::size_t> zone_ids;
  for (const auto& n : spec.nodes) zone_ids.emplace(n.zone, zone_ids.size());
  const std::size_t P = spec.partition_count();
  const std::size_t Z = zone_ids.size();
  const std::size_t N = spec.nodes.size();
  const std::size_t s = 0, t = 1;
  auto plus = [&](std::size_t p) { return 2 + p; };
  auto minus = [&](std::size_t p) { return 2 + P + p; };
  auto x = [&](std::size_t p, std::size_t z) { return 2 + 2 * P + p * Z + z; };
  auto node = [&](std::size_t n) { return 2 + 2 * P + P * Z + n; };
  ReferenceMaxFlow flow(2 + 2 * P + P * Z + N);
  const std::int64_t extra = spec.replication - spec.scattering;
  for (std::size_t p = 0; p < P; ++p) {
    flow.add(s, plus(p), spec.scattering);
    flow.add(s, minus(p), extra);
    for (std::size_t z = 0; z < Z; ++z) {
      flow.add(plus(p), x(p, z), 1);
      flow.add(minus(p), x(p, z), extra);
    }
    for (std::size_t n = 0; n < N; ++n) flow.add(x(p, zone_ids[spec.nodes[n].zone]), node(n), 1);
  }
  for (std::size_t n = 0; n < N; ++n) flow.add(node(n), t, spec.nodes[n].capacity / size);
  return flow.run(s, t);
}

inline bool reference_feasible(const ClusterSpec& spec, std::int64_t size) {
  return reference_placement_flow(spec, size) ==
         static_cast<std::int64_t>(spec.replication * spec.partition_count());
}

// Textbook Bellman-Ford over all vertices (virtual source at distance 0 to
// every vertex): #V - 1 rounds, then any still-relaxable arc proves a
// negative cycle.
inline bool has_negative_cycle(const CostGraph& graph) {
  std::vector<long> dist(graph.vertices.size(), 0);
  for (std::size_t round = 0; round + 1 < std::max<std::size_t>(graph.vertices.size(), 1); ++round) {
    bool changed = false;
    for (const auto& a : graph.arcs) {
      if (dist[a.from] + a.weight < dist[a.to]) {
        dist[a.to] = dist[a.from] + a.weight;
        changed = true;
      }
    }
    if (!changed) return false;
  }
  return std::any_of(graph.arcs.begin(), graph.arcs.end(),
                     [&](const CostArc& a) { return dist[a.from] + a.weight < dist[a.to]; });
}

// Replication, scattering and capacity constraints, checked directly.
inline bool satisfies_constraints(const ClusterSpec& spec, const Assignment& a, std::int64_t size) {
  if (a.replicas.size() != spec.partition_count()) return false;
  std::map<std::string, const StorageNode*> nodes;
  for (const auto& n : spec.nodes) nodes[n.id] = &n;
  std::map<std::string, std::int64_t> load;
  for (const auto& replicas : a.replicas) {
    std::set<std::string> distinct(replicas.begin(), replicas.end());
    if (distinct.size() != spec.replication || replicas.size() != spec.replication) return false;
    std::set<std::string> zones;
    for (const auto& id : distinct) {
      if (!nodes.count(id)) return false;
      zones.insert(nodes[id]->zone);
      ++load[id];
    }
    if (zones.size() < spec.scattering) return false;
  }
  for (const auto& [id, count] : load) {
    if (count > nodes[id]->capacity / size) return false;
  }
  return true;
}

struct InstanceShape {
  unsigned min_nodes = 3, max_nodes = 5;
  unsigned min_zones = 1, max_zones = 3;
  std::vector<unsigned> partition_bits{1, 2, 3};
  unsigned max_replication = 3;
  std::int64_t min_capacity = 0, max_capacity = 200;
};

inline ClusterSpec random_spec(std::mt19937_64& rng, const InstanceShape& shape) {
  auto pick = [&](auto lo, auto hi) {
    return std::uniform_int_distribution<decltype(hi)>(lo, hi)(rng);
  };
  ClusterSpec spec;
  const unsigned n = pick(shape.min_nodes, shape.max_nodes);
  const unsigned z = pick(shape.min_zones, shape.max_zones);
  for (unsigned i = 0; i < n; ++i) {
    spec.nodes.push_back({"n" + std::to_string(i + 1), "z" + std::to_string(pick(1u, z)),
                          pick(shape.min_capacity, shape.max_capacity)});
  }
  spec.replication = pick(1u, shape.max_replication);
  spec.scattering = pick(1u, spec.replication);
  spec.partition_bits = shape.partition_bits[pick(std::size_t{0}, shape.partition_bits.size() - 1)];
  return spec;
}

// Arbitrary (not necessarily valid) assignment over the spec's node ids.
inline Assignment random_assignment(std::mt19937_64& rng, const ClusterSpec& spec) {
  Assignment a;
  a.partition_size = 1;
  std::vector<std::string> ids;
  for (const auto& n : spec.nodes) ids.push_back(n.id);
  for (std::size_t p = 0; p < spec.partition_count(); ++p) {
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t k = std::min<std::size_t>(spec.replication, ids.size());
    std::vector<std::string> r(ids.begin(), ids.begin() + static_cast<long>(k));
    std::sort(r.begin(), r.end());
    a.replicas.push_back(std::move(r));
  }
  return a;
}

// Unique scratch path under the system temp directory, removed on exit.
class TempPath {
 public:
  explicit TempPath(const std::string& stem) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("geolayout_" + stem + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++) + ".json");
  }
  ~TempPath() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempPath(const TempPath&) = delete;
  TempPath& operator=(const TempPath&) = delete;

  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace geolayout::testing
