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

// Integer flow networks: Dinic max-flow with optional warm start, weighted
// residual graphs against a reference flow, and bounded Bellman-Ford
// negative-cycle detection used for cycle canceling.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geolayout/error.hpp"

namespace geolayout {

using VertexIndex = std::size_t;
using ArcIndex = std::size_t;

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

enum class VertexKind : std::uint8_t {
  kSource,
  kSink,
  kPartitionPlus,
  kPartitionMinus,
  kPartitionZone,
  kNode,
};

// Role of a vertex in the placement graph. `partition` holds the partition
// index for partition vertices; `node` the node index for kNode; `zone` the
// zone index for kPartitionZone.
struct VertexId {
  VertexKind kind = VertexKind::kSource;
  std::uint32_t partition = 0;
  std::uint32_t zone = 0;
  std::uint32_t node = 0;

  static constexpr VertexId source() { return {VertexKind::kSource}; }
  static constexpr VertexId sink() { return {VertexKind::kSink}; }
  static constexpr VertexId partition_plus(std::uint32_t p) {
    return {VertexKind::kPartitionPlus, p};
  }
  static constexpr VertexId partition_minus(std::uint32_t p) {
    return {VertexKind::kPartitionMinus, p};
  }
  static constexpr VertexId partition_zone(std::uint32_t p, std::uint32_t z) {
    return {VertexKind::kPartitionZone, p, z};
  }
  static constexpr VertexId storage_node(std::uint32_t n) {
    return {VertexKind::kNode, 0, 0, n};
  }

  friend constexpr bool operator==(const VertexId&, const VertexId&) = default;
};

// Directed network with integer capacities and a current flow. Vertices keep
// their insertion index for the lifetime of the network; arcs with zero
// capacity are never stored.
template <std::signed_integral Cap>
class BasicFlowNetwork {
 public:
  using capacity_type = Cap;

  struct Arc {
    VertexIndex from = 0;
    VertexIndex to = 0;
    Cap capacity = 0;
    Cap flow = 0;

    Cap residual() const { return capacity - flow; }
    bool saturated() const { return flow == capacity; }
  };

  VertexIndex add_vertex(VertexId id) {
    const VertexIndex index = vertices_.size();
    if (id.kind == VertexKind::kSource) {
      if (source_ != kNoIndex) throw LayoutError("flow network already has a source");
      source_ = index;
    } else if (id.kind == VertexKind::kSink) {
      if (sink_ != kNoIndex) throw LayoutError("flow network already has a sink");
      sink_ = index;
    }
    vertices_.push_back(id);
    out_.emplace_back();
    in_.emplace_back();
    return index;
  }

  // Returns the new arc index, or nullopt when `capacity` is zero.
  std::optional<ArcIndex> add_arc(VertexIndex from, VertexIndex to, Cap capacity) {
    if (from >= vertices_.size() || to >= vertices_.size()) {
      throw LayoutError("arc endpoint out of range");
    }
    if (capacity < 0) throw LayoutError("negative arc capacity");
    if (capacity == 0) return std::nullopt;
    if (find_arc(from, to)) throw LayoutError("duplicate arc between the same ordered vertex pair");
    const ArcIndex index = arcs_.size();
    arcs_.push_back(Arc{from, to, capacity, 0});
    out_[from].push_back(index);
    in_[to].push_back(index);
    return index;
  }

  std::optional<ArcIndex> find_arc(VertexIndex from, VertexIndex to) const {
    for (ArcIndex a : out_[from]) {
      if (arcs_[a].to == to) return a;
    }
    return std::nullopt;
  }

  void set_flow(ArcIndex arc, Cap flow) {
    Arc& a = arcs_.at(arc);
    if (flow < 0 || flow > a.capacity) throw LayoutError("flow outside [0, capacity]");
    a.flow = flow;
  }

  void clear_flow() {
    for (Arc& a : arcs_) a.flow = 0;
  }

  // Copy of this network keeping only the arcs accepted by `keep`; vertex
  // indices are preserved, flows are copied.
  template <class Pred>
  BasicFlowNetwork filtered(Pred&& keep) const {
    BasicFlowNetwork result;
    for (const VertexId& v : vertices_) result.add_vertex(v);
    for (ArcIndex i = 0; i < arcs_.size(); ++i) {
      const Arc& a = arcs_[i];
      if (!keep(i, a)) continue;
      ArcIndex j = *result.add_arc(a.from, a.to, a.capacity);
      result.arcs_[j].flow = a.flow;
    }
    return result;
  }

  std::span<const VertexId> vertices() const { return vertices_; }
  std::span<const Arc> arcs() const { return arcs_; }
  const Arc& arc(ArcIndex i) const { return arcs_.at(i); }
  const VertexId& vertex(VertexIndex v) const { return vertices_.at(v); }
  std::span<const ArcIndex> out_arcs(VertexIndex v) const { return out_.at(v); }
  std::span<const ArcIndex> in_arcs(VertexIndex v) const { return in_.at(v); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  VertexIndex source() const { return source_; }
  VertexIndex sink() const { return sink_; }

  // Total outflow of the source.
  Cap flow_value() const {
    if (source_ == kNoIndex) return 0;
    Cap total = 0;
    for (ArcIndex a : out_[source_]) total += arcs_[a].flow;
    for (ArcIndex a : in_[source_]) total -= arcs_[a].flow;
    return total;
  }

  bool respects_capacities() const {
    return std::all_of(arcs_.begin(), arcs_.end(),
                       [](const Arc& a) { return a.flow >= 0 && a.flow <= a.capacity; });
  }

  bool conserves_flow() const {
    for (VertexIndex v = 0; v < vertices_.size(); ++v) {
      if (v == source_ || v == sink_) continue;
      Cap balance = 0;
      for (ArcIndex a : in_[v]) balance += arcs_[a].flow;
      for (ArcIndex a : out_[v]) balance -= arcs_[a].flow;
      if (balance != 0) return false;
    }
    return true;
  }

  bool same_topology(const BasicFlowNetwork& other) const {
    if (vertices_ != other.vertices_ || arcs_.size() != other.arcs_.size()) return false;
    for (ArcIndex i = 0; i < arcs_.size(); ++i) {
      const Arc& a = arcs_[i];
      const Arc& b = other.arcs_[i];
      if (a.from != b.from || a.to != b.to || a.capacity != b.capacity) return false;
    }
    return true;
  }

  friend bool operator==(const BasicFlowNetwork& lhs, const BasicFlowNetwork& rhs) {
    if (!lhs.same_topology(rhs)) return false;
    for (ArcIndex i = 0; i < lhs.arcs_.size(); ++i) {
      if (lhs.arcs_[i].flow != rhs.arcs_[i].flow) return false;
    }
    return true;
  }

 private:
  std::vector<VertexId> vertices_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcIndex>> out_;
  std::vector<std::vector<ArcIndex>> in_;
  VertexIndex source_ = kNoIndex;
  VertexIndex sink_ = kNoIndex;
};

using FlowNetwork = BasicFlowNetwork<std::int64_t>;

namespace detail {

// One direction of an arc in the residual graph.
struct HalfArc {
  ArcIndex arc;
  bool forward;
};

// Fisher-Yates driven directly by the 64-bit engine so that the permutation
// only depends on the seed, not on the standard library's distributions.
template <class T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

template <std::signed_integral Cap>
class Dinic {
 public:
  Dinic(BasicFlowNetwork<Cap>& network, std::uint64_t seed)
      : net_(network),
        flow_(network.arc_count()),
        adjacency_(network.vertex_count()),
        level_(network.vertex_count()),
        cursor_(network.vertex_count()),
        rng_(seed) {
    for (ArcIndex i = 0; i < net_.arc_count(); ++i) {
      const auto& a = net_.arc(i);
      flow_[i] = a.flow;
      adjacency_[a.from].push_back({i, true});
      adjacency_[a.to].push_back({i, false});
    }
  }

  void run() {
    const VertexIndex s = net_.source();
    const VertexIndex t = net_.sink();
    if (s == kNoIndex || t == kNoIndex || s == t) return;
    while (true) {
      for (auto& list : adjacency_) seeded_shuffle(list, rng_);
      if (!build_levels(s, t)) break;
      std::fill(cursor_.begin(), cursor_.end(), 0);
      while (push(s, t, std::numeric_limits<Cap>::max()) > 0) {
      }
    }
    for (ArcIndex i = 0; i < flow_.size(); ++i) net_.set_flow(i, flow_[i]);
  }

 private:
  Cap residual(const HalfArc& h) const {
    return h.forward ? net_.arc(h.arc).capacity - flow_[h.arc] : flow_[h.arc];
  }

  VertexIndex head(const HalfArc& h) const {
    const auto& a = net_.arc(h.arc);
    return h.forward ? a.to : a.from;
  }

  bool build_levels(VertexIndex s, VertexIndex t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<VertexIndex> queue{s};
    level_[s] = 0;
    for (std::size_t head_pos = 0; head_pos < queue.size(); ++head_pos) {
      VertexIndex v = queue[head_pos];
      for (const HalfArc& h : adjacency_[v]) {
        VertexIndex w = head(h);
        if (level_[w] < 0 && residual(h) > 0) {
          level_[w] = level_[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return level_[t] >= 0;
  }

  Cap push(VertexIndex v, VertexIndex t, Cap limit) {
    if (v == t) return limit;
    for (std::size_t& i = cursor_[v]; i < adjacency_[v].size(); ++i) {
      const HalfArc& h = adjacency_[v][i];
      VertexIndex w = head(h);
      Cap r = residual(h);
      if (r <= 0 || level_[w] != level_[v] + 1) continue;
      Cap pushed = push(w, t, std::min(limit, r));
      if (pushed > 0) {
        flow_[h.arc] += h.forward ? pushed : -pushed;
        return pushed;
      }
    }
    return 0;
  }

  BasicFlowNetwork<Cap>& net_;
  std::vector<Cap> flow_;
  std::vector<std::vector<HalfArc>> adjacency_;
  std::vector<long> level_;
  std::vector<std::size_t> cursor_;
  std::mt19937_64 rng_;
};

}  // namespace detail

// Maximum flow by Dinic's algorithm, starting from the network's current
// flow. Adjacency lists are reshuffled at every phase with a generator seeded
// by `seed`, so the result is a pure function of (network, seed).
template <std::signed_integral Cap>
BasicFlowNetwork<Cap> max_flow(BasicFlowNetwork<Cap> network, std::uint64_t seed) {
  detail::Dinic<Cap>(network, seed).run();
  return network;
}

template <std::signed_integral Cap>
Cap flow_value(const BasicFlowNetwork<Cap>& network) {
  return network.flow_value();
}

// ---------------------------------------------------------------------------
// Residual graph weighted against a reference flow.

struct CostArc {
  VertexIndex from = 0;
  VertexIndex to = 0;
  int weight = 0;
  ArcIndex arc = 0;      // underlying network arc
  bool forward = true;   // false for the reversed direction of `arc`

  friend bool operator==(const CostArc&, const CostArc&) = default;
};

struct CostGraph {
  std::vector<VertexId> vertices;
  std::vector<CostArc> arcs;
};

struct Cycle {
  std::vector<CostArc> arcs;
  long weight = 0;
};

inline bool is_placement_arc(const VertexId& from, const VertexId& to) {
  return (from.kind == VertexKind::kPartitionZone && to.kind == VertexKind::kNode) ||
         (from.kind == VertexKind::kNode && to.kind == VertexKind::kPartitionZone);
}

// Residual arcs of `network` (forward where capacity - flow >= 1, reversed
// where flow >= 1). Placement arcs weigh -1 when their underlying arc is
// saturated in exactly one of `network` and `reference`, +1 otherwise; every
// other arc weighs 0.
template <std::signed_integral Cap>
CostGraph residual_cost_graph(const BasicFlowNetwork<Cap>& network,
                              const BasicFlowNetwork<Cap>& reference) {
  if (!network.same_topology(reference)) {
    throw IncompatibleError("residual graph requested for flows on different networks");
  }
  CostGraph graph;
  graph.vertices.assign(network.vertices().begin(), network.vertices().end());
  for (ArcIndex i = 0; i < network.arc_count(); ++i) {
    const auto& a = network.arc(i);
    int weight = 0;
    if (is_placement_arc(network.vertex(a.from), network.vertex(a.to))) {
      weight = a.saturated() != reference.arc(i).saturated() ? -1 : 1;
    }
    if (a.residual() >= 1) graph.arcs.push_back({a.from, a.to, weight, i, true});
    if (a.flow >= 1) graph.arcs.push_back({a.to, a.from, weight, i, false});
  }
  return graph;
}

// Bellman-Ford from a virtual super-source joined to every vertex with
// weight-0 arcs, relaxing in place one round at a time.
class BellmanFord {
 public:
  explicit BellmanFord(const CostGraph& graph)
      : graph_(graph),
        distance_(graph.vertices.size(), 0),
        predecessor_(graph.vertices.size(), kNoIndex) {}

  // Relaxes every arc once; returns the vertices whose label decreased.
  const std::vector<VertexIndex>& round() {
    ++rounds_;
    improved_.clear();
    std::vector<bool> seen(distance_.size(), false);
    for (std::size_t i = 0; i < graph_.arcs.size(); ++i) {
      const CostArc& a = graph_.arcs[i];
      long candidate = distance_[a.from] + a.weight;
      if (candidate < distance_[a.to]) {
        distance_[a.to] = candidate;
        predecessor_[a.to] = i;
        if (!seen[a.to]) {
          seen[a.to] = true;
          improved_.push_back(a.to);
        }
      }
    }
    return improved_;
  }

  void run(std::size_t rounds) {
    for (std::size_t i = 0; i < rounds; ++i) round();
  }

  const std::vector<VertexIndex>& last_improved() const { return improved_; }
  std::size_t rounds() const { return rounds_; }
  std::span<const long> distances() const { return distance_; }
  std::span<const std::size_t> predecessors() const { return predecessor_; }

  // Follows predecessor links from each vertex in `starts`, collecting the
  // negative cycles met on the way. Cycles never share a vertex with each
  // other nor with anything marked in `used`.
  std::vector<Cycle> extract_cycles(std::span<const VertexIndex> starts,
                                    std::vector<bool>& used) const {
    std::vector<Cycle> cycles;
    std::vector<std::size_t> stamp(distance_.size(), 0);
    std::size_t walk = 0;
    for (VertexIndex start : starts) {
      ++walk;
      VertexIndex v = start;
      while (predecessor_[v] != kNoIndex && !used[v] && stamp[v] != walk) {
        stamp[v] = walk;
        v = graph_.arcs[predecessor_[v]].from;
      }
      if (predecessor_[v] == kNoIndex || used[v] || stamp[v] != walk) continue;

      Cycle cycle;
      VertexIndex u = v;
      do {
        const CostArc& a = graph_.arcs[predecessor_[u]];
        cycle.arcs.push_back(a);
        cycle.weight += a.weight;
        u = a.from;
      } while (u != v);
      if (cycle.weight >= 0) continue;
      std::reverse(cycle.arcs.begin(), cycle.arcs.end());
      for (const CostArc& a : cycle.arcs) used[a.from] = true;
      cycles.push_back(std::move(cycle));
    }
    return cycles;
  }

 private:
  const CostGraph& graph_;
  std::vector<long> distance_;
  std::vector<std::size_t> predecessor_;
  std::vector<VertexIndex> improved_;
  std::size_t rounds_ = 0;
};

// Runs `iteration_bound` relaxation rounds and extracts vertex-disjoint
// negative cycles by tracing predecessors of the vertices improved in the
// last round. If the last round improved something but no predecessor cycle
// has formed yet, rounds continue (up to twice the vertex count) until one
// does or the labels settle.
inline std::vector<Cycle> detect_negative_cycles(const CostGraph& graph,
                                                 std::size_t iteration_bound) {
  if (iteration_bound == 0) throw LayoutError("iteration bound must be positive");
  BellmanFord bf(graph);
  bf.run(iteration_bound);
  std::vector<bool> used(graph.vertices.size(), false);
  const std::size_t hard_limit = std::max(iteration_bound, 2 * graph.vertices.size() + 2);
  while (!bf.last_improved().empty()) {
    std::vector<Cycle> cycles = bf.extract_cycles(bf.last_improved(), used);
    if (!cycles.empty() || bf.rounds() >= hard_limit) return cycles;
    bf.round();
  }
  return {};
}

// Vertices flagged by `iteration_bound` rounds: everything reachable from a
// vertex whose label still decreased in the last round. When the bound
// exceeds the longest simple path, this is exactly the set of vertices
// downstream of a negative cycle.
inline std::vector<VertexIndex> negative_cycle_vertices(const CostGraph& graph,
                                                        std::size_t iteration_bound) {
  BellmanFord bf(graph);
  bf.run(iteration_bound);
  std::vector<std::vector<VertexIndex>> out(graph.vertices.size());
  for (const CostArc& a : graph.arcs) out[a.from].push_back(a.to);
  std::vector<bool> flagged(graph.vertices.size(), false);
  std::vector<VertexIndex> stack(bf.last_improved().begin(), bf.last_improved().end());
  for (VertexIndex v : stack) flagged[v] = true;
  while (!stack.empty()) {
    VertexIndex v = stack.back();
    stack.pop_back();
    for (VertexIndex w : out[v]) {
      if (!flagged[w]) {
        flagged[w] = true;
        stack.push_back(w);
      }
    }
  }
  std::vector<VertexIndex> result;
  for (VertexIndex v = 0; v < flagged.size(); ++v) {
    if (flagged[v]) result.push_back(v);
  }
  return result;
}

// Pushes one unit of flow around `cycle`. The flow value is unchanged.
template <std::signed_integral Cap>
BasicFlowNetwork<Cap> apply_cycle(BasicFlowNetwork<Cap> network, const Cycle& cycle) {
  const auto& arcs = cycle.arcs;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (arcs[i].to != arcs[(i + 1) % arcs.size()].from) {
      throw StaleCycleError("cycle arcs do not form a closed walk");
    }
  }
  for (const CostArc& c : arcs) {
    if (c.arc >= network.arc_count()) throw StaleCycleError("cycle references an unknown arc");
    const auto& a = network.arc(c.arc);
    const bool matches = c.forward ? (a.from == c.from && a.to == c.to)
                                   : (a.from == c.to && a.to == c.from);
    if (!matches) throw StaleCycleError("cycle arc does not match the network");
    const Cap next = c.forward ? a.flow + 1 : a.flow - 1;
    if (next < 0 || next > a.capacity) {
      throw StaleCycleError("cycle arc has no residual capacity left");
    }
    network.set_flow(c.arc, next);
  }
  return network;
}

}  // namespace geolayout
