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

// Optimal partition placement. The layout is computed in three steps:
//
//   1. the largest partition size s* for which the placement graph G(s*)
//      admits a flow of value replication * partitions (dichotomy on s);
//   2. a maximal flow on G(s*), warm-started from the flow restricted to the
//      previous assignment's associations when one exists;
//   3. negative-cycle canceling on the residual graph weighted against the
//      previous assignment, which minimizes the number of moved replicas
//      among all size-optimal assignments.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geolayout/cluster.hpp"
#include "geolayout/error.hpp"
#include "geolayout/flow_graph.hpp"

namespace geolayout {

// Validated cluster plus the vertex numbering of its placement graph:
// source, sink, p+ for each partition, p- for each partition, x(p, z) for
// each partition and zone, then one vertex per node.
class PlacementModel {
 public:
  explicit PlacementModel(ClusterSpec spec) : spec_(std::move(spec)) {
    validate_spec(spec_);
    for (const auto& n : spec_.nodes) zone_names_.push_back(n.zone);
    std::sort(zone_names_.begin(), zone_names_.end());
    zone_names_.erase(std::unique(zone_names_.begin(), zone_names_.end()), zone_names_.end());
    for (std::size_t i = 0; i < spec_.nodes.size(); ++i) {
      const auto& n = spec_.nodes[i];
      node_index_.emplace(n.id, i);
      auto z = std::lower_bound(zone_names_.begin(), zone_names_.end(), n.zone);
      node_zone_.push_back(static_cast<std::size_t>(z - zone_names_.begin()));
    }
  }

  const ClusterSpec& spec() const { return spec_; }
  std::size_t partitions() const { return spec_.partition_count(); }
  std::size_t zones() const { return zone_names_.size(); }
  std::size_t nodes() const { return spec_.nodes.size(); }
  const std::vector<std::string>& zone_names() const { return zone_names_; }
  std::size_t zone_of(std::size_t node) const { return node_zone_.at(node); }

  std::optional<std::size_t> node_index(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    if (it == node_index_.end()) return std::nullopt;
    return it->second;
  }

  // Flow value certifying that every partition got all its replicas.
  Capacity required_flow() const {
    return static_cast<Capacity>(spec_.replication) * static_cast<Capacity>(partitions());
  }

  std::size_t vertex_count() const { return 2 + 2 * partitions() + partitions() * zones() + nodes(); }
  VertexIndex source() const { return 0; }
  VertexIndex sink() const { return 1; }
  VertexIndex partition_plus(std::size_t p) const { return 2 + p; }
  VertexIndex partition_minus(std::size_t p) const { return 2 + partitions() + p; }
  VertexIndex partition_zone(std::size_t p, std::size_t z) const {
    return 2 + 2 * partitions() + p * zones() + z;
  }
  VertexIndex node_vertex(std::size_t n) const {
    return 2 + 2 * partitions() + partitions() * zones() + n;
  }

 private:
  ClusterSpec spec_;
  std::vector<std::string> zone_names_;
  std::vector<std::size_t> node_zone_;
  std::unordered_map<std::string, std::size_t> node_index_;
};

// G(s): arcs (source, p+, scattering), (source, p-, replication - scattering),
// (p+, x(p,z), 1), (p-, x(p,z), replication - scattering), (x(p,z), n, 1) for
// n in z, and (n, sink, floor(c_n / s)). Zero-capacity arcs are omitted.
inline FlowNetwork build_graph(const PlacementModel& model, Capacity partition_size) {
  if (partition_size < 1) throw LayoutError("partition size must be positive");
  const auto& spec = model.spec();
  const std::size_t P = model.partitions();
  const std::size_t Z = model.zones();
  const Capacity spread = static_cast<Capacity>(spec.scattering);
  const Capacity extra = static_cast<Capacity>(spec.replication - spec.scattering);

  FlowNetwork g;
  g.add_vertex(VertexId::source());
  g.add_vertex(VertexId::sink());
  for (std::size_t p = 0; p < P; ++p) g.add_vertex(VertexId::partition_plus(static_cast<std::uint32_t>(p)));
  for (std::size_t p = 0; p < P; ++p) g.add_vertex(VertexId::partition_minus(static_cast<std::uint32_t>(p)));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t z = 0; z < Z; ++z) {
      g.add_vertex(VertexId::partition_zone(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(z)));
    }
  }
  for (std::size_t n = 0; n < model.nodes(); ++n) g.add_vertex(VertexId::storage_node(static_cast<std::uint32_t>(n)));

  for (std::size_t p = 0; p < P; ++p) {
    g.add_arc(model.source(), model.partition_plus(p), spread);
    g.add_arc(model.source(), model.partition_minus(p), extra);
  }
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t z = 0; z < Z; ++z) {
      g.add_arc(model.partition_plus(p), model.partition_zone(p, z), 1);
      g.add_arc(model.partition_minus(p), model.partition_zone(p, z), extra);
    }
  }
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t n = 0; n < model.nodes(); ++n) {
      g.add_arc(model.partition_zone(p, model.zone_of(n)), model.node_vertex(n), 1);
    }
  }
  for (std::size_t n = 0; n < model.nodes(); ++n) {
    g.add_arc(model.node_vertex(n), model.sink(), spec.nodes[n].capacity / partition_size);
  }
  return g;
}

inline bool size_is_feasible(const PlacementModel& model, Capacity partition_size,
                             std::uint64_t seed) {
  return max_flow(build_graph(model, partition_size), seed).flow_value() == model.required_flow();
}

// Largest s such that G(s) carries replication * partitions units of flow,
// by dichotomy between s = 1 (feasible) and 1 + C / replication (infeasible).
inline Capacity compute_partition_size(const PlacementModel& model, std::uint64_t seed) {
  require_plausibly_feasible(model.spec());
  if (!size_is_feasible(model, 1, seed)) {
    throw InfeasibleError("no assignment exists even with partition size 1");
  }
  Capacity lo = 1;
  Capacity hi = 1 + model.spec().total_capacity() / model.spec().replication;
  while (lo + 1 < hi) {
    const Capacity mid = lo + (hi - lo) / 2;
    if (size_is_feasible(model, mid, seed)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

inline void require_matching_partitions(const PlacementModel& model, const Assignment& previous) {
  if (previous.partition_count() != model.partitions()) {
    throw IncompatibleError("previous assignment has " +
                            std::to_string(previous.partition_count()) +
                            " partitions but the cluster has " +
                            std::to_string(model.partitions()));
  }
}

// (partition, node) pairs of `previous`, ignoring node ids unknown to the model.
inline std::vector<bool> previous_associations(const PlacementModel& model,
                                               const Assignment& previous) {
  require_matching_partitions(model, previous);
  std::vector<bool> allowed(model.partitions() * model.nodes(), false);
  for (std::size_t p = 0; p < model.partitions(); ++p) {
    for (const auto& id : previous.replicas[p]) {
      if (auto n = model.node_index(id)) allowed[p * model.nodes() + *n] = true;
    }
  }
  return allowed;
}

// G restricted to the previous associations: every (x(p,z), n) arc with n not
// holding p in `previous` is dropped.
inline FlowNetwork restrict_graph(const PlacementModel& model, const FlowNetwork& graph,
                                  const Assignment& previous) {
  const std::vector<bool> allowed = previous_associations(model, previous);
  return graph.filtered([&](ArcIndex, const FlowNetwork::Arc& a) {
    const VertexId& from = graph.vertex(a.from);
    const VertexId& to = graph.vertex(a.to);
    if (from.kind != VertexKind::kPartitionZone || to.kind != VertexKind::kNode) return true;
    return static_cast<bool>(allowed[from.partition * model.nodes() + to.node]);
  });
}

// Saturation pattern of `previous` on the placement arcs of `graph`; all other
// arcs carry zero. Only placement arcs matter when weighting residual graphs,
// so this need not be a valid flow.
inline FlowNetwork reference_flow(const PlacementModel& model, const FlowNetwork& graph,
                                  const Assignment& previous) {
  const std::vector<bool> allowed = previous_associations(model, previous);
  FlowNetwork reference = graph;
  reference.clear_flow();
  for (std::size_t p = 0; p < model.partitions(); ++p) {
    for (std::size_t n = 0; n < model.nodes(); ++n) {
      if (!allowed[p * model.nodes() + n]) continue;
      if (auto arc = reference.find_arc(model.partition_zone(p, model.zone_of(n)),
                                        model.node_vertex(n))) {
        reference.set_flow(*arc, 1);
      }
    }
  }
  return reference;
}

struct CandidateFlow {
  FlowNetwork network;
  // Value of the maximal flow restricted to previous associations.
  std::optional<Capacity> restricted_flow_value;
};

inline CandidateFlow compute_candidate_assignment(const PlacementModel& model,
                                                  const FlowNetwork& graph,
                                                  const Assignment* previous,
                                                  std::uint64_t seed) {
  CandidateFlow result;
  if (previous == nullptr) {
    result.network = max_flow(graph, seed);
  } else {
    const FlowNetwork restricted = max_flow(restrict_graph(model, graph, *previous), seed);
    result.restricted_flow_value = restricted.flow_value();
    FlowNetwork warm = graph;
    warm.clear_flow();
    for (const auto& a : restricted.arcs()) {
      if (a.flow != 0) warm.set_flow(*warm.find_arc(a.from, a.to), a.flow);
    }
    result.network = max_flow(std::move(warm), seed);
  }
  if (result.network.flow_value() != model.required_flow()) {
    throw LayoutError("internal error: certified partition size does not admit a full flow");
  }
  return result;
}

struct TransferMinimization {
  FlowNetwork network;
  std::size_t rounds = 0;
  std::size_t cycles_applied = 0;
  // False when the time budget ran out before the residual graph was free of
  // negative cycles; the flow is then size-optimal but maybe not
  // distance-minimal.
  bool converged = false;
};

// Cancels negative cycles of the residual graph weighted against `previous`
// until none is left. Each round applies a set of vertex-disjoint cycles
// found with a Bellman-Ford bounded to 4N + 1 rounds.
inline TransferMinimization minimize_transfer_load(
    const PlacementModel& model, FlowNetwork flow, const Assignment& previous,
    std::optional<std::chrono::milliseconds> budget = std::nullopt) {
  if (flow.flow_value() != model.required_flow()) {
    throw LayoutError("transfer minimization needs a full flow");
  }
  const auto started = std::chrono::steady_clock::now();
  const FlowNetwork reference = reference_flow(model, flow, previous);
  const std::size_t bound = 4 * model.nodes() + 1;
  // Each round lowers the distance, which starts at most at 2 * required_flow.
  const std::size_t max_rounds = 2 * static_cast<std::size_t>(model.required_flow()) + 1;

  TransferMinimization result;
  while (true) {
    if (budget && std::chrono::steady_clock::now() - started >= *budget) break;
    const std::vector<Cycle> cycles = detect_negative_cycles(residual_cost_graph(flow, reference), bound);
    if (cycles.empty()) {
      result.converged = true;
      break;
    }
    if (result.rounds == max_rounds) {
      throw LayoutError("internal error: cycle canceling did not terminate");
    }
    for (const Cycle& c : cycles) flow = apply_cycle(std::move(flow), c);
    result.cycles_applied += cycles.size();
    ++result.rounds;
  }
  result.network = std::move(flow);
  return result;
}

// Reads the replicas of each partition off the saturated placement arcs.
// Replica lists are sorted by node id.
inline Assignment assignment_from_flow(const PlacementModel& model, const FlowNetwork& network,
                                       Capacity partition_size) {
  if (network.flow_value() != model.required_flow()) {
    throw LayoutError("flow value " + std::to_string(network.flow_value()) +
                      " does not realize an assignment (need " +
                      std::to_string(model.required_flow()) + ")");
  }
  Assignment assignment;
  assignment.partition_size = partition_size;
  assignment.replicas.resize(model.partitions());
  for (std::size_t p = 0; p < model.partitions(); ++p) {
    auto& replicas = assignment.replicas[p];
    for (std::size_t z = 0; z < model.zones(); ++z) {
      for (ArcIndex a : network.out_arcs(model.partition_zone(p, z))) {
        const auto& arc = network.arc(a);
        if (arc.flow > 0) replicas.push_back(model.spec().nodes[network.vertex(arc.to).node].id);
      }
    }
    std::sort(replicas.begin(), replicas.end());
  }
  return assignment;
}

struct NodeUtilization {
  std::string id;
  std::string zone;
  Capacity partitions = 0;       // p_n
  Capacity partition_slots = 0;  // floor(c_n / s*)
  Capacity used_capacity = 0;    // p_n * s*
  Capacity capacity = 0;         // c_n

  friend bool operator==(const NodeUtilization&, const NodeUtilization&) = default;
};

struct ZoneUtilization {
  std::string zone;
  Capacity partitions = 0;       // flow through the zone's nodes
  Capacity partition_slots = 0;  // sum of floor(c_n / s*) over the zone

  friend bool operator==(const ZoneUtilization&, const ZoneUtilization&) = default;
};

struct LayoutMetrics {
  Capacity optimal_size = 0;
  Capacity total_capacity = 0;      // C
  Capacity ideal_size = 0;          // floor(C / replication)
  Capacity effective_capacity = 0;  // s* * partitions
  double unusable_capacity_percent = 0.0;
  std::vector<NodeUtilization> node_utilization;
  std::vector<ZoneUtilization> zone_utilization;
  std::vector<std::string> saturated_nodes;
  std::vector<std::string> saturated_zones;
  std::optional<Capacity> distance_to_previous;
  std::optional<Capacity> partition_transfers;
  std::optional<Capacity> candidate_flow_restricted;
  std::optional<bool> transfer_load_optimal;
  std::optional<Capacity> minimization_rounds;

  friend bool operator==(const LayoutMetrics&, const LayoutMetrics&) = default;
};

inline LayoutMetrics compute_metrics(const PlacementModel& model, Capacity optimal_size,
                                     const FlowNetwork& final_flow, const Assignment* previous,
                                     std::optional<Capacity> candidate_restricted_value) {
  const auto& spec = model.spec();
  LayoutMetrics m;
  m.optimal_size = optimal_size;
  m.total_capacity = spec.total_capacity();
  m.ideal_size = m.total_capacity / spec.replication;
  m.effective_capacity = optimal_size * static_cast<Capacity>(model.partitions());
  if (m.total_capacity > 0) {
    const double used = static_cast<double>(m.effective_capacity) * spec.replication;
    const double pct = 100.0 * (1.0 - used / static_cast<double>(m.total_capacity));
    m.unusable_capacity_percent = std::max(0.0, std::round(pct * 100.0) / 100.0);
  }

  std::vector<ZoneUtilization> zones(model.zones());
  for (std::size_t z = 0; z < model.zones(); ++z) zones[z].zone = model.zone_names()[z];
  for (std::size_t n = 0; n < model.nodes(); ++n) {
    const auto& node = spec.nodes[n];
    NodeUtilization u{node.id, node.zone};
    if (auto arc = final_flow.find_arc(model.node_vertex(n), model.sink())) {
      u.partitions = final_flow.arc(*arc).flow;
    }
    u.partition_slots = node.capacity / optimal_size;
    u.used_capacity = u.partitions * optimal_size;
    u.capacity = node.capacity;
    if (u.partition_slots > 0 && u.partitions == u.partition_slots) m.saturated_nodes.push_back(node.id);
    zones[model.zone_of(n)].partitions += u.partitions;
    zones[model.zone_of(n)].partition_slots += u.partition_slots;
    m.node_utilization.push_back(std::move(u));
  }
  for (auto& z : zones) {
    if (z.partition_slots > 0 && z.partitions == z.partition_slots) m.saturated_zones.push_back(z.zone);
  }
  m.zone_utilization = std::move(zones);

  if (previous != nullptr) {
    const Assignment current = assignment_from_flow(model, final_flow, optimal_size);
    m.distance_to_previous = static_cast<Capacity>(distance(current, *previous));
    m.partition_transfers = static_cast<Capacity>(partition_transfers(current, *previous));
  }
  m.candidate_flow_restricted = candidate_restricted_value;
  return m;
}

struct LayoutOptions {
  std::uint64_t seed = 0;
  // Wall-clock cap on transfer minimization; unlimited when absent.
  std::optional<std::chrono::milliseconds> budget;
};

struct LayoutResult {
  Assignment assignment;
  LayoutMetrics metrics;
};

inline LayoutResult compute_layout(const ClusterSpec& spec, const Assignment* previous,
                                   const LayoutOptions& options = {}) {
  const PlacementModel model(spec);
  if (previous != nullptr) require_matching_partitions(model, *previous);

  const Capacity size = compute_partition_size(model, options.seed);
  const FlowNetwork graph = build_graph(model, size);
  CandidateFlow candidate = compute_candidate_assignment(model, graph, previous, options.seed);

  FlowNetwork final_flow = std::move(candidate.network);
  std::optional<TransferMinimization> minimized;
  if (previous != nullptr) {
    minimized = minimize_transfer_load(model, std::move(final_flow), *previous, options.budget);
    final_flow = std::move(minimized->network);
  }

  LayoutResult result;
  result.assignment = assignment_from_flow(model, final_flow, size);
  result.metrics = compute_metrics(model, size, final_flow, previous, candidate.restricted_flow_value);
  if (minimized) {
    result.metrics.transfer_load_optimal = minimized->converged;
    result.metrics.minimization_rounds = static_cast<Capacity>(minimized->rounds);
  }
  return result;
}

}  // namespace geolayout
