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

// Exhaustive reference solver for tiny clusters. It evaluates the size
// objective min_n floor(c_n / p_n) directly over enumerated assignments and
// never builds a flow network, so it can cross-check the flow-based engine.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geolayout/cluster.hpp"
#include "geolayout/error.hpp"

namespace geolayout {

struct OracleLimits {
  std::size_t max_partitions = 8;
  std::size_t max_nodes = 6;
  std::size_t max_stored_assignments = 10'000;
};

struct OracleResult {
  // Zero when no assignment satisfies the constraints with a positive size.
  Capacity best_size = 0;
  // Maximizers, one per multiset of replica sets (assignments that differ
  // only by relabeling partitions are listed once), capped by the limits.
  std::vector<Assignment> optimal_assignments;
  std::optional<Capacity> min_distance;

  bool feasible() const { return best_size > 0; }
};

namespace detail {

inline void require_oracle_range(const ClusterSpec& spec, const OracleLimits& limits) {
  validate_spec(spec);
  if (spec.partition_count() > limits.max_partitions || spec.nodes.size() > limits.max_nodes) {
    throw OracleGuardError("instance too large for exhaustive search (" +
                           std::to_string(spec.partition_count()) + " partitions, " +
                           std::to_string(spec.nodes.size()) + " nodes; limits " +
                           std::to_string(limits.max_partitions) + " and " +
                           std::to_string(limits.max_nodes) + ")");
  }
}

// Replica sets honouring replication and scattering, as indices into the
// node list sorted by id, in lexicographic order.
struct ReplicaSets {
  std::vector<std::size_t> order;  // sorted position -> spec node index
  std::vector<std::vector<std::size_t>> sets;

  explicit ReplicaSets(const ClusterSpec& spec) {
    const std::size_t n = spec.nodes.size();
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return spec.nodes[a].id < spec.nodes[b].id; });
    const std::size_t r = spec.replication;
    if (r > n) return;
    std::vector<std::size_t> pick(r);
    for (std::size_t i = 0; i < r; ++i) pick[i] = i;
    while (true) {
      std::set<std::string> zones;
      std::vector<std::size_t> members;
      for (std::size_t i : pick) {
        members.push_back(order[i]);
        zones.insert(spec.nodes[order[i]].zone);
      }
      if (zones.size() >= spec.scattering) sets.push_back(std::move(members));
      // next combination
      std::size_t i = r;
      while (i > 0 && pick[i - 1] == n - r + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
};

inline Assignment to_assignment(const ClusterSpec& spec, const ReplicaSets& rs,
                                const std::vector<std::size_t>& choice, Capacity size) {
  Assignment a;
  a.partition_size = size;
  for (std::size_t s : choice) {
    std::vector<std::string> ids;
    for (std::size_t n : rs.sets[s]) ids.push_back(spec.nodes[n].id);
    std::sort(ids.begin(), ids.end());
    a.replicas.push_back(std::move(ids));
  }
  return a;
}

}  // namespace detail

// Maximum over valid assignments of min_n floor(c_n / p_n) (nodes with
// p_n = 0 excluded). Partitions are interchangeable for this objective, so
// non-decreasing sequences of replica sets cover every assignment.
inline OracleResult brute_force_optimal_size(const ClusterSpec& spec,
                                             const OracleLimits& limits = {}) {
  detail::require_oracle_range(spec, limits);
  const detail::ReplicaSets rs(spec);
  const std::size_t P = spec.partition_count();
  OracleResult result;
  if (rs.sets.empty()) return result;

  std::vector<std::size_t> choice(P, 0);
  std::vector<Capacity> load(spec.nodes.size(), 0);
  bool have_best = false;

  auto evaluate = [&] {
    Capacity size = std::numeric_limits<Capacity>::max();
    for (std::size_t n = 0; n < load.size(); ++n) {
      if (load[n] > 0) size = std::min(size, spec.nodes[n].capacity / load[n]);
    }
    if (!have_best || size > result.best_size) {
      have_best = true;
      result.best_size = size;
      result.optimal_assignments.clear();
    }
    if (size == result.best_size &&
        result.optimal_assignments.size() < limits.max_stored_assignments) {
      result.optimal_assignments.push_back(detail::to_assignment(spec, rs, choice, size));
    }
  };

  auto recurse = [&](auto&& self, std::size_t p, std::size_t first) -> void {
    if (p == P) {
      evaluate();
      return;
    }
    for (std::size_t s = first; s < rs.sets.size(); ++s) {
      choice[p] = s;
      for (std::size_t n : rs.sets[s]) ++load[n];
      self(self, p + 1, s);
      for (std::size_t n : rs.sets[s]) --load[n];
    }
  };
  recurse(recurse, 0, 0);

  if (result.best_size <= 0) {
    result.best_size = 0;
    result.optimal_assignments.clear();
  }
  return result;
}

// Minimum of distance(alpha, previous) over valid assignments alpha whose
// partition size is at least `size`, i.e. p_n <= floor(c_n / size).
inline Capacity brute_force_min_distance(const ClusterSpec& spec, Capacity size,
                                         const Assignment& previous,
                                         const OracleLimits& limits = {}) {
  detail::require_oracle_range(spec, limits);
  if (size < 1) throw LayoutError("partition size must be positive");
  const std::size_t P = spec.partition_count();
  if (previous.partition_count() != P) {
    throw IncompatibleError("previous assignment covers a different number of partitions");
  }
  const detail::ReplicaSets rs(spec);

  // cost[p][s]: symmetric difference between replica set s and previous[p]
  std::vector<std::vector<Capacity>> cost(P, std::vector<Capacity>(rs.sets.size(), 0));
  std::vector<Capacity> cheapest(P + 1, 0);
  for (std::size_t p = 0; p < P; ++p) {
    std::set<std::string> before(previous.replicas[p].begin(), previous.replicas[p].end());
    for (std::size_t s = 0; s < rs.sets.size(); ++s) {
      Capacity shared = 0;
      for (std::size_t n : rs.sets[s]) shared += before.count(spec.nodes[n].id);
      cost[p][s] = static_cast<Capacity>(rs.sets[s].size() + before.size()) - 2 * shared;
    }
  }
  // cheapest[p]: lower bound on the cost of partitions p..P-1
  for (std::size_t p = P; p-- > 0;) {
    Capacity lowest = std::numeric_limits<Capacity>::max() / 4;
    for (Capacity c : cost[p]) lowest = std::min(lowest, c);
    cheapest[p] = cheapest[p + 1] + lowest;
  }

  std::vector<Capacity> slots(spec.nodes.size());
  for (std::size_t n = 0; n < spec.nodes.size(); ++n) slots[n] = spec.nodes[n].capacity / size;

  Capacity best = std::numeric_limits<Capacity>::max();
  auto recurse = [&](auto&& self, std::size_t p, Capacity spent) -> void {
    if (spent + cheapest[p] >= best) return;
    if (p == P) {
      best = spent;
      return;
    }
    for (std::size_t s = 0; s < rs.sets.size(); ++s) {
      const auto& members = rs.sets[s];
      if (std::any_of(members.begin(), members.end(), [&](std::size_t n) { return slots[n] == 0; })) {
        continue;
      }
      for (std::size_t n : members) --slots[n];
      self(self, p + 1, spent + cost[p][s]);
      for (std::size_t n : members) ++slots[n];
    }
  };
  recurse(recurse, 0, 0);

  if (best == std::numeric_limits<Capacity>::max()) {
    throw InfeasibleError("no assignment reaches partition size " + std::to_string(size));
  }
  return best;
}

}  // namespace geolayout
