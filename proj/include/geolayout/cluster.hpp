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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geolayout/error.hpp"

namespace geolayout {

using Capacity = std::int64_t;

inline constexpr unsigned kMaxPartitionBits = 16;

struct StorageNode {
  std::string id;
  std::string zone;
  Capacity capacity = 0;  // in the caller's storage unit

  friend bool operator==(const StorageNode&, const StorageNode&) = default;
};

struct ClusterSpec {
  std::vector<StorageNode> nodes;
  unsigned replication = 3;  // distinct nodes per partition
  unsigned scattering = 3;   // minimum distinct zones per partition
  unsigned partition_bits = 8;

  std::size_t partition_count() const { return std::size_t{1} << partition_bits; }

  Capacity total_capacity() const {
    Capacity total = 0;
    for (const auto& n : nodes) total += n.capacity;
    return total;
  }

  friend bool operator==(const ClusterSpec&, const ClusterSpec&) = default;
};

// For each partition, the ids of the nodes holding a replica.
struct Assignment {
  Capacity partition_size = 0;
  std::vector<std::vector<std::string>> replicas;

  std::size_t partition_count() const { return replicas.size(); }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Structural checks only; feasibility is decided separately.
inline void validate_spec(const ClusterSpec& spec) {
  if (spec.replication < 1) throw InvalidSpecError("replication must be at least 1");
  if (spec.scattering < 1) throw InvalidSpecError("scattering must be at least 1");
  if (spec.scattering > spec.replication) {
    throw InvalidSpecError("scattering (" + std::to_string(spec.scattering) +
                           ") exceeds replication (" + std::to_string(spec.replication) + ")");
  }
  if (spec.partition_bits < 1 || spec.partition_bits > kMaxPartitionBits) {
    throw InvalidSpecError("partition_bits must be in [1, " + std::to_string(kMaxPartitionBits) +
                           "]");
  }
  std::set<std::string_view> ids;
  for (const auto& n : spec.nodes) {
    if (n.id.empty()) throw InvalidSpecError("node id must not be empty");
    if (n.capacity < 0) throw InvalidSpecError("node '" + n.id + "' has negative capacity");
    if (!ids.insert(n.id).second) throw InvalidSpecError("duplicate node id '" + n.id + "'");
  }
}

// Cheap necessary conditions checked before any flow computation. Nodes with
// zero capacity do not count.
inline void require_plausibly_feasible(const ClusterSpec& spec) {
  std::size_t usable = 0;
  std::set<std::string_view> zones;
  for (const auto& n : spec.nodes) {
    if (n.capacity <= 0) continue;
    ++usable;
    zones.insert(n.zone);
  }
  if (usable < spec.replication) {
    throw InfeasibleError(std::to_string(usable) + " node(s) with capacity for replication " +
                          std::to_string(spec.replication));
  }
  if (zones.size() < spec.scattering) {
    throw InfeasibleError(std::to_string(zones.size()) + " zone(s) with capacity for scattering " +
                          std::to_string(spec.scattering));
  }
}

// Partition index formed by the `bits` most significant bits of `hash`.
inline std::uint32_t partition_of_hash(std::span<const std::uint8_t> hash, unsigned bits) {
  if (bits < 1 || bits > kMaxPartitionBits) throw LayoutError("partition bits out of range");
  const std::size_t needed = (bits + 7) / 8;
  if (hash.size() < needed) throw LayoutError("hash too short for the requested partition bits");
  std::uint32_t prefix = 0;
  for (std::size_t i = 0; i < needed; ++i) prefix = (prefix << 8) | hash[i];
  return prefix >> (8 * needed - bits);
}

// Number of (node, partition) pairs present in exactly one of the two
// assignments. Replica order is irrelevant.
inline std::size_t distance(const Assignment& a, const Assignment& b) {
  if (a.partition_count() != b.partition_count()) {
    throw IncompatibleError("assignments cover " + std::to_string(a.partition_count()) + " and " +
                            std::to_string(b.partition_count()) + " partitions");
  }
  std::size_t total = 0;
  for (std::size_t p = 0; p < a.partition_count(); ++p) {
    std::set<std::string_view> lhs(a.replicas[p].begin(), a.replicas[p].end());
    std::set<std::string_view> rhs(b.replicas[p].begin(), b.replicas[p].end());
    std::vector<std::string_view> diff;
    std::set_symmetric_difference(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                                  std::back_inserter(diff));
    total += diff.size();
  }
  return total;
}

// Pairs (p, n) with n in `next` but not in `previous`: replicas to copy in.
inline std::size_t partition_transfers(const Assignment& next, const Assignment& previous) {
  if (next.partition_count() != previous.partition_count()) {
    throw IncompatibleError("assignments cover different partition counts");
  }
  std::size_t total = 0;
  for (std::size_t p = 0; p < next.partition_count(); ++p) {
    std::set<std::string_view> before(previous.replicas[p].begin(), previous.replicas[p].end());
    std::set<std::string_view> after(next.replicas[p].begin(), next.replicas[p].end());
    for (auto id : after) total += before.count(id) == 0 ? 1 : 0;
  }
  return total;
}

// Every way `assignment` breaks the replication, scattering or capacity
// constraints of `spec` at its recorded partition size. Empty when valid.
inline std::vector<std::string> check_assignment(const ClusterSpec& spec,
                                                 const Assignment& assignment) {
  std::vector<std::string> violations;
  const std::size_t partitions = spec.partition_count();
  if (assignment.partition_count() != partitions) {
    violations.push_back("assignment has " + std::to_string(assignment.partition_count()) +
                         " partitions, expected " + std::to_string(partitions));
    return violations;
  }
  if (assignment.partition_size < 1) {
    violations.push_back("partition_size must be positive, got " +
                         std::to_string(assignment.partition_size));
    return violations;
  }

  std::map<std::string_view, const StorageNode*> by_id;
  for (const auto& n : spec.nodes) by_id[n.id] = &n;
  std::map<std::string_view, Capacity> load;

  for (std::size_t p = 0; p < partitions; ++p) {
    const auto& replicas = assignment.replicas[p];
    const std::string where = "partition " + std::to_string(p);
    if (replicas.size() != spec.replication) {
      violations.push_back(where + ": " + std::to_string(replicas.size()) +
                           " replicas, expected " + std::to_string(spec.replication));
    }
    std::set<std::string_view> seen;
    std::set<std::string_view> zones;
    for (const auto& id : replicas) {
      if (!seen.insert(id).second) {
        violations.push_back(where + ": node '" + id + "' listed more than once");
        continue;
      }
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        violations.push_back(where + ": unknown node '" + id + "'");
        continue;
      }
      zones.insert(it->second->zone);
      ++load[id];
    }
    if (zones.size() < spec.scattering) {
      violations.push_back(where + ": replicas span " + std::to_string(zones.size()) +
                           " zone(s), expected at least " + std::to_string(spec.scattering));
    }
  }

  for (const auto& n : spec.nodes) {
    const Capacity used = load[n.id];
    const Capacity slots = n.capacity / assignment.partition_size;
    if (used > slots) {
      violations.push_back("node '" + n.id + "': holds " + std::to_string(used) +
                           " partitions but capacity " + std::to_string(n.capacity) +
                           " allows " + std::to_string(slots) + " at partition size " +
                           std::to_string(assignment.partition_size));
    }
  }
  return violations;
}

}  // namespace geolayout
