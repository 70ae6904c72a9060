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

// JSON documents: cluster spec files and layout files. Parsing is strict:
// unknown keys and wrongly typed values are rejected with a message naming
// the offending field. Serialization is canonical (sorted keys, no
// whitespace) so identical inputs give byte-identical files.

#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geolayout/cluster.hpp"
#include "geolayout/error.hpp"
#include "geolayout/layout.hpp"
#include "json.hpp"

namespace geolayout {

using Json = nlohmann::json;

struct LayoutFile {
  std::uint64_t version = 1;
  unsigned partition_bits = 8;
  Assignment assignment;
  LayoutMetrics metrics;

  friend bool operator==(const LayoutFile&, const LayoutFile&) = default;
};

namespace detail {

// Field access with path-qualified diagnostics.
class JsonReader {
 public:
  JsonReader(const Json& value, std::string path) : value_(value), path_(std::move(path)) {}

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& item : value_.items()) {
      bool known = false;
      for (const char* key : allowed) known = known || item.key() == key;
      if (!known) throw FormatError(path_ + ": unknown key '" + item.key() + "'");
    }
  }

  bool has(const char* key) const { return value_.contains(key); }

  JsonReader at(const char* key) const {
    if (!value_.contains(key)) throw FormatError(path_ + ": missing key '" + key + "'");
    return JsonReader(value_.at(key), join(key));
  }

  JsonReader at(std::size_t index) const {
    return JsonReader(value_.at(index), path_ + "[" + std::to_string(index) + "]");
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::int64_t integer(std::int64_t min = std::numeric_limits<std::int64_t>::min()) const {
    if (!value_.is_number_integer()) fail("expected an integer");
    if (value_.is_number_unsigned() &&
        value_.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      fail("integer out of range");
    }
    const auto v = value_.get<std::int64_t>();
    if (v < min) fail("expected an integer >= " + std::to_string(min));
    return v;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected a boolean");
    return value_.get<bool>();
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0, n = array_size(); i < n; ++i) out.push_back(at(i).string());
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(path_ + ": " + what); }

 private:
  std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& value_;
  std::string path_;
};

inline unsigned small_unsigned(const JsonReader& r, std::int64_t min) {
  const std::int64_t v = r.integer(min);
  if (v > std::numeric_limits<unsigned>::max()) r.fail("integer out of range");
  return static_cast<unsigned>(v);
}

template <class T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace detail

inline Json to_json(const ClusterSpec& spec) {
  Json nodes = Json::array();
  for (const auto& n : spec.nodes) {
    nodes.push_back({{"capacity", n.capacity}, {"id", n.id}, {"zone", n.zone}});
  }
  return {{"nodes", std::move(nodes)},
          {"partition_bits", spec.partition_bits},
          {"replication", spec.replication},
          {"scattering", spec.scattering}};
}

// Parses and validates a spec document.
inline ClusterSpec parse_cluster_spec(const Json& doc) {
  const detail::JsonReader root(doc, "spec");
  root.require_object({"nodes", "replication", "scattering", "partition_bits"});
  ClusterSpec spec;
  const auto nodes = root.at("nodes");
  for (std::size_t i = 0, n = nodes.array_size(); i < n; ++i) {
    const auto node = nodes.at(i);
    node.require_object({"id", "zone", "capacity"});
    spec.nodes.push_back(
        {node.at("id").string(), node.at("zone").string(), node.at("capacity").integer(0)});
  }
  spec.replication = detail::small_unsigned(root.at("replication"), 1);
  spec.scattering = detail::small_unsigned(root.at("scattering"), 1);
  spec.partition_bits = detail::small_unsigned(root.at("partition_bits"), 1);
  try {
    validate_spec(spec);
  } catch (const InvalidSpecError& e) {
    throw FormatError(std::string("spec: ") + e.what());
  }
  return spec;
}

inline Json to_json(const LayoutMetrics& m) {
  Json nodes = Json::array();
  for (const auto& n : m.node_utilization) {
    nodes.push_back({{"capacity", n.capacity},
                     {"id", n.id},
                     {"partition_slots", n.partition_slots},
                     {"partitions", n.partitions},
                     {"used_capacity", n.used_capacity},
                     {"zone", n.zone}});
  }
  Json zones = Json::array();
  for (const auto& z : m.zone_utilization) {
    zones.push_back({{"partition_slots", z.partition_slots},
                     {"partitions", z.partitions},
                     {"zone", z.zone}});
  }
  Json j = {{"effective_capacity", m.effective_capacity},
            {"ideal_size", m.ideal_size},
            {"node_utilization", std::move(nodes)},
            {"optimal_size", m.optimal_size},
            {"saturated_nodes", m.saturated_nodes},
            {"saturated_zones", m.saturated_zones},
            {"total_capacity", m.total_capacity},
            {"unusable_capacity_percent", m.unusable_capacity_percent},
            {"zone_utilization", std::move(zones)}};
  detail::put_optional(j, "distance_to_previous", m.distance_to_previous);
  detail::put_optional(j, "partition_transfers", m.partition_transfers);
  detail::put_optional(j, "candidate_flow_restricted", m.candidate_flow_restricted);
  detail::put_optional(j, "transfer_load_optimal", m.transfer_load_optimal);
  detail::put_optional(j, "minimization_rounds", m.minimization_rounds);
  return j;
}

inline LayoutMetrics parse_layout_metrics(const detail::JsonReader& r) {
  r.require_object({"effective_capacity", "ideal_size", "node_utilization", "optimal_size",
                    "saturated_nodes", "saturated_zones", "total_capacity",
                    "unusable_capacity_percent", "zone_utilization", "distance_to_previous",
                    "partition_transfers", "candidate_flow_restricted", "transfer_load_optimal",
                    "minimization_rounds"});
  LayoutMetrics m;
  m.effective_capacity = r.at("effective_capacity").integer(0);
  m.ideal_size = r.at("ideal_size").integer(0);
  m.optimal_size = r.at("optimal_size").integer(0);
  m.total_capacity = r.at("total_capacity").integer(0);
  m.unusable_capacity_percent = r.at("unusable_capacity_percent").number();
  m.saturated_nodes = r.at("saturated_nodes").strings();
  m.saturated_zones = r.at("saturated_zones").strings();

  const auto nodes = r.at("node_utilization");
  for (std::size_t i = 0, n = nodes.array_size(); i < n; ++i) {
    const auto node = nodes.at(i);
    node.require_object({"capacity", "id", "partition_slots", "partitions", "used_capacity", "zone"});
    m.node_utilization.push_back({node.at("id").string(), node.at("zone").string(),
                                  node.at("partitions").integer(0),
                                  node.at("partition_slots").integer(0),
                                  node.at("used_capacity").integer(0),
                                  node.at("capacity").integer(0)});
  }
  const auto zones = r.at("zone_utilization");
  for (std::size_t i = 0, n = zones.array_size(); i < n; ++i) {
    const auto zone = zones.at(i);
    zone.require_object({"partition_slots", "partitions", "zone"});
    m.zone_utilization.push_back({zone.at("zone").string(), zone.at("partitions").integer(0),
                                  zone.at("partition_slots").integer(0)});
  }
  if (r.has("distance_to_previous")) m.distance_to_previous = r.at("distance_to_previous").integer(0);
  if (r.has("partition_transfers")) m.partition_transfers = r.at("partition_transfers").integer(0);
  if (r.has("candidate_flow_restricted")) {
    m.candidate_flow_restricted = r.at("candidate_flow_restricted").integer(0);
  }
  if (r.has("transfer_load_optimal")) m.transfer_load_optimal = r.at("transfer_load_optimal").boolean();
  if (r.has("minimization_rounds")) m.minimization_rounds = r.at("minimization_rounds").integer(0);
  return m;
}

inline Json to_json(const LayoutFile& file) {
  return {{"assignment", file.assignment.replicas},
          {"metrics", to_json(file.metrics)},
          {"partition_bits", file.partition_bits},
          {"partition_size", file.assignment.partition_size},
          {"version", file.version}};
}

inline LayoutFile parse_layout_file(const Json& doc) {
  const detail::JsonReader root(doc, "layout");
  root.require_object({"version", "partition_bits", "partition_size", "assignment", "metrics"});
  LayoutFile file;
  file.version = static_cast<std::uint64_t>(root.at("version").integer(0));
  const auto bits = root.at("partition_bits");
  file.partition_bits = detail::small_unsigned(bits, 1);
  if (file.partition_bits > kMaxPartitionBits) bits.fail("partition_bits out of range");
  file.assignment.partition_size = root.at("partition_size").integer(1);
  const auto assignment = root.at("assignment");
  const std::size_t partitions = assignment.array_size();
  if (partitions != (std::size_t{1} << file.partition_bits)) {
    assignment.fail("expected " + std::to_string(std::size_t{1} << file.partition_bits) +
                    " partitions, got " + std::to_string(partitions));
  }
  for (std::size_t p = 0; p < partitions; ++p) {
    file.assignment.replicas.push_back(assignment.at(p).strings());
  }
  file.metrics = parse_layout_metrics(root.at("metrics"));
  return file;
}

// Canonical form: sorted keys, no insignificant whitespace, trailing newline.
inline std::string serialize(const Json& doc) { return doc.dump() + "\n"; }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw FormatError("failed writing '" + path + "'");
}

}  // namespace geolayout
