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

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geolayout/cluster.hpp"
#include "geolayout/error.hpp"
#include "geolayout/io.hpp"
#include "geolayout/layout.hpp"
#include "geolayout/oracle.hpp"

namespace geolayout::cli {

enum ExitCode : int {
  kOk = 0,
  kIoOrParse = 1,
  kInfeasible = 2,
  kInvalidLayout = 3,
  kOracleGuard = 4,
};

namespace detail {

inline std::string percent(Capacity part, Capacity whole) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << (whole > 0 ? 100.0 * part / whole : 0.0) << '%';
  return s.str();
}

inline void print_report(std::ostream& out, const LayoutMetrics& m) {
  out << "partition size: " << m.optimal_size << '\n';
  out << "effective capacity: " << m.effective_capacity << " (ideal " << m.ideal_size
      << ", total raw " << m.total_capacity << ", unusable " << m.unusable_capacity_percent
      << "%)\n";
  out << "nodes:\n";
  for (const auto& n : m.node_utilization) {
    out << "  " << std::left << std::setw(16) << n.id << std::setw(12) << n.zone << std::right
        << n.partitions << '/' << n.partition_slots << " partitions, " << n.used_capacity << '/'
        << n.capacity << " (" << percent(n.partitions, n.partition_slots) << ")"
        << (n.partition_slots > 0 && n.partitions == n.partition_slots ? " saturated" : "")
        << '\n';
  }
  out << "zones:\n";
  for (const auto& z : m.zone_utilization) {
    out << "  " << std::left << std::setw(16) << z.zone << std::right << z.partitions << '/'
        << z.partition_slots << " partitions (" << percent(z.partitions, z.partition_slots)
        << ")" << (z.partition_slots > 0 && z.partitions == z.partition_slots ? " saturated" : "")
        << '\n';
  }
  if (m.distance_to_previous) {
    out << "distance to previous: " << *m.distance_to_previous << " ("
        << m.partition_transfers.value_or(0) << " partition transfers)\n";
  }
  if (m.candidate_flow_restricted) {
    out << "flow on previous associations: " << *m.candidate_flow_restricted << '\n';
  }
  if (m.transfer_load_optimal) {
    out << "transfer load: " << (*m.transfer_load_optimal ? "minimal" : "budget exhausted, maybe not minimal")
        << " after " << m.minimization_rounds.value_or(0) << " round(s)\n";
  }
}

inline int compute(const std::string& spec_path, const std::optional<std::string>& previous_path,
                   const std::string& out_path, std::uint64_t seed,
                   std::optional<std::uint64_t> timeout_ms, bool json, std::ostream& out,
                   std::ostream& err) {
  ClusterSpec spec;
  std::optional<LayoutFile> previous;
  try {
    spec = parse_cluster_spec(read_json_file(spec_path));
    if (previous_path) previous = parse_layout_file(read_json_file(*previous_path));
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }
  if (previous && previous->partition_bits != spec.partition_bits) {
    err << "error: previous layout uses partition_bits " << previous->partition_bits
        << " but the spec uses " << spec.partition_bits
        << "; partitions cannot be matched across a change of partition bits\n";
    return kInfeasible;
  }

  LayoutOptions options;
  options.seed = seed;
  if (timeout_ms) options.budget = std::chrono::milliseconds(*timeout_ms);

  LayoutResult result;
  try {
    result = compute_layout(spec, previous ? &previous->assignment : nullptr, options);
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const IncompatibleError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  }

  LayoutFile file;
  file.version = previous ? previous->version + 1 : 1;
  file.partition_bits = spec.partition_bits;
  file.assignment = std::move(result.assignment);
  file.metrics = result.metrics;
  try {
    write_text_file(out_path, serialize(to_json(file)));
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }

  if (json) {
    out << to_json(file.metrics).dump() << '\n';
  } else {
    print_report(out, file.metrics);
    out << "layout version " << file.version << " written to " << out_path << '\n';
  }
  return kOk;
}

inline int check(const std::string& layout_path, const std::string& spec_path, std::ostream& out,
                 std::ostream& err) {
  LayoutFile layout;
  ClusterSpec spec;
  try {
    layout = parse_layout_file(read_json_file(layout_path));
    spec = parse_cluster_spec(read_json_file(spec_path));
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }
  std::vector<std::string> violations;
  if (layout.partition_bits != spec.partition_bits) {
    violations.push_back("layout uses partition_bits " + std::to_string(layout.partition_bits) +
                         " but the spec uses " + std::to_string(spec.partition_bits));
  } else {
    violations = check_assignment(spec, layout.assignment);
  }
  if (violations.empty()) {
    out << "layout is valid (" << layout.assignment.partition_count() << " partitions, size "
        << layout.assignment.partition_size << ")\n";
    return kOk;
  }
  for (const auto& v : violations) out << "violation: " << v << '\n';
  return kInvalidLayout;
}

inline int oracle(const std::string& spec_path, const std::optional<std::string>& previous_path,
                  bool json, std::ostream& out, std::ostream& err) {
  ClusterSpec spec;
  std::optional<LayoutFile> previous;
  try {
    spec = parse_cluster_spec(read_json_file(spec_path));
    if (previous_path) previous = parse_layout_file(read_json_file(*previous_path));
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrParse;
  }
  try {
    OracleResult r = brute_force_optimal_size(spec);
    if (r.feasible() && previous) {
      if (previous->partition_bits != spec.partition_bits) {
        err << "error: previous layout uses a different partition_bits\n";
        return kInfeasible;
      }
      r.min_distance = brute_force_min_distance(spec, r.best_size, previous->assignment);
    }
    if (json) {
      Json j = {{"best_size", r.best_size},
                {"feasible", r.feasible()},
                {"optimal_assignments", r.optimal_assignments.size()}};
      if (r.min_distance) j["min_distance"] = *r.min_distance;
      out << j.dump() << '\n';
    } else if (r.feasible()) {
      out << "best_size " << r.best_size << '\n';
      if (r.min_distance) out << "min_distance " << *r.min_distance << '\n';
    } else {
      out << "infeasible: " << InfeasibleError::kDiagnostic << '\n';
    }
    return r.feasible() ? kOk : kInfeasible;
  } catch (const OracleGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kOracleGuard;
  }
}

}  // namespace detail

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal partition-to-node layouts for replicated geo-distributed clusters",
               "geolayout"};
  app.require_subcommand(1);

  std::string spec_path, out_path, layout_path;
  std::optional<std::string> previous_path;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> timeout_ms;
  bool json = false;

  auto* compute = app.add_subcommand("compute", "Compute a new layout");
  compute->add_option("--spec", spec_path, "Cluster spec (JSON)")->required();
  compute->add_option("--previous", previous_path, "Previous layout (JSON)");
  compute->add_option("--out", out_path, "Where to write the new layout")->required();
  compute->add_option("--seed", seed, "Seed for neighbour shuffling (0: deterministic demo mode)");
  compute->add_option("--timeout-ms", timeout_ms, "Wall-clock cap on transfer minimization");
  compute->add_flag("--json", json, "Print metrics as one JSON object");

  auto* check = app.add_subcommand("check", "Validate a layout against a spec");
  check->add_option("--layout", layout_path, "Layout (JSON)")->required();
  check->add_option("--spec", spec_path, "Cluster spec (JSON)")->required();

  auto* oracle = app.add_subcommand("oracle", "Exhaustive search on a tiny cluster");
  oracle->add_option("--spec", spec_path, "Cluster spec (JSON)")->required();
  oracle->add_option("--previous", previous_path, "Previous layout (JSON)");
  oracle->add_flag("--json", json, "Print the result as one JSON object");

  std::vector<std::string> argv_storage{"geolayout"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kIoOrParse;
  }

  if (*compute) {
    return detail::compute(spec_path, previous_path, out_path, seed, timeout_ms, json, out, err);
  }
  if (*check) return detail::check(layout_path, spec_path, out, err);
  return detail::oracle(spec_path, previous_path, json, out, err);
}

}  // namespace geolayout::cli
