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

#include "geolayout/cli.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "support/test_support.hpp"

namespace geolayout {
namespace {

using testing::TempPath;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ClusterSpec instance_a() {
  ClusterSpec spec;
  spec.nodes = {{"n1", "z1", 100}, {"n2", "z1", 100}, {"n3", "z2", 100}, {"n4", "z2", 100}};
  spec.replication = 3;
  spec.scattering = 2;
  spec.partition_bits = 2;
  return spec;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { write_spec(instance_a()); }

  void write_spec(const ClusterSpec& spec) { write_text_file(spec_.str(), serialize(to_json(spec))); }

  TempPath spec_{"spec"};
  TempPath layout_{"layout"};
  TempPath next_{"next"};
};

TEST_F(CliTest, ComputeWritesFirstVersion) {
  auto r = run({"compute", "--spec", spec_.str(), "--out", layout_.str()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto file = parse_layout_file(read_json_file(layout_.str()));
  EXPECT_EQ(file.version, 1u);
  EXPECT_EQ(file.assignment.partition_size, 33);
  EXPECT_NE(r.out.find("partition size: 33"), std::string::npos);
}

TEST_F(CliTest, InfeasibleSpecExitsTwo) {
  auto spec = instance_a();
  spec.nodes.resize(2);
  write_spec(spec);
  auto r = run({"compute", "--spec", spec_.str(), "--out", layout_.str()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("capacities too small or constraints too strong"), std::string::npos);
}

TEST_F(CliTest, RecomputeFromOwnOutput) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str(), "--seed", "4"}).code, 0);
  auto r = run({"compute", "--spec", spec_.str(), "--previous", layout_.str(), "--out",
                next_.str(), "--seed", "4", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json metrics = Json::parse(r.out);
  EXPECT_EQ(metrics.at("distance_to_previous"), 0);
  EXPECT_EQ(metrics.at("partition_transfers"), 0);
  auto first = parse_layout_file(read_json_file(layout_.str()));
  auto second = parse_layout_file(read_json_file(next_.str()));
  EXPECT_EQ(second.version, 2u);
  EXPECT_EQ(second.assignment, first.assignment);
}

TEST_F(CliTest, ByteIdenticalOutputForSameInputs) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str(), "--seed", "9"}).code, 0);
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", next_.str(), "--seed", "9"}).code, 0);
  EXPECT_EQ(read_file(layout_.str()), read_file(next_.str()));
}

TEST_F(CliTest, PreviousWithOtherPartitionBits) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str()}).code, 0);
  auto spec = instance_a();
  spec.partition_bits = 3;
  write_spec(spec);
  auto r = run({"compute", "--spec", spec_.str(), "--previous", layout_.str(), "--out", next_.str()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("partition_bits"), std::string::npos);
}

TEST_F(CliTest, ParseAndUsageErrorsExitOne) {
  write_text_file(spec_.str(), R"({"nodes": [], "replication": 1, "scattering": 1, "partition_bits": 1, "extra": 0})");
  auto r = run({"compute", "--spec", spec_.str(), "--out", layout_.str()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("extra"), std::string::npos);
  EXPECT_EQ(run({"compute", "--spec", "/nonexistent.json", "--out", layout_.str()}).code, 1);
  EXPECT_EQ(run({"compute", "--out", layout_.str()}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
}

TEST_F(CliTest, CheckAcceptsComputedLayout) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str()}).code, 0);
  auto r = run({"check", "--layout", layout_.str(), "--spec", spec_.str()});
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(CliTest, CheckRejectsDuplicateNode) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str()}).code, 0);
  Json doc = read_json_file(layout_.str());
  doc["assignment"][1][2] = doc["assignment"][1][0];
  write_text_file(layout_.str(), serialize(doc));
  auto r = run({"check", "--layout", layout_.str(), "--spec", spec_.str()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("partition 1"), std::string::npos);
}

TEST_F(CliTest, CheckRejectsLoweredCapacity) {
  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str()}).code, 0);
  auto spec = instance_a();
  spec.nodes[3].capacity = 98;  // 3 partitions of size 33 no longer fit
  write_spec(spec);
  auto r = run({"check", "--layout", layout_.str(), "--spec", spec_.str()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("n4"), std::string::npos);
}

TEST_F(CliTest, CheckParseFailureExitsOne) {
  write_text_file(layout_.str(), "[]");
  EXPECT_EQ(run({"check", "--layout", layout_.str(), "--spec", spec_.str()}).code, 1);
}

TEST_F(CliTest, OracleReportsBestSizeAndDistance) {
  auto r = run({"oracle", "--spec", spec_.str()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("best_size 33"), std::string::npos);

  ASSERT_EQ(run({"compute", "--spec", spec_.str(), "--out", layout_.str()}).code, 0);
  r = run({"oracle", "--spec", spec_.str(), "--previous", layout_.str(), "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("best_size"), 33);
  EXPECT_EQ(j.at("min_distance"), 0);
}

TEST_F(CliTest, OracleGuard) {
  auto spec = instance_a();
  for (int i = 5; i <= 20; ++i) spec.nodes.push_back({"n" + std::to_string(i), "z3", 100});
  write_spec(spec);
  EXPECT_EQ(run({"oracle", "--spec", spec_.str()}).code, 4);
}

}  // namespace
}  // namespace geolayout
