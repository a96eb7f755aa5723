// Copyright 2026 The detoracle Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace detoracle {
namespace {

const std::string kConfigDir = DETORACLE_CONFIG_DIR;

TEST(Config, EmptyTextAndNullYieldDefaults) {
  EXPECT_EQ(parse_config(""), OracleConfig{});
  EXPECT_EQ(config_from_json(nullptr), OracleConfig{});
}

TEST(Config, EchoRoundTrips) {
  OracleConfig c;
  c.name = "custom";
  c.aov.sut_aov = Sector{{1, 2}, 0.5, 40.0, 2.0};
  c.aov.res_prob_map = ProbMap{{0, 0}, {{10.0, 0.9}, {40.0, 0.2}}};
  c.areas.exclude = {testing::rect(0, 0, 2, 2)};
  c.areas.class_allow = std::set<std::string>{"car"};
  c.areas.max_range_by_class = {{"car", 50.0}};
  c.alignment.transform.kind = TransformKind::kRigid2d;
  c.alignment.transform.theta = 0.1;
  c.distance.metric = Metric::kWasserstein2;
  c.distance.yaw_period = YawPeriod::kTwoPi;
  c.assignment.lifetime = Lifetime::kSubsequence;
  c.assignment.sticky = true;
  c.temporal.basis = TimestampBasis::kAvailability;
  c.temporal.sut_latency_series = {{0.0, 0.1}, {5.0, 0.2}};
  c.temporal.overhang = OverhangMode::kThreshold;
  c.temporal.dt_max_s = 0.05;
  c.probabilistic.sweep_thresholds = 10;
  const OracleConfig back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(canonical_config_text(back), canonical_config_text(c));
}

TEST(Config, CommentsAreAllowed) {
  const auto c = parse_config("// note\n{ /* inline */ \"distance\": {\"threshold\": 3.5}}");
  EXPECT_DOUBLE_EQ(c.distance.threshold, 3.5);
}

TEST(Config, UnknownKeysNameTheirPath) {
  try {
    parse_config(R"({"distance": {"treshold": 2.0}})");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("distance"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("treshold"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"extra": 1})"), SchemaError);
}

TEST(Config, InvalidCombinationsAreRejected) {
  EXPECT_THROW(parse_config(R"({"temporal": {"basis": "availability"}})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"temporal": {"overhang": "threshold"}})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"occlusion": {"theta": 0.0}})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"assignment": {"sticky": true}})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"distance": {"metric": "manhattan"}})"), SchemaError);
  EXPECT_THROW(parse_config(R"({"filter_order": ["areas", "aov"]})"), SchemaError);
  EXPECT_THROW(parse_config("{not json"), ParseError);
}

TEST(Config, PolygonFilesResolveAgainstTheConfigDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "detoracle_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "zone.json") << "[[0, 0], [4, 0], [4, 4], [0, 4]]";
    std::ofstream(dir / "cfg.json") << R"({"areas": {"exclude": [{"file": "zone.json"}]}})";
  }
  const auto c = load_config(dir / "cfg.json");
  ASSERT_EQ(c.areas.exclude.size(), 1u);
  EXPECT_EQ(c.areas.exclude[0].vertices.size(), 4u);
  EXPECT_THROW(load_config(dir / "missing.json"), OracleError);
}

TEST(Config, HashCoversDefaults) {
  OracleConfig a, b;
  b.corner_cases.margin_m = a.corner_cases.margin_m + 0.5;
  EXPECT_NE(canonical_config_text(a), canonical_config_text(b));
}

TEST(ShippedConfigs, NuscenesStyleMatchesItsTableRow) {
  const auto c = load_config(kConfigDir + "/nuscenes_style.json");
  EXPECT_EQ(c.distance.metric, Metric::kCenter2d);
  EXPECT_DOUBLE_EQ(c.distance.threshold, 2.0);
  EXPECT_TRUE(c.distance.class_gate);
  EXPECT_EQ(c.assignment.algorithm, Algorithm::kHungarian);
  EXPECT_EQ(c.assignment.cardinality, Cardinality::kOneOne);
  EXPECT_EQ(c.assignment.lifetime, Lifetime::kSubsequence);
  EXPECT_TRUE(c.assignment.sticky);
  EXPECT_EQ(c.temporal.basis, TimestampBasis::kAcquisition);
  EXPECT_EQ(c.temporal.overhang, OverhangMode::kFnFp);
  EXPECT_EQ(c.probabilistic.sweep_thresholds, 40);
  EXPECT_EQ(c.areas.max_range_by_class.at("car"), 50.0);
  EXPECT_EQ(c.areas.max_range_by_class.at("pedestrian"), 40.0);
  EXPECT_EQ(c.occlusion.visibility_bin_edges.size() + 1, 4u);
}

TEST(ShippedConfigs, DroneStyleMatchesItsTableRow) {
  const auto c = load_config(kConfigDir + "/drone_style.json");
  EXPECT_DOUBLE_EQ(c.distance.threshold, 1.5);
  EXPECT_TRUE(c.distance.class_gate);
  EXPECT_EQ(c.areas.class_allow, std::set<std::string>{"car"});
  EXPECT_EQ(c.assignment.lifetime, Lifetime::kTrack);
  EXPECT_EQ(c.assignment.cardinality, Cardinality::kNOne);
  EXPECT_DOUBLE_EQ(*c.assignment.track_threshold_mean_m, 1.5);
  EXPECT_EQ(c.alignment.transform.kind, TransformKind::kPoly3);
  EXPECT_DOUBLE_EQ(c.alignment.transform.reported_error_m, 0.1);
  EXPECT_DOUBLE_EQ(c.temporal.sync_accuracy_loss_m, 0.14);
  EXPECT_EQ(c.probabilistic.class_policy, ClassPolicy::kArgmax);
  EXPECT_EQ(c.probabilistic.sweep_thresholds, 0);
  const auto& sector = std::get<Sector>(c.aov.sut_aov);
  EXPECT_NEAR(sector.fov_rad * 180.0 / std::numbers::pi, 145.0, 1e-6);
  EXPECT_DOUBLE_EQ(sector.range_m, 80.0);
}

}  // namespace
}  // namespace detoracle
