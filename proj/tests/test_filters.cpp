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

#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace detoracle {
namespace {

using testing::obs;
using testing::rect;

TEST(Regions, SectorContainment) {
  const Sector s{{0, 0}, 0.0, 10.0, std::numbers::pi / 2.0};  // +-45 degrees
  EXPECT_TRUE(region_contains(s, {5, 0}));
  EXPECT_TRUE(region_contains(s, {5, 4.9}));
  EXPECT_FALSE(region_contains(s, {5, 5.1}));
  EXPECT_FALSE(region_contains(s, {10.1, 0}));
  EXPECT_FALSE(region_contains(s, {-1, 0}));
  EXPECT_THROW(validate_region(Sector{{0, 0}, 0.0, -1.0, 1.0}), GeometryError);
}

TEST(Aov, FourWayClassification) {
  AovSpec spec;
  spec.res_aov = rect(0, -10, 50, 10);
  spec.sut_aov = Sector{{0, 0}, 0.0, 30.0, std::numbers::pi};
  EXPECT_EQ(classify_aov(obs("a", 0, 10, 0), spec), AovClass::kBoth);
  EXPECT_EQ(classify_aov(obs("a", 0, 40, 0), spec), AovClass::kResOnly);
  EXPECT_EQ(classify_aov(obs("a", 0, 10, 20), spec), AovClass::kSutOnly);
  EXPECT_EQ(classify_aov(obs("a", 0, -5, 20), spec), AovClass::kNeither);
  EXPECT_EQ(aov_exclusion(obs("a", 0, 40, 0), spec), ExclusionReason::kOutsideSutAov);
  EXPECT_EQ(aov_exclusion(obs("a", 0, 10, 20), spec), ExclusionReason::kOutsideResAov);
  EXPECT_EQ(aov_exclusion(obs("a", 0, 10, 0), spec), std::nullopt);
  spec.require_in_sut_aov = false;
  EXPECT_EQ(aov_exclusion(obs("a", 0, 40, 0), spec), std::nullopt);
}

TEST(Aov, DetectionProbabilityInterpolatesOverRange) {
  ProbMap m{{0, 0}, {{10.0, 1.0}, {30.0, 0.5}, {50.0, 0.0}}};
  EXPECT_DOUBLE_EQ(p_detect(m, {5, 0}), 1.0);
  EXPECT_DOUBLE_EQ(p_detect(m, {20, 0}), 0.75);
  EXPECT_DOUBLE_EQ(p_detect(m, {0, 40}), 0.25);
  EXPECT_DOUBLE_EQ(p_detect(m, {60, 0}), 0.0);
  AovSpec spec;
  spec.sut_prob_map = m;
  spec.res_prob_map = ProbMap{{0, 0}, {{0.0, 0.6}}};
  EXPECT_DOUBLE_EQ(*min_p_detect(obs("a", 0, 20, 0), spec), 0.6);
  EXPECT_DOUBLE_EQ(*min_p_detect(obs("a", 0, 40, 0), spec), 0.25);
}

TEST(Aov, ProbabilityMapMustBeNonIncreasing) {
  EXPECT_THROW(validate_prob_map(ProbMap{{0, 0}, {{0.0, 0.5}, {10.0, 0.7}}}), SchemaError);
  EXPECT_THROW(validate_prob_map(ProbMap{{0, 0}, {}}), SchemaError);
}

TEST(Occlusion, ExcludesAtOrAboveTheta) {
  OcclusionPolicy p;
  p.mode = OcclusionMode::kExclude;
  p.theta = 0.6;
  const std::vector<ObjectObservation> frame{obs("t", 0, 10, 0, "car", 2, 2),
                                             obs("w", 0, 5, 0, "car", 0.2, 1.0)};
  auto r = occlusion_filter(frame, p);
  ASSERT_EQ(r.exclusions.size(), 1u);
  EXPECT_EQ(r.exclusions[0].ref.track_id, "t");
  EXPECT_DOUBLE_EQ(*r.exclusions[0].value, 0.6);
  p.theta = 0.61;
  EXPECT_TRUE(occlusion_filter(frame, p).exclusions.empty());
  p.mode = OcclusionMode::kTestAnyway;
  r = occlusion_filter(frame, p);
  EXPECT_TRUE(r.exclusions.empty());
  EXPECT_DOUBLE_EQ(*r.fractions[0], 0.6);
  p.mode = OcclusionMode::kIgnore;
  EXPECT_FALSE(occlusion_filter(frame, p).fractions[0].has_value());
}

TEST(Occlusion, VisibilityBins) {
  const std::vector<double> edges{0.4, 0.6, 0.8};
  EXPECT_EQ(visibility_bin(0.9, edges), 0u);
  EXPECT_EQ(visibility_bin(0.6, edges), 1u);  // visibility 0.4 opens bin 1
  EXPECT_EQ(visibility_bin(0.3, edges), 2u);
  EXPECT_EQ(visibility_bin(0.0, edges), 3u);
}

TEST(Areas, ExcludeWinsOverInclude) {
  AreaPolicy p;
  p.include = {rect(0, 0, 100, 100)};
  p.exclude = {rect(10, 10, 20, 20)};
  const auto d = area_exclusion(obs("a", 0, 12, 15), p);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->reason, ExclusionReason::kNoTestArea);
  EXPECT_DOUBLE_EQ(*d->boundary_distance_m, 2.0);
  EXPECT_FALSE(area_exclusion(obs("a", 0, 50, 50), p));
  const auto out = area_exclusion(obs("a", 0, 103, 50), p);
  ASSERT_TRUE(out);
  EXPECT_DOUBLE_EQ(*out->boundary_distance_m, 3.0);
}

TEST(Areas, ClassAllowAndRangeLimits) {
  AreaPolicy p;
  p.class_allow = std::set<std::string>{"car", "pedestrian"};
  p.max_range_by_class = {{"pedestrian", 40.0}};
  EXPECT_EQ(area_exclusion(obs("a", 0, 1, 1, "truck"), p)->reason, ExclusionReason::kClassExcluded);
  EXPECT_FALSE(area_exclusion(obs("a", 0, 30, 30, "car"), p));
  const auto far = area_exclusion(obs("a", 0, 30, 40, "pedestrian"), p);
  ASSERT_TRUE(far);
  EXPECT_DOUBLE_EQ(*far->boundary_distance_m, 10.0);
}

TEST(Areas, StageDecidesWhichSideIsFiltered) {
  EXPECT_TRUE(area_filters_role(Stage::kPreReference, Role::kRes));
  EXPECT_FALSE(area_filters_role(Stage::kPreReference, Role::kSut));
  EXPECT_TRUE(area_filters_role(Stage::kPreMatching, Role::kSut));
  EXPECT_FALSE(area_filters_role(Stage::kPostMatching, Role::kRes));

  AreaPolicy p;
  p.exclude = {rect(0, 0, 10, 10)};
  const std::vector<ObjectObservation> res{obs("r", 0, 5, 5)}, sut{obs("s", 0, 5, 5)};
  p.stage = Stage::kPreReference;
  auto r = apply_area_policy(res, sut, p);
  EXPECT_EQ(r.res_kept.size(), 0u);
  EXPECT_EQ(r.sut_kept.size(), 1u);
  p.stage = Stage::kPostMatching;
  r = apply_area_policy(res, sut, p);
  EXPECT_EQ(r.res_kept.size(), 1u);
  EXPECT_EQ(r.sut_kept.size(), 1u);
  EXPECT_EQ(r.exclusions.size(), 2u);
}

TEST(Areas, RecordingFormDropsEmptiedTracks) {
  AreaPolicy p;
  p.exclude = {rect(0, 0, 10, 10)};
  const auto res = testing::rec(Role::kRes, {obs("in", 0, 5, 5), obs("out", 0, 50, 5)});
  const auto out = apply_area_policy(res, testing::rec(Role::kSut, {}), p);
  ASSERT_EQ(out.res.tracks.size(), 1u);
  EXPECT_EQ(out.res.tracks[0].track_id, "out");
}

TEST(Confidence, ThresholdAndArgmax) {
  auto s = obs("s", 0, 0, 0, "car");
  s.existence_conf = 0.4;
  s.class_confs = std::map<std::string, double>{{"car", 0.3}, {"truck", 0.7}};
  const std::vector<ObjectObservation> sut{s, obs("t", 0, 0, 0)};
  const auto r = confidence_gate(sut, 0.5, ClassPolicy::kArgmax);
  ASSERT_EQ(r.kept.size(), 1u);  // no p_exist counts as certain
  EXPECT_EQ(r.kept[0].track_id, "t");
  ASSERT_EQ(r.exclusions.size(), 1u);
  EXPECT_EQ(r.exclusions[0].class_label, "truck");
  EXPECT_TRUE(passes_confidence(s, 0.4));
  EXPECT_THROW(confidence_gate(sut, 1.5, ClassPolicy::kNone), PolicyError);
}

TEST(BorderCases, RescueNeedsPolicyMarginAndOpenGate) {
  ExclusionTag tag;
  tag.reason = ExclusionReason::kNoTestArea;
  tag.boundary_distance_m = 0.4;
  BorderCandidate c{&tag, CostBreakdown{}};
  BorderCaseConfig cfg{BorderPolicy::kHardCut, 0.5};
  EXPECT_EQ(resolve_border_case(c, cfg), BorderOutcome::kStaysExcluded);
  cfg.policy = BorderPolicy::kFuzzyRescue;
  EXPECT_EQ(resolve_border_case(c, cfg), BorderOutcome::kRescued);
  tag.boundary_distance_m = 0.6;
  EXPECT_EQ(resolve_border_case(c, cfg), BorderOutcome::kStaysExcluded);
  tag.boundary_distance_m = 0.4;
  c.cost.gated = true;
  EXPECT_EQ(resolve_border_case(c, cfg), BorderOutcome::kStaysExcluded);
  EXPECT_EQ(resolve_border_case(BorderCandidate{nullptr, {}}, cfg), BorderOutcome::kNoAdjustment);
}

}  // namespace
}  // namespace detoracle
