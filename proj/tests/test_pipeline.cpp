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

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace detoracle {
namespace {

using testing::obs;
using testing::rec;

const std::string kConfigDir = DETORACLE_CONFIG_DIR;

void expect_case(const FigureScene& sc, const OracleConfig& base, const ExpectedCase& c) {
  OracleConfig cfg = sc.configure(base);
  c.adjust(cfg);
  const auto ev = evaluate(sc.res, sc.sut, cfg);
  SCOPED_TRACE(c.name);
  EXPECT_EQ(ev.summary.tp, c.counts.tp);
  EXPECT_EQ(ev.summary.fp, c.counts.fp);
  EXPECT_EQ(ev.summary.fn, c.counts.fn);
  EXPECT_EQ(ev.summary.id_switches, c.id_switches);
  for (const auto& o : c.objects) {
    EXPECT_EQ(object_outcome(ev.ledger, o.role, o.id), o.outcome) << to_string(o.role) << " " << o.id;
  }
}

TEST(Pipeline, IdenticalRecordingsAreAllTruePositives) {
  std::vector<ObjectObservation> all;
  for (int k = 0; k < 20; ++k) {
    for (int i = 0; i < 5; ++i) all.push_back(obs("t" + std::to_string(i), 0.1 * k, 10.0 * i, 0.5 * k));
  }
  const auto ev = evaluate(rec(Role::kRes, all), rec(Role::kSut, all), OracleConfig{});
  EXPECT_EQ(ev.summary.tp, 100);
  EXPECT_EQ(ev.summary.fp, 0);
  EXPECT_EQ(ev.summary.fn, 0);
  EXPECT_EQ(ev.summary.id_switches, 0);
  EXPECT_DOUBLE_EQ(*ev.summary.precision, 1.0);
}

TEST(Pipeline, FigureTwoUnderNuscenesStyle) {
  const auto base = load_config(kConfigDir + "/nuscenes_style.json");
  const auto sc = figure2_scene();
  for (const auto& c : sc.cases) expect_case(sc, base, c);
}

TEST(Pipeline, FigureThreeTemporalCases) {
  for (const auto& sc : {figure3_scene_a(), figure3_scene_b()}) {
    for (const auto& c : sc.cases) expect_case(sc, OracleConfig{}, c);
  }
}

TEST(Pipeline, InvalidInputListsEveryViolation) {
  auto bad = obs("a", 0.0, 0, 0);
  bad.length = -1.0;
  auto worse = obs("b", 0.0, 0, 0);
  worse.existence_conf = 1.5;
  try {
    evaluate(rec(Role::kRes, {bad}), rec(Role::kSut, {worse}), OracleConfig{});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_GE(e.details().size(), 2u);
  }
}

TEST(Pipeline, SweepWithoutExistenceConfidencesIsAPolicyError) {
  OracleConfig cfg;
  cfg.probabilistic.sweep_thresholds = 5;
  const auto r = rec(Role::kRes, {obs("a", 0, 0, 0)});
  const auto s = rec(Role::kSut, {obs("a", 0, 0, 0)});
  EXPECT_THROW(evaluate(r, s, cfg), PolicyError);
}

TEST(Pipeline, SweepEvaluatesEvenlySpacedThresholds) {
  OracleConfig cfg;
  cfg.probabilistic.sweep_thresholds = 3;
  auto s = obs("a", 0, 0, 0);
  s.existence_conf = 0.6;
  const auto ev = evaluate(rec(Role::kRes, {obs("a", 0, 0, 0)}), rec(Role::kSut, {s}), cfg);
  ASSERT_TRUE(ev.sweep);
  ASSERT_EQ(ev.sweep->points.size(), 3u);
  EXPECT_DOUBLE_EQ(ev.sweep->points[0].tau_exist, 0.25);
  EXPECT_EQ(ev.sweep->points[1].summary.tp, 1);  // 0.6 >= 0.5
  EXPECT_EQ(ev.sweep->points[2].summary.fn, 1);  // 0.6 < 0.75
  EXPECT_DOUBLE_EQ(*ev.sweep->mean_recall, 2.0 / 3.0);
}

TEST(Pipeline, PostMatchingAreasTagInsteadOfRemoving) {
  OracleConfig cfg;
  cfg.areas.exclude = {testing::rect(20, -5, 30, 5)};
  cfg.areas.stage = Stage::kPostMatching;
  const auto r = rec(Role::kRes, {obs("far", 0, 25, 0), obs("near", 0, 0, 0)});
  const auto s = rec(Role::kSut, {obs("far", 0, 25, 0.5), obs("near", 0, 0, 0)});
  const auto ev = evaluate(r, s, cfg);
  EXPECT_EQ(ev.summary.tp, 1);
  EXPECT_EQ(ev.summary.excluded_post_matching, 1);
  EXPECT_EQ(object_outcome(ev.ledger, Role::kRes, "far"), "excluded:no_test_area+tp");
}

TEST(Pipeline, PreMatchingAreasRemoveBeforeMatching) {
  OracleConfig cfg;
  cfg.areas.exclude = {testing::rect(20, -5, 30, 5)};
  const auto r = rec(Role::kRes, {obs("far", 0, 25, 0)});
  const auto s = rec(Role::kSut, {obs("far", 0, 25, 0.5)});
  const auto ev = evaluate(r, s, cfg);
  EXPECT_EQ(ev.summary.tp + ev.summary.fp + ev.summary.fn, 0);
  EXPECT_EQ(object_outcome(ev.ledger, Role::kRes, "far"), "excluded:no_test_area");
}

TEST(Pipeline, LowDetectionProbabilityGoesToTheAnnex) {
  OracleConfig cfg;
  cfg.aov.sut_prob_map = ProbMap{{0, 0}, {{10.0, 0.9}, {50.0, 0.1}}};
  cfg.aov.p_min = 0.5;
  const auto r = rec(Role::kRes, {obs("close", 0, 5, 0), obs("far", 0, 45, 0)});
  const auto s = rec(Role::kSut, {obs("close", 0, 5, 0)});
  const auto ev = evaluate(r, s, cfg);
  EXPECT_EQ(ev.summary.tp, 1);
  EXPECT_EQ(ev.summary.fn, 0);
  EXPECT_EQ(ev.summary.annex.fn, 1);
}

TEST(Pipeline, LatencyShowsUpAsInitialMisses) {
  OracleConfig cfg;
  cfg.temporal.basis = TimestampBasis::kAvailability;
  cfg.temporal.sut_latency_s = 0.3;
  std::vector<ObjectObservation> all;
  std::vector<double> frames;
  for (int k = 0; k < 10; ++k) {
    all.push_back(obs("a", 0.1 * k, 10, 0));
    frames.push_back(0.1 * k);
  }
  const auto ev = evaluate(rec(Role::kRes, all), rec(Role::kSut, all, frames), cfg);
  EXPECT_EQ(ev.summary.fn, 3);
  EXPECT_EQ(ev.summary.tp, 7);
  EXPECT_NEAR(*ev.summary.mean_tp_delay_s, 0.3, 1e-9);
}

}  // namespace
}  // namespace detoracle
