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

MatchEvent ev(EventKind k, double t, std::string sut, std::string res, std::string cls = "car") {
  MatchEvent e;
  e.kind = k;
  e.timestamp = t;
  e.sut_id = std::move(sut);
  e.res_id = std::move(res);
  if (!e.sut_id.empty()) e.sut_class = cls;
  if (!e.res_id.empty()) e.res_class = cls;
  return e;
}

TEST(Aggregate, EmptyLedger) {
  const auto s = aggregate(VerdictLedger{});
  EXPECT_EQ(s.tp + s.fp + s.fn, 0);
  EXPECT_FALSE(s.precision);
  EXPECT_FALSE(s.recall);
  EXPECT_FALSE(s.tid_s);
}

TEST(Aggregate, PrecisionAndRecall) {
  VerdictLedger l;
  l.events = {ev(EventKind::kTp, 0, "a", "A"), ev(EventKind::kTp, 0.1, "a", "A"),
              ev(EventKind::kTp, 0.2, "a", "A"), ev(EventKind::kFp, 0.2, "b", ""),
              ev(EventKind::kFn, 0.3, "", "A", "truck")};
  const auto s = aggregate(l);
  EXPECT_DOUBLE_EQ(*s.precision, 0.75);
  EXPECT_DOUBLE_EQ(*s.recall, 0.75);
  EXPECT_EQ(s.per_class.at("car").tp, 3);
  EXPECT_EQ(s.per_class.at("truck").fn, 1);
}

TEST(Aggregate, ConservationViolationIsDetected) {
  VerdictLedger l;
  l.events = {ev(EventKind::kTp, 0, "a", "A"), ev(EventKind::kFp, 0, "a", "")};
  EXPECT_THROW(aggregate(l), OracleError);
}

TEST(Aggregate, TrackInitialisationDuration) {
  // ReS from 0.0; SUT joins at 0.3 s.
  std::vector<ObjectObservation> res, sut;
  for (int k = 0; k <= 10; ++k) {
    res.push_back(obs("r", 0.1 * k, 0, 0));
    if (k >= 3) sut.push_back(obs("s", 0.1 * k, 0, 0));
  }
  std::vector<double> frames;
  for (int k = 0; k <= 10; ++k) frames.push_back(0.1 * k);
  const auto s = aggregate(evaluate_ledger(testing::rec(Role::kRes, res),
                                           testing::rec(Role::kSut, sut, frames), OracleConfig{}));
  EXPECT_NEAR(*s.tid_s, 0.3, 1e-9);
  EXPECT_EQ(s.fn, 3);
  EXPECT_NEAR(*s.lgd_s, 0.0, 1e-12);  // no gap after the first TP
}

TEST(Aggregate, LongestGapDuration) {
  VerdictLedger l;
  for (int k = 0; k < 10; ++k) {
    const bool miss = k == 2 || k == 5 || k == 6 || k == 9;
    l.events.push_back(miss ? ev(EventKind::kFn, 0.1 * k, "", "A") : ev(EventKind::kTp, 0.1 * k, "a", "A"));
  }
  // Runs: {2} -> 0.1 s, {5,6} -> 0.2 s, trailing {9} -> 0.1 s.
  EXPECT_NEAR(*aggregate(l).lgd_s, 0.2, 1e-9);
}

TEST(Aggregate, DelayOnlyUnderAvailability) {
  VerdictLedger l;
  auto tp = ev(EventKind::kTp, 0, "a", "A");
  tp.delay_s = 0.2;
  l.events = {tp};
  EXPECT_FALSE(aggregate(l).mean_tp_delay_s);
  l.config_echo.temporal.basis = TimestampBasis::kAvailability;
  l.config_echo.temporal.sut_latency_s = 0.2;
  EXPECT_DOUBLE_EQ(*aggregate(l).mean_tp_delay_s, 0.2);
}

TEST(Aggregate, PostMatchingTagsLeaveTheCounts) {
  VerdictLedger l;
  l.events = {ev(EventKind::kTp, 0, "a", "A"), ev(EventKind::kFp, 0, "b", "")};
  ExclusionTag tag;
  tag.stage = Stage::kPostMatching;
  tag.ref = {Role::kSut, "b", 0.0};
  l.exclusions = {tag};
  const auto s = aggregate(l);
  EXPECT_EQ(s.fp, 0);
  EXPECT_EQ(s.excluded_post_matching, 1);
}

TEST(Mismatch, WrongClassFlagVersusSplit) {
  auto tp = ev(EventKind::kTp, 0, "a", "A");
  tp.sut_class = "truck";
  const std::vector<MatchEvent> events{tp};
  const auto flagged = classify_mismatch(events, MismatchPolicy::kTpWrongClass);
  ASSERT_EQ(flagged.size(), 1u);
  EXPECT_TRUE(flagged[0].has(kFlagWrongClass));
  const auto split = classify_mismatch(events, MismatchPolicy::kFpPlusFn);
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split[0].kind, EventKind::kFp);
  EXPECT_EQ(split[1].kind, EventKind::kFn);
}

TEST(Mismatch, SplitKeepsOneVerdictPerUnit) {
  // n:1 pairing: a (wrong class) and b (right class) share ReS A.
  auto wrong = ev(EventKind::kTp, 0, "a", "A");
  wrong.sut_class = "truck";
  const std::vector<MatchEvent> events{wrong, ev(EventKind::kTp, 0, "b", "A")};
  const auto out = classify_mismatch(events, MismatchPolicy::kFpPlusFn);
  ASSERT_EQ(out.size(), 2u);  // FN for A dropped: A still has a TP
  VerdictLedger l;
  l.events = out;
  const auto s = aggregate(l);
  EXPECT_EQ(s.tp, 1);
  EXPECT_EQ(s.fp, 1);
  EXPECT_EQ(s.fn, 0);
}

}  // namespace
}  // namespace detoracle
