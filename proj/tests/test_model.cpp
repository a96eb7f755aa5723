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

#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace detoracle {
namespace {

using testing::obs;

TEST(Time, SameTimeUsesMicrosecondTolerance) {
  EXPECT_TRUE(same_time(1.0, 1.0 + 0.9e-6));
  EXPECT_FALSE(same_time(1.0, 1.0 + 2e-6));
}

TEST(Tracks, GroupingSortsByIdThenTime) {
  auto tracks = group_into_tracks({obs("b", 0.2, 0, 0), obs("a", 0.1, 0, 0), obs("b", 0.1, 0, 0)});
  ASSERT_EQ(tracks.size(), 2u);
  EXPECT_EQ(tracks[0].track_id, "a");
  EXPECT_EQ(tracks[1].track_id, "b");
  EXPECT_DOUBLE_EQ(tracks[1].start_time(), 0.1);
  EXPECT_DOUBLE_EQ(tracks[1].end_time(), 0.2);
}

TEST(Validation, WellFormedRecordingHasNoViolations) {
  auto r = testing::rec(Role::kRes, {obs("a", 0.0, 1, 2), obs("a", 0.1, 1, 2)}, std::vector<double>{0.0, 0.1});
  EXPECT_TRUE(validate_recording(r).empty());
}

TEST(Validation, ReportsEachBrokenInvariant) {
  auto o = obs("a", 0.0, 0, 0);
  o.length = -1.0;
  o.existence_conf = 1.5;
  o.pos_cov = Mat2{1.0, 0.5, 0.2, 1.0};
  const auto v = validate_observation(o);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NE(v[0].message.find("length"), std::string::npos);
  EXPECT_NE(v[1].message.find("symmetric"), std::string::npos);
  EXPECT_NE(v[2].message.find("existence_conf"), std::string::npos);
}

TEST(Validation, NonPsdCovarianceIsRejected) {
  auto o = obs("a", 0.0, 0, 0);
  o.pos_cov = Mat2{1.0, 2.0, 2.0, 1.0};  // eigenvalues 3 and -1
  const auto v = validate_observation(o);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("positive semi-definite"), std::string::npos);
}

TEST(Validation, DuplicateAndDecreasingTimestamps) {
  Recording r;
  r.tracks.push_back(Track{"a", {obs("a", 0.1, 0, 0), obs("a", 0.1, 0, 0), obs("a", 0.0, 0, 0)}});
  r.frame_times = std::vector<double>{0.0, 0.0};
  const auto v = validate_recording(r);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].message, "duplicated timestamp");
  EXPECT_EQ(v[1].message, "timestamps not strictly increasing");
  EXPECT_EQ(v[2].message, "frame_times not strictly increasing");
}

TEST(RecordingIo, RoundTripPreservesContent) {
  auto a = obs("a", 0.0, 1.5, -2.25, "pedestrian", 0.6, 0.5, 0.3);
  a.vx = 1.0;
  a.pos_cov = Mat2::diag(0.25, 0.5);
  a.existence_conf = 0.75;
  a.class_confs = std::map<std::string, double>{{"pedestrian", 0.7}, {"bicycle", 0.3}};
  auto r = testing::rec(Role::kSut, {a, obs("b", 0.1, 3, 4)}, std::vector<double>{0.0, 0.1});
  r.sensor_meta = {{"sensor", "front"}};
  std::stringstream ss;
  write_recording(ss, r);
  const Recording back = read_recording(ss, Role::kRes);
  EXPECT_EQ(back.role, Role::kSut);
  EXPECT_EQ(back.sensor_meta, r.sensor_meta);
  EXPECT_EQ(back.frame_times, r.frame_times);
  ASSERT_EQ(back.tracks.size(), 2u);
  EXPECT_EQ(back.tracks[0].observations[0], a);
}

TEST(RecordingIo, ParseErrorNamesTheLine) {
  std::stringstream ss("{\"meta\": {\"role\": \"ReS\"}}\n{not json\n");
  try {
    read_recording(ss, Role::kRes);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(RecordingIo, UnknownMetaKeyIsASchemaError) {
  std::stringstream ss("{\"meta\": {\"colour\": \"red\"}}\n");
  EXPECT_THROW(read_recording(ss, Role::kRes), SchemaError);
}

TEST(RecordingIo, MissingFileIsAnIoError) {
  EXPECT_THROW(read_recording_file("/nonexistent/rec.jsonl", Role::kRes), OracleError);
}

}  // namespace
}  // namespace detoracle
