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

#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "detoracle/detoracle.hpp"

namespace detoracle::testing {

inline ObjectObservation obs(const std::string& id, double t, double x, double y,
                             const std::string& cls = "car", double l = 4.0, double w = 2.0,
                             double yaw = 0.0) {
  ObjectObservation o;
  o.timestamp = t;
  o.track_id = id;
  o.class_label = cls;
  o.x = x;
  o.y = y;
  o.length = l;
  o.width = w;
  o.yaw = yaw;
  return o;
}

inline Recording rec(Role role, std::vector<ObjectObservation> all,
                     std::optional<std::vector<double>> frames = std::nullopt) {
  Recording r;
  r.role = role;
  r.tracks = group_into_tracks(std::move(all));
  r.frame_times = std::move(frames);
  return r;
}

inline Polygon2D rect(double x0, double y0, double x1, double y1) {
  return Polygon2D{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

inline long count(const VerdictLedger& l, EventKind k) {
  long n = 0;
  for (const auto& e : l.events) n += e.kind == k;
  return n;
}

inline std::string dump(const Recording& r) {
  std::ostringstream out;
  write_recording(out, r);
  return out.str();
}

}  // namespace detoracle::testing
