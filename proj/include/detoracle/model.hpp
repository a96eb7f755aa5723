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

// Domain types shared by every stage of the oracle: observations, tracks,
// recordings, and recording validation.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace detoracle {

// Two timestamps closer than this are the same sample time. Large enough to
// absorb rounding of absolute epoch seconds, small enough for any sensor rate.
inline constexpr double kTimeTolerance = 1e-6;

inline bool same_time(double a, double b) {
  return std::abs(a - b) <= kTimeTolerance;
}

// Row-major 2x2 matrix [[xx, xy], [yx, yy]].
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }

  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * yx; }
  Mat2 transposed() const { return {xx, yx, xy, yy}; }

  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.xx - b.xx, a.xy - b.xy, a.yx - b.yx, a.yy - b.yy};
  }
  friend Mat2 operator*(double s, const Mat2& a) {
    return {s * a.xx, s * a.xy, s * a.yx, s * a.yy};
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.xx * b.xx + a.xy * b.yx, a.xx * b.xy + a.xy * b.yy,
            a.yx * b.xx + a.yy * b.yx, a.yx * b.xy + a.yy * b.yy};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

enum class Role { kSut, kRes };

inline const char* to_string(Role r) { return r == Role::kSut ? "SUT" : "ReS"; }

// One object in one frame, bird's-eye view.
struct ObjectObservation {
  double timestamp = 0.0;  // seconds, shared epoch
  std::string track_id;
  std::string class_label;
  double x = 0.0;  // meters
  double y = 0.0;
  double length = 1.0;
  double width = 1.0;
  double yaw = 0.0;  // radians
  double vx = 0.0;   // meters/second
  double vy = 0.0;
  std::optional<Mat2> pos_cov;  // meters^2
  std::optional<double> existence_conf;
  std::optional<std::map<std::string, double>> class_confs;

  friend bool operator==(const ObjectObservation&,
                         const ObjectObservation&) = default;
};

struct Track {
  std::string track_id;
  std::vector<ObjectObservation> observations;  // time-ordered

  double start_time() const { return observations.front().timestamp; }
  double end_time() const { return observations.back().timestamp; }
};

struct Recording {
  Role role = Role::kSut;
  std::vector<Track> tracks;
  std::map<std::string, std::string> sensor_meta;
  std::optional<std::vector<double>> frame_times;

  std::size_t observation_count() const {
    std::size_t n = 0;
    for (const auto& t : tracks) n += t.observations.size();
    return n;
  }

  const Track* find_track(const std::string& id) const {
    for (const auto& t : tracks) {
      if (t.track_id == id) return &t;
    }
    return nullptr;
  }
};

// Groups loose observations into tracks, sorted by id and time. Duplicate
// (id, timestamp) pairs are preserved so validation can report them.
inline std::vector<Track> group_into_tracks(
    std::vector<ObjectObservation> observations) {
  std::stable_sort(observations.begin(), observations.end(),
                   [](const ObjectObservation& a, const ObjectObservation& b) {
                     if (a.track_id != b.track_id) return a.track_id < b.track_id;
                     return a.timestamp < b.timestamp;
                   });
  std::vector<Track> tracks;
  for (auto& obs : observations) {
    if (tracks.empty() || tracks.back().track_id != obs.track_id) {
      tracks.push_back(Track{obs.track_id, {}});
    }
    tracks.back().observations.push_back(std::move(obs));
  }
  return tracks;
}

struct Violation {
  std::string track_id;
  std::optional<double> timestamp;
  std::string message;

  std::string describe() const {
    std::ostringstream os;
    os << "track '" << track_id << "'";
    if (timestamp) os << " t=" << *timestamp;
    os << ": " << message;
    return os.str();
  }
};

namespace detail {

inline bool is_psd(const Mat2& m, double tol = 1e-12) {
  if (std::abs(m.xy - m.yx) > tol * std::max(1.0, std::abs(m.xy))) return false;
  const double tr = m.trace();
  const double det = m.det();
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lambda_min = tr / 2.0 - disc;
  return lambda_min >= -tol * std::max(1.0, std::abs(tr));
}

}  // namespace detail

inline std::vector<Violation> validate_observation(const ObjectObservation& o) {
  std::vector<Violation> out;
  auto add = [&](std::string msg) {
    out.push_back({o.track_id, o.timestamp, std::move(msg)});
  };
  if (!std::isfinite(o.timestamp)) add("timestamp is not finite");
  if (o.track_id.empty()) add("empty track id");
  for (double v : {o.x, o.y, o.yaw, o.vx, o.vy, o.length, o.width}) {
    if (!std::isfinite(v)) {
      add("non-finite state value");
      break;
    }
  }
  if (!(o.length > 0.0)) add("length must be > 0");
  if (!(o.width > 0.0)) add("width must be > 0");
  if (o.pos_cov) {
    const Mat2& c = *o.pos_cov;
    if (std::abs(c.xy - c.yx) > 1e-12 * std::max(1.0, std::abs(c.xy))) {
      add("pos_cov is not symmetric");
    } else if (!detail::is_psd(c)) {
      add("pos_cov is not positive semi-definite");
    }
  }
  if (o.existence_conf &&
      !(*o.existence_conf >= 0.0 && *o.existence_conf <= 1.0)) {
    add("existence_conf outside [0,1]");
  }
  if (o.class_confs) {
    for (const auto& [cls, p] : *o.class_confs) {
      if (!(p >= 0.0 && p <= 1.0)) add("class_confs['" + cls + "'] outside [0,1]");
    }
  }
  return out;
}

// Reports every invariant violation of `rec`. Empty iff well-formed.
inline std::vector<Violation> validate_recording(const Recording& rec) {
  std::vector<Violation> out;
  std::map<std::string, int> seen_ids;
  for (const auto& track : rec.tracks) {
    if (++seen_ids[track.track_id] == 2) {
      out.push_back({track.track_id, std::nullopt,
                     "track id appears in more than one track"});
    }
    if (track.observations.empty()) {
      out.push_back({track.track_id, std::nullopt, "track has no observations"});
    }
    for (std::size_t i = 0; i < track.observations.size(); ++i) {
      const auto& o = track.observations[i];
      if (o.track_id != track.track_id) {
        out.push_back({track.track_id, o.timestamp,
                       "observation id '" + o.track_id + "' differs from track id"});
      }
      auto v = validate_observation(o);
      out.insert(out.end(), v.begin(), v.end());
      if (i > 0) {
        const double prev = track.observations[i - 1].timestamp;
        if (o.timestamp == prev) {
          out.push_back({track.track_id, o.timestamp, "duplicated timestamp"});
        } else if (o.timestamp < prev) {
          out.push_back({track.track_id, o.timestamp,
                         "timestamps not strictly increasing"});
        }
      }
    }
  }
  if (rec.frame_times) {
    for (std::size_t i = 1; i < rec.frame_times->size(); ++i) {
      if (!((*rec.frame_times)[i] > (*rec.frame_times)[i - 1])) {
        out.push_back({"<frame_times>", (*rec.frame_times)[i],
                       "frame_times not strictly increasing"});
      }
    }
  }
  return out;
}

}  // namespace detoracle
