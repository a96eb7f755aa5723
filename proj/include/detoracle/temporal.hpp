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

// Temporal alignment: timestamp basis (acquisition vs availability), linear
// resampling of ReS tracks onto SUT sample times, and overhang handling at
// track beginnings and ends. No extrapolation is ever performed.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detoracle/error.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/model.hpp"

namespace detoracle {

enum class TimestampBasis { kAcquisition, kAvailability };
enum class OverhangMode { kDiscard, kFnFp, kThreshold };

struct TemporalPolicy {
  TimestampBasis basis = TimestampBasis::kAcquisition;
  std::optional<double> sut_latency_s;                       // constant latency
  std::vector<std::pair<double, double>> sut_latency_series;  // (acquisition t, latency)
  OverhangMode overhang = OverhangMode::kFnFp;
  std::optional<double> dt_max_s;  // required for kThreshold
  double sync_uncertainty_s = 0.0;
  double sync_accuracy_loss_m = 0.0;  // documentation only
  bool inflate_threshold = false;     // widen the gate by sync_uncertainty_s * |v_res|

  bool has_latency() const { return sut_latency_s.has_value() || !sut_latency_series.empty(); }

  // Latency for a SUT sample acquired at `t`; a series applies its last entry
  // at or before `t` (or its first entry for earlier samples).
  double latency_at(double t) const {
    if (sut_latency_s) return *sut_latency_s;
    if (sut_latency_series.empty()) return 0.0;
    double value = sut_latency_series.front().second;
    for (const auto& [when, latency] : sut_latency_series) {
      if (when <= t + kTimeTolerance) value = latency;
      else break;
    }
    return value;
  }

  friend bool operator==(const TemporalPolicy&, const TemporalPolicy&) = default;
};

struct RecordingPair {
  Recording res;
  Recording sut;
};

// Under the availability basis SUT samples are restamped at acquisition time
// plus latency, so computation time shows up as missed initial frames.
inline RecordingPair apply_timestamp_basis(RecordingPair recs, const TemporalPolicy& policy) {
  if (policy.basis == TimestampBasis::kAcquisition) return recs;
  if (!policy.has_latency()) {
    throw PolicyError("availability timestamp basis requires temporal.sut_latency_s");
  }
  for (auto& track : recs.sut.tracks) {
    for (auto& o : track.observations) o.timestamp += policy.latency_at(o.timestamp);
  }
  if (recs.sut.frame_times) {
    for (auto& t : *recs.sut.frame_times) t += policy.latency_at(t);
  }
  return recs;
}

enum class OverhangSide { kLead, kTail };

inline const char* to_string(OverhangSide s) { return s == OverhangSide::kLead ? "lead" : "tail"; }

struct SyncedSample {
  ObjectObservation obs;  // timestamp equals the SUT sample time
  bool interpolated = false;
};

struct ResOverhang {
  ObjectObservation obs;
  OverhangSide side = OverhangSide::kLead;
  double offset_s = 0.0;  // distance to the covered span
};

struct SutOverhang {
  double timestamp = 0.0;
  OverhangSide side = OverhangSide::kLead;
  double offset_s = 0.0;
};

struct SyncedPair {
  std::string res_track_id;
  std::vector<double> sut_timestamps;
  std::vector<SyncedSample> resampled;
  std::vector<ResOverhang> res_overhangs;  // ReS observations outside the resampled span
  std::vector<SutOverhang> sut_overhangs;  // SUT samples outside the ReS track span
};

namespace detail {

inline double lerp(double a, double b, double w) { return a + w * (b - a); }

inline ObjectObservation interpolate(const ObjectObservation& a, const ObjectObservation& b,
                                     double t) {
  const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
  ObjectObservation o = w <= 0.5 ? a : b;  // nearest neighbour for extent, class, confidences
  o.timestamp = t;
  o.x = lerp(a.x, b.x, w);
  o.y = lerp(a.y, b.y, w);
  o.vx = lerp(a.vx, b.vx, w);
  o.vy = lerp(a.vy, b.vy, w);
  o.yaw = wrap_angle(a.yaw + w * wrap_angle(b.yaw - a.yaw));
  if (a.pos_cov && b.pos_cov) {
    o.pos_cov = Mat2{lerp(a.pos_cov->xx, b.pos_cov->xx, w), lerp(a.pos_cov->xy, b.pos_cov->xy, w),
                     lerp(a.pos_cov->yx, b.pos_cov->yx, w), lerp(a.pos_cov->yy, b.pos_cov->yy, w)};
  }
  return o;
}

}  // namespace detail

// Resamples `res` at the SUT times inside its span. `sut_timestamps` must be
// sorted ascending.
inline SyncedPair synchronize(const Track& res, std::span<const double> sut_timestamps) {
  SyncedPair out;
  out.res_track_id = res.track_id;
  out.sut_timestamps.assign(sut_timestamps.begin(), sut_timestamps.end());
  const auto& obs = res.observations;
  if (obs.empty()) return out;
  const double t0 = obs.front().timestamp;
  const double t1 = obs.back().timestamp;

  std::size_t k = 0;
  for (const double t : sut_timestamps) {
    if (t < t0 - kTimeTolerance) {
      out.sut_overhangs.push_back({t, OverhangSide::kLead, t0 - t});
      continue;
    }
    if (t > t1 + kTimeTolerance) {
      out.sut_overhangs.push_back({t, OverhangSide::kTail, t - t1});
      continue;
    }
    while (k + 1 < obs.size() && obs[k + 1].timestamp <= t + kTimeTolerance) ++k;
    if (same_time(obs[k].timestamp, t)) {
      SyncedSample s{obs[k], false};
      s.obs.timestamp = t;
      out.resampled.push_back(std::move(s));
    } else if (k + 1 < obs.size()) {
      out.resampled.push_back({detail::interpolate(obs[k], obs[k + 1], t), true});
    } else {
      // Only reachable within tolerance of t1.
      SyncedSample s{obs.back(), false};
      s.obs.timestamp = t;
      out.resampled.push_back(std::move(s));
    }
  }

  if (out.resampled.empty()) {
    for (const auto& o : obs) {
      double offset = std::numeric_limits<double>::infinity();
      for (const double t : sut_timestamps) offset = std::min(offset, std::abs(t - o.timestamp));
      out.res_overhangs.push_back({o, OverhangSide::kLead, offset});
    }
    return out;
  }
  const double first = out.resampled.front().obs.timestamp;
  const double last = out.resampled.back().obs.timestamp;
  for (const auto& o : obs) {
    if (o.timestamp < first - kTimeTolerance) {
      out.res_overhangs.push_back({o, OverhangSide::kLead, first - o.timestamp});
    } else if (o.timestamp > last + kTimeTolerance) {
      out.res_overhangs.push_back({o, OverhangSide::kTail, o.timestamp - last});
    }
  }
  return out;
}

enum class OverhangOutcome { kDiscarded, kCounted };

// Counted overhangs become FNs (ReS side) or FPs (SUT side).
inline OverhangOutcome overhang_outcome(double offset_s, const TemporalPolicy& policy) {
  switch (policy.overhang) {
    case OverhangMode::kDiscard:
      return OverhangOutcome::kDiscarded;
    case OverhangMode::kFnFp:
      return OverhangOutcome::kCounted;
    case OverhangMode::kThreshold:
      if (!policy.dt_max_s || !(*policy.dt_max_s > 0.0)) {
        throw PolicyError("overhang=threshold requires dt_max_s > 0");
      }
      return offset_s < *policy.dt_max_s ? OverhangOutcome::kDiscarded : OverhangOutcome::kCounted;
  }
  return OverhangOutcome::kCounted;
}

struct OverhangVerdict {
  Role role = Role::kRes;
  double timestamp = 0.0;
  OverhangSide side = OverhangSide::kLead;
  double offset_s = 0.0;
  OverhangOutcome outcome = OverhangOutcome::kCounted;
};

inline std::vector<OverhangVerdict> resolve_overhangs(const SyncedPair& pair,
                                                      const TemporalPolicy& policy) {
  std::vector<OverhangVerdict> out;
  for (const auto& o : pair.res_overhangs) {
    out.push_back({Role::kRes, o.obs.timestamp, o.side, o.offset_s,
                   overhang_outcome(o.offset_s, policy)});
  }
  for (const auto& o : pair.sut_overhangs) {
    out.push_back({Role::kSut, o.timestamp, o.side, o.offset_s,
                   overhang_outcome(o.offset_s, policy)});
  }
  return out;
}

}  // namespace detoracle
