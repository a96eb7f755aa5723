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

// Inclusion/exclusion of observations: areas of vision, occlusion, relevant
// and no-test areas, probabilistic detection regions, confidence gates, and
// the border corner case between matching and area filtering.
//
// Per frame the filters run in a fixed order and the first one that fires
// names the single exclusion reason:
//   aov -> occlusion -> areas -> probabilistic_aov -> confidence

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "detoracle/error.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/model.hpp"

namespace detoracle {

inline const std::vector<std::string>& filter_order() {
  static const std::vector<std::string> kOrder = {"aov", "occlusion", "areas",
                                                  "probabilistic_aov", "confidence"};
  return kOrder;
}

// ---------------------------------------------------------------------------
// Exclusion bookkeeping

enum class ExclusionReason {
  kOutsideResAov,
  kOutsideSutAov,
  kOccluded,
  kNoTestArea,
  kClassExcluded,
  kBelowPMin,
  kBelowConf,
  kOverhang,
};

enum class Stage { kPreReference, kPreMatching, kPostMatching, kSynchronization };

inline const char* to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::kOutsideResAov: return "outside_res_aov";
    case ExclusionReason::kOutsideSutAov: return "outside_sut_aov";
    case ExclusionReason::kOccluded: return "occluded";
    case ExclusionReason::kNoTestArea: return "no_test_area";
    case ExclusionReason::kClassExcluded: return "class_excluded";
    case ExclusionReason::kBelowPMin: return "below_p_min";
    case ExclusionReason::kBelowConf: return "below_conf";
    case ExclusionReason::kOverhang: return "overhang";
  }
  return "?";
}

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::kPreReference: return "pre_reference";
    case Stage::kPreMatching: return "pre_matching";
    case Stage::kPostMatching: return "post_matching";
    case Stage::kSynchronization: return "synchronization";
  }
  return "?";
}

// Identifies one observation (or resampled sample) of one recording.
struct ObsRef {
  Role role = Role::kRes;
  std::string track_id;
  double timestamp = 0.0;

  friend bool operator==(const ObsRef&, const ObsRef&) = default;
};

struct ExclusionTag {
  ExclusionReason reason = ExclusionReason::kNoTestArea;
  Stage stage = Stage::kPreMatching;
  ObsRef ref;
  std::string class_label;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> value;               // occlusion fraction, p_detect, confidence
  std::optional<double> boundary_distance_m;  // area exclusions with a boundary

  friend bool operator==(const ExclusionTag&, const ExclusionTag&) = default;
};

inline ExclusionTag make_tag(ExclusionReason reason, Stage stage, Role role,
                             const ObjectObservation& o) {
  ExclusionTag t;
  t.reason = reason;
  t.stage = stage;
  t.ref = {role, o.track_id, o.timestamp};
  t.class_label = o.class_label;
  t.x = o.x;
  t.y = o.y;
  return t;
}

// ---------------------------------------------------------------------------
// Areas of vision

struct Everywhere {
  friend bool operator==(Everywhere, Everywhere) = default;
};

struct Sector {
  Vec2 origin;
  double heading_rad = 0.0;
  double range_m = 1.0;
  double fov_rad = 2.0 * std::numbers::pi;
  friend bool operator==(const Sector&, const Sector&) = default;
};

using Region = std::variant<Everywhere, Polygon2D, Sector>;

inline void validate_region(const Region& r) {
  if (const auto* p = std::get_if<Polygon2D>(&r)) validate_polygon(*p);
  if (const auto* s = std::get_if<Sector>(&r)) {
    if (!(s->range_m > 0.0)) throw GeometryError("sector range_m must be > 0");
    if (!(s->fov_rad > 0.0 && s->fov_rad <= 2.0 * std::numbers::pi + 1e-12)) {
      throw GeometryError("sector fov_rad must lie in (0, 2*pi]");
    }
  }
}

inline bool region_contains(const Region& r, Vec2 p) {
  if (std::holds_alternative<Everywhere>(r)) return true;
  if (const auto* poly = std::get_if<Polygon2D>(&r)) return point_in_polygon(p, *poly);
  const auto& s = std::get<Sector>(r);
  const Vec2 d = p - s.origin;
  if (norm(d) > s.range_m) return false;
  if (norm(d) == 0.0) return true;
  const double az = wrap_angle(std::atan2(d.y, d.x) - s.heading_rad);
  return std::abs(az) <= 0.5 * s.fov_rad + 1e-12;
}

// Piecewise-linear detection probability over range from `origin`.
struct ProbMap {
  Vec2 origin;
  std::vector<std::pair<double, double>> points;  // (range_m, p), increasing range

  friend bool operator==(const ProbMap&, const ProbMap&) = default;
};

inline void validate_prob_map(const ProbMap& m) {
  if (m.points.empty()) throw SchemaError("prob_map needs at least one point");
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    const auto [r, p] = m.points[i];
    if (!(r >= 0.0) || !(p >= 0.0 && p <= 1.0)) {
      throw SchemaError("prob_map point out of range");
    }
    if (i > 0) {
      if (!(r > m.points[i - 1].first)) throw SchemaError("prob_map ranges must increase");
      if (p > m.points[i - 1].second) throw SchemaError("prob_map must be non-increasing in range");
    }
  }
}

inline double p_detect(const ProbMap& m, Vec2 p) {
  const double r = norm(p - m.origin);
  const auto& pts = m.points;
  if (r <= pts.front().first) return pts.front().second;
  if (r >= pts.back().first) return pts.back().second;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (r <= pts[i].first) {
      const double w = (r - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return pts[i - 1].second + w * (pts[i].second - pts[i - 1].second);
    }
  }
  return pts.back().second;
}

struct AovSpec {
  Region res_aov = Everywhere{};
  Region sut_aov = Everywhere{};
  bool require_in_res_aov = true;  // exclude anything the ReS cannot see
  bool require_in_sut_aov = true;  // exclude anything the SUT cannot see
  std::optional<ProbMap> res_prob_map;
  std::optional<ProbMap> sut_prob_map;
  double p_min = 0.0;

  friend bool operator==(const AovSpec&, const AovSpec&) = default;
};

enum class AovClass { kBoth, kResOnly, kSutOnly, kNeither };

inline const char* to_string(AovClass c) {
  switch (c) {
    case AovClass::kBoth: return "both";
    case AovClass::kResOnly: return "res_only";
    case AovClass::kSutOnly: return "sut_only";
    case AovClass::kNeither: return "neither";
  }
  return "?";
}

inline AovClass classify_aov(const ObjectObservation& obs, const AovSpec& spec) {
  const Vec2 p = position(obs);
  const bool in_res = region_contains(spec.res_aov, p);
  const bool in_sut = region_contains(spec.sut_aov, p);
  if (in_res && in_sut) return AovClass::kBoth;
  if (in_res) return AovClass::kResOnly;
  if (in_sut) return AovClass::kSutOnly;
  return AovClass::kNeither;
}

inline std::optional<ExclusionReason> aov_exclusion(const ObjectObservation& obs,
                                                    const AovSpec& spec) {
  const AovClass c = classify_aov(obs, spec);
  const bool in_res = c == AovClass::kBoth || c == AovClass::kResOnly;
  const bool in_sut = c == AovClass::kBoth || c == AovClass::kSutOnly;
  if (spec.require_in_res_aov && !in_res) return ExclusionReason::kOutsideResAov;
  if (spec.require_in_sut_aov && !in_sut) return ExclusionReason::kOutsideSutAov;
  return std::nullopt;
}

// Lowest detection probability any system with a map assigns to `obs`.
inline std::optional<double> min_p_detect(const ObjectObservation& obs, const AovSpec& spec) {
  std::optional<double> p;
  for (const auto* m : {&spec.res_prob_map, &spec.sut_prob_map}) {
    if (*m) {
      const double v = p_detect(**m, position(obs));
      p = p ? std::min(*p, v) : v;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Occlusion

enum class OcclusionMode { kIgnore, kExclude, kTestAnyway };

struct OcclusionPolicy {
  OcclusionMode mode = OcclusionMode::kIgnore;
  double theta = 1.0;  // exclude when fraction >= theta
  Vec2 viewer;         // SUT sensor origin in the SUT frame
  std::vector<double> visibility_bin_edges{0.4, 0.6, 0.8};

  friend bool operator==(const OcclusionPolicy&, const OcclusionPolicy&) = default;
};

struct OcclusionResult {
  std::vector<ExclusionTag> exclusions;
  std::vector<std::optional<double>> fractions;  // per input; empty when ignored
};

// Only other ReS footprints block the SUT's line of sight.
inline OcclusionResult occlusion_filter(std::span<const ObjectObservation> res_frame,
                                        const OcclusionPolicy& policy) {
  OcclusionResult out;
  out.fractions.assign(res_frame.size(), std::nullopt);
  if (policy.mode == OcclusionMode::kIgnore) return out;
  std::vector<ObjectObservation> blockers;
  for (std::size_t i = 0; i < res_frame.size(); ++i) {
    blockers.clear();
    for (std::size_t k = 0; k < res_frame.size(); ++k) {
      if (k != i) blockers.push_back(res_frame[k]);
    }
    const double f = occlusion_fraction(policy.viewer, res_frame[i], blockers);
    out.fractions[i] = f;
    if (policy.mode == OcclusionMode::kExclude && f >= policy.theta) {
      auto tag = make_tag(ExclusionReason::kOccluded, Stage::kPreMatching, Role::kRes,
                          res_frame[i]);
      tag.value = f;
      out.exclusions.push_back(std::move(tag));
    }
  }
  return out;
}

// Bin index of a visibility value (1 - occlusion fraction) given edges.
inline std::size_t visibility_bin(double occlusion, const std::vector<double>& edges) {
  const double visibility = 1.0 - occlusion;
  std::size_t bin = 0;
  while (bin < edges.size() && visibility >= edges[bin]) ++bin;
  return bin;
}

// ---------------------------------------------------------------------------
// Relevant areas and no-test areas

struct AreaPolicy {
  std::vector<Polygon2D> include;  // empty = everywhere
  std::vector<Polygon2D> exclude;  // wins over include
  std::optional<std::set<std::string>> class_allow;
  std::map<std::string, double> max_range_by_class;
  Vec2 range_origin;
  Stage stage = Stage::kPreMatching;

  friend bool operator==(const AreaPolicy&, const AreaPolicy&) = default;
};

struct AreaDecision {
  ExclusionReason reason;
  std::optional<double> boundary_distance_m;
};

inline std::optional<AreaDecision> area_exclusion(const ObjectObservation& obs,
                                                  const AreaPolicy& policy) {
  const Vec2 p = position(obs);
  for (const auto& poly : policy.exclude) {
    if (point_in_polygon(p, poly)) {
      return AreaDecision{ExclusionReason::kNoTestArea, distance_to_boundary(p, poly)};
    }
  }
  if (!policy.include.empty()) {
    bool inside = false;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& poly : policy.include) {
      if (point_in_polygon(p, poly)) {
        inside = true;
        break;
      }
      nearest = std::min(nearest, distance_to_boundary(p, poly));
    }
    if (!inside) return AreaDecision{ExclusionReason::kNoTestArea, nearest};
  }
  if (policy.class_allow && !policy.class_allow->count(obs.class_label)) {
    return AreaDecision{ExclusionReason::kClassExcluded, std::nullopt};
  }
  if (auto it = policy.max_range_by_class.find(obs.class_label);
      it != policy.max_range_by_class.end()) {
    const double range = norm(p - policy.range_origin);
    if (range > it->second) return AreaDecision{ExclusionReason::kNoTestArea, range - it->second};
  }
  return std::nullopt;
}

// Whether the area stage removes observations of `role` before matching.
inline bool area_filters_role(Stage stage, Role role) {
  switch (stage) {
    case Stage::kPreReference: return role == Role::kRes;
    case Stage::kPreMatching: return true;
    default: return false;
  }
}

struct AreaResult {
  std::vector<ObjectObservation> res_kept;
  std::vector<ObjectObservation> sut_kept;
  std::vector<ExclusionTag> exclusions;  // at post_matching these only mark
};

inline AreaResult apply_area_policy(std::span<const ObjectObservation> res,
                                    std::span<const ObjectObservation> sut,
                                    const AreaPolicy& policy) {
  AreaResult out;
  auto run = [&](std::span<const ObjectObservation> obs, Role role,
                 std::vector<ObjectObservation>& kept) {
    const bool removes = area_filters_role(policy.stage, role);
    const bool marks = policy.stage == Stage::kPostMatching;
    for (const auto& o : obs) {
      auto d = (removes || marks) ? area_exclusion(o, policy) : std::nullopt;
      if (d) {
        auto tag = make_tag(d->reason, policy.stage, role, o);
        tag.boundary_distance_m = d->boundary_distance_m;
        out.exclusions.push_back(std::move(tag));
        if (removes) continue;
      }
      kept.push_back(o);
    }
  };
  run(res, Role::kRes, out.res_kept);
  run(sut, Role::kSut, out.sut_kept);
  return out;
}

// Recording-level form: filters every observation of both recordings.
struct AreaRecordingResult {
  Recording res;
  Recording sut;
  std::vector<ExclusionTag> exclusions;
};

inline AreaRecordingResult apply_area_policy(const Recording& res, const Recording& sut,
                                             const AreaPolicy& policy) {
  AreaRecordingResult out{res, sut, {}};
  auto run = [&](Recording& rec) {
    const bool removes = area_filters_role(policy.stage, rec.role);
    const bool marks = policy.stage == Stage::kPostMatching;
    for (auto& track : rec.tracks) {
      std::vector<ObjectObservation> kept;
      for (const auto& o : track.observations) {
        auto d = (removes || marks) ? area_exclusion(o, policy) : std::nullopt;
        if (d) {
          auto tag = make_tag(d->reason, policy.stage, rec.role, o);
          tag.boundary_distance_m = d->boundary_distance_m;
          out.exclusions.push_back(std::move(tag));
          if (removes) continue;
        }
        kept.push_back(o);
      }
      track.observations = std::move(kept);
    }
    std::erase_if(rec.tracks, [](const Track& t) { return t.observations.empty(); });
  };
  run(out.res);
  run(out.sut);
  return out;
}

// ---------------------------------------------------------------------------
// Existence and classification confidences

enum class ClassPolicy { kNone, kArgmax };

// Label with the highest class confidence; ties go to the smaller label.
inline std::optional<std::string> argmax_class(const ObjectObservation& o) {
  if (!o.class_confs || o.class_confs->empty()) return std::nullopt;
  const auto best = std::max_element(
      o.class_confs->begin(), o.class_confs->end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  return best->first;
}

inline ObjectObservation resolve_class(ObjectObservation o, ClassPolicy policy) {
  if (policy == ClassPolicy::kArgmax) {
    if (auto label = argmax_class(o)) o.class_label = *label;
  }
  return o;
}

inline bool passes_confidence(const ObjectObservation& o, double tau_exist) {
  return o.existence_conf.value_or(1.0) >= tau_exist;
}

struct ConfidenceResult {
  std::vector<ObjectObservation> kept;
  std::vector<ExclusionTag> exclusions;
};

inline ConfidenceResult confidence_gate(std::span<const ObjectObservation> sut, double tau_exist,
                                        ClassPolicy class_policy) {
  if (!(tau_exist >= 0.0 && tau_exist <= 1.0)) {
    throw PolicyError("tau_exist must lie in [0, 1]");
  }
  ConfidenceResult out;
  for (const auto& raw : sut) {
    ObjectObservation o = resolve_class(raw, class_policy);
    if (passes_confidence(o, tau_exist)) {
      out.kept.push_back(std::move(o));
    } else {
      auto tag = make_tag(ExclusionReason::kBelowConf, Stage::kPreMatching, Role::kSut, o);
      tag.value = o.existence_conf.value_or(1.0);
      out.exclusions.push_back(std::move(tag));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Border corner case

enum class BorderPolicy { kHardCut, kFuzzyRescue };

struct BorderCaseConfig {
  BorderPolicy policy = BorderPolicy::kHardCut;
  double margin_m = 1.0;
  friend bool operator==(const BorderCaseConfig&, const BorderCaseConfig&) = default;
};

// A below-threshold pair where the area filter removed at most one member.
struct BorderCandidate {
  const ExclusionTag* excluded = nullptr;  // null when both members are kept
  CostBreakdown cost;
};

enum class BorderOutcome { kNoAdjustment, kStaysExcluded, kRescued };

inline BorderOutcome resolve_border_case(const BorderCandidate& c, const BorderCaseConfig& cfg) {
  if (c.excluded == nullptr) return BorderOutcome::kNoAdjustment;
  if (cfg.policy == BorderPolicy::kHardCut || c.cost.gated) return BorderOutcome::kStaysExcluded;
  const auto& tag = *c.excluded;
  if (tag.reason == ExclusionReason::kNoTestArea && tag.boundary_distance_m &&
      *tag.boundary_distance_m <= cfg.margin_m) {
    return BorderOutcome::kRescued;
  }
  return BorderOutcome::kStaysExcluded;
}

}  // namespace detoracle
