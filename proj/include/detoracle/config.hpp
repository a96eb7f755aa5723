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

// Oracle configuration: the full set of matching decisions as one document.
//
// Loading is strict. Unknown keys and out-of-range values raise SchemaError,
// and every field receives a value. to_json() writes every field back,
// including defaults, so the echo fully describes a run.

#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/matching.hpp"
#include "detoracle/temporal.hpp"

namespace detoracle {

enum class MismatchPolicy { kTpWrongClass, kFpPlusFn };

struct LabelingMeta {
  std::string criteria;
  std::string quality_issues;
  std::string statistics;
  std::string hardware;

  friend bool operator==(const LabelingMeta&, const LabelingMeta&) = default;
};

struct AlignmentConfig {
  Transform transform;
  bool inflate_threshold = false;  // widen the distance gate by reported_error_m
  std::string error_sources;

  friend bool operator==(const AlignmentConfig&, const AlignmentConfig&) = default;
};

struct ProbabilisticConfig {
  double tau_exist = 0.0;
  ClassPolicy class_policy = ClassPolicy::kNone;
  MismatchPolicy mismatch_policy = MismatchPolicy::kTpWrongClass;
  int sweep_thresholds = 0;  // K evenly spaced existence thresholds, 0 = off

  friend bool operator==(const ProbabilisticConfig&, const ProbabilisticConfig&) = default;
};

struct OracleConfig {
  std::string name = "default";
  AovSpec aov;
  OcclusionPolicy occlusion;
  LabelingMeta labeling_meta;
  AreaPolicy areas;
  AlignmentConfig alignment;
  DistanceConfig distance;
  AssignmentConfig assignment;
  BorderCaseConfig corner_cases;
  TemporalPolicy temporal;
  ProbabilisticConfig probabilistic;

  friend bool operator==(const OracleConfig&, const OracleConfig&) = default;
};

namespace detail {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

template <typename E>
using EnumTable = std::initializer_list<std::pair<const char*, E>>;

template <typename E>
E enum_from(const json& v, EnumTable<E> table, const std::string& where) {
  if (!v.is_string()) throw SchemaError(where + ": expected a string");
  const auto s = v.get<std::string>();
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string allowed;
  for (const auto& [name, _] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw SchemaError(where + ": unknown value '" + s + "' (allowed: " + allowed + ")");
}

template <typename E>
std::string enum_name(E value, EnumTable<E> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  throw OracleError("enum value without name");
}

inline const EnumTable<OcclusionMode> kOcclusionModes = {
    {"ignore", OcclusionMode::kIgnore},
    {"exclude", OcclusionMode::kExclude},
    {"test_anyway", OcclusionMode::kTestAnyway}};
inline const EnumTable<Stage> kAreaStages = {{"pre_reference", Stage::kPreReference},
                                             {"pre_matching", Stage::kPreMatching},
                                             {"post_matching", Stage::kPostMatching}};
inline const EnumTable<TransformKind> kTransformKinds = {{"identity", TransformKind::kIdentity},
                                                         {"rigid2d", TransformKind::kRigid2d},
                                                         {"poly3", TransformKind::kPoly3}};
inline const EnumTable<Metric> kMetrics = {{"center2d", Metric::kCenter2d},
                                           {"one_minus_iou", Metric::kOneMinusIou},
                                           {"mahalanobis", Metric::kMahalanobis},
                                           {"wasserstein2", Metric::kWasserstein2}};
inline const EnumTable<YawPeriod> kYawPeriods = {{"pi", YawPeriod::kPi},
                                                 {"2pi", YawPeriod::kTwoPi}};
inline const EnumTable<ClassPenalty> kClassPenalties = {
    {"none", ClassPenalty::kNone}, {"nll", ClassPenalty::kNll}, {"brier", ClassPenalty::kBrier}};
inline const EnumTable<Algorithm> kAlgorithms = {{"hungarian", Algorithm::kHungarian},
                                                 {"greedy", Algorithm::kGreedy}};
inline const EnumTable<Cardinality> kCardinalities = {{"one_one", Cardinality::kOneOne},
                                                      {"one_n", Cardinality::kOneN},
                                                      {"n_one", Cardinality::kNOne},
                                                      {"n_n", Cardinality::kNN}};
inline const EnumTable<Lifetime> kLifetimes = {{"frame", Lifetime::kFrame},
                                               {"track", Lifetime::kTrack},
                                               {"subsequence", Lifetime::kSubsequence}};
inline const EnumTable<BorderPolicy> kBorderPolicies = {{"hard_cut", BorderPolicy::kHardCut},
                                                        {"fuzzy_rescue", BorderPolicy::kFuzzyRescue}};
inline const EnumTable<TimestampBasis> kBases = {{"acquisition", TimestampBasis::kAcquisition},
                                                 {"availability", TimestampBasis::kAvailability}};
inline const EnumTable<OverhangMode> kOverhangModes = {{"discard", OverhangMode::kDiscard},
                                                       {"fn_fp", OverhangMode::kFnFp},
                                                       {"threshold", OverhangMode::kThreshold}};
inline const EnumTable<ClassPolicy> kClassPolicies = {{"none", ClassPolicy::kNone},
                                                      {"argmax", ClassPolicy::kArgmax}};
inline const EnumTable<MismatchPolicy> kMismatchPolicies = {
    {"tp_wrong_class", MismatchPolicy::kTpWrongClass}, {"fp_plus_fn", MismatchPolicy::kFpPlusFn}};

// Object reader that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SchemaError(where_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw SchemaError(where_ + ": unknown key '" + key + "'");
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return where_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw SchemaError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw SchemaError(at(key) + ": expected a number or null");
      }
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw SchemaError(at(key) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw SchemaError(at(key) + ": expected a boolean");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw SchemaError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename E>
  void enumeration(const std::string& key, E& out, EnumTable<E> table) {
    if (const json* v = find(key)) out = enum_from(*v, table, at(key));
  }
  json::const_iterator begin() const { return j_.begin(); }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Vec2 vec2_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw SchemaError(where + ": expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

inline ojson vec2_to(Vec2 p) { return ojson::array({p.x, p.y}); }

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw OracleError("cannot open file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline Polygon2D vertices_from(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError(where + ": expected a vertex list");
  Polygon2D poly;
  for (std::size_t i = 0; i < v.size(); ++i) {
    poly.vertices.push_back(vec2_from(v[i], where + "[" + std::to_string(i) + "]"));
  }
  try {
    validate_polygon(poly);
  } catch (const GeometryError& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return poly;
}

// A polygon is a vertex list, {"vertices": [...]}, or {"file": path} whose
// file holds either form. File paths resolve against `base`.
inline Polygon2D polygon_from(const json& v, const std::string& where,
                              const std::filesystem::path& base) {
  if (v.is_array()) return vertices_from(v, where);
  Section s(v, where);
  const json* file = s.find("file");
  const json* verts = s.find("vertices");
  if ((file == nullptr) == (verts == nullptr)) {
    throw SchemaError(where + ": give exactly one of 'vertices' or 'file'");
  }
  if (verts) return vertices_from(*verts, s.at("vertices"));
  if (!file->is_string()) throw SchemaError(s.at("file") + ": expected a path");
  const std::filesystem::path path = base / file->get<std::string>();
  const json content = read_json_file(path);
  if (content.is_object()) {
    Section inner(content, path.string());
    const json* iv = inner.find("vertices");
    if (!iv) throw SchemaError(path.string() + ": missing 'vertices'");
    return vertices_from(*iv, path.string() + ".vertices");
  }
  return vertices_from(content, path.string());
}

inline ojson polygon_to(const Polygon2D& p) {
  ojson out = ojson::array();
  for (const auto& v : p.vertices) out.push_back(vec2_to(v));
  return out;
}

inline Region region_from(const json& v, const std::string& where,
                          const std::filesystem::path& base) {
  Section s(v, where);
  std::string kind = "everywhere";
  s.string("kind", kind);
  if (kind == "everywhere") return Everywhere{};
  if (kind == "polygon") {
    const json* file = s.find("file");
    const json* verts = s.find("vertices");
    json inner = json::object();
    if (file) inner["file"] = *file;
    if (verts) inner["vertices"] = *verts;
    return polygon_from(inner, where, base);
  }
  if (kind == "sector") {
    Sector sec;
    if (const json* o = s.find("origin")) sec.origin = vec2_from(*o, s.at("origin"));
    s.number("heading_rad", sec.heading_rad);
    s.number("range_m", sec.range_m);
    s.number("fov_rad", sec.fov_rad);
    try {
      validate_region(sec);
    } catch (const GeometryError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    return sec;
  }
  throw SchemaError(s.at("kind") + ": unknown value '" + kind +
                    "' (allowed: everywhere, polygon, sector)");
}

inline ojson region_to(const Region& r) {
  ojson out;
  if (std::holds_alternative<Everywhere>(r)) {
    out["kind"] = "everywhere";
  } else if (const auto* p = std::get_if<Polygon2D>(&r)) {
    out["kind"] = "polygon";
    out["vertices"] = polygon_to(*p);
  } else {
    const auto& s = std::get<Sector>(r);
    out["kind"] = "sector";
    out["origin"] = vec2_to(s.origin);
    out["heading_rad"] = s.heading_rad;
    out["range_m"] = s.range_m;
    out["fov_rad"] = s.fov_rad;
  }
  return out;
}

inline std::optional<ProbMap> prob_map_from(const json& v, const std::string& where) {
  if (v.is_null()) return std::nullopt;
  Section s(v, where);
  ProbMap m;
  if (const json* o = s.find("origin")) m.origin = vec2_from(*o, s.at("origin"));
  const json* pts = s.find("points");
  if (!pts || !pts->is_array()) throw SchemaError(s.at("points") + ": expected [[range_m, p], ...]");
  for (std::size_t i = 0; i < pts->size(); ++i) {
    const Vec2 rp = vec2_from((*pts)[i], s.at("points") + "[" + std::to_string(i) + "]");
    m.points.emplace_back(rp.x, rp.y);
  }
  try {
    validate_prob_map(m);
  } catch (const SchemaError& e) {
    throw SchemaError(where + ": " + e.what());
  }
  return m;
}

inline ojson prob_map_to(const std::optional<ProbMap>& m) {
  if (!m) return nullptr;
  ojson out;
  out["origin"] = vec2_to(m->origin);
  ojson pts = ojson::array();
  for (const auto& [r, p] : m->points) pts.push_back(ojson::array({r, p}));
  out["points"] = pts;
  return out;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw SchemaError(what);
}

inline void read_aov(const json& j, AovSpec& a, const std::filesystem::path& base) {
  Section s(j, "aov");
  if (const json* v = s.find("res_region")) a.res_aov = region_from(*v, s.at("res_region"), base);
  if (const json* v = s.find("sut_region")) a.sut_aov = region_from(*v, s.at("sut_region"), base);
  s.boolean("require_in_res_aov", a.require_in_res_aov);
  s.boolean("require_in_sut_aov", a.require_in_sut_aov);
  if (const json* v = s.find("res_prob_map")) a.res_prob_map = prob_map_from(*v, s.at("res_prob_map"));
  if (const json* v = s.find("sut_prob_map")) a.sut_prob_map = prob_map_from(*v, s.at("sut_prob_map"));
  s.number("p_min", a.p_min);
  require(a.p_min >= 0.0 && a.p_min <= 1.0, "aov.p_min must lie in [0, 1]");
}

inline void read_occlusion(const json& j, OcclusionPolicy& o) {
  Section s(j, "occlusion");
  s.enumeration("policy", o.mode, kOcclusionModes);
  s.number("theta", o.theta);
  if (const json* v = s.find("viewer")) o.viewer = vec2_from(*v, s.at("viewer"));
  if (const json* v = s.find("visibility_bins")) {
    require(v->is_array(), "occlusion.visibility_bins: expected a list of numbers");
    o.visibility_bin_edges.clear();
    for (const auto& e : *v) {
      require(e.is_number(), "occlusion.visibility_bins: expected a list of numbers");
      o.visibility_bin_edges.push_back(e.get<double>());
    }
  }
  require(o.theta > 0.0 && o.theta <= 1.0, "occlusion.theta must lie in (0, 1]");
  for (std::size_t i = 0; i < o.visibility_bin_edges.size(); ++i) {
    const double e = o.visibility_bin_edges[i];
    require(e > 0.0 && e < 1.0, "occlusion.visibility_bins must lie in (0, 1)");
    require(i == 0 || e > o.visibility_bin_edges[i - 1], "occlusion.visibility_bins must increase");
  }
}

inline void read_labeling(const json& j, LabelingMeta& m) {
  Section s(j, "labeling_meta");
  s.string("criteria", m.criteria);
  s.string("quality_issues", m.quality_issues);
  s.string("statistics", m.statistics);
  s.string("hardware", m.hardware);
}

inline void read_areas(const json& j, AreaPolicy& a, const std::filesystem::path& base) {
  Section s(j, "areas");
  s.enumeration("stage", a.stage, kAreaStages);
  auto polygons = [&](const char* key, std::vector<Polygon2D>& out) {
    if (const json* v = s.find(key)) {
      require(v->is_array(), s.at(key) + ": expected a list of polygons");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(polygon_from((*v)[i], s.at(key) + "[" + std::to_string(i) + "]", base));
      }
    }
  };
  polygons("include", a.include);
  polygons("exclude", a.exclude);
  if (const json* v = s.find("class_allow")) {
    if (v->is_null()) {
      a.class_allow.reset();
    } else {
      require(v->is_array(), "areas.class_allow: expected a list of labels or null");
      std::set<std::string> labels;
      for (const auto& l : *v) {
        require(l.is_string(), "areas.class_allow: expected a list of labels or null");
        labels.insert(l.get<std::string>());
      }
      a.class_allow = std::move(labels);
    }
  }
  if (const json* v = s.find("max_range_by_class")) {
    require(v->is_object(), "areas.max_range_by_class: expected an object");
    a.max_range_by_class.clear();
    for (const auto& [label, r] : v->items()) {
      require(r.is_number() && r.get<double>() > 0.0,
              "areas.max_range_by_class." + label + " must be a number > 0");
      a.max_range_by_class[label] = r.get<double>();
    }
  }
  if (const json* v = s.find("range_origin")) a.range_origin = vec2_from(*v, s.at("range_origin"));
}

inline void read_alignment(const json& j, AlignmentConfig& a) {
  Section s(j, "alignment");
  if (const json* v = s.find("transform")) {
    Section t(*v, "alignment.transform");
    t.enumeration("kind", a.transform.kind, kTransformKinds);
    t.number("tx", a.transform.tx);
    t.number("ty", a.transform.ty);
    t.number("theta", a.transform.theta);
    auto coeffs = [&](const char* key, std::array<double, 10>& out) {
      if (const json* c = t.find(key)) {
        require(c->is_array() && c->size() == 10,
                t.at(key) + ": expected 10 coefficients [1, x, y, x2, xy, y2, x3, x2y, xy2, y3]");
        for (std::size_t i = 0; i < 10; ++i) {
          require((*c)[i].is_number(), t.at(key) + ": expected numbers");
          out[i] = (*c)[i].get<double>();
        }
      }
    };
    coeffs("cx", a.transform.poly_x);
    coeffs("cy", a.transform.poly_y);
  }
  s.number("reported_error_m", a.transform.reported_error_m);
  s.boolean("inflate_threshold", a.inflate_threshold);
  s.string("error_sources", a.error_sources);
  require(a.transform.reported_error_m >= 0.0, "alignment.reported_error_m must be >= 0");
}

inline void read_distance(const json& j, DistanceConfig& d) {
  Section s(j, "distance");
  s.enumeration("metric", d.metric, kMetrics);
  s.number("threshold", d.threshold);
  s.boolean("class_gate", d.class_gate);
  s.number("class_mismatch_penalty", d.class_mismatch_penalty);
  s.number("w_velocity", d.w_velocity);
  s.number("w_yaw", d.w_yaw);
  s.enumeration("yaw_period", d.yaw_period, kYawPeriods);
  s.enumeration("class_penalty", d.class_penalty, kClassPenalties);
  s.number("w_class", d.w_class);
  require(d.threshold > 0.0, "distance.threshold must be > 0");
  require(d.class_mismatch_penalty >= 0.0 && d.w_velocity >= 0.0 && d.w_yaw >= 0.0 &&
              d.w_class >= 0.0,
          "distance weights and penalties must be >= 0");
}

inline void read_assignment(const json& j, AssignmentConfig& a) {
  Section s(j, "assignment");
  s.enumeration("algorithm", a.algorithm, kAlgorithms);
  s.enumeration("cardinality", a.cardinality, kCardinalities);
  s.enumeration("lifetime", a.lifetime, kLifetimes);
  s.boolean("sticky", a.sticky);
  s.integer("max_gap_frames", a.max_gap_frames);
  s.optional_number("track_threshold_mean_m", a.track_threshold_mean_m);
  validate_assignment_config(a);
}

inline void read_corner_cases(const json& j, BorderCaseConfig& c) {
  Section s(j, "corner_cases");
  s.enumeration("border_policy", c.policy, kBorderPolicies);
  s.number("margin_m", c.margin_m);
  require(c.margin_m >= 0.0, "corner_cases.margin_m must be >= 0");
}

inline void read_temporal(const json& j, TemporalPolicy& t) {
  Section s(j, "temporal");
  s.enumeration("basis", t.basis, kBases);
  if (const json* v = s.find("sut_latency_s")) {
    t.sut_latency_s.reset();
    t.sut_latency_series.clear();
    if (v->is_number()) {
      t.sut_latency_s = v->get<double>();
      require(*t.sut_latency_s >= 0.0, "temporal.sut_latency_s must be >= 0");
    } else if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const Vec2 p = vec2_from((*v)[i], s.at("sut_latency_s") + "[" + std::to_string(i) + "]");
        require(p.y >= 0.0, "temporal.sut_latency_s latencies must be >= 0");
        require(i == 0 || p.x > t.sut_latency_series.back().first,
                "temporal.sut_latency_s series times must increase");
        t.sut_latency_series.emplace_back(p.x, p.y);
      }
    } else {
      require(v->is_null(), "temporal.sut_latency_s: expected null, a number or [[t, latency], ...]");
    }
  }
  if (const json* v = s.find("interp")) {
    require(v->is_string() && v->get<std::string>() == "linear",
            "temporal.interp: only 'linear' is supported");
  }
  s.enumeration("overhang", t.overhang, kOverhangModes);
  s.optional_number("dt_max_s", t.dt_max_s);
  s.number("sync_uncertainty_s", t.sync_uncertainty_s);
  s.number("sync_accuracy_loss_m", t.sync_accuracy_loss_m);
  s.boolean("inflate_threshold", t.inflate_threshold);
  if (t.overhang == OverhangMode::kThreshold) {
    require(t.dt_max_s && *t.dt_max_s > 0.0, "temporal.dt_max_s must be > 0 with overhang 'threshold'");
  }
  require(t.sync_uncertainty_s >= 0.0 && t.sync_accuracy_loss_m >= 0.0,
          "temporal sync fields must be >= 0");
  require(t.basis != TimestampBasis::kAvailability || t.has_latency(),
          "temporal.basis 'availability' requires temporal.sut_latency_s");
}

inline void read_probabilistic(const json& j, ProbabilisticConfig& p) {
  Section s(j, "probabilistic");
  s.number("tau_exist", p.tau_exist);
  s.enumeration("class_policy", p.class_policy, kClassPolicies);
  s.enumeration("mismatch_policy", p.mismatch_policy, kMismatchPolicies);
  s.integer("sweep_thresholds", p.sweep_thresholds);
  require(p.tau_exist >= 0.0 && p.tau_exist <= 1.0, "probabilistic.tau_exist must lie in [0, 1]");
  require(p.sweep_thresholds >= 0, "probabilistic.sweep_thresholds must be >= 0");
}

}  // namespace detail

// `base_dir` resolves polygon file references.
inline OracleConfig config_from_json(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = ".") {
  using namespace detail;
  OracleConfig cfg;
  if (j.is_null()) return cfg;
  Section s(j, "config");
  s.string("name", cfg.name);
  if (const json* v = s.find("filter_order")) {
    require(*v == json(filter_order()),
            "config.filter_order is fixed: aov, occlusion, areas, probabilistic_aov, confidence");
  }
  if (const json* v = s.find("aov")) read_aov(*v, cfg.aov, base_dir);
  if (const json* v = s.find("occlusion")) read_occlusion(*v, cfg.occlusion);
  if (const json* v = s.find("labeling_meta")) read_labeling(*v, cfg.labeling_meta);
  if (const json* v = s.find("areas")) read_areas(*v, cfg.areas, base_dir);
  if (const json* v = s.find("alignment")) read_alignment(*v, cfg.alignment);
  if (const json* v = s.find("distance")) read_distance(*v, cfg.distance);
  if (const json* v = s.find("assignment")) read_assignment(*v, cfg.assignment);
  if (const json* v = s.find("corner_cases")) read_corner_cases(*v, cfg.corner_cases);
  if (const json* v = s.find("temporal")) read_temporal(*v, cfg.temporal);
  if (const json* v = s.find("probabilistic")) read_probabilistic(*v, cfg.probabilistic);
  return cfg;
}

// Accepts JSON with // and /* */ comments. Empty text yields the defaults.
inline OracleConfig parse_config(const std::string& text,
                                 const std::filesystem::path& base_dir = ".") {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return OracleConfig{};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return config_from_json(j, base_dir);
}

inline OracleConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw OracleError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Complete echo with every field present. Polygon file references are
// expanded to vertices.
inline nlohmann::ordered_json to_json(const OracleConfig& c) {
  using namespace detail;
  ojson j;
  j["name"] = c.name;
  j["filter_order"] = filter_order();

  ojson aov;
  aov["res_region"] = region_to(c.aov.res_aov);
  aov["sut_region"] = region_to(c.aov.sut_aov);
  aov["require_in_res_aov"] = c.aov.require_in_res_aov;
  aov["require_in_sut_aov"] = c.aov.require_in_sut_aov;
  aov["res_prob_map"] = prob_map_to(c.aov.res_prob_map);
  aov["sut_prob_map"] = prob_map_to(c.aov.sut_prob_map);
  aov["p_min"] = c.aov.p_min;
  j["aov"] = aov;

  ojson occ;
  occ["policy"] = enum_name(c.occlusion.mode, kOcclusionModes);
  occ["theta"] = c.occlusion.theta;
  occ["viewer"] = vec2_to(c.occlusion.viewer);
  occ["visibility_bins"] = c.occlusion.visibility_bin_edges;
  j["occlusion"] = occ;

  ojson lab;
  lab["criteria"] = c.labeling_meta.criteria;
  lab["quality_issues"] = c.labeling_meta.quality_issues;
  lab["statistics"] = c.labeling_meta.statistics;
  lab["hardware"] = c.labeling_meta.hardware;
  j["labeling_meta"] = lab;

  ojson areas;
  areas["stage"] = enum_name(c.areas.stage, kAreaStages);
  areas["include"] = ojson::array();
  for (const auto& p : c.areas.include) areas["include"].push_back(polygon_to(p));
  areas["exclude"] = ojson::array();
  for (const auto& p : c.areas.exclude) areas["exclude"].push_back(polygon_to(p));
  if (c.areas.class_allow) {
    areas["class_allow"] = ojson::array();
    for (const auto& l : *c.areas.class_allow) areas["class_allow"].push_back(l);
  } else {
    areas["class_allow"] = nullptr;
  }
  areas["max_range_by_class"] = ojson::object();
  for (const auto& [l, r] : c.areas.max_range_by_class) areas["max_range_by_class"][l] = r;
  areas["range_origin"] = vec2_to(c.areas.range_origin);
  j["areas"] = areas;

  ojson al;
  ojson tr;
  tr["kind"] = enum_name(c.alignment.transform.kind, kTransformKinds);
  tr["tx"] = c.alignment.transform.tx;
  tr["ty"] = c.alignment.transform.ty;
  tr["theta"] = c.alignment.transform.theta;
  tr["cx"] = c.alignment.transform.poly_x;
  tr["cy"] = c.alignment.transform.poly_y;
  al["transform"] = tr;
  al["reported_error_m"] = c.alignment.transform.reported_error_m;
  al["inflate_threshold"] = c.alignment.inflate_threshold;
  al["error_sources"] = c.alignment.error_sources;
  j["alignment"] = al;

  ojson d;
  d["metric"] = enum_name(c.distance.metric, kMetrics);
  d["threshold"] = c.distance.threshold;
  d["class_gate"] = c.distance.class_gate;
  d["class_mismatch_penalty"] = c.distance.class_mismatch_penalty;
  d["w_velocity"] = c.distance.w_velocity;
  d["w_yaw"] = c.distance.w_yaw;
  d["yaw_period"] = enum_name(c.distance.yaw_period, kYawPeriods);
  d["class_penalty"] = enum_name(c.distance.class_penalty, kClassPenalties);
  d["w_class"] = c.distance.w_class;
  j["distance"] = d;

  ojson as;
  as["algorithm"] = enum_name(c.assignment.algorithm, kAlgorithms);
  as["cardinality"] = enum_name(c.assignment.cardinality, kCardinalities);
  as["lifetime"] = enum_name(c.assignment.lifetime, kLifetimes);
  as["sticky"] = c.assignment.sticky;
  as["max_gap_frames"] = c.assignment.max_gap_frames;
  as["track_threshold_mean_m"] = c.assignment.track_threshold_mean_m
                                     ? ojson(*c.assignment.track_threshold_mean_m)
                                     : ojson(nullptr);
  j["assignment"] = as;

  ojson cc;
  cc["border_policy"] = enum_name(c.corner_cases.policy, kBorderPolicies);
  cc["margin_m"] = c.corner_cases.margin_m;
  j["corner_cases"] = cc;

  ojson t;
  t["basis"] = enum_name(c.temporal.basis, kBases);
  if (c.temporal.sut_latency_s) {
    t["sut_latency_s"] = *c.temporal.sut_latency_s;
  } else if (!c.temporal.sut_latency_series.empty()) {
    t["sut_latency_s"] = ojson::array();
    for (const auto& [when, lat] : c.temporal.sut_latency_series) {
      t["sut_latency_s"].push_back(ojson::array({when, lat}));
    }
  } else {
    t["sut_latency_s"] = nullptr;
  }
  t["interp"] = "linear";
  t["overhang"] = enum_name(c.temporal.overhang, kOverhangModes);
  t["dt_max_s"] = c.temporal.dt_max_s ? ojson(*c.temporal.dt_max_s) : ojson(nullptr);
  t["sync_uncertainty_s"] = c.temporal.sync_uncertainty_s;
  t["sync_accuracy_loss_m"] = c.temporal.sync_accuracy_loss_m;
  t["inflate_threshold"] = c.temporal.inflate_threshold;
  j["temporal"] = t;

  ojson p;
  p["tau_exist"] = c.probabilistic.tau_exist;
  p["class_policy"] = enum_name(c.probabilistic.class_policy, kClassPolicies);
  p["mismatch_policy"] = enum_name(c.probabilistic.mismatch_policy, kMismatchPolicies);
  p["sweep_thresholds"] = c.probabilistic.sweep_thresholds;
  j["probabilistic"] = p;
  return j;
}

inline std::string canonical_config_text(const OracleConfig& c) { return to_json(c).dump(); }

}  // namespace detoracle
