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

// Synthetic paired recordings with a constructively known verdict ledger.
//
// Ground-truth objects are spaced at least three matching thresholds apart,
// so every SUT detection has at most one ReS candidate and the expected
// ledger follows from bookkeeping alone.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/matching.hpp"
#include "detoracle/model.hpp"
#include "detoracle/random.hpp"
#include "detoracle/verdict.hpp"

namespace detoracle {

struct GtTrackSpec {
  std::string class_label = "car";
  double length = 4.5;
  double width = 1.8;
  // Constant-velocity motion, unless waypoints are given.
  double x0 = 0.0;
  double y0 = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  std::vector<std::array<double, 3>> waypoints;  // (t, x, y), increasing t
  double t_start = 0.0;
  std::optional<double> t_end;

  bool alive(double t) const {
    if (!waypoints.empty()) {
      return t >= waypoints.front()[0] - kTimeTolerance && t <= waypoints.back()[0] + kTimeTolerance;
    }
    return t >= t_start - kTimeTolerance && (!t_end || t <= *t_end + kTimeTolerance);
  }

  Vec2 position(double t) const {
    if (waypoints.empty()) return {x0 + vx * (t - t_start), y0 + vy * (t - t_start)};
    if (t <= waypoints.front()[0]) return {waypoints.front()[1], waypoints.front()[2]};
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
      if (t <= waypoints[k][0]) {
        const auto& a = waypoints[k - 1];
        const auto& b = waypoints[k];
        const double w = (t - a[0]) / (b[0] - a[0]);
        return {a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2])};
      }
    }
    return {waypoints.back()[1], waypoints.back()[2]};
  }

  Vec2 velocity(double t) const {
    if (waypoints.empty()) return {vx, vy};
    for (std::size_t k = 1; k < waypoints.size(); ++k) {
      if (t <= waypoints[k][0] || k + 1 == waypoints.size()) {
        const auto& a = waypoints[k - 1];
        const auto& b = waypoints[k];
        return {(b[1] - a[1]) / (b[0] - a[0]), (b[2] - a[2]) / (b[0] - a[0])};
      }
    }
    return {0.0, 0.0};
  }

  friend bool operator==(const GtTrackSpec&, const GtTrackSpec&) = default;
};

struct ExistenceConfModel {
  double real_mean = 0.9;
  double clutter_mean = 0.3;
  friend bool operator==(const ExistenceConfModel&, const ExistenceConfModel&) = default;
};

struct PerturbationModel {
  double pos_sigma_m = 0.0;
  double dropout_per_frame_prob = 0.0;
  double clutter_rate_per_frame = 0.0;
  double latency_s = 0.0;  // rounded to whole frames
  double fragmentation_prob = 0.0;
  double duplicate_prob = 0.0;
  double misclass_prob = 0.0;
  ExistenceConfModel existence_conf;

  friend bool operator==(const PerturbationModel&, const PerturbationModel&) = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  double duration_s = 10.0;
  double rate_hz = 10.0;
  double threshold_m = 2.0;  // matching threshold of the paired config
  std::vector<GtTrackSpec> gt_tracks;
  double res_noise_m = 0.0;
  PerturbationModel sut_model;
  AovSpec aov;
  AreaPolicy areas;

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct GeneratedScene {
  Recording res;
  Recording sut;
  VerdictLedger expected;
  OracleConfig config;  // paired config the expected ledger assumes
};

inline const std::vector<std::string>& synth_classes() {
  static const std::vector<std::string> c{"bicycle", "car", "pedestrian", "truck"};
  return c;
}

inline void validate_scene_spec(const SceneSpec& s) {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw SchemaError(std::string(what) + " must lie in [0, 1]");
  };
  if (!(s.rate_hz > 0.0)) throw SchemaError("rate_hz must be > 0");
  if (!(s.duration_s > 0.0)) throw SchemaError("duration_s must be > 0");
  if (!(s.threshold_m > 0.0)) throw SchemaError("threshold_m must be > 0");
  if (!(s.res_noise_m >= 0.0) || !(s.sut_model.pos_sigma_m >= 0.0)) {
    throw SchemaError("noise sigmas must be >= 0");
  }
  if (!(s.sut_model.latency_s >= 0.0)) throw SchemaError("latency_s must be >= 0");
  if (!(s.sut_model.clutter_rate_per_frame >= 0.0)) throw SchemaError("clutter_rate_per_frame must be >= 0");
  prob(s.sut_model.dropout_per_frame_prob, "dropout_per_frame_prob");
  prob(s.sut_model.fragmentation_prob, "fragmentation_prob");
  prob(s.sut_model.duplicate_prob, "duplicate_prob");
  prob(s.sut_model.misclass_prob, "misclass_prob");
  prob(s.sut_model.existence_conf.real_mean, "existence_conf.real_mean");
  prob(s.sut_model.existence_conf.clutter_mean, "existence_conf.clutter_mean");
  for (const auto& g : s.gt_tracks) {
    if (!(g.length > 0.0 && g.width > 0.0)) throw SchemaError("gt track extents must be > 0");
    for (std::size_t k = 1; k < g.waypoints.size(); ++k) {
      if (!(g.waypoints[k][0] > g.waypoints[k - 1][0])) throw SchemaError("waypoint times must increase");
    }
  }
  validate_region(s.aov.res_aov);
  validate_region(s.aov.sut_aov);
}

inline OracleConfig paired_config(const SceneSpec& s) {
  OracleConfig c;
  c.name = "synthetic";
  c.aov = s.aov;
  c.areas = s.areas;
  c.distance.metric = Metric::kCenter2d;
  c.distance.threshold = s.threshold_m;
  c.distance.class_gate = true;
  c.assignment.algorithm = Algorithm::kHungarian;
  c.assignment.cardinality = Cardinality::kOneOne;
  c.assignment.lifetime = Lifetime::kFrame;
  const long m = std::lround(s.sut_model.latency_s * s.rate_hz);
  if (m > 0) {
    c.temporal.basis = TimestampBasis::kAvailability;
    c.temporal.sut_latency_s = static_cast<double>(m) / s.rate_hz;
  }
  c.temporal.overhang = OverhangMode::kFnFp;
  return c;
}

namespace detail {

inline void read_gt_track(const json& j, GtTrackSpec& g, const std::string& where) {
  Section s(j, where);
  s.string("class", g.class_label);
  s.number("length", g.length);
  s.number("width", g.width);
  s.number("x0", g.x0);
  s.number("y0", g.y0);
  s.number("vx", g.vx);
  s.number("vy", g.vy);
  s.number("t_start", g.t_start);
  s.optional_number("t_end", g.t_end);
  if (const json* w = s.find("waypoints")) {
    if (!w->is_array()) throw SchemaError(s.at("waypoints") + ": expected an array");
    for (const auto& p : *w) {
      if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number()) {
        throw SchemaError(s.at("waypoints") + ": expected [t, x, y] entries");
      }
      g.waypoints.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
  }
}

inline void read_sut_model(const json& j, PerturbationModel& m) {
  Section s(j, "sut_model");
  s.number("pos_sigma_m", m.pos_sigma_m);
  s.number("dropout_per_frame_prob", m.dropout_per_frame_prob);
  s.number("clutter_rate_per_frame", m.clutter_rate_per_frame);
  s.number("latency_s", m.latency_s);
  s.number("fragmentation_prob", m.fragmentation_prob);
  s.number("duplicate_prob", m.duplicate_prob);
  s.number("misclass_prob", m.misclass_prob);
  if (const json* e = s.find("existence_conf")) {
    Section c(*e, "sut_model.existence_conf");
    c.number("real_mean", m.existence_conf.real_mean);
    c.number("clutter_mean", m.existence_conf.clutter_mean);
  }
}

}  // namespace detail

inline SceneSpec scene_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  SceneSpec spec;
  {
    Section s(j, "scene");
    if (const json* v = s.find("seed")) {
      if (!v->is_number_unsigned()) throw SchemaError("scene.seed: expected a non-negative integer");
      spec.seed = v->get<std::uint64_t>();
    }
    s.number("duration_s", spec.duration_s);
    s.number("rate_hz", spec.rate_hz);
    s.number("threshold_m", spec.threshold_m);
    s.number("res_noise_m", spec.res_noise_m);
    if (const json* v = s.find("gt_tracks")) {
      if (!v->is_array()) throw SchemaError("scene.gt_tracks: expected an array");
      for (std::size_t i = 0; i < v->size(); ++i) {
        GtTrackSpec g;
        read_gt_track((*v)[i], g, "scene.gt_tracks[" + std::to_string(i) + "]");
        spec.gt_tracks.push_back(std::move(g));
      }
    }
    if (const json* v = s.find("sut_model")) read_sut_model(*v, spec.sut_model);
    if (const json* v = s.find("aov")) read_aov(*v, spec.aov, base_dir);
    if (const json* v = s.find("areas")) read_areas(*v, spec.areas, base_dir);
  }
  validate_scene_spec(spec);
  return spec;
}

inline SceneSpec load_scene_spec(const std::filesystem::path& path) {
  return scene_spec_from_json(detail::read_json_file(path), path.parent_path());
}

inline nlohmann::ordered_json to_json(const SceneSpec& s) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["seed"] = s.seed;
  j["duration_s"] = s.duration_s;
  j["rate_hz"] = s.rate_hz;
  j["threshold_m"] = s.threshold_m;
  j["res_noise_m"] = s.res_noise_m;
  j["gt_tracks"] = ojson::array();
  for (const auto& g : s.gt_tracks) {
    ojson t;
    t["class"] = g.class_label;
    t["length"] = g.length;
    t["width"] = g.width;
    t["x0"] = g.x0;
    t["y0"] = g.y0;
    t["vx"] = g.vx;
    t["vy"] = g.vy;
    t["t_start"] = g.t_start;
    t["t_end"] = g.t_end ? ojson(*g.t_end) : ojson(nullptr);
    t["waypoints"] = ojson::array();
    for (const auto& w : g.waypoints) t["waypoints"].push_back({w[0], w[1], w[2]});
    j["gt_tracks"].push_back(std::move(t));
  }
  const auto& m = s.sut_model;
  j["sut_model"] = {{"pos_sigma_m", m.pos_sigma_m},
                    {"dropout_per_frame_prob", m.dropout_per_frame_prob},
                    {"clutter_rate_per_frame", m.clutter_rate_per_frame},
                    {"latency_s", m.latency_s},
                    {"fragmentation_prob", m.fragmentation_prob},
                    {"duplicate_prob", m.duplicate_prob},
                    {"misclass_prob", m.misclass_prob},
                    {"existence_conf",
                     {{"real_mean", m.existence_conf.real_mean}, {"clutter_mean", m.existence_conf.clutter_mean}}}};
  const auto cfg = to_json(paired_config(s));
  j["aov"] = cfg["aov"];
  j["areas"] = cfg["areas"];
  return j;
}

namespace detail {

inline Vec2 truncated_noise(Rng& rng, double sigma, double radius) {
  if (sigma <= 0.0) return {0.0, 0.0};
  for (;;) {
    const Vec2 n{rng.normal(0.0, sigma), rng.normal(0.0, sigma)};
    if (norm(n) <= radius) return n;
  }
}

inline double draw_conf(Rng& rng, double mean) {
  return std::clamp(rng.normal(mean, 0.1), 0.01, 1.0);
}

inline ObjectObservation make_obs(const std::string& id, const std::string& cls, double t, Vec2 p,
                                  Vec2 v, const GtTrackSpec* gt) {
  ObjectObservation o;
  o.timestamp = t;
  o.track_id = id;
  o.class_label = cls;
  o.x = p.x;
  o.y = p.y;
  o.vx = v.x;
  o.vy = v.y;
  o.yaw = (v.x == 0.0 && v.y == 0.0) ? 0.0 : std::atan2(v.y, v.x);
  o.length = gt ? gt->length : 1.0;
  o.width = gt ? gt->width : 1.0;
  return o;
}

// Uniform sample in the SUT area of vision, or in the ground-truth bounding
// box (widened by 10 m) when the area is unbounded.
inline Vec2 sample_region(Rng& rng, const Region& r, const std::array<double, 4>& box) {
  if (const auto* s = std::get_if<Sector>(&r)) {
    const double rad = s->range_m * std::sqrt(rng.uniform());
    const double ang = s->heading_rad + (rng.uniform() - 0.5) * s->fov_rad;
    return {s->origin.x + rad * std::cos(ang), s->origin.y + rad * std::sin(ang)};
  }
  if (const auto* p = std::get_if<Polygon2D>(&r)) {
    double x0 = p->vertices[0].x, x1 = x0, y0 = p->vertices[0].y, y1 = y0;
    for (const auto& v : p->vertices) {
      x0 = std::min(x0, v.x);
      x1 = std::max(x1, v.x);
      y0 = std::min(y0, v.y);
      y1 = std::max(y1, v.y);
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec2 q{rng.uniform(x0, x1), rng.uniform(y0, y1)};
      if (point_in_polygon(q, *p)) return q;
    }
    return p->vertices[0];
  }
  return {rng.uniform(box[0], box[1]), rng.uniform(box[2], box[3])};
}

}  // namespace detail

// Deterministic in spec.seed. The expected ledger assumes paired_config(spec).
inline GeneratedScene generate(const SceneSpec& spec) {
  validate_scene_spec(spec);
  Rng rng(spec.seed);
  const double T = spec.threshold_m;
  const long nframes = std::max(1L, std::lround(spec.duration_s * spec.rate_hz));
  const long m = std::lround(spec.sut_model.latency_s * spec.rate_hz);
  auto time_of = [&](long k) { return static_cast<double>(k) / spec.rate_hz; };
  const auto& pm = spec.sut_model;

  // Spacing: distinct objects at least 3T apart, also across the latency shift.
  for (long k = 0; k < nframes; ++k) {
    for (std::size_t i = 0; i < spec.gt_tracks.size(); ++i) {
      for (std::size_t j = 0; j < spec.gt_tracks.size(); ++j) {
        if (i == j) continue;
        const auto& a = spec.gt_tracks[i];
        const auto& b = spec.gt_tracks[j];
        for (long shift : {0L, m}) {
          const long kb = k + shift;
          if (kb >= nframes || !a.alive(time_of(k)) || !b.alive(time_of(kb))) continue;
          if (norm(a.position(time_of(k)) - b.position(time_of(kb))) < 3.0 * T) {
            throw SchemaError("ground-truth objects gt" + std::to_string(i) + " and gt" +
                              std::to_string(j) + " are closer than 3x the matching threshold");
          }
        }
      }
    }
  }

  GeneratedScene out;
  out.config = paired_config(spec);
  out.res.role = Role::kRes;
  out.sut.role = Role::kSut;
  out.res.sensor_meta = {{"source", "synthetic"}, {"seed", std::to_string(spec.seed)}};
  out.sut.sensor_meta = out.res.sensor_meta;
  out.sut.frame_times = std::vector<double>();
  for (long k = 0; k < nframes; ++k) out.sut.frame_times->push_back(time_of(k));

  std::vector<ObjectObservation> res_obs, sut_obs;
  std::array<double, 4> box{1e300, -1e300, 1e300, -1e300};
  for (std::size_t i = 0; i < spec.gt_tracks.size(); ++i) {
    const auto& g = spec.gt_tracks[i];
    const std::string rid = "gt" + std::to_string(i);
    int segment = 0;
    bool detected_before = false;
    for (long k = 0; k < nframes; ++k) {
      const double t = time_of(k);
      if (!g.alive(t)) continue;
      const Vec2 p = g.position(t);
      const Vec2 v = g.velocity(t);
      box = {std::min(box[0], p.x), std::max(box[1], p.x), std::min(box[2], p.y), std::max(box[3], p.y)};
      res_obs.push_back(detail::make_obs(rid, g.class_label, t,
                                         p + detail::truncated_noise(rng, spec.res_noise_m, 0.3 * T), v, &g));
      if (rng.bernoulli(pm.fragmentation_prob) && detected_before) ++segment;
      const bool dropped = rng.bernoulli(pm.dropout_per_frame_prob);
      const bool misclass = rng.bernoulli(pm.misclass_prob);
      const bool duplicate = rng.bernoulli(pm.duplicate_prob);
      if (dropped) continue;
      std::string cls = g.class_label;
      if (misclass) {
        std::vector<std::string> others;
        for (const auto& c : synth_classes()) {
          if (c != g.class_label) others.push_back(c);
        }
        cls = others[rng.below(others.size())];
      }
      const double stamped = time_of(k);  // the engine adds the latency
      auto det = detail::make_obs(rid + "_s" + std::to_string(segment), cls, stamped,
                                  p + detail::truncated_noise(rng, pm.pos_sigma_m, 0.3 * T), v, &g);
      det.existence_conf = detail::draw_conf(rng, pm.existence_conf.real_mean);
      sut_obs.push_back(std::move(det));
      detected_before = true;
      if (duplicate) {
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 off{0.5 * T * std::cos(phi), 0.5 * T * std::sin(phi)};
        auto dup = detail::make_obs(rid + "_dup", g.class_label, stamped,
                                    p + off + detail::truncated_noise(rng, pm.pos_sigma_m, 0.3 * T), v, &g);
        dup.existence_conf = detail::draw_conf(rng, pm.existence_conf.real_mean);
        sut_obs.push_back(std::move(dup));
      }
    }
  }
  if (box[0] > box[1]) box = {-20.0, 20.0, -20.0, 20.0};
  box = {box[0] - 10.0, box[1] + 10.0, box[2] - 10.0, box[3] + 10.0};

  long clutter_id = 0;
  for (long k = 0; k < nframes; ++k) {
    const int n = rng.poisson(pm.clutter_rate_per_frame);
    for (int c = 0; c < n; ++c) {
      std::optional<Vec2> where;
      for (int attempt = 0; attempt < 100 && !where; ++attempt) {
        const Vec2 q = detail::sample_region(rng, spec.aov.sut_aov, box);
        bool clear = true;
        for (const auto& g : spec.gt_tracks) {
          for (long kk : {k, k + m}) {
            if (kk < nframes && g.alive(time_of(kk)) && norm(g.position(time_of(kk)) - q) < 2.0 * T) clear = false;
          }
        }
        if (clear) where = q;
      }
      const std::string cls = synth_classes()[rng.below(synth_classes().size())];
      const double conf = detail::draw_conf(rng, pm.existence_conf.clutter_mean);
      if (!where) continue;
      auto o = detail::make_obs("clutter" + std::to_string(clutter_id++), cls, time_of(k), *where,
                                {0.0, 0.0}, nullptr);
      o.existence_conf = conf;
      sut_obs.push_back(std::move(o));
    }
  }
  out.res.tracks = group_into_tracks(res_obs);
  out.sut.tracks = group_into_tracks(sut_obs);

  // Bookkeeping under paired_config(spec).
  const OracleConfig& cfg = out.config;
  VerdictLedger& L = out.expected;
  L.config_echo = cfg;
  auto keep = [&](const ObjectObservation& o, Role role) {
    if (auto reason = aov_exclusion(o, cfg.aov)) {
      L.exclusions.push_back(make_tag(*reason, Stage::kPreMatching, role, o));
      return false;
    }
    const Stage stage = cfg.areas.stage;
    const bool removes = area_filters_role(stage, role);
    if (removes || stage == Stage::kPostMatching) {
      if (auto d = area_exclusion(o, cfg.areas)) {
        auto tag = make_tag(d->reason, stage, role, o);
        tag.boundary_distance_m = d->boundary_distance_m;
        L.exclusions.push_back(std::move(tag));
        return !removes;
      }
    }
    return true;
  };
  const std::optional<double> delay =
      m > 0 ? std::optional<double>(static_cast<double>(m) / spec.rate_hz) : std::nullopt;

  std::map<long, std::vector<ObjectObservation>> res_by_frame, sut_by_frame;
  for (const auto& o : res_obs) {
    const long k = std::lround(o.timestamp * spec.rate_hz);
    if (k < m) {
      if (!keep(o, Role::kRes)) continue;
      MatchEvent e;
      e.kind = EventKind::kFn;
      e.timestamp = o.timestamp;
      e.res_id = o.track_id;
      e.res_class = o.class_label;
      e.set(kFlagOverhang);
      e.overhang_side = OverhangSide::kLead;
      L.events.push_back(std::move(e));
      continue;
    }
    res_by_frame[k].push_back(o);
  }
  for (auto o : sut_obs) {
    const long j = std::lround(o.timestamp * spec.rate_hz) + m;
    o.timestamp = time_of(j);
    sut_by_frame[j].push_back(std::move(o));
  }

  for (long j = m; j < nframes + m; ++j) {
    const double t = time_of(j);
    std::vector<ObjectObservation> res_kept, sut_kept;
    for (const auto& o : res_by_frame[j]) {
      if (keep(o, Role::kRes)) res_kept.push_back(o);
    }
    for (const auto& o : sut_by_frame[j]) {
      if (keep(o, Role::kSut)) sut_kept.push_back(o);
    }
    std::vector<char> sut_used(sut_kept.size(), 0);
    for (const auto& r : res_kept) {
      std::optional<std::size_t> best;
      double best_d = 0.0;
      for (std::size_t s = 0; s < sut_kept.size(); ++s) {
        if (sut_kept[s].class_label != r.class_label) continue;
        const double d = std::hypot(sut_kept[s].x - r.x, sut_kept[s].y - r.y);
        if (d > T) continue;
        if (!best || d < best_d || (d == best_d && sut_kept[s].track_id < sut_kept[*best].track_id)) {
          best = s;
          best_d = d;
        }
      }
      MatchEvent e;
      e.timestamp = t;
      e.res_id = r.track_id;
      e.res_class = r.class_label;
      if (best) {
        sut_used[*best] = 1;
        e.kind = EventKind::kTp;
        e.sut_id = sut_kept[*best].track_id;
        e.sut_class = sut_kept[*best].class_label;
        e.delay_s = delay;
        CostBreakdown c;
        c.geometric = c.total = best_d;
        e.cost = c;
      } else {
        e.kind = EventKind::kFn;
      }
      L.events.push_back(std::move(e));
    }
    for (std::size_t s = 0; s < sut_kept.size(); ++s) {
      if (sut_used[s]) continue;
      MatchEvent e;
      e.kind = EventKind::kFp;
      e.timestamp = t;
      e.sut_id = sut_kept[s].track_id;
      e.sut_class = sut_kept[s].class_label;
      L.events.push_back(std::move(e));
    }
  }
  std::stable_sort(L.events.begin(), L.events.end(), event_less);
  std::stable_sort(L.exclusions.begin(), L.exclusions.end(), [](const ExclusionTag& a, const ExclusionTag& b) {
    return std::tie(a.ref.timestamp, a.ref.role, a.ref.track_id) <
           std::tie(b.ref.timestamp, b.ref.role, b.ref.track_id);
  });
  return out;
}

// A spec drawn from the documented ranges: 1 to 8 objects on parallel lanes
// 3.5 thresholds apart, rates 10 to 25 Hz, moderate perturbations.
inline SceneSpec random_scene_spec(std::uint64_t seed) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  SceneSpec s;
  s.seed = seed;
  static const double rates[] = {10.0, 12.5, 20.0, 25.0};
  s.rate_hz = rates[rng.below(4)];
  s.threshold_m = rng.bernoulli(0.5) ? 1.5 : 2.0;
  s.duration_s = rng.uniform(3.0, 12.0);
  const double T = s.threshold_m;
  const int n = 1 + static_cast<int>(rng.below(8));
  for (int i = 0; i < n; ++i) {
    GtTrackSpec g;
    g.class_label = synth_classes()[rng.below(synth_classes().size())];
    g.length = g.class_label == "truck" ? 10.0 : g.class_label == "car" ? 4.5 : 1.0;
    g.width = g.class_label == "truck" ? 2.5 : g.class_label == "car" ? 1.8 : 0.6;
    g.y0 = (i - 0.5 * (n - 1)) * 3.5 * T;
    g.x0 = rng.uniform(5.0, 40.0);
    g.vx = rng.uniform(-8.0, 8.0);
    g.t_start = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.0, s.duration_s / 3.0);
    if (rng.bernoulli(0.5)) g.t_end = rng.uniform(2.0 * s.duration_s / 3.0, s.duration_s);
    s.gt_tracks.push_back(g);
  }
  s.res_noise_m = rng.uniform(0.0, 0.05 * T);
  auto& pm = s.sut_model;
  pm.pos_sigma_m = rng.uniform(0.0, 0.1 * T);
  pm.dropout_per_frame_prob = rng.uniform(0.0, 0.3);
  pm.clutter_rate_per_frame = rng.uniform(0.0, 1.0);
  pm.latency_s = 0.1 * static_cast<double>(rng.below(4));
  pm.fragmentation_prob = rng.uniform(0.0, 0.05);
  pm.duplicate_prob = rng.uniform(0.0, 0.2);
  pm.misclass_prob = rng.uniform(0.0, 0.1);
  pm.existence_conf = {rng.uniform(0.6, 0.95), rng.uniform(0.1, 0.5)};
  const auto geometry = rng.below(3);
  if (geometry == 1) {
    s.aov.sut_aov = Sector{{0.0, 0.0}, 0.0, 45.0, 2.0 * std::numbers::pi / 3.0};
  } else if (geometry == 2) {
    const double y = (0.5 * (n - 1) + 0.5) * 3.5 * T;
    s.areas.exclude.push_back(Polygon2D{{{30.0, -y}, {45.0, -y}, {45.0, y}, {30.0, y}}});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hand-built scenes

// Outcome of one object: event kinds (and rescue marks) or exclusion reasons,
// sorted and joined with '+', e.g. "tp", "fp+fn", "excluded:occluded".
inline std::string object_outcome(const VerdictLedger& l, Role role, const std::string& id) {
  std::vector<std::string> parts;
  for (const auto& e : l.events) {
    if (e.kind == EventKind::kIdSwitch) continue;
    const std::string& eid = role == Role::kSut ? e.sut_id : e.res_id;
    if (eid != id) continue;
    std::string p = to_string(e.kind);
    if (e.has(kFlagBorderRescued)) p += ":border_rescued";
    if (e.has(kFlagOverhang)) p += ":overhang";
    parts.push_back(p);
  }
  for (const auto& x : l.exclusions) {
    if (x.ref.role == role && x.ref.track_id == id) parts.push_back(std::string("excluded:") + to_string(x.reason));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "+") + p;
  return out.empty() ? "absent" : out;
}

struct ObjectVerdict {
  Role role;
  std::string id;
  std::string outcome;
};

struct ExpectedCase {
  std::string name;
  std::function<void(OracleConfig&)> adjust;
  Counts counts;
  long id_switches = 0;
  std::vector<ObjectVerdict> objects;
};

struct FigureScene {
  Recording res;
  Recording sut;
  std::function<OracleConfig(const OracleConfig&)> configure;  // scene geometry on a base config
  std::vector<ExpectedCase> cases;
};

namespace detail {

inline ObjectObservation box(const std::string& id, const std::string& cls, double t, double x,
                             double y, double l, double w, double yaw = 0.0) {
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

inline ObjectObservation scored(ObjectObservation o, double p_exist) {
  o.existence_conf = p_exist;
  return o;
}

inline Recording recording(Role role, std::vector<ObjectObservation> obs,
                           std::optional<std::vector<double>> frame_times = std::nullopt) {
  Recording r;
  r.role = role;
  r.tracks = group_into_tracks(obs);
  r.frame_times = std::move(frame_times);
  r.sensor_meta = {{"source", "hand-built scene"}};
  return r;
}

}  // namespace detail

// Single-frame top-down scene: the SUT vehicle at the origin looking along
// +x, a rectangular ReS area of vision, and objects A to N. The base config
// is expected to be nuscenes_style; configure() adds the scene geometry.
inline FigureScene figure2_scene() {
  using detail::box;
  using detail::scored;
  FigureScene sc;
  const double t = 0.0;
  sc.res = detail::recording(Role::kRes, {
      box("A", "truck", t, 12.0, 0.0, 10.0, 2.5),
      box("C", "car", t, 25.0, -8.0, 4.5, 1.8),
      box("D", "pedestrian", t, 14.0, 16.0, 0.6, 0.6),
      box("E", "pedestrian", t, 45.0, 5.0, 0.6, 0.6),
      box("F1", "pedestrian", t, 8.0, -6.0, 0.6, 0.6),
      box("F2", "pedestrian", t, 8.0, -7.6, 0.6, 0.6),
      box("G", "bicycle", t, 22.0, 0.0, 1.8, 0.6),
      box("H", "truck", t, 30.0, 10.0, 12.0, 2.5),
      box("K", "pedestrian", t, 26.0, 0.8, 0.6, 0.6),
      box("M", "pedestrian", t, 15.0, -6.0, 0.6, 0.6),
      box("N", "pedestrian", t, 26.0, -12.4, 0.6, 0.6),
  });
  sc.sut = detail::recording(Role::kSut, {
      scored(box("A", "truck", t, 12.3, 0.1, 9.6, 2.4), 0.95),
      scored(box("B", "car", t, 20.0, 8.0, 4.5, 1.8), 0.6),
      scored(box("D", "pedestrian", t, 14.2, 16.1, 0.6, 0.6), 0.8),
      scored(box("F", "pedestrian", t, 8.1, -6.5, 0.6, 0.6), 0.85),
      scored(box("H", "truck", t, 26.0, 10.0, 4.0, 2.5), 0.7),
      scored(box("J", "pedestrian", t, 10.0, 25.0, 0.6, 0.6), 0.5),
      scored(box("L", "car", t, 20.0, -22.0, 4.5, 1.8), 0.55),
      scored(box("M1", "pedestrian", t, 15.2, -6.1, 0.6, 0.6), 0.9),
      scored(box("M2", "pedestrian", t, 14.6, -5.8, 0.6, 0.6), 0.45),
      scored(box("N", "pedestrian", t, 26.0, -13.4, 0.6, 0.6), 0.75),
  }, std::vector<double>{t});
  sc.configure = [](const OracleConfig& base) {
    OracleConfig c = base;
    c.name = base.name + "+figure2";
    c.aov.res_aov = Polygon2D{{{-5.0, -20.0}, {60.0, -20.0}, {60.0, 20.0}, {-5.0, 20.0}}};
    c.aov.sut_aov = Sector{{0.0, 0.0}, 0.0, 35.0, 145.0 * std::numbers::pi / 180.0};
    c.areas.exclude = {Polygon2D{{{8.0, 12.0}, {20.0, 12.0}, {20.0, 20.0}, {8.0, 20.0}}},
                       Polygon2D{{{25.0, -20.0}, {40.0, -20.0}, {40.0, -13.0}, {25.0, -13.0}}}};
    c.occlusion.viewer = {0.0, 0.0};
    return c;
  };

  const std::vector<ObjectVerdict> common = {
      {Role::kRes, "A", "tp"},
      {Role::kSut, "A", "tp"},
      {Role::kSut, "B", "fp"},
      {Role::kRes, "C", "fn"},
      {Role::kRes, "D", "excluded:no_test_area"},
      {Role::kSut, "D", "excluded:no_test_area"},
      {Role::kRes, "E", "excluded:outside_sut_aov"},
      {Role::kRes, "F1", "tp"},
      {Role::kRes, "F2", "fn"},
      {Role::kSut, "F", "tp"},
      {Role::kRes, "G", "excluded:occluded"},
      {Role::kRes, "K", "excluded:occluded"},
      {Role::kRes, "H", "fn"},
      {Role::kSut, "H", "fp"},
      {Role::kSut, "J", "excluded:outside_res_aov"},
      {Role::kSut, "L", "excluded:outside_res_aov"},
  };
  auto with = [&](std::vector<ObjectVerdict> extra) {
    auto v = common;
    v.insert(v.end(), extra.begin(), extra.end());
    return v;
  };
  sc.cases.push_back({"one_one, hard_cut", [](OracleConfig&) {}, Counts{3, 3, 4}, 0,
                      with({{Role::kRes, "M", "tp"},
                            {Role::kSut, "M1", "tp"},
                            {Role::kSut, "M2", "fp"},
                            {Role::kRes, "N", "fn"},
                            {Role::kSut, "N", "excluded:no_test_area"}})});
  sc.cases.push_back({"one_one, fuzzy_rescue 1.0 m",
                      [](OracleConfig& c) {
                        c.corner_cases.policy = BorderPolicy::kFuzzyRescue;
                        c.corner_cases.margin_m = 1.0;
                      },
                      Counts{4, 3, 3}, 0,
                      with({{Role::kRes, "M", "tp"},
                            {Role::kSut, "M2", "fp"},
                            {Role::kRes, "N", "tp:border_rescued"},
                            {Role::kSut, "N", "tp:border_rescued"}})});
  sc.cases.push_back({"n_one, hard_cut",
                      [](OracleConfig& c) { c.assignment.cardinality = Cardinality::kNOne; },
                      Counts{4, 2, 4}, 0,
                      with({{Role::kRes, "M", "tp+tp"},
                            {Role::kSut, "M1", "tp"},
                            {Role::kSut, "M2", "tp"},
                            {Role::kRes, "N", "fn"}})});
  return sc;
}

// Two small scenes on the time axis.
//   a: one ReS/SUT pair, ReS at 0.0..1.0 s and SUT at 0.05..0.95 s (10 Hz),
//      leaving one lead and one tail ReS overhang 0.05 s from the SUT span.
//   b: ReS1 over frames 0..7 and ReS2 over 9..10; SUT1 covers ReS1 in 0..3,
//      SUT2 follows ReS1 in 5..7, jumps away in 8 and covers ReS2 in 9..10.
inline FigureScene figure3_scene_a() {
  using detail::box;
  FigureScene sc;
  std::vector<ObjectObservation> res, sut;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    auto o = box("a", "car", t, 5.0 * t, 0.0, 4.5, 1.8);
    o.vx = 5.0;
    res.push_back(o);
  }
  std::vector<double> frames;
  for (int k = 0; k < 10; ++k) {
    const double t = 0.05 + 0.1 * k;
    auto o = box("a", "car", t, 5.0 * t, 0.0, 4.5, 1.8);
    o.vx = 5.0;
    sut.push_back(o);
    frames.push_back(t);
  }
  sc.res = detail::recording(Role::kRes, res);
  sc.sut = detail::recording(Role::kSut, sut, frames);
  sc.configure = [](const OracleConfig& base) {
    OracleConfig c = base;
    c.name = base.name + "+figure3a";
    return c;
  };
  auto overhang = [](OverhangMode mode, std::optional<double> dt) {
    return [mode, dt](OracleConfig& c) {
      c.temporal.overhang = mode;
      c.temporal.dt_max_s = dt;
    };
  };
  sc.cases.push_back({"overhang discard", overhang(OverhangMode::kDiscard, std::nullopt),
                      Counts{10, 0, 0}, 0, {{Role::kRes, "a", "excluded:overhang+excluded:overhang+tp+tp+tp+tp+tp+tp+tp+tp+tp+tp"}}});
  sc.cases.push_back({"overhang fn_fp", overhang(OverhangMode::kFnFp, std::nullopt),
                      Counts{10, 0, 2}, 0, {{Role::kRes, "a", "fn:overhang+fn:overhang+tp+tp+tp+tp+tp+tp+tp+tp+tp+tp"}}});
  sc.cases.push_back({"overhang threshold 0.1 s", overhang(OverhangMode::kThreshold, 0.1),
                      Counts{10, 0, 0}, 0, {}});
  sc.cases.push_back({"overhang threshold 0.03 s", overhang(OverhangMode::kThreshold, 0.03),
                      Counts{10, 0, 2}, 0, {}});
  return sc;
}

inline FigureScene figure3_scene_b() {
  using detail::box;
  FigureScene sc;
  std::vector<ObjectObservation> res, sut;
  std::vector<double> frames;
  for (int k = 0; k <= 10; ++k) frames.push_back(0.1 * k);
  for (int k = 0; k <= 7; ++k) res.push_back(box("ReS1", "car", frames[k], k, 0.0, 4.5, 1.8));
  for (int k = 9; k <= 10; ++k) res.push_back(box("ReS2", "car", frames[k], k, 0.0, 4.5, 1.8));
  for (int k = 0; k <= 3; ++k) sut.push_back(box("SUT1", "car", frames[k], k, 0.0, 4.5, 1.8));
  for (int k = 5; k <= 7; ++k) sut.push_back(box("SUT2", "car", frames[k], k, 0.5, 4.5, 1.8));
  sut.push_back(box("SUT2", "car", frames[8], 8.0, 30.0, 4.5, 1.8));
  for (int k = 9; k <= 10; ++k) sut.push_back(box("SUT2", "car", frames[k], k, 0.0, 4.5, 1.8));
  sc.res = detail::recording(Role::kRes, res);
  sc.sut = detail::recording(Role::kSut, sut, frames);
  sc.configure = [](const OracleConfig& base) {
    OracleConfig c = base;
    c.name = base.name + "+figure3b";
    return c;
  };
  auto lifetime = [](Lifetime lt, bool sticky, OverhangMode mode) {
    return [=](OracleConfig& c) {
      c.assignment.lifetime = lt;
      c.assignment.sticky = sticky;
      c.assignment.track_threshold_mean_m.reset();
      c.temporal.overhang = mode;
      c.temporal.dt_max_s.reset();
    };
  };
  sc.cases.push_back({"frame", lifetime(Lifetime::kFrame, false, OverhangMode::kFnFp), Counts{9, 1, 1}, 0, {}});
  sc.cases.push_back({"subsequence", lifetime(Lifetime::kSubsequence, false, OverhangMode::kFnFp),
                      Counts{9, 1, 1}, 1, {}});
  sc.cases.push_back({"subsequence, sticky", lifetime(Lifetime::kSubsequence, true, OverhangMode::kFnFp),
                      Counts{9, 1, 1}, 1, {}});
  sc.cases.push_back({"track, fn_fp", lifetime(Lifetime::kTrack, false, OverhangMode::kFnFp),
                      Counts{6, 4, 4}, 0,
                      {{Role::kRes, "ReS1", "fn:overhang+fn:overhang+fn:overhang+fn:overhang+tp+tp+tp+tp"},
                       {Role::kRes, "ReS2", "tp+tp"},
                       {Role::kSut, "SUT1", "tp+tp+tp+tp"},
                       {Role::kSut, "SUT2", "fp:overhang+fp:overhang+fp:overhang+fp:overhang+tp+tp"}}});
  sc.cases.push_back({"track, discard", lifetime(Lifetime::kTrack, false, OverhangMode::kDiscard),
                      Counts{6, 0, 0}, 0, {}});
  return sc;
}

}  // namespace detoracle
