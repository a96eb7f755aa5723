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

// End-to-end evaluation of one SUT recording against one ReS recording.
//
// Steps: timestamp basis, ReS-to-SUT transform, class resolution,
// resampling onto the SUT time grid, per-frame filters, matching, border
// rescue, misclassification and gap policies, aggregation.

#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/matching.hpp"
#include "detoracle/model.hpp"
#include "detoracle/temporal.hpp"
#include "detoracle/verdict.hpp"

namespace detoracle {

struct SweepPoint {
  double tau_exist = 0.0;
  MetricsSummary summary;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::optional<double> mean_precision;  // over thresholds where defined
  std::optional<double> mean_recall;
};

struct Evaluation {
  VerdictLedger ledger;
  MetricsSummary summary;
  std::optional<SweepResult> sweep;
};

namespace detail {

// Index of `t` in the sorted grid, or npos when it is not a grid time.
inline std::size_t grid_index(const std::vector<double>& grid, double t) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t - kTimeTolerance);
  if (it == grid.end() || !same_time(*it, t)) return std::string::npos;
  return static_cast<std::size_t>(it - grid.begin());
}

inline void check_inputs(const Recording& res, const Recording& sut) {
  std::vector<std::string> details;
  for (const auto* rec : {&res, &sut}) {
    for (const auto& v : validate_recording(*rec)) {
      details.push_back(std::string(to_string(rec->role)) + ": " + v.describe());
    }
  }
  if (!details.empty()) {
    throw ValidationError("input recordings failed validation (" +
                              std::to_string(details.size()) + " violations)",
                          std::move(details));
  }
}

struct Candidate {
  ObjectObservation obs;
  bool interpolated = false;
  std::optional<double> delay_s;
  std::optional<double> occlusion;
};

// Area-excluded observation kept aside for a possible border rescue.
struct AreaExcluded {
  Candidate cand;
  std::size_t tag_index;
};

struct FrameSets {
  std::vector<Unit> kept;
  std::vector<Unit> annex;
  std::vector<AreaExcluded> area_excluded;
};

inline Unit to_unit(const Candidate& c) { return Unit{c.obs, c.interpolated, c.delay_s, c.occlusion}; }

inline bool unit_less(const Unit& a, const Unit& b) { return a.obs.track_id < b.obs.track_id; }

class Evaluator {
 public:
  Evaluator(const OracleConfig& cfg) : cfg_(cfg) {
    validate_assignment_config(cfg.assignment);
    validate_region(cfg.aov.res_aov);
    validate_region(cfg.aov.sut_aov);
    gate_cfg_ = cfg.distance;
    if (cfg.assignment.lifetime == Lifetime::kTrack) {
      gate_cfg_.threshold = std::numeric_limits<double>::infinity();
    }
  }

  VerdictLedger run(const Recording& res_in, const Recording& sut_in) {
    check_inputs(res_in, sut_in);
    ledger_ = VerdictLedger{};
    ledger_.config_echo = cfg_;

    RecordingPair pair = apply_timestamp_basis({res_in, sut_in}, cfg_.temporal);
    for (auto& track : pair.res.tracks) {
      for (auto& o : track.observations) o = apply_transform(cfg_.alignment.transform, o);
    }

    // Time grid: SUT frame times and every SUT sample time.
    std::vector<double> grid;
    if (pair.sut.frame_times) grid = *pair.sut.frame_times;
    for (const auto& track : pair.sut.tracks) {
      for (const auto& o : track.observations) grid.push_back(o.timestamp);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(), same_time), grid.end());
    const std::size_t nframes = grid.size();

    std::vector<std::vector<Candidate>> res_at(nframes), sut_at(nframes);
    std::vector<std::pair<Candidate, ResOverhang>> res_overhang_raw;
    std::map<std::string, TimeSpan> res_spans, sut_spans;

    for (const auto& track : pair.res.tracks) {
      if (track.observations.empty()) continue;
      res_spans[track.track_id] = {track.observations.front().timestamp,
                                   track.observations.back().timestamp};
      SyncedPair synced = synchronize(track, grid);
      for (auto& s : synced.resampled) {
        const std::size_t f = grid_index(grid, s.obs.timestamp);
        res_at[f].push_back({std::move(s.obs), s.interpolated, std::nullopt, std::nullopt});
      }
      for (auto& o : synced.res_overhangs) {
        res_overhang_raw.push_back({Candidate{o.obs, false, std::nullopt, std::nullopt}, o});
      }
    }
    for (std::size_t ti = 0; ti < pair.sut.tracks.size(); ++ti) {
      const auto& track = pair.sut.tracks[ti];
      if (track.observations.empty()) continue;
      sut_spans[track.track_id] = {track.observations.front().timestamp,
                                   track.observations.back().timestamp};
      const auto& original = sut_in.tracks[ti].observations;
      for (std::size_t k = 0; k < track.observations.size(); ++k) {
        Candidate c{resolve_class(track.observations[k], cfg_.probabilistic.class_policy), false,
                    std::nullopt, std::nullopt};
        if (cfg_.temporal.basis == TimestampBasis::kAvailability) {
          c.delay_s = track.observations[k].timestamp - original[k].timestamp;
        }
        sut_at[grid_index(grid, c.obs.timestamp)].push_back(std::move(c));
      }
    }

    problems_.assign(nframes, FrameProblem{});
    std::vector<FrameProblem> annex_problems(nframes);
    std::vector<std::vector<AreaExcluded>> res_area_excl(nframes), sut_area_excl(nframes);
    long sut_units = 0, res_units = 0;
    for (std::size_t f = 0; f < nframes; ++f) {
      if (cfg_.occlusion.mode != OcclusionMode::kIgnore && !res_at[f].empty()) {
        std::vector<ObjectObservation> frame;
        frame.reserve(res_at[f].size());
        for (const auto& c : res_at[f]) frame.push_back(c.obs);
        const OcclusionResult occ = occlusion_filter(frame, cfg_.occlusion);
        for (std::size_t k = 0; k < frame.size(); ++k) res_at[f][k].occlusion = occ.fractions[k];
      }
      FrameSets rs = screen_all(res_at[f], Role::kRes);
      FrameSets ss = screen_all(sut_at[f], Role::kSut);
      res_units += static_cast<long>(rs.kept.size());
      sut_units += static_cast<long>(ss.kept.size());
      problems_[f] = build_problem(grid[f], std::move(ss.kept), std::move(rs.kept));
      annex_problems[f] = build_problem(grid[f], std::move(ss.annex), std::move(rs.annex));
      res_area_excl[f] = std::move(rs.area_excluded);
      sut_area_excl[f] = std::move(ss.area_excluded);
    }

    std::vector<OverhangUnit> overhangs;
    std::vector<Unit> annex_overhangs;
    for (auto& [cand, oh] : res_overhang_raw) {
      bool annex = false;
      if (screen(cand, Role::kRes, annex, nullptr)) continue;
      if (annex) continue;  // overhangs in unreliable regions stay out of the annex frames
      overhangs.push_back({to_unit(cand), oh.side, oh.offset_s});
      ++res_units;
    }

    MatchOutput m;
    if (cfg_.assignment.lifetime == Lifetime::kTrack) {
      m = match_tracks(problems_, overhangs, sut_spans, res_spans, cfg_.assignment,
                       cfg_.distance.threshold, cfg_.temporal);
    } else {
      m = match_frames(problems_, overhangs, cfg_.assignment, cfg_.temporal);
      if (cfg_.corner_cases.policy == BorderPolicy::kFuzzyRescue) {
        const auto rescued = rescue_borders(m.events, grid, res_area_excl, sut_area_excl);
        sut_units += rescued.first;
        res_units += rescued.second;
      }
    }
    for (const auto& x : m.exclusions) {
      (x.ref.role == Role::kSut ? sut_units : res_units) -= 1;
      ledger_.exclusions.push_back(x);
    }

    std::vector<MatchEvent> events = classify_mismatch(std::move(m.events),
                                                       cfg_.probabilistic.mismatch_policy);
    ledger_.events = apply_gap_policy(std::move(events), cfg_.assignment.max_gap_frames);

    AssignmentConfig annex_cfg = cfg_.assignment;
    annex_cfg.lifetime = Lifetime::kFrame;
    annex_cfg.sticky = false;
    annex_cfg.track_threshold_mean_m.reset();
    TemporalPolicy annex_temporal = cfg_.temporal;
    annex_temporal.overhang = OverhangMode::kFnFp;
    MatchOutput annex = match_frames(annex_problems, {}, annex_cfg, annex_temporal);
    ledger_.annex = classify_mismatch(std::move(annex.events), cfg_.probabilistic.mismatch_policy);

    // Drop tags of rescued observations, then order deterministically.
    std::vector<ExclusionTag> tags;
    for (std::size_t k = 0; k < ledger_.exclusions.size(); ++k) {
      if (!removed_tags_.count(k)) tags.push_back(std::move(ledger_.exclusions[k]));
    }
    std::stable_sort(tags.begin(), tags.end(), [](const ExclusionTag& a, const ExclusionTag& b) {
      return std::tie(a.ref.timestamp, a.ref.role, a.ref.track_id) <
             std::tie(b.ref.timestamp, b.ref.role, b.ref.track_id);
    });
    ledger_.exclusions = std::move(tags);
    removed_tags_.clear();
    problems_.clear();
    ledger_.sut_units = sut_units;
    ledger_.res_units = res_units;
    return std::move(ledger_);
  }

 private:
  double inflation(const ObjectObservation& res) const {
    double extra = 0.0;
    if (cfg_.alignment.inflate_threshold) extra += cfg_.alignment.transform.reported_error_m;
    if (cfg_.temporal.inflate_threshold) {
      extra += cfg_.temporal.sync_uncertainty_s * std::hypot(res.vx, res.vy);
    }
    return extra;
  }

  // Applies the filter chain to one observation. Returns true when the
  // observation leaves the evaluation; `annex` is set for p_min exclusions.
  // `area_slot` receives the tag index of area removals.
  bool screen(const Candidate& c, Role role, bool& annex, std::size_t* area_slot) {
    annex = false;
    const ObjectObservation& o = c.obs;
    if (auto reason = aov_exclusion(o, cfg_.aov)) {
      ledger_.exclusions.push_back(make_tag(*reason, Stage::kPreMatching, role, o));
      return true;
    }
    if (role == Role::kRes && c.occlusion && cfg_.occlusion.mode == OcclusionMode::kExclude &&
        *c.occlusion >= cfg_.occlusion.theta) {
      auto tag = make_tag(ExclusionReason::kOccluded, Stage::kPreMatching, role, o);
      tag.value = c.occlusion;
      ledger_.exclusions.push_back(std::move(tag));
      return true;
    }
    const Stage stage = cfg_.areas.stage;
    const bool removes = area_filters_role(stage, role);
    if (removes || stage == Stage::kPostMatching) {
      if (auto d = area_exclusion(o, cfg_.areas)) {
        auto tag = make_tag(d->reason, stage, role, o);
        tag.boundary_distance_m = d->boundary_distance_m;
        ledger_.exclusions.push_back(std::move(tag));
        if (removes) {
          if (area_slot) *area_slot = ledger_.exclusions.size() - 1;
          return true;
        }
      }
    }
    if (cfg_.aov.p_min > 0.0) {
      if (auto p = min_p_detect(o, cfg_.aov); p && *p < cfg_.aov.p_min) {
        auto tag = make_tag(ExclusionReason::kBelowPMin, Stage::kPreMatching, role, o);
        tag.value = *p;
        ledger_.exclusions.push_back(std::move(tag));
        annex = true;
        return false;
      }
    }
    if (role == Role::kSut && !passes_confidence(o, cfg_.probabilistic.tau_exist)) {
      auto tag = make_tag(ExclusionReason::kBelowConf, Stage::kPreMatching, role, o);
      tag.value = o.existence_conf.value_or(1.0);
      ledger_.exclusions.push_back(std::move(tag));
      return true;
    }
    return false;
  }

  FrameSets screen_all(const std::vector<Candidate>& cands, Role role) {
    FrameSets out;
    for (const auto& c : cands) {
      bool annex = false;
      std::size_t slot = std::string::npos;
      if (screen(c, role, annex, &slot)) {
        if (slot != std::string::npos) out.area_excluded.push_back({c, slot});
        continue;
      }
      (annex ? out.annex : out.kept).push_back(to_unit(c));
    }
    return out;
  }

  FrameProblem build_problem(double t, std::vector<Unit> sut, std::vector<Unit> res) const {
    FrameProblem p;
    p.timestamp = t;
    std::stable_sort(sut.begin(), sut.end(), unit_less);
    std::stable_sort(res.begin(), res.end(), unit_less);
    p.sut = std::move(sut);
    p.res = std::move(res);
    const bool quick = gate_cfg_.metric == Metric::kCenter2d && std::isfinite(gate_cfg_.threshold);
    for (std::size_t j = 0; j < p.res.size(); ++j) {
      const ObjectObservation& r = p.res[j].obs;
      const double infl = inflation(r);
      const double reach = (gate_cfg_.threshold + infl) * (1.0 + 1e-9);
      for (std::size_t i = 0; i < p.sut.size(); ++i) {
        const ObjectObservation& s = p.sut[i].obs;
        if (quick) {
          const double dx = s.x - r.x, dy = s.y - r.y;
          if (dx * dx + dy * dy > reach * reach) continue;
        }
        CostBreakdown c = composite_cost(s, r, gate_cfg_, infl);
        if (!c.gated) p.cells.push_back({i, j, std::move(c)});
      }
    }
    std::sort(p.cells.begin(), p.cells.end(), [](const CostCell& a, const CostCell& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    return p;
  }

  // Unmatched kept units paired with an area-excluded counterpart near the
  // area boundary become TPs. Returns the number of reinstated (SUT, ReS)
  // observations.
  std::pair<long, long> rescue_borders(std::vector<MatchEvent>& events,
                                       const std::vector<double>& grid,
                                       const std::vector<std::vector<AreaExcluded>>& res_excl,
                                       const std::vector<std::vector<AreaExcluded>>& sut_excl) {
    struct Option {
      double cost;
      std::string sut_id, res_id;
      std::size_t event;
      const AreaExcluded* other;
      CostBreakdown breakdown;
    };
    std::map<std::size_t, std::vector<Option>> by_frame;
    for (std::size_t k = 0; k < events.size(); ++k) {
      const MatchEvent& e = events[k];
      if (e.has(kFlagOverhang) || (e.kind != EventKind::kFp && e.kind != EventKind::kFn)) continue;
      const std::size_t f = grid_index(grid, e.timestamp);
      if (f == std::string::npos) continue;
      const bool fp = e.kind == EventKind::kFp;
      for (const auto& ex : fp ? res_excl[f] : sut_excl[f]) {
        const ExclusionTag& tag = ledger_.exclusions[ex.tag_index];
        const ObjectObservation& other = ex.cand.obs;
        if (!fp && !passes_confidence(other, cfg_.probabilistic.tau_exist)) continue;
        const Unit* self = find_unit(e, f);
        if (self == nullptr) continue;
        const ObjectObservation* sut = fp ? &self->obs : &other;
        const ObjectObservation* res = fp ? &other : &self->obs;
        CostBreakdown c = composite_cost(*sut, *res, cfg_.distance, inflation(*res));
        if (resolve_border_case({&tag, c}, cfg_.corner_cases) != BorderOutcome::kRescued) continue;
        by_frame[f].push_back({c.total, sut->track_id, res->track_id, k, &ex, std::move(c)});
      }
    }
    long sut_added = 0, res_added = 0;
    for (auto& [f, options] : by_frame) {
      std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
        return std::tie(a.cost, a.sut_id, a.res_id) < std::tie(b.cost, b.sut_id, b.res_id);
      });
      std::set<std::size_t> used_events;
      std::set<const AreaExcluded*> used_excl;
      for (auto& opt : options) {
        if (used_events.count(opt.event) || used_excl.count(opt.other)) continue;
        used_events.insert(opt.event);
        used_excl.insert(opt.other);
        MatchEvent& e = events[opt.event];
        const ObjectObservation& other = opt.other->cand.obs;
        if (e.kind == EventKind::kFp) {
          e.res_id = other.track_id;
          e.res_class = other.class_label;
          if (opt.other->cand.interpolated) e.set(kFlagInterpolated);
          e.res_occlusion = opt.other->cand.occlusion;
          ++res_added;
        } else {
          e.sut_id = other.track_id;
          e.sut_class = other.class_label;
          e.delay_s = opt.other->cand.delay_s;
          ++sut_added;
        }
        e.kind = EventKind::kTp;
        e.cost = std::move(opt.breakdown);
        e.set(kFlagBorderRescued);
        removed_tags_.insert(opt.other->tag_index);
      }
    }
    if (sut_added + res_added > 0) std::stable_sort(events.begin(), events.end(), event_less);
    return {sut_added, res_added};
  }

  const Unit* find_unit(const MatchEvent& e, std::size_t f) const {
    const bool fp = e.kind == EventKind::kFp;
    const auto& units = fp ? problems_[f].sut : problems_[f].res;
    const std::string& id = fp ? e.sut_id : e.res_id;
    for (const auto& u : units) {
      if (u.obs.track_id == id) return &u;
    }
    return nullptr;
  }

  const OracleConfig& cfg_;
  DistanceConfig gate_cfg_;
  VerdictLedger ledger_;
  std::set<std::size_t> removed_tags_;
  std::vector<FrameProblem> problems_;
};

}  // namespace detail

// Full ledger for one recording pair; throws ValidationError on invalid input.
inline VerdictLedger evaluate_ledger(const Recording& res, const Recording& sut,
                                     const OracleConfig& cfg) {
  detail::Evaluator ev(cfg);
  return ev.run(res, sut);
}

inline bool has_existence_confidences(const Recording& sut) {
  for (const auto& t : sut.tracks) {
    for (const auto& o : t.observations) {
      if (o.existence_conf) return true;
    }
  }
  return false;
}

// Evaluates at tau_k = k / (K + 1), k = 1..K, replacing tau_exist.
inline SweepResult threshold_sweep(const Recording& res, const Recording& sut,
                                   const OracleConfig& cfg, int k_thresholds) {
  if (k_thresholds < 1) throw PolicyError("threshold sweep needs K >= 1");
  if (!has_existence_confidences(sut)) {
    throw PolicyError(
        "threshold sweep needs SUT existence confidences (p_exist); none are present. "
        "Set probabilistic.sweep_thresholds to 0 for single-threshold mode");
  }
  std::vector<std::future<SweepPoint>> jobs;
  for (int k = 1; k <= k_thresholds; ++k) {
    OracleConfig point = cfg;
    point.probabilistic.tau_exist = static_cast<double>(k) / static_cast<double>(k_thresholds + 1);
    point.probabilistic.sweep_thresholds = 0;
    jobs.push_back(std::async(std::launch::async, [&res, &sut, point = std::move(point)]() {
      return SweepPoint{point.probabilistic.tau_exist, aggregate(evaluate_ledger(res, sut, point))};
    }));
  }
  SweepResult out;
  double p_sum = 0.0, r_sum = 0.0;
  int p_n = 0, r_n = 0;
  for (auto& job : jobs) {
    out.points.push_back(job.get());
    const auto& s = out.points.back().summary;
    if (s.precision) {
      p_sum += *s.precision;
      ++p_n;
    }
    if (s.recall) {
      r_sum += *s.recall;
      ++r_n;
    }
  }
  if (p_n > 0) out.mean_precision = p_sum / p_n;
  if (r_n > 0) out.mean_recall = r_sum / r_n;
  return out;
}

inline Evaluation evaluate(const Recording& res, const Recording& sut, const OracleConfig& cfg) {
  Evaluation out;
  out.ledger = evaluate_ledger(res, sut, cfg);
  out.summary = aggregate(out.ledger);
  if (cfg.probabilistic.sweep_thresholds > 0) {
    out.sweep = threshold_sweep(res, sut, cfg, cfg.probabilistic.sweep_thresholds);
  }
  return out;
}

}  // namespace detoracle
