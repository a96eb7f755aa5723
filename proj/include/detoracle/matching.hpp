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

// Frame, track and sub-sequence lifetime matching on top of assign_frame.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "detoracle/assignment.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/geometry.hpp"
#include "detoracle/model.hpp"
#include "detoracle/temporal.hpp"

namespace detoracle {

enum class Lifetime { kFrame, kTrack, kSubsequence };

struct AssignmentConfig {
  Algorithm algorithm = Algorithm::kHungarian;
  Cardinality cardinality = Cardinality::kOneOne;
  Lifetime lifetime = Lifetime::kFrame;
  bool sticky = false;
  int max_gap_frames = 0;
  std::optional<double> track_threshold_mean_m;

  friend bool operator==(const AssignmentConfig&, const AssignmentConfig&) = default;
};

inline void validate_assignment_config(const AssignmentConfig& cfg) {
  if (cfg.max_gap_frames < 0) throw SchemaError("assignment.max_gap_frames must be >= 0");
  if (cfg.sticky && cfg.lifetime != Lifetime::kSubsequence) {
    throw SchemaError("assignment.sticky requires lifetime 'subsequence'");
  }
  if (cfg.track_threshold_mean_m && cfg.lifetime != Lifetime::kTrack) {
    throw SchemaError("assignment.track_threshold_mean_m requires lifetime 'track'");
  }
  if (cfg.track_threshold_mean_m && !(*cfg.track_threshold_mean_m > 0.0)) {
    throw SchemaError("assignment.track_threshold_mean_m must be > 0");
  }
}

enum class EventKind { kTp, kFp, kFn, kIdSwitch };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::kTp: return "tp";
    case EventKind::kFp: return "fp";
    case EventKind::kFn: return "fn";
    case EventKind::kIdSwitch: return "id_switch";
  }
  return "?";
}

enum EventFlag : std::uint32_t {
  kFlagInterpolated = 1u << 0,
  kFlagBorderRescued = 1u << 1,
  kFlagGapForgiven = 1u << 2,
  kFlagOverhang = 1u << 3,
  kFlagWrongClass = 1u << 4,
};

inline const std::vector<std::pair<EventFlag, std::string>>& flag_names() {
  static const std::vector<std::pair<EventFlag, std::string>> names = {
      {kFlagInterpolated, "interpolated"}, {kFlagBorderRescued, "border_rescued"},
      {kFlagGapForgiven, "gap_forgiven"},  {kFlagOverhang, "overhang"},
      {kFlagWrongClass, "wrong_class"},
  };
  return names;
}

struct MatchEvent {
  EventKind kind = EventKind::kTp;
  double timestamp = 0.0;
  std::string sut_id;
  std::string res_id;
  std::string prev_sut_id;  // id_switch only
  std::string sut_class;
  std::string res_class;
  std::optional<CostBreakdown> cost;
  std::uint32_t flags = 0;
  std::optional<double> delay_s;
  std::optional<OverhangSide> overhang_side;
  std::optional<double> res_occlusion;  // occlusion fraction of the ReS unit

  bool has(EventFlag f) const { return (flags & f) != 0; }
  void set(EventFlag f) { flags |= f; }
  void clear(EventFlag f) { flags &= ~static_cast<std::uint32_t>(f); }
};

inline bool event_less(const MatchEvent& a, const MatchEvent& b) {
  return std::tie(a.timestamp, a.kind, a.res_id, a.sut_id, a.prev_sut_id) <
         std::tie(b.timestamp, b.kind, b.res_id, b.sut_id, b.prev_sut_id);
}

// One kept observation at a grid frame.
struct Unit {
  ObjectObservation obs;
  bool interpolated = false;
  std::optional<double> delay_s;
  std::optional<double> occlusion;
};

// ReS observation outside the evaluated time grid.
struct OverhangUnit {
  Unit unit;
  OverhangSide side = OverhangSide::kLead;
  double offset_s = 0.0;
};

struct CostCell {
  std::size_t row = 0;
  std::size_t col = 0;
  CostBreakdown cost;
};

// Kept units of one frame, each side sorted by track id. Only non-gated
// cells are stored, sorted by (row, col).
struct FrameProblem {
  double timestamp = 0.0;
  std::vector<Unit> sut;
  std::vector<Unit> res;
  std::vector<CostCell> cells;

  const CostBreakdown* cost(std::size_t i, std::size_t j) const {
    auto it = std::lower_bound(cells.begin(), cells.end(), std::make_pair(i, j),
                               [](const CostCell& c, const std::pair<std::size_t, std::size_t>& k) {
                                 return std::make_pair(c.row, c.col) < k;
                               });
    if (it == cells.end() || it->row != i || it->col != j) return nullptr;
    return &it->cost;
  }

  CostMatrix totals() const {
    CostMatrix m(sut.size(), res.size());
    for (const auto& c : cells) m(c.row, c.col) = c.cost.total;
    return m;
  }
};

struct MatchOutput {
  std::vector<MatchEvent> events;
  std::vector<ExclusionTag> exclusions;
};

namespace detail {

inline MatchEvent tp_event(double t, const Unit& s, const Unit& r, const CostBreakdown& c) {
  MatchEvent e;
  e.kind = EventKind::kTp;
  e.timestamp = t;
  e.sut_id = s.obs.track_id;
  e.res_id = r.obs.track_id;
  e.sut_class = s.obs.class_label;
  e.res_class = r.obs.class_label;
  e.cost = c;
  e.delay_s = s.delay_s;
  e.res_occlusion = r.occlusion;
  if (r.interpolated) e.set(kFlagInterpolated);
  return e;
}

inline MatchEvent fp_event(double t, const Unit& s) {
  MatchEvent e;
  e.kind = EventKind::kFp;
  e.timestamp = t;
  e.sut_id = s.obs.track_id;
  e.sut_class = s.obs.class_label;
  return e;
}

inline MatchEvent fn_event(double t, const Unit& r) {
  MatchEvent e;
  e.kind = EventKind::kFn;
  e.timestamp = t;
  e.res_id = r.obs.track_id;
  e.res_class = r.obs.class_label;
  e.res_occlusion = r.occlusion;
  if (r.interpolated) e.set(kFlagInterpolated);
  return e;
}

inline ExclusionTag overhang_tag(Role role, const ObjectObservation& o, double offset) {
  ExclusionTag tag = make_tag(ExclusionReason::kOverhang, Stage::kSynchronization, role, o);
  tag.value = offset;
  return tag;
}

// Overhang unit: an FN/FP flagged overhang, or an exclusion when discarded.
inline void emit_overhang(MatchOutput& out, Role role, double t, const Unit& u,
                          OverhangSide side, double offset, const TemporalPolicy& policy) {
  if (overhang_outcome(offset, policy) == OverhangOutcome::kDiscarded) {
    out.exclusions.push_back(overhang_tag(role, u.obs, offset));
    return;
  }
  MatchEvent e = role == Role::kRes ? fn_event(t, u) : fp_event(t, u);
  e.set(kFlagOverhang);
  e.overhang_side = side;
  out.events.push_back(std::move(e));
}

inline void finish(MatchOutput& out) {
  std::stable_sort(out.events.begin(), out.events.end(), event_less);
}

}  // namespace detail

// Frame and sub-sequence lifetimes. Frame mode ignores track identity across
// frames. Sub-sequence mode carries sticky pairs and reports id switches.
inline MatchOutput match_frames(std::span<const FrameProblem> frames,
                                std::span<const OverhangUnit> res_overhangs,
                                const AssignmentConfig& cfg, const TemporalPolicy& temporal) {
  MatchOutput out;
  const bool subsequence = cfg.lifetime == Lifetime::kSubsequence;
  struct StickyState {
    std::string sut_id;
    int missed = 0;
  };
  std::map<std::string, StickyState> sticky;            // by res id
  std::map<std::string, std::vector<std::string>> last;  // last partners by res id

  for (const auto& f : frames) {
    const CostMatrix totals = f.totals();
    std::vector<std::pair<std::size_t, std::size_t>> locked;
    if (subsequence && cfg.sticky) {
      std::map<std::string, std::size_t> sut_index;
      for (std::size_t i = 0; i < f.sut.size(); ++i) sut_index.emplace(f.sut[i].obs.track_id, i);
      for (std::size_t j = 0; j < f.res.size(); ++j) {
        auto it = sticky.find(f.res[j].obs.track_id);
        if (it == sticky.end()) continue;
        auto si = sut_index.find(it->second.sut_id);
        if (si != sut_index.end() && !totals.gated(si->second, j)) locked.emplace_back(si->second, j);
      }
    }
    const FrameAssignment a = assign_frame(totals, cfg.algorithm, cfg.cardinality, locked);

    std::map<std::size_t, std::vector<std::size_t>> partners;  // col -> rows
    for (const auto& [i, j] : a.pairs) {
      out.events.push_back(detail::tp_event(f.timestamp, f.sut[i], f.res[j], *f.cost(i, j)));
      partners[j].push_back(i);
    }
    for (auto i : a.unmatched_rows) out.events.push_back(detail::fp_event(f.timestamp, f.sut[i]));
    for (auto j : a.unmatched_cols) out.events.push_back(detail::fn_event(f.timestamp, f.res[j]));

    if (!subsequence) continue;
    for (std::size_t j = 0; j < f.res.size(); ++j) {
      const std::string& rid = f.res[j].obs.track_id;
      auto pit = partners.find(j);
      if (pit == partners.end()) {
        auto st = sticky.find(rid);
        if (st != sticky.end() && ++st->second.missed > cfg.max_gap_frames) sticky.erase(st);
        continue;
      }
      std::vector<std::string> now;
      for (auto i : pit->second) now.push_back(f.sut[i].obs.track_id);
      std::sort(now.begin(), now.end());
      auto lit = last.find(rid);
      if (lit != last.end()) {
        const auto& before = lit->second;
        const bool kept = std::any_of(now.begin(), now.end(), [&](const std::string& s) {
          return std::binary_search(before.begin(), before.end(), s);
        });
        if (!kept) {
          MatchEvent e;
          e.kind = EventKind::kIdSwitch;
          e.timestamp = f.timestamp;
          e.res_id = rid;
          e.res_class = f.res[j].obs.class_label;
          e.prev_sut_id = before.front();
          e.sut_id = now.front();
          out.events.push_back(std::move(e));
        }
      }
      auto st = sticky.find(rid);
      const bool retained = st != sticky.end() &&
                            std::binary_search(now.begin(), now.end(), st->second.sut_id);
      sticky[rid] = StickyState{retained ? st->second.sut_id : now.front(), 0};
      last[rid] = std::move(now);
    }
  }

  for (const auto& o : res_overhangs) {
    detail::emit_overhang(out, Role::kRes, o.unit.obs.timestamp, o.unit, o.side, o.offset_s, temporal);
  }
  detail::finish(out);
  return out;
}

using TimeSpan = std::pair<double, double>;

// Track lifetime: pairs of whole tracks are matched by their mean per-frame
// cost over the frames where both are kept. Class-gated frames do not count.
// Units of a matched track outside its partners' time span are overhangs.
inline MatchOutput match_tracks(std::span<const FrameProblem> frames,
                                std::span<const OverhangUnit> res_overhangs,
                                const std::map<std::string, TimeSpan>& sut_spans,
                                const std::map<std::string, TimeSpan>& res_spans,
                                const AssignmentConfig& cfg, double distance_threshold,
                                const TemporalPolicy& temporal) {
  const double threshold = cfg.track_threshold_mean_m.value_or(distance_threshold);
  std::set<std::string> sut_ids, res_ids;
  struct Acc {
    double sum = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& f : frames) {
    for (const auto& u : f.sut) sut_ids.insert(u.obs.track_id);
    for (const auto& u : f.res) res_ids.insert(u.obs.track_id);
    for (const auto& c : f.cells) {
      auto& a = acc[{f.sut[c.row].obs.track_id, f.res[c.col].obs.track_id}];
      a.sum += c.cost.total;
      ++a.n;
    }
  }
  for (const auto& o : res_overhangs) res_ids.insert(o.unit.obs.track_id);

  const std::vector<std::string> srows(sut_ids.begin(), sut_ids.end());
  const std::vector<std::string> rcols(res_ids.begin(), res_ids.end());
  CostMatrix track_costs(srows.size(), rcols.size());
  for (std::size_t i = 0; i < srows.size(); ++i) {
    for (std::size_t j = 0; j < rcols.size(); ++j) {
      auto it = acc.find({srows[i], rcols[j]});
      if (it == acc.end() || it->second.n == 0) continue;
      const double mean = it->second.sum / it->second.n;
      if (mean <= threshold) track_costs(i, j) = mean;
    }
  }
  const FrameAssignment a = assign_frame(track_costs, cfg.algorithm, cfg.cardinality);
  std::map<std::string, std::set<std::string>> sut_partners, res_partners;
  for (const auto& [i, j] : a.pairs) {
    sut_partners[srows[i]].insert(rcols[j]);
    res_partners[rcols[j]].insert(srows[i]);
  }

  auto union_span = [](const std::set<std::string>& ids,
                       const std::map<std::string, TimeSpan>& spans) {
    TimeSpan s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& id : ids) {
      auto it = spans.find(id);
      if (it == spans.end()) continue;
      s.first = std::min(s.first, it->second.first);
      s.second = std::max(s.second, it->second.second);
    }
    return s;
  };

  MatchOutput out;
  // Returns true when the unit was consumed as an overhang of a matched track.
  auto as_overhang = [&](Role role, const Unit& u,
                         const std::map<std::string, std::set<std::string>>& partners,
                         const std::map<std::string, TimeSpan>& other_spans) {
    auto it = partners.find(u.obs.track_id);
    if (it == partners.end()) return false;
    const TimeSpan span = union_span(it->second, other_spans);
    const double t = u.obs.timestamp;
    if (t < span.first - kTimeTolerance) {
      detail::emit_overhang(out, role, t, u, OverhangSide::kLead, span.first - t, temporal);
      return true;
    }
    if (t > span.second + kTimeTolerance) {
      detail::emit_overhang(out, role, t, u, OverhangSide::kTail, t - span.second, temporal);
      return true;
    }
    return false;
  };

  for (const auto& f : frames) {
    std::vector<char> row_used(f.sut.size(), 0), col_used(f.res.size(), 0);
    for (std::size_t i = 0; i < f.sut.size(); ++i) {
      auto sp = sut_partners.find(f.sut[i].obs.track_id);
      if (sp == sut_partners.end()) continue;
      for (std::size_t j = 0; j < f.res.size(); ++j) {
        if (!sp->second.count(f.res[j].obs.track_id)) continue;
        const CostBreakdown* c = f.cost(i, j);
        if (c == nullptr) continue;  // class-gated in this frame
        out.events.push_back(detail::tp_event(f.timestamp, f.sut[i], f.res[j], *c));
        row_used[i] = col_used[j] = 1;
      }
    }
    for (std::size_t i = 0; i < f.sut.size(); ++i) {
      if (row_used[i] || as_overhang(Role::kSut, f.sut[i], sut_partners, res_spans)) continue;
      out.events.push_back(detail::fp_event(f.timestamp, f.sut[i]));
    }
    for (std::size_t j = 0; j < f.res.size(); ++j) {
      if (col_used[j] || as_overhang(Role::kRes, f.res[j], res_partners, sut_spans)) continue;
      out.events.push_back(detail::fn_event(f.timestamp, f.res[j]));
    }
  }
  for (const auto& o : res_overhangs) {
    if (as_overhang(Role::kRes, o.unit, res_partners, sut_spans)) continue;
    detail::emit_overhang(out, Role::kRes, o.unit.obs.timestamp, o.unit, o.side, o.offset_s, temporal);
  }
  detail::finish(out);
  return out;
}

// FN runs of at most max_gap_frames units, bounded on both sides by TPs that
// share a SUT partner, are flagged gap_forgiven. Events must be time-ordered.
inline std::vector<MatchEvent> apply_gap_policy(std::vector<MatchEvent> events, int max_gap_frames) {
  if (max_gap_frames <= 0) return events;
  // Per ReS track: unit timestamps in order, with TP partners and FN indices.
  struct Slot {
    double t;
    std::vector<std::string> partners;
    std::vector<std::size_t> fn_events;
  };
  std::map<std::string, std::vector<Slot>> tracks;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.res_id.empty() || (e.kind != EventKind::kTp && e.kind != EventKind::kFn)) continue;
    if (e.has(kFlagOverhang)) continue;
    auto& slots = tracks[e.res_id];
    if (slots.empty() || !same_time(slots.back().t, e.timestamp)) slots.push_back({e.timestamp, {}, {}});
    if (e.kind == EventKind::kTp) {
      slots.back().partners.push_back(e.sut_id);
    } else {
      slots.back().fn_events.push_back(k);
    }
  }
  for (auto& [rid, slots] : tracks) {
    std::size_t k = 0;
    while (k < slots.size()) {
      if (!slots[k].partners.empty()) {
        ++k;
        continue;
      }
      const std::size_t start = k;
      while (k < slots.size() && slots[k].partners.empty()) ++k;
      const std::size_t run = k - start;
      if (start == 0 || k == slots.size() || run > static_cast<std::size_t>(max_gap_frames)) continue;
      const auto& before = slots[start - 1].partners;
      const auto& after = slots[k].partners;
      const bool shared = std::any_of(before.begin(), before.end(), [&](const std::string& s) {
        return std::find(after.begin(), after.end(), s) != after.end();
      });
      if (!shared) continue;
      for (std::size_t s = start; s < k; ++s) {
        for (auto idx : slots[s].fn_events) events[idx].set(kFlagGapForgiven);
      }
    }
  }
  return events;
}

}  // namespace detoracle
