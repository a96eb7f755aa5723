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

// Verdict ledger and its aggregation into counts and derived metrics.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/matching.hpp"

namespace detoracle {

struct VerdictLedger {
  std::vector<MatchEvent> events;
  std::vector<ExclusionTag> exclusions;
  OracleConfig config_echo;
  std::vector<MatchEvent> annex;  // verdicts inside regions below p_min
  // Kept units entering matching, for the conservation check. Negative
  // values skip the check.
  long sut_units = -1;
  long res_units = -1;
};

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  std::optional<double> precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  std::optional<double> recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct MetricsSummary {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long id_switches = 0;
  long gap_forgiven = 0;
  std::optional<double> precision;  // nullopt = undefined (0/0)
  std::optional<double> recall;
  std::optional<double> tid_s;
  std::optional<double> lgd_s;
  std::optional<double> mean_tp_delay_s;
  std::map<std::string, Counts> per_class;  // ReS class for TP/FN, SUT class for FP
  long wrong_class = 0;
  long border_rescued = 0;
  long overhang_fn = 0;
  long overhang_fp = 0;
  long excluded_post_matching = 0;  // events left out of the counts above
  long evaluated_sut_units = 0;
  long evaluated_res_units = 0;
  Counts annex;
  std::vector<Counts> visibility_bins;  // TP/FN of ReS units by visibility bin
  std::vector<std::string> notes;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

namespace detail {

using UnitKey = std::pair<std::string, double>;

struct UnitKeyLess {
  bool operator()(const UnitKey& a, const UnitKey& b) const {
    if (a.first != b.first) return a.first < b.first;
    if (same_time(a.second, b.second)) return false;
    return a.second < b.second;
  }
};

using UnitSet = std::set<UnitKey, UnitKeyLess>;

inline bool counts_as_fn(const MatchEvent& e) {
  return e.kind == EventKind::kFn && !e.has(kFlagGapForgiven);
}

// Earliest time each ReS track appears anywhere in the ledger.
inline std::map<std::string, double> res_first_seen(const VerdictLedger& l) {
  std::map<std::string, double> first;
  auto see = [&](const std::string& id, double t) {
    auto [it, inserted] = first.emplace(id, t);
    if (!inserted) it->second = std::min(it->second, t);
  };
  for (const auto& e : l.events) {
    if (!e.res_id.empty() && e.kind != EventKind::kIdSwitch) see(e.res_id, e.timestamp);
  }
  for (const auto& x : l.exclusions) {
    if (x.ref.role == Role::kRes) see(x.ref.track_id, x.ref.timestamp);
  }
  for (const auto& e : l.annex) {
    if (!e.res_id.empty()) see(e.res_id, e.timestamp);
  }
  return first;
}

// Duration of the longest FN run after the first TP of one ReS track.
// `units` holds (time, is_gap) in time order.
inline double longest_gap(const std::vector<std::pair<double, bool>>& units) {
  std::size_t k = 0;
  while (k < units.size() && units[k].second) ++k;
  double best = 0.0;
  while (k < units.size()) {
    if (!units[k].second) {
      ++k;
      continue;
    }
    const std::size_t start = k;
    while (k < units.size() && units[k].second) ++k;
    double duration;
    if (k < units.size()) {
      duration = units[k].first - units[start].first;
    } else {
      const double spacing = units[start].first - units[start - 1].first;
      duration = units.back().first - units[start].first + spacing;
    }
    best = std::max(best, duration);
  }
  return best;
}

// Each unit must be either in TPs only or in exactly one FP/FN.
inline void check_conservation(const std::vector<const MatchEvent*>& used) {
  std::map<UnitKey, std::pair<int, int>, UnitKeyLess> sut, res;  // (tp, other)
  for (const MatchEvent* e : used) {
    switch (e->kind) {
      case EventKind::kTp:
        ++sut[{e->sut_id, e->timestamp}].first;
        ++res[{e->res_id, e->timestamp}].first;
        break;
      case EventKind::kFp:
        ++sut[{e->sut_id, e->timestamp}].second;
        break;
      case EventKind::kFn:
        ++res[{e->res_id, e->timestamp}].second;
        break;
      case EventKind::kIdSwitch:
        break;
    }
  }
  auto check = [](const auto& units, const char* role) {
    for (const auto& [key, c] : units) {
      if (c.second > 1 || (c.second == 1 && c.first > 0)) {
        throw OracleError(std::string("ledger conservation violated for ") + role + " unit " +
                          key.first + " @ " + std::to_string(key.second));
      }
    }
  };
  check(sut, "SUT");
  check(res, "ReS");
}

}  // namespace detail

// Applies the misclassification policy to TPs whose labels differ.
inline std::vector<MatchEvent> classify_mismatch(std::vector<MatchEvent> events,
                                                 MismatchPolicy policy) {
  std::vector<MatchEvent> out;
  out.reserve(events.size());
  bool converted = false;
  for (auto& e : events) {
    if (e.kind != EventKind::kTp || e.sut_class == e.res_class) {
      out.push_back(std::move(e));
      continue;
    }
    if (policy == MismatchPolicy::kTpWrongClass) {
      e.set(kFlagWrongClass);
      out.push_back(std::move(e));
      continue;
    }
    converted = true;
    MatchEvent fp;
    fp.kind = EventKind::kFp;
    fp.timestamp = e.timestamp;
    fp.sut_id = e.sut_id;
    fp.sut_class = e.sut_class;
    fp.delay_s = e.delay_s;
    MatchEvent fn;
    fn.kind = EventKind::kFn;
    fn.timestamp = e.timestamp;
    fn.res_id = e.res_id;
    fn.res_class = e.res_class;
    fn.flags = e.flags & kFlagInterpolated;
    fn.res_occlusion = e.res_occlusion;
    out.push_back(std::move(fp));
    out.push_back(std::move(fn));
  }
  if (!converted) return out;
  // With shared partners a unit may still hold another TP; keep one verdict.
  detail::UnitSet sut_tp, res_tp, sut_seen, res_seen;
  for (const auto& e : out) {
    if (e.kind == EventKind::kTp) {
      sut_tp.insert({e.sut_id, e.timestamp});
      res_tp.insert({e.res_id, e.timestamp});
    }
  }
  std::vector<MatchEvent> kept;
  for (auto& e : out) {
    if (e.kind == EventKind::kFp) {
      const detail::UnitKey k{e.sut_id, e.timestamp};
      if (sut_tp.count(k) || !sut_seen.insert(k).second) continue;
    } else if (e.kind == EventKind::kFn) {
      const detail::UnitKey k{e.res_id, e.timestamp};
      if (res_tp.count(k) || !res_seen.insert(k).second) continue;
    }
    kept.push_back(std::move(e));
  }
  std::stable_sort(kept.begin(), kept.end(), event_less);
  return kept;
}

// Pure function of the ledger.
inline MetricsSummary aggregate(const VerdictLedger& ledger) {
  MetricsSummary s;
  const auto& cfg = ledger.config_echo;

  // Events touching an observation tagged at post_matching stay in the
  // ledger but are left out of the counts.
  detail::UnitSet post_sut, post_res;
  for (const auto& x : ledger.exclusions) {
    if (x.stage != Stage::kPostMatching) continue;
    (x.ref.role == Role::kSut ? post_sut : post_res).insert({x.ref.track_id, x.ref.timestamp});
  }
  auto post_excluded = [&](const MatchEvent& e) {
    if (e.kind == EventKind::kIdSwitch) return false;
    if (!e.sut_id.empty() && post_sut.count({e.sut_id, e.timestamp})) return true;
    if (!e.res_id.empty() && post_res.count({e.res_id, e.timestamp})) return true;
    return false;
  };

  std::vector<const MatchEvent*> used;
  for (const auto& e : ledger.events) {
    if (post_excluded(e)) {
      ++s.excluded_post_matching;
      continue;
    }
    used.push_back(&e);
  }
  detail::check_conservation(used);

  const std::size_t nbins = cfg.occlusion.visibility_bin_edges.size() + 1;
  if (cfg.occlusion.mode != OcclusionMode::kIgnore) s.visibility_bins.assign(nbins, Counts{});

  detail::UnitSet sut_units, res_units;
  double delay_sum = 0.0;
  long delay_n = 0;
  for (const MatchEvent* e : used) {
    switch (e->kind) {
      case EventKind::kTp:
        ++s.tp;
        ++s.per_class[e->res_class].tp;
        if (e->has(kFlagWrongClass)) ++s.wrong_class;
        if (e->has(kFlagBorderRescued)) ++s.border_rescued;
        if (e->delay_s) {
          delay_sum += *e->delay_s;
          ++delay_n;
        }
        sut_units.insert({e->sut_id, e->timestamp});
        res_units.insert({e->res_id, e->timestamp});
        break;
      case EventKind::kFp:
        ++s.fp;
        ++s.per_class[e->sut_class].fp;
        if (e->has(kFlagOverhang)) ++s.overhang_fp;
        sut_units.insert({e->sut_id, e->timestamp});
        break;
      case EventKind::kFn:
        res_units.insert({e->res_id, e->timestamp});
        if (e->has(kFlagGapForgiven)) {
          ++s.gap_forgiven;
          break;
        }
        ++s.fn;
        ++s.per_class[e->res_class].fn;
        if (e->has(kFlagOverhang)) ++s.overhang_fn;
        break;
      case EventKind::kIdSwitch:
        ++s.id_switches;
        break;
    }
    if (!s.visibility_bins.empty() && e->res_occlusion &&
        (e->kind == EventKind::kTp || detail::counts_as_fn(*e))) {
      auto& bin = s.visibility_bins[visibility_bin(*e->res_occlusion, cfg.occlusion.visibility_bin_edges)];
      (e->kind == EventKind::kTp ? bin.tp : bin.fn)++;
    }
  }
  s.evaluated_sut_units = static_cast<long>(sut_units.size());
  s.evaluated_res_units = static_cast<long>(res_units.size());
  if (ledger.sut_units >= 0 && s.excluded_post_matching == 0) {
    if (s.evaluated_sut_units != ledger.sut_units || s.evaluated_res_units != ledger.res_units) {
      throw OracleError("ledger conservation violated: evaluated units " +
                        std::to_string(s.evaluated_sut_units) + "/" +
                        std::to_string(s.evaluated_res_units) + " vs kept " +
                        std::to_string(ledger.sut_units) + "/" + std::to_string(ledger.res_units));
    }
  }

  const Counts total{s.tp, s.fp, s.fn};
  s.precision = total.precision();
  s.recall = total.recall();

  // Track-level timing over ReS tracks with at least one counted TP.
  const auto first_seen = detail::res_first_seen(ledger);
  std::map<std::string, std::vector<std::pair<double, bool>>> units_by_track;
  std::map<std::string, double> first_tp;
  for (const MatchEvent* e : used) {
    if (e->res_id.empty() || e->kind == EventKind::kIdSwitch) continue;
    if (e->kind == EventKind::kTp) {
      auto [it, inserted] = first_tp.emplace(e->res_id, e->timestamp);
      if (!inserted) it->second = std::min(it->second, e->timestamp);
    }
    auto& u = units_by_track[e->res_id];
    const bool gap = detail::counts_as_fn(*e);
    if (!u.empty() && same_time(u.back().first, e->timestamp)) {
      u.back().second = u.back().second && gap;
    } else {
      u.emplace_back(e->timestamp, gap);
    }
  }
  if (!first_tp.empty()) {
    double tid = 0.0, lgd = 0.0;
    for (const auto& [rid, t_tp] : first_tp) {
      auto& u = units_by_track[rid];
      std::sort(u.begin(), u.end());
      tid += std::max(0.0, t_tp - first_seen.at(rid));
      lgd += detail::longest_gap(u);
    }
    s.tid_s = tid / static_cast<double>(first_tp.size());
    s.lgd_s = lgd / static_cast<double>(first_tp.size());
  }
  if (cfg.temporal.basis == TimestampBasis::kAvailability && delay_n > 0) {
    s.mean_tp_delay_s = delay_sum / static_cast<double>(delay_n);
  }

  if (cfg.assignment.cardinality == Cardinality::kNN) {
    s.notes.push_back("n_n cardinality counts every matched pair as one TP; an object matched "
                      "several times is counted several times");
  }
  for (const auto& e : ledger.annex) {
    if (e.kind == EventKind::kTp) ++s.annex.tp;
    if (e.kind == EventKind::kFp) ++s.annex.fp;
    if (e.kind == EventKind::kFn) ++s.annex.fn;
  }
  return s;
}

}  // namespace detoracle
