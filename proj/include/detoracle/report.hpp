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

// Report documents: structured JSON, a human-readable table, reading a
// report back into a ledger, and per-object explanations.

#pragma once

#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/filters.hpp"
#include "detoracle/matching.hpp"
#include "detoracle/pipeline.hpp"
#include "detoracle/verdict.hpp"

namespace detoracle {

enum class ReportFormat { kStructured, kHuman };

namespace detail {

inline ojson opt_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

// Undefined ratios are spelled out rather than coerced to a number.
inline ojson ratio(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson("undefined");
}

inline ojson id_or_null(const std::string& s) { return s.empty() ? ojson(nullptr) : ojson(s); }

inline ojson cost_to_json(const CostBreakdown& c) {
  ojson j;
  j["geometric"] = c.geometric;
  ojson pen = ojson::object();
  for (const auto& [name, v] : c.penalties) pen[name] = v;
  j["penalties"] = pen;
  j["gated"] = c.gated;
  j["gate_reason"] = id_or_null(c.gate_reason);
  j["total"] = std::isfinite(c.total) ? ojson(c.total) : ojson(nullptr);
  return j;
}

inline CostBreakdown cost_from_json(const json& j) {
  CostBreakdown c;
  c.geometric = j.at("geometric").get<double>();
  for (const auto& [name, v] : j.at("penalties").items()) c.penalties.emplace_back(name, v.get<double>());
  c.gated = j.at("gated").get<bool>();
  if (!j.at("gate_reason").is_null()) c.gate_reason = j.at("gate_reason").get<std::string>();
  c.total = j.at("total").is_null() ? CostBreakdown::kGated : j.at("total").get<double>();
  return c;
}

inline ojson event_to_json(const MatchEvent& e) {
  ojson j;
  j["t"] = e.timestamp;
  j["kind"] = to_string(e.kind);
  j["sut_id"] = id_or_null(e.sut_id);
  j["res_id"] = id_or_null(e.res_id);
  if (e.kind == EventKind::kIdSwitch) j["prev_sut_id"] = e.prev_sut_id;
  j["sut_class"] = id_or_null(e.sut_class);
  j["res_class"] = id_or_null(e.res_class);
  j["cost"] = e.cost ? cost_to_json(*e.cost) : ojson(nullptr);
  ojson flags = ojson::array();
  for (const auto& [f, name] : flag_names()) {
    if (e.has(f)) flags.push_back(name);
  }
  j["flags"] = flags;
  j["delay_s"] = opt_number(e.delay_s);
  j["overhang_side"] = e.overhang_side ? ojson(to_string(*e.overhang_side)) : ojson(nullptr);
  j["res_occlusion"] = opt_number(e.res_occlusion);
  return j;
}

inline std::string str_or_empty(const json& v) { return v.is_null() ? std::string() : v.get<std::string>(); }

inline std::optional<double> opt_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

inline MatchEvent event_from_json(const json& j) {
  MatchEvent e;
  e.timestamp = j.at("t").get<double>();
  e.kind = enum_from<EventKind>(j.at("kind"),
                                {{"tp", EventKind::kTp},
                                 {"fp", EventKind::kFp},
                                 {"fn", EventKind::kFn},
                                 {"id_switch", EventKind::kIdSwitch}},
                                "event.kind");
  e.sut_id = str_or_empty(j.at("sut_id"));
  e.res_id = str_or_empty(j.at("res_id"));
  if (j.contains("prev_sut_id")) e.prev_sut_id = j.at("prev_sut_id").get<std::string>();
  e.sut_class = str_or_empty(j.at("sut_class"));
  e.res_class = str_or_empty(j.at("res_class"));
  if (!j.at("cost").is_null()) e.cost = cost_from_json(j.at("cost"));
  for (const auto& f : j.at("flags")) {
    for (const auto& [flag, name] : flag_names()) {
      if (f.get<std::string>() == name) e.set(flag);
    }
  }
  e.delay_s = opt_from(j.at("delay_s"));
  if (!j.at("overhang_side").is_null()) {
    e.overhang_side = j.at("overhang_side").get<std::string>() == "lead" ? OverhangSide::kLead
                                                                          : OverhangSide::kTail;
  }
  e.res_occlusion = opt_from(j.at("res_occlusion"));
  return e;
}

inline const EnumTable<ExclusionReason> kReasons = {
    {"outside_res_aov", ExclusionReason::kOutsideResAov},
    {"outside_sut_aov", ExclusionReason::kOutsideSutAov},
    {"occluded", ExclusionReason::kOccluded},
    {"no_test_area", ExclusionReason::kNoTestArea},
    {"class_excluded", ExclusionReason::kClassExcluded},
    {"below_p_min", ExclusionReason::kBelowPMin},
    {"below_conf", ExclusionReason::kBelowConf},
    {"overhang", ExclusionReason::kOverhang}};
inline const EnumTable<Stage> kAllStages = {{"pre_reference", Stage::kPreReference},
                                            {"pre_matching", Stage::kPreMatching},
                                            {"post_matching", Stage::kPostMatching},
                                            {"synchronization", Stage::kSynchronization}};

inline ojson exclusion_to_json(const ExclusionTag& x) {
  ojson j;
  j["t"] = x.ref.timestamp;
  j["role"] = to_string(x.ref.role);
  j["id"] = x.ref.track_id;
  j["cls"] = x.class_label;
  j["reason"] = to_string(x.reason);
  j["stage"] = to_string(x.stage);
  j["x"] = x.x;
  j["y"] = x.y;
  j["value"] = opt_number(x.value);
  j["boundary_distance_m"] = opt_number(x.boundary_distance_m);
  return j;
}

inline ExclusionTag exclusion_from_json(const json& j) {
  ExclusionTag x;
  x.ref.timestamp = j.at("t").get<double>();
  x.ref.role = j.at("role").get<std::string>() == "SUT" ? Role::kSut : Role::kRes;
  x.ref.track_id = j.at("id").get<std::string>();
  x.class_label = j.at("cls").get<std::string>();
  x.reason = enum_from(j.at("reason"), kReasons, "exclusion.reason");
  x.stage = enum_from(j.at("stage"), kAllStages, "exclusion.stage");
  x.x = j.at("x").get<double>();
  x.y = j.at("y").get<double>();
  x.value = opt_from(j.at("value"));
  x.boundary_distance_m = opt_from(j.at("boundary_distance_m"));
  return x;
}

inline ojson counts_to_json(const Counts& c, bool with_ratios) {
  ojson j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  if (with_ratios) {
    j["precision"] = ratio(c.precision());
    j["recall"] = ratio(c.recall());
  }
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json summary_to_json(const MetricsSummary& s,
                                              const std::vector<double>& bin_edges = {}) {
  using detail::ojson;
  ojson j;
  j["tp"] = s.tp;
  j["fp"] = s.fp;
  j["fn"] = s.fn;
  j["id_switches"] = s.id_switches;
  j["gap_forgiven"] = s.gap_forgiven;
  j["precision"] = detail::ratio(s.precision);
  j["recall"] = detail::ratio(s.recall);
  j["tid_s"] = detail::ratio(s.tid_s);
  j["lgd_s"] = detail::ratio(s.lgd_s);
  j["mean_tp_delay_s"] = detail::ratio(s.mean_tp_delay_s);
  ojson pc = ojson::object();
  for (const auto& [cls, c] : s.per_class) pc[cls] = detail::counts_to_json(c, true);
  j["per_class"] = pc;
  j["wrong_class"] = s.wrong_class;
  j["border_rescued"] = s.border_rescued;
  j["overhang_fn"] = s.overhang_fn;
  j["overhang_fp"] = s.overhang_fp;
  j["excluded_post_matching"] = s.excluded_post_matching;
  j["evaluated_sut_units"] = s.evaluated_sut_units;
  j["evaluated_res_units"] = s.evaluated_res_units;
  j["annex"] = detail::counts_to_json(s.annex, false);
  ojson bins = ojson::array();
  for (std::size_t b = 0; b < s.visibility_bins.size(); ++b) {
    ojson bj;
    bj["visibility_from"] = b == 0 ? 0.0 : bin_edges.at(b - 1);
    bj["visibility_to"] = b < bin_edges.size() ? bin_edges[b] : 1.0;
    bj["tp"] = s.visibility_bins[b].tp;
    bj["fn"] = s.visibility_bins[b].fn;
    bins.push_back(bj);
  }
  j["visibility_bins"] = bins;
  j["notes"] = s.notes;
  return j;
}

inline nlohmann::ordered_json sweep_to_json(const std::optional<SweepResult>& sweep,
                                            const std::vector<double>& bin_edges) {
  using detail::ojson;
  if (!sweep) return nullptr;
  ojson j;
  ojson pts = ojson::array();
  for (const auto& p : sweep->points) {
    ojson pj;
    pj["tau_exist"] = p.tau_exist;
    pj["summary"] = summary_to_json(p.summary, bin_edges);
    pts.push_back(pj);
  }
  j["points"] = pts;
  j["mean_precision"] = detail::ratio(sweep->mean_precision);
  j["mean_recall"] = detail::ratio(sweep->mean_recall);
  return j;
}

inline nlohmann::ordered_json report_to_json(const VerdictLedger& ledger, const MetricsSummary& summary,
                                             const std::optional<SweepResult>& sweep = std::nullopt) {
  using detail::ojson;
  const auto& edges = ledger.config_echo.occlusion.visibility_bin_edges;
  ojson j;
  j["config"] = to_json(ledger.config_echo);
  j["events"] = ojson::array();
  for (const auto& e : ledger.events) j["events"].push_back(detail::event_to_json(e));
  j["exclusions"] = ojson::array();
  for (const auto& x : ledger.exclusions) j["exclusions"].push_back(detail::exclusion_to_json(x));
  j["annex"] = ojson::array();
  for (const auto& e : ledger.annex) j["annex"].push_back(detail::event_to_json(e));
  j["summary"] = summary_to_json(summary, edges);
  j["per_threshold"] = sweep_to_json(sweep, edges);
  return j;
}

inline std::string render_human(const VerdictLedger& ledger, const MetricsSummary& s,
                                const std::optional<SweepResult>& sweep = std::nullopt) {
  auto ratio = [](const std::optional<double>& v) {
    if (!v) return std::string("undefined");
    std::ostringstream o;
    o << std::fixed << std::setprecision(4) << *v;
    return o.str();
  };
  std::ostringstream out;
  out << "oracle: " << ledger.config_echo.name << "\n\n";
  out << std::left << std::setw(14) << "TP" << s.tp << "\n"
      << std::setw(14) << "FP" << s.fp << "\n"
      << std::setw(14) << "FN" << s.fn << "\n"
      << std::setw(14) << "ID switches" << s.id_switches << "\n"
      << std::setw(14) << "gap forgiven" << s.gap_forgiven << "\n"
      << std::setw(14) << "precision" << ratio(s.precision) << "\n"
      << std::setw(14) << "recall" << ratio(s.recall) << "\n"
      << std::setw(14) << "TID [s]" << ratio(s.tid_s) << "\n"
      << std::setw(14) << "LGD [s]" << ratio(s.lgd_s) << "\n"
      << std::setw(14) << "TP delay [s]" << ratio(s.mean_tp_delay_s) << "\n";
  if (!s.per_class.empty()) {
    out << "\n" << std::setw(14) << "class" << std::setw(8) << "TP" << std::setw(8) << "FP"
        << std::setw(8) << "FN" << std::setw(12) << "precision" << "recall\n";
    for (const auto& [cls, c] : s.per_class) {
      out << std::setw(14) << cls << std::setw(8) << c.tp << std::setw(8) << c.fp << std::setw(8)
          << c.fn << std::setw(12) << ratio(c.precision()) << ratio(c.recall()) << "\n";
    }
  }
  std::map<std::string, long> reasons;
  for (const auto& x : ledger.exclusions) {
    ++reasons[std::string(to_string(x.ref.role)) + " " + to_string(x.reason) + " @" + to_string(x.stage)];
  }
  if (!reasons.empty()) {
    out << "\nexclusions\n";
    for (const auto& [k, n] : reasons) out << "  " << std::setw(44) << k << n << "\n";
  }
  if (s.annex.tp + s.annex.fp + s.annex.fn > 0) {
    out << "\nannex (below p_min): TP " << s.annex.tp << ", FP " << s.annex.fp << ", FN " << s.annex.fn
        << "\n";
  }
  if (sweep) {
    out << "\n" << std::setw(10) << "tau" << std::setw(8) << "TP" << std::setw(8) << "FP"
        << std::setw(8) << "FN" << std::setw(12) << "precision" << "recall\n";
    for (const auto& p : sweep->points) {
      out << std::setw(10) << std::setprecision(4) << std::fixed << p.tau_exist << std::setw(8)
          << p.summary.tp << std::setw(8) << p.summary.fp << std::setw(8) << p.summary.fn
          << std::setw(12) << ratio(p.summary.precision) << ratio(p.summary.recall) << "\n";
    }
    out << "mean precision " << ratio(sweep->mean_precision) << ", mean recall "
        << ratio(sweep->mean_recall) << "\n";
  }
  for (const auto& n : s.notes) out << "\nnote: " << n << "\n";
  return out.str();
}

inline std::string emit_report(const VerdictLedger& ledger, const MetricsSummary& summary,
                               ReportFormat format,
                               const std::optional<SweepResult>& sweep = std::nullopt) {
  if (format == ReportFormat::kHuman) return render_human(ledger, summary, sweep);
  return report_to_json(ledger, summary, sweep).dump(2) + "\n";
}

inline VerdictLedger ledger_from_report(const nlohmann::json& doc) {
  for (const char* key : {"config", "events", "exclusions", "annex", "summary", "per_threshold"}) {
    if (!doc.contains(key)) throw SchemaError(std::string("report: missing key '") + key + "'");
  }
  VerdictLedger l;
  try {
    l.config_echo = config_from_json(doc.at("config"));
    for (const auto& e : doc.at("events")) l.events.push_back(detail::event_from_json(e));
    for (const auto& x : doc.at("exclusions")) l.exclusions.push_back(detail::exclusion_from_json(x));
    for (const auto& e : doc.at("annex")) l.annex.push_back(detail::event_from_json(e));
    const auto& s = doc.at("summary");
    if (s.at("excluded_post_matching").get<long>() == 0) {
      l.sut_units = s.at("evaluated_sut_units").get<long>();
      l.res_units = s.at("evaluated_res_units").get<long>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
  return l;
}

// ---------------------------------------------------------------------------
// Explanations

struct Provenance {
  const char* section;  // config section
  const char* aspect;   // checklist aspect
};

inline Provenance provenance(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::kOutsideResAov:
    case ExclusionReason::kOutsideSutAov: return {"aov", "area of vision"};
    case ExclusionReason::kOccluded: return {"occlusion", "occlusion"};
    case ExclusionReason::kNoTestArea:
    case ExclusionReason::kClassExcluded: return {"areas", "relevant areas"};
    case ExclusionReason::kBelowPMin: return {"aov.p_min", "probabilistic area of vision"};
    case ExclusionReason::kBelowConf: return {"probabilistic", "existence confidence"};
    case ExclusionReason::kOverhang: return {"temporal.overhang", "track synchronization"};
  }
  return {"?", "?"};
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

inline void explain_event(std::ostringstream& out, const MatchEvent& e, const OracleConfig& cfg,
                          const char* where) {
  out << "t=" << fmt(e.timestamp) << " " << where << to_string(e.kind);
  switch (e.kind) {
    case EventKind::kTp:
      out << " with SUT " << e.sut_id << " (" << e.sut_class << ")";
      break;
    case EventKind::kFn:
      out << ": no SUT partner";
      break;
    case EventKind::kIdSwitch:
      out << ": partner changed from SUT " << e.prev_sut_id << " to SUT " << e.sut_id
          << " [assignment.lifetime " << enum_name(cfg.assignment.lifetime, kLifetimes)
          << ", lifetime matching]";
      break;
    case EventKind::kFp:
      break;
  }
  out << "\n";
  if (e.cost) {
    out << "    cost: geometric " << fmt(e.cost->geometric) << " ("
        << enum_name(cfg.distance.metric, kMetrics) << ")";
    for (const auto& [name, v] : e.cost->penalties) out << " + " << name << " " << fmt(v);
    out << " = total " << fmt(e.cost->total) << " [distance, distance function; threshold "
        << fmt(cfg.distance.threshold) << "]\n";
    out << "    assignment: " << enum_name(cfg.assignment.algorithm, kAlgorithms) << ", "
        << enum_name(cfg.assignment.cardinality, kCardinalities)
        << " [assignment, multi-object matching]\n";
  }
  if (e.has(kFlagBorderRescued)) {
    out << "    rescued at the area border by corner_cases.border_policy "
        << enum_name(cfg.corner_cases.policy, kBorderPolicies) << " (margin "
        << fmt(cfg.corner_cases.margin_m) << " m) [corner_cases, border corner cases]\n";
  }
  if (e.has(kFlagGapForgiven)) {
    out << "    missed frame forgiven by assignment.max_gap_frames " << cfg.assignment.max_gap_frames
        << " [assignment, missed frames]\n";
  }
  if (e.has(kFlagOverhang)) {
    out << "    " << (e.overhang_side ? to_string(*e.overhang_side) : "") << " overhang counted by temporal.overhang "
        << enum_name(cfg.temporal.overhang, kOverhangModes) << " [temporal, track synchronization]\n";
  }
  if (e.has(kFlagInterpolated)) {
    out << "    ReS state interpolated onto the SUT sample time [temporal, track synchronization]\n";
  }
  if (e.has(kFlagWrongClass)) {
    out << "    classes differ (" << e.sut_class << " vs " << e.res_class
        << "), kept by probabilistic.mismatch_policy tp_wrong_class [probabilistic, classification]\n";
  }
  if (e.delay_s) out << "    SUT delay " << fmt(*e.delay_s) << " s [temporal, latency]\n";
}

}  // namespace detail

// Text for one ReS object, optionally restricted to one time.
inline std::string explain(const nlohmann::json& report, const std::string& res_id,
                           std::optional<double> t = std::nullopt) {
  const VerdictLedger l = ledger_from_report(report);
  auto at_time = [&](double when) { return !t || same_time(*t, when); };
  std::ostringstream out;
  bool found = false;
  out << "ReS " << res_id << (t ? " at t=" + detail::fmt(*t) : std::string()) << "\n";
  for (const auto& x : l.exclusions) {
    if (x.ref.role != Role::kRes || x.ref.track_id != res_id || !at_time(x.ref.timestamp)) continue;
    found = true;
    const Provenance p = provenance(x.reason);
    out << "t=" << detail::fmt(x.ref.timestamp) << " "
        << (x.stage == Stage::kPostMatching ? "marked" : "excluded") << " at stage "
        << to_string(x.stage) << " by " << p.section << " (" << p.aspect << "): " << to_string(x.reason);
    if (x.value) out << ", value " << detail::fmt(*x.value);
    if (x.boundary_distance_m) out << ", boundary distance " << detail::fmt(*x.boundary_distance_m) << " m";
    if (x.stage == Stage::kPostMatching) out << "; its verdicts are left out of the counts";
    out << "\n";
  }
  for (const auto& e : l.events) {
    if (e.res_id != res_id || !at_time(e.timestamp)) continue;
    found = true;
    detail::explain_event(out, e, l.config_echo, "verdict ");
  }
  for (const auto& e : l.annex) {
    if (e.res_id != res_id || !at_time(e.timestamp)) continue;
    found = true;
    detail::explain_event(out, e, l.config_echo, "annex verdict (below aov.p_min) ");
  }
  if (!found) {
    throw OracleError("unknown ReS id '" + res_id + "'" + (t ? " at t=" + detail::fmt(*t) : std::string()));
  }
  return out.str();
}

}  // namespace detoracle
