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

// Newline-delimited observation records.
//
// Each non-empty line is one JSON object. Required keys: t, id, cls, x, y,
// l, w, yaw. Optional keys: vx, vy, cov (4 numbers, row-major), p_exist,
// p_cls (object label -> probability). Any other key is rejected.
//
// An optional first record {"meta": {...}} carries recording-level data:
// role ("SUT" | "ReS"), sensor_meta (string map), frame_times (numbers).

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "detoracle/error.hpp"
#include "detoracle/model.hpp"

namespace detoracle {

namespace detail {

inline double require_number(const nlohmann::json& j, const char* key,
                             std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError("line " + std::to_string(line) + ": missing key '" + key + "'");
  }
  if (!it->is_number()) {
    throw SchemaError("line " + std::to_string(line) + ": key '" + key +
                      "' must be a number");
  }
  return it->get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw SchemaError("line " + std::to_string(line) + ": key '" + key +
                      "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace detail

inline ObjectObservation observation_from_json(const nlohmann::json& j,
                                               std::size_t line = 0) {
  static const std::set<std::string> kKnown = {
      "t", "id", "cls", "x", "y", "l", "w", "yaw",
      "vx", "vy", "cov", "p_exist", "p_cls"};
  if (!j.is_object()) {
    throw SchemaError("line " + std::to_string(line) + ": record is not an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.count(key)) {
      throw SchemaError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
  }
  ObjectObservation o;
  o.timestamp = detail::require_number(j, "t", line);
  o.track_id = detail::require_string(j, "id", line);
  o.class_label = detail::require_string(j, "cls", line);
  o.x = detail::require_number(j, "x", line);
  o.y = detail::require_number(j, "y", line);
  o.length = detail::require_number(j, "l", line);
  o.width = detail::require_number(j, "w", line);
  o.yaw = detail::require_number(j, "yaw", line);
  if (j.contains("vx")) o.vx = detail::require_number(j, "vx", line);
  if (j.contains("vy")) o.vy = detail::require_number(j, "vy", line);
  if (j.contains("cov")) {
    const auto& c = j.at("cov");
    if (!c.is_array() || c.size() != 4) {
      throw SchemaError("line " + std::to_string(line) +
                        ": 'cov' must be an array of 4 numbers");
    }
    for (const auto& v : c) {
      if (!v.is_number()) {
        throw SchemaError("line " + std::to_string(line) + ": 'cov' entries must be numbers");
      }
    }
    o.pos_cov = Mat2{c[0].get<double>(), c[1].get<double>(), c[2].get<double>(),
                     c[3].get<double>()};
  }
  if (j.contains("p_exist")) o.existence_conf = detail::require_number(j, "p_exist", line);
  if (j.contains("p_cls")) {
    const auto& m = j.at("p_cls");
    if (!m.is_object()) {
      throw SchemaError("line " + std::to_string(line) + ": 'p_cls' must be an object");
    }
    std::map<std::string, double> confs;
    for (const auto& [cls, p] : m.items()) {
      if (!p.is_number()) {
        throw SchemaError("line " + std::to_string(line) + ": 'p_cls' values must be numbers");
      }
      confs[cls] = p.get<double>();
    }
    o.class_confs = std::move(confs);
  }
  return o;
}

inline nlohmann::json observation_to_json(const ObjectObservation& o) {
  nlohmann::json j = nlohmann::json::object();
  j["t"] = o.timestamp;
  j["id"] = o.track_id;
  j["cls"] = o.class_label;
  j["x"] = o.x;
  j["y"] = o.y;
  j["l"] = o.length;
  j["w"] = o.width;
  j["yaw"] = o.yaw;
  j["vx"] = o.vx;
  j["vy"] = o.vy;
  if (o.pos_cov) {
    j["cov"] = {o.pos_cov->xx, o.pos_cov->xy, o.pos_cov->yx, o.pos_cov->yy};
  }
  if (o.existence_conf) j["p_exist"] = *o.existence_conf;
  if (o.class_confs) j["p_cls"] = *o.class_confs;
  return j;
}

inline Recording read_recording(std::istream& in, Role default_role) {
  Recording rec;
  rec.role = default_role;
  std::vector<ObjectObservation> observations;
  std::string text;
  std::size_t line_no = 0;
  bool seen_record = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.is_object() && j.contains("meta")) {
      if (seen_record || j.size() != 1) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": 'meta' record must be the first record and stand alone");
      }
      const auto& meta = j.at("meta");
      for (const auto& [key, value] : meta.items()) {
        if (key == "role") {
          const auto r = value.get<std::string>();
          if (r == "SUT") {
            rec.role = Role::kSut;
          } else if (r == "ReS") {
            rec.role = Role::kRes;
          } else {
            throw SchemaError("meta.role must be 'SUT' or 'ReS'");
          }
        } else if (key == "sensor_meta") {
          for (const auto& [k, v] : value.items()) {
            if (!v.is_string()) throw SchemaError("meta.sensor_meta values must be strings");
            rec.sensor_meta[k] = v.get<std::string>();
          }
        } else if (key == "frame_times") {
          if (!value.is_array()) throw SchemaError("meta.frame_times must be an array");
          std::vector<double> times;
          for (const auto& t : value) {
            if (!t.is_number()) throw SchemaError("meta.frame_times entries must be numbers");
            times.push_back(t.get<double>());
          }
          rec.frame_times = std::move(times);
        } else {
          throw SchemaError("unknown meta key '" + key + "'");
        }
      }
      seen_record = true;
      continue;
    }
    seen_record = true;
    observations.push_back(observation_from_json(j, line_no));
  }
  rec.tracks = group_into_tracks(std::move(observations));
  return rec;
}

inline Recording read_recording_file(const std::string& path, Role default_role) {
  std::ifstream in(path);
  if (!in) throw OracleError("cannot open recording '" + path + "'");
  return read_recording(in, default_role);
}

// Writes a meta record followed by observations ordered by (t, id).
inline void write_recording(std::ostream& out, const Recording& rec) {
  nlohmann::json meta = nlohmann::json::object();
  meta["role"] = to_string(rec.role);
  meta["sensor_meta"] = rec.sensor_meta;
  if (rec.frame_times) meta["frame_times"] = *rec.frame_times;
  out << nlohmann::json{{"meta", meta}}.dump() << '\n';

  std::vector<const ObjectObservation*> all;
  for (const auto& t : rec.tracks) {
    for (const auto& o : t.observations) all.push_back(&o);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto* a, const auto* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return a->track_id < b->track_id;
  });
  for (const auto* o : all) out << observation_to_json(*o).dump() << '\n';
}

inline void write_recording_file(const std::string& path, const Recording& rec) {
  std::ofstream out(path);
  if (!out) throw OracleError("cannot write recording '" + path + "'");
  write_recording(out, rec);
  if (!out) throw OracleError("write failed for '" + path + "'");
}

}  // namespace detoracle
