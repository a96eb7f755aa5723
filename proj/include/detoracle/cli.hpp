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

// Command implementations behind the detoracle executable. Each command
// returns its exit code: 0 success, 1 usage or I/O, 2 validation.

#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "detoracle/config.hpp"
#include "detoracle/error.hpp"
#include "detoracle/pipeline.hpp"
#include "detoracle/recording_io.hpp"
#include "detoracle/report.hpp"
#include "detoracle/synth.hpp"

namespace detoracle {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2 };

struct RunManifest {
  std::string sut_path;
  std::string res_path;
  std::string config_path;
  std::string config_sha256;  // over canonical_config_text of the defaulted config
  std::string tool_version = kToolVersion;
  double wall_clock_s = 0.0;
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw OracleError("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["sut"] = m.sut_path;
  j["res"] = m.res_path;
  j["config"] = m.config_path;
  j["config_sha256"] = m.config_sha256;
  j["tool_version"] = m.tool_version;
  j["wall_clock_s"] = m.wall_clock_s;
  return j;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OracleError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw OracleError("write failed for '" + path.string() + "'");
}

inline OracleConfig config_or_default(const std::string& path) {
  return path.empty() ? OracleConfig{} : load_config(path);
}

// Runs fn and maps library errors onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << "\n";
    for (const auto& d : e.details()) err << "  - " << d << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PolicyError& e) {
    err << "policy error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const GeometryError& e) {
    err << "geometry error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace detail

struct EvaluateArgs {
  std::string sut;
  std::string res;
  std::string config;  // empty: defaults
  std::string out;     // empty: stdout
  ReportFormat format = ReportFormat::kStructured;
};

// Writes the report to args.out (or `out`) and, with a file target, the run
// manifest next to it as <out>.manifest.json.
inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto started = std::chrono::steady_clock::now();
    const OracleConfig cfg = detail::config_or_default(args.config);
    const Recording sut = read_recording_file(args.sut, Role::kSut);
    const Recording res = read_recording_file(args.res, Role::kRes);
    const Evaluation ev = evaluate(res, sut, cfg);
    const std::string text = emit_report(ev.ledger, ev.summary, args.format, ev.sweep);
    if (args.out.empty()) {
      out << text;
      return int(kExitOk);
    }
    detail::write_text(args.out, text);
    RunManifest m;
    m.sut_path = args.sut;
    m.res_path = args.res;
    m.config_path = args.config;
    m.config_sha256 = sha256_hex(canonical_config_text(cfg));
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    detail::write_text(args.out + ".manifest.json", to_json(m).dump(2) + "\n");
    return int(kExitOk);
  });
}

struct SynthArgs {
  std::string spec;     // SceneSpec file
  std::string builtin;  // figure2 | figure3a | figure3b | random
  std::uint64_t seed = 0;  // for builtin random
  std::string config;   // base config for the figure scenes
  std::string out_dir;
};

namespace detail {

inline nlohmann::ordered_json cases_to_json(const FigureScene& sc) {
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : sc.cases) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["tp"] = c.counts.tp;
    j["fp"] = c.counts.fp;
    j["fn"] = c.counts.fn;
    j["id_switches"] = c.id_switches;
    j["objects"] = nlohmann::ordered_json::array();
    for (const auto& o : c.objects) {
      j["objects"].push_back({{"role", to_string(o.role)}, {"id", o.id}, {"outcome", o.outcome}});
    }
    cases.push_back(std::move(j));
  }
  return cases;
}

}  // namespace detail

// Writes res.jsonl, sut.jsonl and config.json into out_dir, plus
// expected.json: the expected ledger for a spec, the case table for a
// hand-built scene.
inline int cmd_synth(const SynthArgs& args, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (args.spec.empty() == args.builtin.empty()) {
      err << "synth: give exactly one of --spec or --builtin\n";
      return int(kExitUsage);
    }
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);
    Recording res, sut;
    OracleConfig cfg;
    std::string expected;
    std::optional<FigureScene> figure;
    if (args.builtin == "figure2") figure = figure2_scene();
    if (args.builtin == "figure3a") figure = figure3_scene_a();
    if (args.builtin == "figure3b") figure = figure3_scene_b();
    if (figure) {
      res = figure->res;
      sut = figure->sut;
      cfg = figure->configure(detail::config_or_default(args.config));
      expected = detail::cases_to_json(*figure).dump(2) + "\n";
    } else {
      SceneSpec spec;
      if (args.builtin == "random") {
        spec = random_scene_spec(args.seed);
      } else if (!args.builtin.empty()) {
        err << "synth: unknown builtin scene '" << args.builtin << "'\n";
        return int(kExitUsage);
      } else {
        spec = load_scene_spec(args.spec);
      }
      GeneratedScene g = generate(spec);
      res = std::move(g.res);
      sut = std::move(g.sut);
      cfg = g.config;
      expected = report_to_json(g.expected, aggregate(g.expected), std::nullopt).dump(2) + "\n";
    }
    write_recording_file((dir / "res.jsonl").string(), res);
    write_recording_file((dir / "sut.jsonl").string(), sut);
    detail::write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
    detail::write_text(dir / "expected.json", expected);
    return int(kExitOk);
  });
}

struct ExplainArgs {
  std::string report;
  std::string res_id;
  std::optional<double> t;
};

inline int cmd_explain(const ExplainArgs& args, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto doc = detail::read_json_file(args.report);
    out << explain(doc, args.res_id, args.t);
    return int(kExitOk);
  });
}

}  // namespace detoracle
