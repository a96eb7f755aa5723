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

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "detoracle/cli.hpp"

namespace {

// DETORACLE_LOG takes a spdlog level name (trace, debug, info, warn, error, off).
void setup_logging() {
  auto logger = spdlog::stderr_color_mt("detoracle");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DETORACLE_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"detoracle: TP/FP/FN test oracle for object recordings"};
  app.set_version_flag("--version", detoracle::kToolVersion);
  app.require_subcommand(1);

  detoracle::EvaluateArgs eval;
  std::string format = "structured";
  auto* evaluate = app.add_subcommand("evaluate", "Compare a SUT recording with a ReS recording");
  evaluate->add_option("--sut", eval.sut, "SUT recording (JSON lines)")->required();
  evaluate->add_option("--res", eval.res, "ReS recording (JSON lines)")->required();
  evaluate->add_option("--config", eval.config, "Oracle config; defaults when omitted");
  evaluate->add_option("--out", eval.out, "Report path; stdout when omitted");
  evaluate->add_option("--format", format, "structured | human")
      ->check(CLI::IsMember({"structured", "human"}));

  detoracle::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a paired scene with its expected verdicts");
  synth_cmd->add_option("--spec", synth.spec, "SceneSpec file");
  synth_cmd->add_option("--builtin", synth.builtin, "figure2 | figure3a | figure3b | random")
      ->check(CLI::IsMember({"figure2", "figure3a", "figure3b", "random"}));
  synth_cmd->add_option("--seed", synth.seed, "Seed for --builtin random");
  synth_cmd->add_option("--config", synth.config, "Base config for the hand-built scenes");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

  detoracle::ExplainArgs expl;
  auto* explain = app.add_subcommand("explain", "Explain the verdicts of one ReS object");
  explain->add_option("--report", expl.report, "Structured report")->required();
  explain->add_option("--res-id", expl.res_id, "ReS track id")->required();
  explain->add_option("--t", expl.t, "Timestamp in seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : detoracle::kExitUsage;
  }

  int code = detoracle::kExitUsage;
  if (*evaluate) {
    eval.format = format == "human" ? detoracle::ReportFormat::kHuman : detoracle::ReportFormat::kStructured;
    spdlog::info("evaluate sut={} res={} config={}", eval.sut, eval.res, eval.config);
    code = detoracle::cmd_evaluate(eval, std::cout, std::cerr);
  } else if (*synth_cmd) {
    spdlog::info("synth spec={} builtin={} out_dir={}", synth.spec, synth.builtin, synth.out_dir);
    code = detoracle::cmd_synth(synth, std::cerr);
  } else if (*explain) {
    code = detoracle::cmd_explain(expl, std::cout, std::cerr);
  }
  spdlog::debug("exit code {}", code);
  return code;
}
