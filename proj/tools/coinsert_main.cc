// Copyright 2026 The coinsert Authors
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

// Command-line driver: demonstration collection, training, evaluation,
// controller comparison and the live session server.

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coinsert/checkpoint.h"
#include "coinsert/collab/server.h"
#include "coinsert/collab/session.h"
#include "coinsert/config.h"
#include "coinsert/harness.h"
#include "coinsert/records.h"
#include "coinsert/stats.h"

namespace {

using namespace coinsert;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

struct Settings {
  TrainConfig train;
  collab::SessionParams session;
};

Settings LoadSettings(const CommonOptions& o) {
  ConfigFile file = o.config_path.empty() ? ConfigFile()
                                          : ConfigFile::Load(o.config_path);
  for (const std::string& s : o.overrides) file.SetAssignment(s);
  Settings out;
  ApplyTrainConfig(file, &out.train);
  collab::ApplySessionConfig(file, &out.session);
  file.RequireAllUsed();
  if (o.seed) out.train.seed = *o.seed;
  out.train.Validate();
  out.session.Validate();
  return out;
}

void AddCommon(CLI::App* app, CommonOptions* o) {
  app->add_option("-c,--config", o->config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  app->add_option("--set", o->overrides, "override a config key (key=value)");
  app->add_option("-s,--seed", o->seed, "experiment seed");
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  return os;
}

// Evaluates one assistant over the seed list, optionally logging every step.
EvalReport RunEval(const TrainConfig& config, Assistant& assistant, int trials,
                   std::ostream* log, std::ostream* report_out) {
  const std::vector<std::uint64_t> seeds = EvalSeeds(config.seed, trials);
  EpisodeLogSink sink;
  if (log || report_out) {
    sink = [&](const EpisodeOutcome& e, const std::vector<StepRecord>& steps) {
      const std::string problem = CheckSafety(steps, config.env);
      if (!problem.empty()) {
        std::cerr << "warning: episode " << e.seed << ": " << problem << '\n';
      }
      if (log) {
        for (const StepRecord& s : steps) *log << StepRecordJson(e.seed, s) << '\n';
      }
      if (report_out) *report_out << EpisodeRecordJson(e) << '\n';
    };
  }
  return Evaluate(config, assistant, seeds, sink);
}

int DemoCollect(const CommonOptions& common, int episodes,
                const std::string& out) {
  const Settings s = LoadSettings(common);
  const int n = episodes > 0 ? episodes : s.train.demo_episodes;
  const DemoDataset d = CollectDemos(n, s.train, s.train.seed);
  std::ofstream os = OpenOut(out);
  WriteDemos(d, os);
  std::cout << "collected " << d.episode_seeds.size() << " successful episodes ("
            << d.size() << " pairs) in " << d.attempts << " attempts\n";
  return 0;
}

int TrainCmd(const CommonOptions& common, const std::string& mode,
             int iterations, const std::string& demos_path,
             const std::string& out, const std::string& curve_path) {
  Settings s = LoadSettings(common);
  if (!mode.empty()) s.train.guidance.mode = GuidanceModeFromName(mode);
  if (iterations > 0) s.train.iterations = iterations;
  s.train.Validate();
  DemoDataset demos;
  const DemoDataset* demo_ptr = nullptr;
  if (!demos_path.empty()) {
    std::ifstream is(demos_path);
    if (!is) throw ConfigError("cannot open demos '" + demos_path + "'");
    demos = ReadDemos(is);
    demo_ptr = &demos;
  }
  std::ofstream curve;
  if (!curve_path.empty()) curve = OpenOut(curve_path);
  TrainResult r = Train(s.train, demo_ptr, [&](const LearningCurveRecord& rec) {
    std::cout << CurveRecordJson(rec) << std::endl;
    if (curve.is_open()) curve << CurveRecordJson(rec) << '\n' << std::flush;
  });
  Checkpoint ckpt;
  ckpt.policy = r.policy;
  ckpt.value = r.value;
  ckpt.normalizer = r.normalizer;
  ckpt.limits = s.train.env.limits;
  ckpt.rng = r.rng;
  ckpt.mode = s.train.guidance.mode;
  ckpt.seed = s.train.seed;
  ckpt.iterations = s.train.iterations;
  SaveCheckpoint(ckpt, out);
  std::cout << "checkpoint written to " << out << '\n';
  return 0;
}

int EvalCmd(const CommonOptions& common, const std::string& controller,
            const std::string& checkpoint, int trials,
            const std::string& report_path, const std::string& log_path) {
  const Settings s = LoadSettings(common);
  std::ofstream log, report;
  if (!log_path.empty()) log = OpenOut(log_path);
  if (!report_path.empty()) report = OpenOut(report_path);
  std::unique_ptr<Assistant> assistant;
  Checkpoint ckpt;
  if (controller == "ac") {
    assistant = std::make_unique<AdmittanceAssistant>(s.train.admittance,
                                                      s.train.env.dt);
  } else {
    if (checkpoint.empty()) throw ConfigError("policy eval needs --checkpoint");
    ckpt = LoadCheckpoint(checkpoint);
    assistant = std::make_unique<PolicyAssistant>(&ckpt.policy, ckpt.normalizer,
                                                  ckpt.limits);
  }
  const EvalReport r =
      RunEval(s.train, *assistant, trials, log.is_open() ? &log : nullptr,
              report.is_open() ? &report : nullptr);
  std::cout << ReportSummaryLine(controller, r) << '\n'
            << ReportRecordJson(controller, r) << '\n';
  if (report.is_open()) report << ReportRecordJson(controller, r) << '\n';
  return 0;
}

int CompareCmd(const CommonOptions& common, const std::string& checkpoint,
               int trials, const std::string& report_path) {
  const Settings s = LoadSettings(common);
  std::ofstream report;
  if (!report_path.empty()) report = OpenOut(report_path);
  std::ostream* rep = report.is_open() ? &report : nullptr;

  const Checkpoint ckpt = LoadCheckpoint(checkpoint);
  PolicyAssistant policy(&ckpt.policy, ckpt.normalizer, ckpt.limits);
  AdmittanceAssistant ac(s.train.admittance, s.train.env.dt);
  const EvalReport rp = RunEval(s.train, policy, trials, nullptr, rep);
  const EvalReport ra = RunEval(s.train, ac, trials, nullptr, rep);

  const MannWhitneyResult pf = MannWhitneyU(
      rp.insert_force_norms, ra.insert_force_norms, Alternative::kALess);
  const MannWhitneyResult pt = MannWhitneyU(
      rp.insert_torque_norms, ra.insert_torque_norms, Alternative::kALess);

  std::cout << ReportSummaryLine("policy", rp) << '\n'
            << ReportSummaryLine("admittance", ra) << '\n'
            << "inserting phase, H1 policy < admittance: force p = " << pf.p
            << ", torque p = " << pt.p << '\n';
  const std::string lines[] = {
      ReportRecordJson("policy", rp), ReportRecordJson("admittance", ra),
      TestRecordJson("policy_vs_admittance", "force_norm", Alternative::kALess,
                     rp.insert_force_norms.size(), ra.insert_force_norms.size(),
                     pf),
      TestRecordJson("policy_vs_admittance", "torque_norm",
                     Alternative::kALess, rp.insert_torque_norms.size(),
                     ra.insert_torque_norms.size(), pt)};
  for (const std::string& l : lines) {
    std::cout << l << '\n';
    if (rep) *rep << l << '\n';
  }
  return 0;
}

int ServeCmd(const CommonOptions& common, const std::string& host, int port) {
  const Settings s = LoadSettings(common);
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
  collab::Server server(s.train, s.session);
  const unsigned short bound =
      server.Start(host, static_cast<unsigned short>(port));
  std::cout << "serving ws://" << host << ':' << bound << "/" << std::endl;
  // The signals are blocked in every thread, so sigwait receives them here.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
  server.Stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-manipulated board insertion workbench"};
  app.require_subcommand(1);

  CommonOptions common;
  int episodes = 0, iterations = 0, trials = 50, port = 8765;
  std::string out, mode, demos, curve, controller = "policy", checkpoint,
                                      report, log, host = "127.0.0.1";

  CLI::App* demo = app.add_subcommand("demo-collect",
                                      "collect successful admittance runs");
  AddCommon(demo, &common);
  demo->add_option("-n,--episodes", episodes, "successful episodes to keep");
  demo->add_option("-o,--out", out, "demonstration file")->required();

  CLI::App* train = app.add_subcommand("train", "train a guided policy");
  AddCommon(train, &common);
  train->add_option("-m,--mode", mode, "none, guide, demos or both");
  train->add_option("-i,--iterations", iterations, "training iterations");
  train->add_option("--demos", demos, "demonstration file")
      ->check(CLI::ExistingFile);
  train->add_option("-o,--out", out, "checkpoint path")->required();
  train->add_option("--curve", curve, "learning-curve JSONL path");

  CLI::App* eval = app.add_subcommand("eval", "evaluate one controller");
  AddCommon(eval, &common);
  eval->add_option("--controller", controller, "policy or ac")
      ->check(CLI::IsMember({"policy", "ac"}));
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint");
  eval->add_option("-n,--trials", trials, "seeded trials")
      ->check(CLI::PositiveNumber);
  eval->add_option("--report", report, "episode/report JSONL path");
  eval->add_option("--log", log, "per-step trajectory JSONL path");

  CLI::App* compare = app.add_subcommand(
      "compare", "policy vs admittance with rank tests on F/T norms");
  AddCommon(compare, &common);
  compare->add_option("--checkpoint", checkpoint, "policy checkpoint")
      ->required();
  compare->add_option("-n,--trials", trials, "seeded trials per controller")
      ->check(CLI::PositiveNumber);
  compare->add_option("--report", report, "JSONL report path");

  CLI::App* serve = app.add_subcommand("serve", "run the live session server");
  AddCommon(serve, &common);
  serve->add_option("--host", host, "bind address");
  serve->add_option("-p,--port", port, "bind port (0 picks one)");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(serve)) {
    // Block the signals before any thread starts so sigwait receives them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
  }

  try {
    if (app.got_subcommand(demo)) return DemoCollect(common, episodes, out);
    if (app.got_subcommand(train)) {
      return TrainCmd(common, mode, iterations, demos, out, curve);
    }
    if (app.got_subcommand(eval)) {
      return EvalCmd(common, controller, checkpoint, trials, report, log);
    }
    if (app.got_subcommand(compare)) {
      return CompareCmd(common, checkpoint, trials, report);
    }
    if (app.got_subcommand(serve)) return ServeCmd(common, host, port);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
