// Copyright 2026 The pathlab Authors
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

#include "pathlab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "pathlab/config.hpp"
#include "pathlab/csv.hpp"
#include "pathlab/demo_training.hpp"
#include "pathlab/error.hpp"
#include "pathlab/harness.hpp"
#include "pathlab/mpc_pid.hpp"

namespace pathlab
{

namespace
{

struct Options
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;

  // gen-track
  std::optional<double> circle;
  std::string course;
  double spacing = 1.0;

  // evaluation
  std::string controller = "mpc-pid";
  std::string checkpoint;
  std::optional<double> throttle;
  double noise = 0.0;
  long step_cap = 4000;

  // sweep
  std::string axis = "throttle";
  std::vector<double> values;

  // compare
  std::string trace_a;
  std::string trace_b;
};

LabConfig base_config(const Options & o)
{
  LabConfig c = o.config.empty() ? LabConfig{} : load_config(o.config);
  if (o.seed) {
    c.seed = *o.seed;
  }
  if (o.throttle) {
    c.longitudinal.mode = longitudinal::Mode::kConstantThrottle;
    c.longitudinal.constant_throttle = *o.throttle;
  }
  return c;
}

std::filesystem::path out_dir(const Options & o, const char * fallback)
{
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path(fallback) : std::filesystem::path(o.out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string checkpoint_for(const std::string & pattern, std::uint64_t seed)
{
  std::string path = pattern;
  const auto pos = path.find("{seed}");
  if (pos != std::string::npos) {
    path.replace(pos, 6, std::to_string(seed));
  }
  return path;
}

std::unique_ptr<LateralController> make_controller(
  const std::string & kind, const std::string & checkpoint, const LabConfig & cfg)
{
  if (kind == "mpc-pid") {
    return std::make_unique<control::MpcPidController>(cfg.demonstrator());
  }
  if (kind == "ddpg") {
    const std::string path = checkpoint_for(checkpoint, cfg.seed);
    if (path.empty()) {
      throw CheckpointError("the ddpg controller needs --checkpoint");
    }
    if (!std::filesystem::exists(path)) {
      throw CheckpointError("checkpoint not found: " + path);
    }
    return std::make_unique<training::DetachedPolicy>(
      training::detach_demo(path, cfg.train.observation));
  }
  throw ParameterError("unknown controller: " + kind);
}

void print_report(std::ostream & out, const std::string & label, const harness::MetricsReport & m)
{
  out << label << ": ALE " << csv::format_number(m.ale_m) << " m, AOE "
      << csv::format_number(m.aoe_deg) << " deg, SD " << csv::format_number(m.sd_steer)
      << ", max |d| " << csv::format_number(m.max_abs_lateral_m) << " m, "
      << (m.completed ? "lap completed" : "lap not completed") << ", solve "
      << csv::format_number(m.total_solve_s) << " s over " << m.steps << " steps\n";
}

void write_metrics_csv(const std::filesystem::path & path, double throttle, const harness::MetricsReport & m)
{
  csv::Writer w(path, {"throttle", "ALE_m", "AOE_deg", "SD_steer", "completed", "total_solve_s"});
  w.row({throttle, m.ale_m, m.aoe_deg, m.sd_steer, m.completed ? 1.0 : 0.0, m.total_solve_s});
}

harness::EpisodeLog evaluate(
  const Options & o, const LabConfig & cfg, const std::string & kind, std::ostream & out,
  const std::filesystem::path & dir, const std::string & tag)
{
  const track::Track lane = make_track(cfg.track);
  harness::EpisodeOptions options = harness::episode_options(cfg, o.step_cap);
  track::Track seen = lane;
  if (o.noise > 0.0) {
    seen = track::perturb_waypoints(lane, o.noise, cfg.track.noise_seed);
    options.ground_truth = lane;
  }
  auto controller = make_controller(kind, o.checkpoint, cfg);
  const harness::EpisodeLog log = harness::run_episode(*controller, seen, options);
  if (log.fault) {
    out << "controller fault: " << log.fault_message << '\n';
  }
  const harness::MetricsReport m = harness::metrics(log);
  print_report(out, kind, m);
  harness::write_trace(dir / ("trace_" + tag + ".csv"), log);
  write_metrics_csv(dir / ("metrics_" + tag + ".csv"), cfg.longitudinal.constant_throttle, m);
  return log;
}

int cmd_gen_track(const Options & o, std::ostream & out)
{
  if (o.out.empty()) {
    throw ParameterError("gen-track needs --out <file>");
  }
  std::optional<track::Track> trk;
  if (o.circle) {
    trk = track::generate_circle(*o.circle, o.spacing);
  } else if (!o.course.empty()) {
    trk = track::generate_closed_course(parse_course(o.course), o.spacing);
  } else {
    trk = make_track(base_config(o).track);
  }
  if (o.noise > 0.0) {
    trk = track::perturb_waypoints(*trk, o.noise, o.seed.value_or(1));
  }
  track::save_track(*trk, o.out);
  out << "wrote " << trk->size() << " waypoints, length " << csv::format_number(trk->length())
      << " m to " << o.out << '\n';
  return 0;
}

int cmd_train(const Options & o, std::ostream & out)
{
  const LabConfig cfg = base_config(o);
  const std::filesystem::path dir = out_dir(o, "run");
  save_config(cfg, dir / "config.ini");
  const track::Track trk = make_track(cfg.track);
  const training::TrainResult r = training::train(cfg, trk, dir, cfg.seed,
    [&out](const training::TrainProgress & p) {
      out << "step " << p.step << ", episode " << p.episode << ", last return "
          << csv::format_number(p.last_return) << '\n';
    });
  out << "trained " << r.steps << " steps over " << r.episodes_run << " episodes ("
      << r.aborted_episodes << " aborted); checkpoint " << r.checkpoint.string() << '\n';
  return 0;
}

int cmd_sweep(const Options & o, std::ostream & out)
{
  const LabConfig cfg = base_config(o);
  const harness::SweepAxis axis = harness::parse_axis(o.axis);
  std::vector<double> values = o.values;
  if (values.empty() && axis == harness::SweepAxis::kThrottle) {
    values = {0.4, 0.6, 0.8, 1.0};
  }
  const track::Track trk = make_track(cfg.track);
  const std::string kind = o.controller;
  const std::string checkpoint = o.checkpoint;
  const auto rows = harness::sweep(cfg, trk, axis, values,
    [&](const LabConfig & c) { return make_controller(kind, checkpoint, c); }, o.step_cap);
  const std::filesystem::path dir = out_dir(o, "sweep");
  harness::write_sweep_csv(dir / ("sweep_" + o.axis + ".csv"), axis, rows);
  for (const auto & r : rows) {
    if (r.failed) {
      out << o.axis << ' ' << csv::format_number(r.value) << ": failed: " << r.error << '\n';
    } else {
      print_report(out, o.axis + " " + csv::format_number(r.value), r.report);
    }
  }
  return 0;
}

int cmd_compare(const Options & o, std::ostream & out)
{
  harness::EpisodeLog a;
  harness::EpisodeLog b;
  if (!o.trace_a.empty() || !o.trace_b.empty()) {
    if (o.trace_a.empty() || o.trace_b.empty()) {
      throw ParameterError("compare needs both --trace-a and --trace-b");
    }
    a = harness::read_trace(o.trace_a);
    b = harness::read_trace(o.trace_b);
  } else {
    const LabConfig cfg = base_config(o);
    const std::filesystem::path dir = out_dir(o, "compare");
    a = evaluate(o, cfg, "ddpg", out, dir, "ddpg");
    b = evaluate(o, cfg, "mpc-pid", out, dir, "mpc-pid");
  }
  const harness::RuntimeComparison c = harness::compare_runtimes(a, b);
  out << "total solve time: " << csv::format_number(c.total_a_s) << " s vs "
      << csv::format_number(c.total_b_s) << " s\n"
      << "per step: " << csv::format_number(c.mean_a_s) << " s vs " << csv::format_number(c.mean_b_s)
      << " s (speed-up " << csv::format_number(c.speedup) << "x)\n"
      << "savings: " << csv::format_number(100.0 * c.savings) << " %\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Path-following lab: MPC-PID demonstrator and demonstration-guided DDPG"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Key-value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Run seed");
  app.add_option("--out", o.out, "Output file (gen-track) or directory");

  auto * gen = app.add_subcommand("gen-track", "Write a circle or course track as CSV");
  auto * circle = gen->add_option("--circle", o.circle, "Circle radius [m]");
  gen->add_option("--course", o.course, "Course string such as S100,L50:180,S100,L50:180")->excludes(circle);
  gen->add_option("--spacing", o.spacing, "Waypoint spacing [m]")->check(CLI::PositiveNumber);
  gen->add_option("--noise", o.noise, "Uniform waypoint noise [m]")->check(CLI::NonNegativeNumber);

  auto * tune = app.add_subcommand("tune-mpc", "Run MPC-PID on the configured track and report metrics");
  auto * train = app.add_subcommand("train", "Train a DDPG policy with the MPC-PID demonstrator");
  auto * eval = app.add_subcommand("eval", "Evaluate the detached policy or MPC-PID");
  auto * sweep = app.add_subcommand("sweep", "Evaluate over throttle values, noise levels or seeds");
  auto * compare = app.add_subcommand("compare", "Compare controller solve times");

  for (auto * sub : {tune, eval, sweep, compare}) {
    sub->add_option("--throttle", o.throttle, "Constant throttle override")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--noise", o.noise, "Uniform waypoint noise [m]")->check(CLI::NonNegativeNumber);
    sub->add_option("--step-cap", o.step_cap, "Episode step cap")->check(CLI::NonNegativeNumber);
  }
  for (auto * sub : {eval, sweep, compare}) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file; {seed} is replaced by the run seed");
  }
  for (auto * sub : {eval, sweep}) {
    sub->add_option("--controller", o.controller, "ddpg or mpc-pid")
      ->check(CLI::IsMember({"ddpg", "mpc-pid"}));
  }
  sweep->add_option("--axis", o.axis, "throttle, noise or seed")
    ->check(CLI::IsMember({"throttle", "noise", "seed"}));
  sweep->add_option("--values", o.values, "Axis values")->delimiter(',');
  compare->add_option("--trace-a", o.trace_a, "Trace of the candidate controller");
  compare->add_option("--trace-b", o.trace_b, "Trace of the reference controller");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError & e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*gen) {
      return cmd_gen_track(o, out);
    }
    if (*tune) {
      const LabConfig cfg = base_config(o);
      evaluate(o, cfg, "mpc-pid", out, out_dir(o, "tune"), "mpc-pid");
      return 0;
    }
    if (*train) {
      return cmd_train(o, out);
    }
    if (*eval) {
      const LabConfig cfg = base_config(o);
      evaluate(o, cfg, o.controller, out, out_dir(o, "eval"), o.controller);
      return 0;
    }
    if (*sweep) {
      return cmd_sweep(o, out);
    }
    if (*compare) {
      return cmd_compare(o, out);
    }
  } catch (const std::exception & e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace pathlab
