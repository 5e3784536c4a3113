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

#include "pathlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "pathlab/angles.hpp"
#include "pathlab/config.hpp"
#include "pathlab/csv.hpp"
#include "pathlab/demo_training.hpp"
#include "pathlab/error.hpp"

namespace pathlab::harness
{

namespace
{

StepRecord make_record(
  double t, const vehicle::VehicleState & s, const track::PathProjection & p, double solve)
{
  StepRecord r;
  r.t = t;
  r.x = s.x;
  r.y = s.y;
  r.yaw = s.yaw;
  r.v = s.speed;
  r.steering = s.steering;
  r.lateral_error = p.lateral_error;
  r.heading_error = training::heading_error(s, p, training::HeadingErrorDef::kPathTangent);
  r.arc_position = p.arc_position;
  r.solve_time_s = solve;
  return r;
}

const std::vector<std::string> kTraceHeader = {"t", "x", "y", "yaw", "v", "steering",
  "lateral_error", "heading_error", "arc_position", "solve_time_s"};

}  // namespace

EpisodeLog run_episode(
  LateralController & controller, const track::Track & track, const EpisodeOptions & options)
{
  if (!(options.dt > 0.0) || options.step_cap < 0) {
    throw ParameterError("episode needs dt > 0 and a non-negative step cap");
  }
  EpisodeLog log;
  log.track_id = options.track_id;
  log.controller_id = controller.name();
  log.dt = options.dt;

  controller.reset();
  longitudinal::LongitudinalController lon(options.longitudinal);
  const track::Track & lane = options.ground_truth ? *options.ground_truth : track;
  track::ProjectionCursor cursor;
  track::ProjectionCursor seen_cursor;

  const double heading = lane.segment_heading(0);
  vehicle::VehicleState state;
  state.x = lane.waypoints().front().x - std::sin(heading) * options.spawn_lateral_offset;
  state.y = lane.waypoints().front().y + std::cos(heading) * options.spawn_lateral_offset;
  state.yaw = heading;
  state.speed = options.spawn_speed;

  track::PathProjection proj = cursor.project(lane, {state.x, state.y});
  log.spawn = make_record(0.0, state, proj, 0.0);
  if (std::abs(proj.lateral_error) > lane.corridor_half_width()) {
    log.aborted = true;
    return log;
  }

  const double length = lane.length();
  double last_arc = proj.arc_position;
  using clock = std::chrono::steady_clock;
  for (long k = 0; k < options.step_cap; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    double action = 0.0;
    double solve = 0.0;
    try {
      const track::PathProjection seen =
        options.ground_truth ? seen_cursor.project(track, {state.x, state.y}) : proj;
      const auto t0 = clock::now();
      action = controller.act(state, track, seen);
      solve = std::chrono::duration<double>(clock::now() - t0).count();
    } catch (const Error & e) {
      log.aborted = true;
      log.fault = true;
      log.fault_message = e.what();
      break;
    }
    const longitudinal::Pedals pedals = lon.step(t, state.speed, options.dt);
    const vehicle::ControlCommand cmd = controller.mode() == vehicle::SteeringMode::kRate ?
      vehicle::ControlCommand::rate(action, pedals.throttle, pedals.brake) :
      vehicle::ControlCommand::angle(action, pedals.throttle, pedals.brake);
    try {
      state = vehicle::step_plant(state, cmd, options.vehicle, options.dt);
    } catch (const StateError & e) {
      log.aborted = true;
      log.fault = true;
      log.fault_message = e.what();
      break;
    }
    proj = cursor.project(lane, {state.x, state.y});
    log.steps.push_back(make_record(static_cast<double>(k + 1) * options.dt, state, proj, solve));

    double delta = proj.arc_position - last_arc;
    if (lane.closed()) {
      if (delta > 0.5 * length) {
        delta -= length;
      } else if (delta < -0.5 * length) {
        delta += length;
      }
    }
    log.progress += delta;
    last_arc = proj.arc_position;

    if (std::abs(proj.lateral_error) > lane.corridor_half_width()) {
      log.aborted = true;
      break;
    }
    const bool done = lane.closed() ? log.progress >= length :
                                      proj.arc_position >= length - 0.5 * lane.mean_spacing();
    if (done) {
      log.completed = true;
      break;
    }
  }
  return log;
}

MetricsReport metrics(const EpisodeLog & log)
{
  if (log.steps.empty()) {
    throw MetricsError("episode log has no steps");
  }
  MetricsReport m;
  const auto n = static_cast<double>(log.steps.size());
  double steer_sum = 0.0;
  for (const StepRecord & r : log.steps) {
    m.ale_m += std::abs(r.lateral_error);
    m.aoe_deg += std::abs(r.heading_error);
    m.max_abs_lateral_m = std::max(m.max_abs_lateral_m, std::abs(r.lateral_error));
    m.total_solve_s += r.solve_time_s;
    steer_sum += r.steering;
  }
  m.ale_m /= n;
  m.aoe_deg = m.aoe_deg / n * 180.0 / std::numbers::pi;
  const double mean = steer_sum / n;
  double var = 0.0;
  for (const StepRecord & r : log.steps) {
    var += (r.steering - mean) * (r.steering - mean);
  }
  m.sd_steer = std::sqrt(var / n);
  m.completed = log.completed;
  m.steps = log.steps.size();
  return m;
}

double runtime_savings(double total_a, double total_b)
{
  if (!(total_b > 0.0)) {
    throw MetricsError("reference runtime must be positive");
  }
  return 1.0 - total_a / total_b;
}

RuntimeComparison compare_runtimes(const EpisodeLog & a, const EpisodeLog & b)
{
  const MetricsReport ma = metrics(a);
  const MetricsReport mb = metrics(b);
  RuntimeComparison c;
  c.total_a_s = ma.total_solve_s;
  c.total_b_s = mb.total_solve_s;
  c.mean_a_s = ma.total_solve_s / static_cast<double>(ma.steps);
  c.mean_b_s = mb.total_solve_s / static_cast<double>(mb.steps);
  c.savings = c.total_b_s > 0.0 ? runtime_savings(c.total_a_s, c.total_b_s) : 0.0;
  c.speedup = c.mean_a_s > 0.0 ? c.mean_b_s / c.mean_a_s : 0.0;
  return c;
}

std::string axis_name(SweepAxis axis)
{
  switch (axis) {
    case SweepAxis::kThrottle:
      return "throttle";
    case SweepAxis::kNoise:
      return "noise";
    case SweepAxis::kSeed:
      return "seed";
  }
  return "value";
}

SweepAxis parse_axis(const std::string & name)
{
  if (name == "throttle") {
    return SweepAxis::kThrottle;
  }
  if (name == "noise") {
    return SweepAxis::kNoise;
  }
  if (name == "seed") {
    return SweepAxis::kSeed;
  }
  throw ParameterError("unknown sweep axis: " + name);
}

EpisodeOptions episode_options(const LabConfig & config, long step_cap)
{
  EpisodeOptions o;
  o.vehicle = config.vehicle;
  o.longitudinal = config.longitudinal;
  o.dt = config.train.dt;
  o.step_cap = step_cap;
  o.spawn_speed = config.train.spawn_speed;
  o.track_id = config.track.kind;
  return o;
}

std::vector<SweepRow> sweep(
  const LabConfig & base, const track::Track & track, SweepAxis axis,
  const std::vector<double> & values, const ControllerFactory & factory, long step_cap)
{
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    SweepRow row;
    row.value = value;
    try {
      LabConfig cfg = base;
      track::Track run_track = track;
      switch (axis) {
        case SweepAxis::kThrottle:
          cfg.longitudinal.mode = longitudinal::Mode::kConstantThrottle;
          cfg.longitudinal.constant_throttle = value;
          break;
        case SweepAxis::kNoise:
          run_track = track::perturb_waypoints(track, value, cfg.track.noise_seed);
          break;
        case SweepAxis::kSeed:
          cfg.seed = static_cast<std::uint64_t>(value);
          break;
      }
      auto controller = factory(cfg);
      EpisodeOptions options = episode_options(cfg, step_cap);
      if (axis == SweepAxis::kNoise) {
        options.ground_truth = track;
      }
      const EpisodeLog log = run_episode(*controller, run_track, options);
      row.report = metrics(log);
      if (log.fault) {
        row.failed = true;
        row.error = log.fault_message;
      }
    } catch (const Error & e) {
      row.failed = true;
      row.error = e.what();
      row.report.ale_m = row.report.aoe_deg = row.report.sd_steer = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(
  const std::filesystem::path & path, SweepAxis axis, const std::vector<SweepRow> & rows)
{
  csv::Writer out(path, {axis_name(axis), "ALE_m", "AOE_deg", "SD_steer", "completed", "total_solve_s"});
  for (const SweepRow & r : rows) {
    out.row({r.value, r.report.ale_m, r.report.aoe_deg, r.report.sd_steer,
      r.report.completed ? 1.0 : 0.0, r.report.total_solve_s});
  }
}

bool ale_non_decreasing(const std::vector<SweepRow> & rows, int inversions, double tolerance)
{
  int seen = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].report.ale_m;
    const double cur = rows[i].report.ale_m;
    if (!(std::isfinite(prev) && std::isfinite(cur))) {
      return false;
    }
    if (cur < prev) {
      if (prev - cur > tolerance * prev || ++seen > inversions) {
        return false;
      }
    }
  }
  return true;
}

void write_trace(const std::filesystem::path & path, const EpisodeLog & log)
{
  csv::Writer out(path, kTraceHeader);
  const auto emit = [&](const StepRecord & r) {
    out.row({r.t, r.x, r.y, r.yaw, r.v, r.steering, r.lateral_error, r.heading_error,
      r.arc_position, r.solve_time_s});
  };
  emit(log.spawn);
  for (const StepRecord & r : log.steps) {
    emit(r);
  }
}

EpisodeLog read_trace(const std::filesystem::path & path)
{
  const csv::Table table = csv::read_table(path);
  if (table.header != kTraceHeader) {
    throw FormatError(path.string() + ": not an episode trace");
  }
  if (table.rows.empty()) {
    throw FormatError(path.string() + ": trace has no spawn record");
  }
  EpisodeLog log;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto & v = table.rows[i];
    const StepRecord r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
    if (i == 0) {
      log.spawn = r;
    } else {
      log.steps.push_back(r);
    }
  }
  if (log.steps.size() >= 2) {
    log.dt = log.steps[1].t - log.steps[0].t;
  }
  return log;
}

}  // namespace pathlab::harness
