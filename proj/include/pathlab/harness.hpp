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

#ifndef PATHLAB__HARNESS_HPP_
#define PATHLAB__HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathlab/controller.hpp"
#include "pathlab/longitudinal.hpp"
#include "pathlab/track.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab
{
struct LabConfig;
}

namespace pathlab::harness
{

struct StepRecord
{
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double v = 0.0;
  double steering = 0.0;  // normalized
  double lateral_error = 0.0;
  double heading_error = 0.0;  // [rad]
  double arc_position = 0.0;
  double solve_time_s = 0.0;
};

struct EpisodeLog
{
  std::string track_id;
  std::string controller_id;
  double dt = 0.05;
  StepRecord spawn;
  std::vector<StepRecord> steps;
  double progress = 0.0;  // arc length covered, unwrapped [m]
  bool completed = false;
  bool aborted = false;  // corridor violation or controller fault
  bool fault = false;
  std::string fault_message;
};

struct EpisodeOptions
{
  vehicle::VehicleParams vehicle;
  longitudinal::LongitudinalConfig longitudinal;
  double dt = 0.05;
  long step_cap = 4000;
  double spawn_speed = 0.0;
  double spawn_lateral_offset = 0.0;  // positive = left of the path
  std::string track_id = "track";
  // Lane the errors, corridor and progress are measured on. Unset means the
  // controller's track; set it when the controller sees perturbed waypoints.
  std::optional<track::Track> ground_truth;
};

/**
 * @brief Drives `controller` around `track` from waypoint 0.
 *
 * The controller always sees `track`. Logged errors, the corridor check and
 * lap progress use `options.ground_truth` when it is set.
 * Stops on lap completion (closed tracks) or reaching the end (open tracks),
 * on a corridor violation, or at the step cap. A spawn outside the corridor
 * aborts before the first step. A controller fault ends the episode with a
 * partial log flagged aborted.
 */
EpisodeLog run_episode(
  LateralController & controller, const track::Track & track, const EpisodeOptions & options);

struct MetricsReport
{
  double ale_m = 0.0;
  double aoe_deg = 0.0;
  double sd_steer = 0.0;  // population SD
  double max_abs_lateral_m = 0.0;
  bool completed = false;
  double total_solve_s = 0.0;
  std::size_t steps = 0;
};

/// Throws MetricsError on a log without steps.
MetricsReport metrics(const EpisodeLog & log);

struct RuntimeComparison
{
  double total_a_s = 0.0;
  double total_b_s = 0.0;
  double mean_a_s = 0.0;
  double mean_b_s = 0.0;
  double savings = 0.0;  // 1 - total_a / total_b
  double speedup = 0.0;  // mean_b / mean_a
};

RuntimeComparison compare_runtimes(const EpisodeLog & a, const EpisodeLog & b);
/// 1 - a / b
double runtime_savings(double total_a, double total_b);

enum class SweepAxis { kThrottle, kNoise, kSeed };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string & name);

struct SweepRow
{
  double value = 0.0;
  MetricsReport report;
  bool failed = false;
  std::string error;
};

/// Builds the controller for one sweep run from the adjusted config.
using ControllerFactory = std::function<std::unique_ptr<LateralController>(const LabConfig &)>;

/**
 * @brief One episode per axis value. Throttle sets a constant throttle, noise
 * perturbs the waypoints the controller sees (with the configured noise seed)
 * while errors stay measured on the clean track, seed replaces the
 * run seed. A failing run is recorded and the sweep continues.
 */
std::vector<SweepRow> sweep(
  const LabConfig & base, const track::Track & track, SweepAxis axis,
  const std::vector<double> & values, const ControllerFactory & factory, long step_cap = 4000);

/// `<axis>,ALE_m,AOE_deg,SD_steer,completed,total_solve_s`
void write_sweep_csv(
  const std::filesystem::path & path, SweepAxis axis, const std::vector<SweepRow> & rows);

/// True when ALE never decreases except for at most `inversions` drops of at most `tolerance` relative.
bool ale_non_decreasing(const std::vector<SweepRow> & rows, int inversions = 0, double tolerance = 0.0);

void write_trace(const std::filesystem::path & path, const EpisodeLog & log);
/// Reads a trace back; the first row is the spawn record.
EpisodeLog read_trace(const std::filesystem::path & path);

/// Episode options for evaluating on the configured plant and longitudinal mode.
EpisodeOptions episode_options(const LabConfig & config, long step_cap = 4000);

}  // namespace pathlab::harness

#endif  // PATHLAB__HARNESS_HPP_
