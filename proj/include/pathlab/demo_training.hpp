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

#ifndef PATHLAB__DEMO_TRAINING_HPP_
#define PATHLAB__DEMO_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pathlab/controller.hpp"
#include "pathlab/ddpg.hpp"
#include "pathlab/track.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab
{
struct LabConfig;
}

namespace pathlab::training
{

// ---------------------------------------------------------------------------
// Rewards

/// Per-step tracking reward |v cos(phi)| - |v sin(phi)| - |v| |d|.
double step_reward(double speed, double heading_error, double lateral_error);

/// c_track r_track - c_change (delta_t - delta_prev)^2 / 2
double reward_change_penalty(
  double r_track, double steering, double prev_steering, double c_track, double c_change);

/// c_track r_track - c_diff (a_demo - a)^2 / 2
double reward_demo(double r_track, double demo_action, double action, double c_track, double c_diff);

double sigmoid(double x);

struct Coefficients
{
  double c_track = 0.5;
  double c_diff = 0.5;
};

/// Sigmoid of each reward part, normalized to sum to one. r_diff is the non-negative penalty magnitude.
Coefficients adaptive_coefficients(double r_track, double r_diff);

enum class RewardMode { kBase, kChangePenalty, kDemoFixed, kDemoAdaptive };

/// Parts of one step's reward. `r_penalty` is r_change or r_diff depending on the mode.
struct RewardBreakdown
{
  RewardMode mode = RewardMode::kBase;
  double r_track = 0.0;
  double r_penalty = 0.0;
  double c_track = 1.0;
  double c_penalty = 0.0;
  double total = 0.0;

  /// c_track r_track - c_penalty r_penalty
  double reconstruct() const { return c_track * r_track - c_penalty * r_penalty; }
};

struct RewardWeights
{
  double c_track = 1.0;
  double c_change = 1.0;
  double c_diff = 1.0;
};

/**
 * @brief Evaluates the configured reward.
 *
 * `prev_steering`/`steering` feed the change penalty, `demo_action`/`action`
 * the imitation penalty; unused inputs are ignored by the other modes.
 */
RewardBreakdown compute_reward(
  RewardMode mode, const RewardWeights & weights, double r_track, double steering,
  double prev_steering, double demo_action, double action);

// ---------------------------------------------------------------------------
// Demonstration gate

enum class ActionSource { kAgent, kDemo };

struct GateResult
{
  double executed = 0.0;
  ActionSource source = ActionSource::kAgent;
  double agent = 0.0;
  double demo = 0.0;
};

/// Executes the demonstrator's action with probability p_action.
GateResult gate_action(double agent_action, double demo_action, double p_action, std::mt19937_64 & rng);

/// Demonstrated steering angle turned into a steering rate, clipped to +-kMaxSteeringRate.
double demo_action_transform(double demo_steering, double prev_agent_steering, double dt);

/// Linear decay from `start` to `end` over the first `decay_steps` steps, then held. No window means no decay.
double p_action_at(long step, double start, double end, long decay_steps);

// ---------------------------------------------------------------------------
// Learning-rate schedule

/**
 * @brief Constant for the first half of training, then a decaying triangular cycle.
 *
 * Cycle k spans `cycle_len` steps between eta_min,k = 0.1 eta_max0 lambda^k
 * and eta_max,k = eta_max0 lambda^k, starting at the top, reaching the
 * bottom at mid-cycle and climbing back.
 */
struct LrSchedule
{
  double eta_max0 = 1e-3;
  double min_ratio = 0.1;
  double decay = 0.999;  // lambda
  long cycle_len = 32;
  long total_steps = 0;
  long half_split = -1;  // < 0 means total_steps / 2

  long split() const { return half_split < 0 ? total_steps / 2 : half_split; }
  long cycle_index(long step) const;
  double eta_max(long cycle) const;
  double eta_min(long cycle) const;
};

double cyclical_lr(long step, const LrSchedule & schedule);

// ---------------------------------------------------------------------------
// Observations

/// How the heading error phi is measured.
enum class HeadingErrorDef
{
  kPathTangent,  // velocity direction (yaw + beta) against the path heading
  kSideSlip,     // velocity direction against vehicle heading, i.e. beta
};

struct ObservationConfig
{
  int lookahead = 10;
  vehicle::SteeringMode action_mode = vehicle::SteeringMode::kAngle;
  HeadingErrorDef heading = HeadingErrorDef::kPathTangent;
  // network input scaling
  double waypoint_scale = 10.0;
  double speed_scale = 20.0;
  double lateral_scale = 1.5;
  double heading_scale = 0.5;
};

/// 2n + 3, plus one for the current steering in steering-rate mode.
int observation_size(const ObservationConfig & config);

double heading_error(
  const vehicle::VehicleState & state, const track::PathProjection & projection,
  HeadingErrorDef definition);

/**
 * @brief Flattened observation, in order:
 * n look-ahead waypoints (x, y) in the vehicle frame, speed, signed lateral
 * error, heading error, and the current steering in steering-rate mode.
 * Open tracks repeat the last waypoint to keep the length fixed.
 */
std::vector<double> build_observation(
  const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection, const ObservationConfig & config);

/// Divides each feature group by its configured scale; this is what the networks see.
std::vector<double> normalize_observation(std::vector<double> obs, const ObservationConfig & config);

// ---------------------------------------------------------------------------
// Training

struct TrainResult
{
  std::filesystem::path checkpoint;
  std::filesystem::path metrics;
  std::filesystem::path episodes;
  long steps = 0;
  long episodes_run = 0;
  long aborted_episodes = 0;
};

struct TrainProgress
{
  long step = 0;
  long episode = 0;
  double last_return = 0.0;
};

/**
 * @brief Runs DDPG with the MPC-PID demonstrator in the loop.
 *
 * Writes `checkpoint.txt`, `metrics.csv` (one row per step), `episodes.csv`,
 * and the plot-data files `fig_actor_loss.csv` and `fig_coefficients.csv`
 * into `out_dir`. Episodes end with done = 1 on a corridor violation and
 * with done = 0 at the step cap. A TrainingFault writes
 * `checkpoint_fault.txt` before propagating.
 */
TrainResult train(
  const LabConfig & config, const track::Track & track, const std::filesystem::path & out_dir,
  std::uint64_t seed, const std::function<void(const TrainProgress &)> & progress = {});

/// Noise-free actor acting alone.
class DetachedPolicy : public LateralController
{
public:
  DetachedPolicy(ddpg::Mlp actor, ObservationConfig config);

  std::string name() const override { return "ddpg"; }
  vehicle::SteeringMode mode() const override { return config_.action_mode; }
  void reset() override {}
  double act(
    const vehicle::VehicleState & state, const track::Track & track,
    const track::PathProjection & projection) override;

  double act_on(std::span<const double> normalized_observation) const;
  const ddpg::Mlp & actor() const { return actor_; }
  const ObservationConfig & observation_config() const { return config_; }

private:
  ddpg::Mlp actor_;
  ObservationConfig config_;
};

/// Loads a checkpoint and keeps only the actor. Throws CheckpointError on a shape mismatch.
DetachedPolicy detach_demo(const std::filesystem::path & checkpoint, const ObservationConfig & config);

}  // namespace pathlab::training

#endif  // PATHLAB__DEMO_TRAINING_HPP_
