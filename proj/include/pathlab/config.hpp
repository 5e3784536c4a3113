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

#ifndef PATHLAB__CONFIG_HPP_
#define PATHLAB__CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "pathlab/ddpg.hpp"
#include "pathlab/demo_training.hpp"
#include "pathlab/longitudinal.hpp"
#include "pathlab/mpc_pid.hpp"
#include "pathlab/track.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab
{

struct TrackConfig
{
  std::string kind = "circle";  // circle | course | file
  double radius = 50.0;
  double spacing = 1.0;
  std::string course;  // e.g. "S100,L50:180,S100,L50:180"
  std::string file;
  double corridor_half_width = 1.5;
  double noise = 0.2;  // waypoint perturbation for robustness runs [m]
  std::uint64_t noise_seed = 1;
};

struct TrainConfig
{
  training::RewardMode reward = training::RewardMode::kDemoAdaptive;
  training::RewardWeights weights;
  double p_action = 0.3;
  double p_action_final = 0.0;
  double p_action_decay = 0.5;  // fraction of training over which p_action decays
  long episode_cap = 2000;
  double dt = 0.05;
  long total_steps = 150000;
  long warmup_steps = 1000;
  long updates_per_step = 1;
  double lr_decay = 0.999;
  long lr_cycle = 32;
  double reward_scale = 1.0;  // applied to stored rewards only
  double spawn_speed = 0.0;
  training::ObservationConfig observation;
  ddpg::ExplorationNoise::Kind noise = ddpg::ExplorationNoise::Kind::kOrnsteinUhlenbeck;
  double noise_theta = 0.15;
  double noise_sigma = 0.2;
  double noise_sigma_final = 0.2;
};

/// Everything a run needs, loaded from one key-value document.
struct LabConfig
{
  vehicle::VehicleParams vehicle;
  double model_mass_scale = 1.10;
  double model_stiffness_scale = 0.85;
  control::MpcConfig mpc;
  control::PidGains pid;
  control::BlendWeights blend;
  longitudinal::LongitudinalConfig longitudinal;
  ddpg::DdpgParams ddpg;
  TrainConfig train;
  TrackConfig track;
  std::uint64_t seed = 1;

  /// Demonstrator settings with the mismatched internal model.
  control::MpcPidSettings demonstrator() const;
};

/**
 * @brief Reads an INI-style document with sections [vehicle] [mpc] [pid]
 * [longitudinal] [ddpg] [train] [track] [run].
 *
 * Unset keys keep their defaults; unknown keys are a ConfigError. Lines
 * starting with '#' or ';' are comments.
 */
LabConfig load_config(const std::filesystem::path & path);

/// Writes every key with its current value; load_config() reads it back unchanged.
void save_config(const LabConfig & config, const std::filesystem::path & path);

/// Builds the track described by `config` (noise not applied).
track::Track make_track(const TrackConfig & config);

/// Parses "S<len>" and "L<radius>:<deg>" / "R<radius>:<deg>" tokens separated by commas.
std::vector<track::CourseSegment> parse_course(const std::string & text);

}  // namespace pathlab

#endif  // PATHLAB__CONFIG_HPP_
