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

#include "pathlab/demo_training.hpp"

#include <algorithm>
#include <cmath>

#include "pathlab/angles.hpp"
#include "pathlab/config.hpp"
#include "pathlab/csv.hpp"
#include "pathlab/error.hpp"
#include "pathlab/longitudinal.hpp"
#include "pathlab/mpc_pid.hpp"

namespace pathlab::training
{

double step_reward(double speed, double heading_error, double lateral_error)
{
  return std::abs(speed * std::cos(heading_error)) - std::abs(speed * std::sin(heading_error)) -
         std::abs(speed) * std::abs(lateral_error);
}

double reward_change_penalty(
  double r_track, double steering, double prev_steering, double c_track, double c_change)
{
  const double diff = steering - prev_steering;
  return c_track * r_track - c_change * 0.5 * diff * diff;
}

double reward_demo(double r_track, double demo_action, double action, double c_track, double c_diff)
{
  const double diff = demo_action - action;
  return c_track * r_track - c_diff * 0.5 * diff * diff;
}

double sigmoid(double x)
{
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Coefficients adaptive_coefficients(double r_track, double r_diff)
{
  const double track = sigmoid(r_track);
  const double diff = sigmoid(r_diff);
  const double sum = track + diff;
  Coefficients c;
  c.c_track = track / sum;
  c.c_diff = 1.0 - c.c_track;
  return c;
}

RewardBreakdown compute_reward(
  RewardMode mode, const RewardWeights & weights, double r_track, double steering,
  double prev_steering, double demo_action, double action)
{
  RewardBreakdown out;
  out.mode = mode;
  out.r_track = r_track;
  switch (mode) {
    case RewardMode::kBase:
      out.c_track = 1.0;
      out.c_penalty = 0.0;
      out.r_penalty = 0.0;
      out.total = r_track;
      return out;
    case RewardMode::kChangePenalty: {
      const double d = steering - prev_steering;
      out.r_penalty = 0.5 * d * d;
      out.c_track = weights.c_track;
      out.c_penalty = weights.c_change;
      out.total = reward_change_penalty(r_track, steering, prev_steering, out.c_track, out.c_penalty);
      return out;
    }
    case RewardMode::kDemoFixed:
    case RewardMode::kDemoAdaptive: {
      const double d = demo_action - action;
      out.r_penalty = 0.5 * d * d;
      if (mode == RewardMode::kDemoAdaptive) {
        const Coefficients c = adaptive_coefficients(r_track, out.r_penalty);
        out.c_track = c.c_track;
        out.c_penalty = c.c_diff;
      } else {
        out.c_track = weights.c_track;
        out.c_penalty = weights.c_diff;
      }
      out.total = reward_demo(r_track, demo_action, action, out.c_track, out.c_penalty);
      return out;
    }
  }
  return out;
}

GateResult gate_action(double agent_action, double demo_action, double p_action, std::mt19937_64 & rng)
{
  if (!(p_action >= 0.0 && p_action <= 1.0)) {
    throw ParameterError("p_action must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GateResult g;
  g.agent = agent_action;
  g.demo = demo_action;
  if (unit(rng) < p_action) {
    g.executed = demo_action;
    g.source = ActionSource::kDemo;
  } else {
    g.executed = agent_action;
    g.source = ActionSource::kAgent;
  }
  return g;
}

double demo_action_transform(double demo_steering, double prev_agent_steering, double dt)
{
  if (!(dt > 0.0)) {
    throw ParameterError("dt must be positive");
  }
  const double rate = (demo_steering - prev_agent_steering) / dt;
  return std::clamp(rate, -vehicle::kMaxSteeringRate, vehicle::kMaxSteeringRate);
}

double p_action_at(long step, double start, double end, long decay_steps)
{
  if (decay_steps <= 0 || step >= decay_steps) {
    return decay_steps <= 0 ? start : end;
  }
  const double w = static_cast<double>(step) / static_cast<double>(decay_steps);
  return std::clamp(start + w * (end - start), 0.0, 1.0);
}

long LrSchedule::cycle_index(long step) const
{
  const long half = split();
  return step < half ? -1 : (step - half) / cycle_len;
}

double LrSchedule::eta_max(long cycle) const
{
  return eta_max0 * std::pow(decay, static_cast<double>(cycle));
}

double LrSchedule::eta_min(long cycle) const
{
  return min_ratio * eta_max0 * std::pow(decay, static_cast<double>(cycle));
}

double cyclical_lr(long step, const LrSchedule & s)
{
  if (s.cycle_len < 2 || !(s.decay > 0.0 && s.decay <= 1.0)) {
    throw ParameterError("lr schedule needs cycle length >= 2 and decay in (0, 1]");
  }
  const long half = s.split();
  if (step < half) {
    return s.eta_max0;
  }
  const long k = (step - half) / s.cycle_len;
  const long pos = (step - half) % s.cycle_len;
  const double hi = s.eta_max(k);
  const double lo = s.eta_min(k);
  const double mid = 0.5 * static_cast<double>(s.cycle_len);
  // 1 at the cycle start and end, 0 at mid-cycle
  const double up = std::abs(static_cast<double>(pos) - mid) / mid;
  return lo + (hi - lo) * up;
}

int observation_size(const ObservationConfig & config)
{
  return 2 * config.lookahead + 3 + (config.action_mode == vehicle::SteeringMode::kRate ? 1 : 0);
}

double heading_error(
  const vehicle::VehicleState & state, const track::PathProjection & projection,
  HeadingErrorDef definition)
{
  if (definition == HeadingErrorDef::kSideSlip) {
    return normalize_angle(state.side_slip);
  }
  return normalize_angle(state.yaw + state.side_slip - projection.heading_ref);
}

std::vector<double> build_observation(
  const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection, const ObservationConfig & config)
{
  if (config.lookahead < 1) {
    throw ParameterError("observation needs at least one look-ahead waypoint");
  }
  const auto n = static_cast<std::size_t>(config.lookahead);
  const auto ahead =
    track::waypoints_ahead(track, projection, {state.x, state.y, state.yaw}, n);
  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(observation_size(config)));
  track::Waypoint last{};
  if (ahead.empty()) {
    // at the very end of an open track: hold the final waypoint
    const auto & w = track.waypoints().back();
    const double c = std::cos(state.yaw);
    const double s = std::sin(state.yaw);
    last = {c * (w.x - state.x) + s * (w.y - state.y), -s * (w.x - state.x) + c * (w.y - state.y)};
  } else {
    last = ahead.back();
  }
  for (std::size_t k = 0; k < n; ++k) {
    const track::Waypoint & w = k < ahead.size() ? ahead[k] : last;
    obs.push_back(w.x);
    obs.push_back(w.y);
  }
  obs.push_back(state.speed);
  obs.push_back(projection.lateral_error);
  obs.push_back(heading_error(state, projection, config.heading));
  if (config.action_mode == vehicle::SteeringMode::kRate) {
    obs.push_back(state.steering);
  }
  for (double v : obs) {
    if (!std::isfinite(v)) {
      throw StateError("non-finite observation");
    }
  }
  return obs;
}

std::vector<double> normalize_observation(std::vector<double> obs, const ObservationConfig & config)
{
  const auto n = static_cast<std::size_t>(2 * config.lookahead);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i] /= config.waypoint_scale;
  }
  obs[n] /= config.speed_scale;
  obs[n + 1] /= config.lateral_scale;
  obs[n + 2] /= config.heading_scale;
  return obs;
}

// ---------------------------------------------------------------------------

namespace
{

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

vehicle::VehicleState spawn_state(const track::Track & track, double speed)
{
  vehicle::VehicleState s;
  s.x = track.waypoints().front().x;
  s.y = track.waypoints().front().y;
  s.yaw = track.segment_heading(0);
  s.speed = speed;
  return s;
}

}  // namespace

TrainResult train(
  const LabConfig & config, const track::Track & track, const std::filesystem::path & out_dir,
  std::uint64_t seed, const std::function<void(const TrainProgress &)> & progress)
{
  const TrainConfig & tc = config.train;
  if (!(tc.dt > 0.0) || tc.episode_cap < 1 || tc.total_steps < 0) {
    throw ParameterError("invalid training configuration");
  }
  if (!(tc.p_action >= 0.0 && tc.p_action <= 1.0) || !(tc.p_action_final >= 0.0 && tc.p_action_final <= 1.0)) {
    throw ParameterError("p_action must lie in [0, 1]");
  }
  std::filesystem::create_directories(out_dir);

  const ObservationConfig & oc = tc.observation;
  const int obs_dim = observation_size(oc);
  const bool rate_mode = oc.action_mode == vehicle::SteeringMode::kRate;

  ddpg::DdpgParams dp = config.ddpg;
  if (rate_mode) {
    dp.action_low = -vehicle::kMaxSteeringRate;
    dp.action_high = vehicle::kMaxSteeringRate;
  } else {
    dp.action_low = -1.0;
    dp.action_high = 1.0;
  }

  ddpg::Agent agent(obs_dim, dp, mix_seed(seed, 0));
  ddpg::ReplayBuffer buffer(dp.buffer_capacity, obs_dim);
  std::mt19937_64 noise_rng(mix_seed(seed, 1));
  std::mt19937_64 gate_rng(mix_seed(seed, 2));
  std::mt19937_64 sample_rng(mix_seed(seed, 3));
  ddpg::ExplorationNoise noise(tc.noise, tc.noise_theta, tc.noise_sigma);

  control::MpcPidController demo(config.demonstrator());
  longitudinal::LongitudinalController lon(config.longitudinal);
  track::ProjectionCursor cursor;

  LrSchedule actor_lr{dp.actor_lr, 0.1, tc.lr_decay, tc.lr_cycle, tc.total_steps, -1};
  LrSchedule critic_lr{dp.critic_lr, 0.1, tc.lr_decay, tc.lr_cycle, tc.total_steps, -1};
  const long p_decay_steps = static_cast<long>(tc.p_action_decay * static_cast<double>(tc.total_steps));

  TrainResult result;
  result.checkpoint = out_dir / "checkpoint.txt";
  result.metrics = out_dir / "metrics.csv";
  result.episodes = out_dir / "episodes.csv";

  csv::Writer metrics(result.metrics, {"step", "episode", "critic_loss", "actor_loss", "r_track",
    "r_diff", "c_track", "c_diff", "executed_demo", "lr", "lateral_error", "speed"});
  csv::Writer episodes(result.episodes, {"episode", "steps", "episode_return", "aborted", "final_step"});
  csv::Writer fig_loss(out_dir / "fig_actor_loss.csv", {"step", "actor_loss", "critic_loss"});
  csv::Writer fig_coef(out_dir / "fig_coefficients.csv", {"step", "c_track", "c_diff"});

  vehicle::VehicleState state = spawn_state(track, tc.spawn_speed);
  track::PathProjection proj = cursor.project(track, {state.x, state.y});
  double sim_time = 0.0;
  long episode = 0;
  long ep_steps = 0;
  double ep_return = 0.0;
  double last_return = 0.0;

  auto reset_episode = [&]() {
    state = spawn_state(track, tc.spawn_speed);
    cursor.reset();
    proj = cursor.project(track, {state.x, state.y});
    demo.reset();
    lon.reset();
    noise.reset();
    sim_time = 0.0;
    ep_steps = 0;
    ep_return = 0.0;
  };

  try {
    for (long step = 0; step < tc.total_steps; ++step) {
      const std::vector<double> obs = normalize_observation(build_observation(state, track, proj, oc), oc);

      double demo_steer = 0.0;
      try {
        demo_steer = demo.step(state, track, proj).steering;
      } catch (const ControllerFault &) {
        demo_steer = 0.0;
      }
      const double demo_action =
        rate_mode ? demo_action_transform(demo_steer, state.steering, tc.dt) : demo_steer;

      const double frac = tc.total_steps > 0 ? static_cast<double>(step) / static_cast<double>(tc.total_steps) : 0.0;
      noise.set_sigma(tc.noise_sigma + frac * (tc.noise_sigma_final - tc.noise_sigma));
      const double agent_action =
        ddpg::act_with_noise(agent.actor(), obs, noise, noise_rng, dp.action_low, dp.action_high);
      const double p = p_action_at(step, tc.p_action, tc.p_action_final, p_decay_steps);
      const GateResult gate = gate_action(agent_action, demo_action, p, gate_rng);

      const longitudinal::Pedals pedals = lon.step(sim_time, state.speed, tc.dt);
      const vehicle::ControlCommand cmd = rate_mode ?
        vehicle::ControlCommand::rate(gate.executed, pedals.throttle, pedals.brake) :
        vehicle::ControlCommand::angle(gate.executed, pedals.throttle, pedals.brake);

      const double prev_steering = state.steering;
      const vehicle::VehicleState next = vehicle::step_plant(state, cmd, config.vehicle, tc.dt);
      const track::PathProjection next_proj = cursor.project(track, {next.x, next.y});
      const double d = next_proj.lateral_error;
      const double r_track = step_reward(next.speed, heading_error(next, next_proj, oc.heading), d);
      const RewardBreakdown rw = compute_reward(
        tc.reward, tc.weights, r_track, next.steering, prev_steering, demo_action, gate.executed);
      const bool done = std::abs(d) > track.corridor_half_width();

      const std::vector<double> next_obs =
        normalize_observation(build_observation(next, track, next_proj, oc), oc);
      buffer.add(obs, gate.executed, tc.reward_scale * rw.total, next_obs, done);

      double critic_loss = std::nan("");
      double actor_loss = std::nan("");
      const double lr_now = cyclical_lr(step, actor_lr);
      if (step >= tc.warmup_steps && buffer.size() >= dp.batch_size) {
        for (long u = 0; u < tc.updates_per_step; ++u) {
          const ddpg::Batch batch = buffer.sample(dp.batch_size, sample_rng);
          const ddpg::UpdateResult up = agent.update(batch, lr_now, cyclical_lr(step, critic_lr));
          critic_loss = up.critic_loss;
          actor_loss = up.actor_loss;
        }
        fig_loss.row({static_cast<double>(step), actor_loss, critic_loss});
      }
      fig_coef.row({static_cast<double>(step), rw.c_track, rw.c_penalty});
      metrics.row({static_cast<double>(step), static_cast<double>(episode), critic_loss, actor_loss,
        rw.r_track, rw.r_penalty, rw.c_track, rw.c_penalty,
        gate.source == ActionSource::kDemo ? 1.0 : 0.0, lr_now, d, next.speed});

      ep_return += rw.total;
      ++ep_steps;
      state = next;
      proj = next_proj;
      sim_time += tc.dt;
      if (done || ep_steps >= tc.episode_cap) {
        episodes.row({static_cast<double>(episode), static_cast<double>(ep_steps), ep_return,
          done ? 1.0 : 0.0, static_cast<double>(step)});
        last_return = ep_return;
        ++episode;
        ++result.episodes_run;
        if (done) {
          ++result.aborted_episodes;
        }
        reset_episode();
      }
      result.steps = step + 1;
      if (progress && (step + 1) % 10000 == 0) {
        progress({step + 1, episode, last_return});
      }
    }
  } catch (const TrainingFault &) {
    ddpg::save_checkpoint(agent, out_dir / "checkpoint_fault.txt");
    throw;
  }

  ddpg::save_checkpoint(agent, result.checkpoint);
  return result;
}

DetachedPolicy::DetachedPolicy(ddpg::Mlp actor, ObservationConfig config)
: actor_(std::move(actor)), config_(config)
{
  if (actor_.input_size() != observation_size(config_)) {
    throw CheckpointError("actor expects " + std::to_string(actor_.input_size()) +
      " inputs but the observation has " + std::to_string(observation_size(config_)));
  }
}

double DetachedPolicy::act(
  const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection)
{
  const std::vector<double> obs =
    normalize_observation(build_observation(state, track, projection, config_), config_);
  return act_on(obs);
}

double DetachedPolicy::act_on(std::span<const double> normalized_observation) const
{
  return ddpg::actor_forward(actor_, normalized_observation);
}

DetachedPolicy detach_demo(const std::filesystem::path & checkpoint, const ObservationConfig & config)
{
  ddpg::Checkpoint ck = ddpg::load_checkpoint(checkpoint, observation_size(config));
  return DetachedPolicy(std::move(ck.actor), config);
}

}  // namespace pathlab::training
