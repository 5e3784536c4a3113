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

#ifndef PATHLAB__DDPG_HPP_
#define PATHLAB__DDPG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pathlab::ddpg
{

enum class OutputActivation { kIdentity, kTanh };

/**
 * @brief Fully connected network, ReLU on hidden layers.
 *
 * Parameters live in one flat vector (per layer: W column-major, then b) so
 * optimizers and Polyak averaging work on plain vectors. Batches are passed
 * as matrices with one sample per column.
 */
class Mlp
{
public:
  struct Cache
  {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  };

  Mlp() = default;
  /// Output = offset + scale * tanh(z) for kTanh, z for kIdentity.
  Mlp(std::vector<int> layer_sizes, OutputActivation output, double scale = 1.0, double offset = 0.0);

  /// Uniform fan-in init; the last layer draws from [-final_range, final_range].
  void init_fan_in(std::mt19937_64 & rng, double final_range);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int> & layer_sizes() const { return sizes_; }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  OutputActivation output_activation() const { return output_; }
  double output_scale() const { return scale_; }
  double output_offset() const { return offset_; }

  Eigen::VectorXd & params() { return params_; }
  const Eigen::VectorXd & params() const { return params_; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  Eigen::MatrixXd forward(const Eigen::MatrixXd & input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd & input, Cache & cache) const;

  /// Adds dLoss/dparams into `grad` and returns dLoss/dinput.
  Eigen::MatrixXd backward(
    const Cache & cache, const Eigen::MatrixXd & d_output, Eigen::VectorXd & grad) const;

private:
  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's block in params_
  OutputActivation output_ = OutputActivation::kIdentity;
  double scale_ = 1.0;
  double offset_ = 0.0;
  Eigen::VectorXd params_;
};

/// Deterministic policy output for one observation.
double actor_forward(const Mlp & actor, std::span<const double> observation);
/// Q(s, a); the critic sees [s; a] as input.
double critic_forward(const Mlp & critic, std::span<const double> observation, double action);

struct Transition
{
  std::vector<double> s;
  double a = 0.0;
  double r = 0.0;
  std::vector<double> s_next;
  bool done = false;
};

struct Batch
{
  Eigen::MatrixXd s;       // obs_dim x B
  Eigen::RowVectorXd a;    // 1 x B
  Eigen::VectorXd r;       // B
  Eigen::MatrixXd s_next;  // obs_dim x B
  Eigen::VectorXd done;    // B, 0 or 1

  Eigen::Index size() const { return r.size(); }
};

/// Fixed-capacity ring buffer; evicts the oldest transition once full.
class ReplayBuffer
{
public:
  ReplayBuffer(std::size_t capacity, int obs_dim);

  void add(const Transition & t);
  void add(std::span<const double> s, double a, double r, std::span<const double> s_next, bool done);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t inserted() const { return inserted_; }

  /// i-th stored transition counting from the oldest.
  Transition at(std::size_t i) const;
  /// Ring slot picked for batch entry; exposed for sampling statistics.
  std::vector<std::size_t> sample_slots(std::size_t n, std::mt19937_64 & rng) const;
  Batch sample(std::size_t n, std::mt19937_64 & rng) const;
  Batch gather(std::span<const std::size_t> slots) const;

private:
  std::size_t capacity_;
  int obs_dim_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  std::uint64_t inserted_ = 0;
  Eigen::MatrixXd s_;
  Eigen::MatrixXd s_next_;
  Eigen::VectorXd a_;
  Eigen::VectorXd r_;
  Eigen::VectorXd done_;
};

/// Discrete Ornstein-Uhlenbeck process x <- x + theta (mu - x) + sigma eta.
class OuNoise
{
public:
  OuNoise(double theta, double sigma, double mu = 0.0, double x0 = 0.0);

  double step(std::mt19937_64 & rng);
  double value() const { return x_; }
  void reset() { x_ = x0_; }
  void set_sigma(double sigma);
  double theta() const { return theta_; }
  double sigma() const { return sigma_; }

private:
  double theta_;
  double sigma_;
  double mu_;
  double x0_;
  double x_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Exploration noise: OU by default, i.i.d. Gaussian with the same sigma as an option.
class ExplorationNoise
{
public:
  enum class Kind { kOrnsteinUhlenbeck, kGaussian };

  ExplorationNoise(Kind kind, double theta, double sigma);

  double sample(std::mt19937_64 & rng);
  void reset() { ou_.reset(); }
  void set_sigma(double sigma);
  double sigma() const { return ou_.sigma(); }

private:
  Kind kind_;
  OuNoise ou_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// clip(mu(s) + eps, low, high) with eps drawn from `noise`.
double act_with_noise(
  const Mlp & actor, std::span<const double> observation, ExplorationNoise & noise,
  std::mt19937_64 & rng, double low, double high);

struct OptimizerConfig
{
  enum class Kind { kMomentum, kAdam };

  Kind kind = Kind::kAdam;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Gradient-descent optimizer state for one flat parameter vector.
class Optimizer
{
public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, Eigen::Index size);

  void step(Eigen::VectorXd & params, const Eigen::VectorXd & grad, double lr);

  const OptimizerConfig & config() const { return config_; }
  std::uint64_t steps() const { return steps_; }
  const Eigen::VectorXd & first_moment() const { return m_; }
  const Eigen::VectorXd & second_moment() const { return v_; }
  void restore(std::uint64_t steps, Eigen::VectorXd m, Eigen::VectorXd v);

private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

struct DdpgParams
{
  double gamma = 0.99;
  double rho = 0.995;  // Polyak factor, weight on the old target
  std::size_t batch_size = 64;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double action_low = -1.0;
  double action_high = 1.0;
  std::vector<int> hidden = {64, 64};
  std::size_t buffer_capacity = 100000;
  OptimizerConfig optimizer;
  double final_layer_init = 3e-3;

  void validate() const;
};

/// y = r + gamma (1 - d) Q_targ(s', mu_targ(s')), elementwise over the batch.
Eigen::VectorXd compute_targets(
  const Batch & batch, const Mlp & actor_target, const Mlp & critic_target, double gamma);

/// Mean squared Bellman error and its gradient w.r.t. the critic parameters.
double critic_loss_and_grad(
  const Mlp & critic, const Eigen::MatrixXd & s, const Eigen::RowVectorXd & a,
  const Eigen::VectorXd & y, Eigen::VectorXd * grad);

/// -mean Q(s, mu(s)) and its gradient w.r.t. the actor parameters.
double actor_loss_and_grad(
  const Mlp & actor, const Mlp & critic, const Eigen::MatrixXd & s, Eigen::VectorXd * grad);

/// target <- rho * target + (1 - rho) * main
void polyak_update(Mlp & target, const Mlp & main, double rho);

struct UpdateResult
{
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // -mean Q
};

/// Actor, critic, their targets and optimizer state.
class Agent
{
public:
  Agent(int obs_dim, const DdpgParams & params, std::uint64_t seed);

  int obs_dim() const { return obs_dim_; }
  const DdpgParams & params() const { return params_; }

  double act(std::span<const double> observation) const { return actor_forward(actor_, observation); }

  /**
   * @brief One DDPG update on a batch: critic step against fixed targets, actor
   * step through the updated critic, then Polyak averaging of both targets.
   *
   * Throws TrainingFault when a loss or parameter becomes non-finite.
   */
  UpdateResult update(const Batch & batch, double actor_lr, double critic_lr);

  Mlp & actor() { return actor_; }
  Mlp & critic() { return critic_; }
  Mlp & actor_target() { return actor_target_; }
  Mlp & critic_target() { return critic_target_; }
  const Mlp & actor() const { return actor_; }
  const Mlp & critic() const { return critic_; }
  const Mlp & actor_target() const { return actor_target_; }
  const Mlp & critic_target() const { return critic_target_; }
  Optimizer & actor_optimizer() { return actor_opt_; }
  Optimizer & critic_optimizer() { return critic_opt_; }
  const Optimizer & actor_optimizer() const { return actor_opt_; }
  const Optimizer & critic_optimizer() const { return critic_opt_; }

private:
  int obs_dim_;
  DdpgParams params_;
  Mlp actor_;
  Mlp critic_;
  Mlp actor_target_;
  Mlp critic_target_;
  Optimizer actor_opt_;
  Optimizer critic_opt_;
};

/// Writes all four networks and both optimizer states as versioned text.
void save_checkpoint(const Agent & agent, const std::filesystem::path & path);

struct Checkpoint
{
  int obs_dim = 0;
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
  OptimizerConfig::Kind optimizer = OptimizerConfig::Kind::kAdam;
  std::uint64_t actor_steps = 0;
  std::uint64_t critic_steps = 0;
  Eigen::VectorXd actor_m, actor_v, critic_m, critic_v;
};

/// Throws CheckpointError on a malformed file or an observation-size mismatch.
Checkpoint load_checkpoint(
  const std::filesystem::path & path, std::optional<int> expected_obs_dim = std::nullopt);

/// Restores networks and optimizer state into an agent of matching shape.
void restore(Agent & agent, const Checkpoint & checkpoint);

}  // namespace pathlab::ddpg

#endif  // PATHLAB__DDPG_HPP_
