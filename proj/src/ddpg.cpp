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

#include "pathlab/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pathlab/error.hpp"

namespace pathlab::ddpg
{
namespace
{

constexpr const char * kMagic = "pathlab-ddpg-checkpoint";
constexpr int kVersion = 1;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v)
{
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

// ---------------------------------------------------------------------------
// Mlp

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output, double scale, double offset)
: sizes_(std::move(layer_sizes)), output_(output), scale_(scale), offset_(offset)
{
  if (sizes_.size() < 2) {
    throw ParameterError("network needs at least an input and an output layer");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
      throw ParameterError("network layer sizes must be positive");
    }
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

void Mlp::init_fan_in(std::mt19937_64 & rng, double final_range)
{
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const bool last = l + 1 == layer_count();
    const double bound = last ? final_range : 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = weight(l);
    auto b = bias(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = dist(rng);
      }
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b(i) = dist(rng);
    }
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t layer) const
{
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const
{
  const auto rows = static_cast<std::size_t>(sizes_[layer + 1]);
  const auto cols = static_cast<std::size_t>(sizes_[layer]);
  return {params_.data() + offsets_[layer] + rows * cols, sizes_[layer + 1]};
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(std::size_t layer)
{
  return {params_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t layer)
{
  const auto rows = static_cast<std::size_t>(sizes_[layer + 1]);
  const auto cols = static_cast<std::size_t>(sizes_[layer]);
  return {params_.data() + offsets_[layer] + rows * cols, sizes_[layer + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd & input) const
{
  Cache scratch;
  return forward(input, scratch);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd & input, Cache & cache) const
{
  if (input.rows() != input_size()) {
    throw ParameterError("network input has " + std::to_string(input.rows()) +
      " rows, expected " + std::to_string(input_size()));
  }
  cache.inputs.resize(layer_count());
  cache.pre.resize(layer_count());
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    cache.inputs[l] = a;
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    cache.pre[l] = z;
    if (l + 1 < layer_count()) {
      a = z.cwiseMax(0.0);
    } else if (output_ == OutputActivation::kTanh) {
      a = (offset_ + scale_ * z.array().tanh()).matrix();
    } else {
      a = z;
    }
  }
  return a;
}

Eigen::MatrixXd Mlp::backward(
  const Cache & cache, const Eigen::MatrixXd & d_output, Eigen::VectorXd & grad) const
{
  if (grad.size() != params_.size()) {
    grad = Eigen::VectorXd::Zero(params_.size());
  }
  const std::size_t last = layer_count() - 1;
  Eigen::MatrixXd dz = d_output;
  if (output_ == OutputActivation::kTanh) {
    const Eigen::ArrayXXd t = cache.pre[last].array().tanh();
    dz = (d_output.array() * scale_ * (1.0 - t * t)).matrix();
  }
  for (std::size_t l = layer_count(); l-- > 0;) {
    const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes_[l]);
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + rows * cols, rows);
    gw.noalias() += dz * cache.inputs[l].transpose();
    gb += dz.rowwise().sum();
    Eigen::MatrixXd da = weight(l).transpose() * dz;
    if (l == 0) {
      return da;
    }
    dz = (da.array() * (cache.pre[l - 1].array() > 0.0).cast<double>()).matrix();
  }
  return {};
}

double actor_forward(const Mlp & actor, std::span<const double> observation)
{
  return actor.forward(as_vector(observation))(0, 0);
}

double critic_forward(const Mlp & critic, std::span<const double> observation, double action)
{
  Eigen::VectorXd in(static_cast<Eigen::Index>(observation.size()) + 1);
  in.head(static_cast<Eigen::Index>(observation.size())) = as_vector(observation);
  in(in.size() - 1) = action;
  return critic.forward(in)(0, 0);
}

// ---------------------------------------------------------------------------
// Replay buffer

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim)
: capacity_(capacity), obs_dim_(obs_dim)
{
  if (capacity_ == 0 || obs_dim_ < 1) {
    throw ParameterError("replay buffer needs positive capacity and observation size");
  }
  const auto cap = static_cast<Eigen::Index>(capacity_);
  s_.resize(obs_dim_, cap);
  s_next_.resize(obs_dim_, cap);
  a_.resize(cap);
  r_.resize(cap);
  done_.resize(cap);
}

void ReplayBuffer::add(const Transition & t)
{
  add(t.s, t.a, t.r, t.s_next, t.done);
}

void ReplayBuffer::add(
  std::span<const double> s, double a, double r, std::span<const double> s_next, bool done)
{
  if (static_cast<int>(s.size()) != obs_dim_ || static_cast<int>(s_next.size()) != obs_dim_) {
    throw ParameterError("transition observation size does not match the replay buffer");
  }
  const auto slot = static_cast<Eigen::Index>(head_);
  s_.col(slot) = as_vector(s);
  s_next_.col(slot) = as_vector(s_next);
  a_(slot) = a;
  r_(slot) = r;
  done_(slot) = done ? 1.0 : 0.0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  ++inserted_;
}

Transition ReplayBuffer::at(std::size_t i) const
{
  if (i >= size_) {
    throw ParameterError("replay buffer index out of range");
  }
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  const auto slot = static_cast<Eigen::Index>((oldest + i) % capacity_);
  Transition t;
  t.s.assign(s_.col(slot).data(), s_.col(slot).data() + obs_dim_);
  t.s_next.assign(s_next_.col(slot).data(), s_next_.col(slot).data() + obs_dim_);
  t.a = a_(slot);
  t.r = r_(slot);
  t.done = done_(slot) != 0.0;
  return t;
}

std::vector<std::size_t> ReplayBuffer::sample_slots(std::size_t n, std::mt19937_64 & rng) const
{
  if (size_ == 0) {
    throw ParameterError("cannot sample from an empty replay buffer");
  }
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> slots(n);
  for (auto & s : slots) {
    s = pick(rng);
  }
  return slots;
}

Batch ReplayBuffer::sample(std::size_t n, std::mt19937_64 & rng) const
{
  const auto slots = sample_slots(n, rng);
  return gather(slots);
}

Batch ReplayBuffer::gather(std::span<const std::size_t> slots) const
{
  const auto n = static_cast<Eigen::Index>(slots.size());
  Batch b;
  b.s.resize(obs_dim_, n);
  b.s_next.resize(obs_dim_, n);
  b.a.resize(n);
  b.r.resize(n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto slot = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(j)]);
    b.s.col(j) = s_.col(slot);
    b.s_next.col(j) = s_next_.col(slot);
    b.a(j) = a_(slot);
    b.r(j) = r_(slot);
    b.done(j) = done_(slot);
  }
  return b;
}

// ---------------------------------------------------------------------------
// Noise

OuNoise::OuNoise(double theta, double sigma, double mu, double x0)
: theta_(theta), sigma_(sigma), mu_(mu), x0_(x0), x_(x0)
{
  if (theta_ < 0.0 || theta_ > 1.0 || sigma_ < 0.0) {
    throw ParameterError("OU noise needs theta in [0, 1] and sigma >= 0");
  }
}

double OuNoise::step(std::mt19937_64 & rng)
{
  const double eta = normal_(rng);
  x_ = x_ + theta_ * (mu_ - x_) + sigma_ * eta;
  return x_;
}

void OuNoise::set_sigma(double sigma)
{
  if (sigma < 0.0) {
    throw ParameterError("noise sigma must be non-negative");
  }
  sigma_ = sigma;
}

ExplorationNoise::ExplorationNoise(Kind kind, double theta, double sigma)
: kind_(kind), ou_(theta, sigma)
{
}

double ExplorationNoise::sample(std::mt19937_64 & rng)
{
  if (kind_ == Kind::kGaussian) {
    return ou_.sigma() * normal_(rng);
  }
  return ou_.step(rng);
}

void ExplorationNoise::set_sigma(double sigma)
{
  ou_.set_sigma(sigma);
}

double act_with_noise(
  const Mlp & actor, std::span<const double> observation, ExplorationNoise & noise,
  std::mt19937_64 & rng, double low, double high)
{
  const double mu = actor_forward(actor, observation);
  return std::clamp(mu + noise.sample(rng), low, high);
}

// ---------------------------------------------------------------------------
// Optimizer

Optimizer::Optimizer(OptimizerConfig config, Eigen::Index size)
: config_(config), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size))
{
}

void Optimizer::step(Eigen::VectorXd & params, const Eigen::VectorXd & grad, double lr)
{
  ++steps_;
  if (config_.kind == OptimizerConfig::Kind::kMomentum) {
    m_ = config_.momentum * m_ + grad;
    params -= lr * m_;
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseProduct(grad);
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
}

void Optimizer::restore(std::uint64_t steps, Eigen::VectorXd m, Eigen::VectorXd v)
{
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw CheckpointError("optimizer state size mismatch");
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

// ---------------------------------------------------------------------------
// Losses and updates

void DdpgParams::validate() const
{
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ParameterError("gamma must lie in [0, 1)");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ParameterError("rho must lie in [0, 1]");
  }
  if (batch_size < 1 || buffer_capacity < 1) {
    throw ParameterError("batch size and buffer capacity must be positive");
  }
  if (!(action_low < action_high)) {
    throw ParameterError("action bounds must satisfy low < high");
  }
  if (hidden.empty()) {
    throw ParameterError("networks need at least one hidden layer");
  }
}

Eigen::VectorXd compute_targets(
  const Batch & batch, const Mlp & actor_target, const Mlp & critic_target, double gamma)
{
  const Eigen::MatrixXd a_next = actor_target.forward(batch.s_next);
  Eigen::MatrixXd critic_in(batch.s_next.rows() + 1, batch.s_next.cols());
  critic_in.topRows(batch.s_next.rows()) = batch.s_next;
  critic_in.bottomRows(1) = a_next;
  const Eigen::VectorXd q_next = critic_target.forward(critic_in).row(0).transpose();
  return batch.r.array() + gamma * (1.0 - batch.done.array()) * q_next.array();
}

double critic_loss_and_grad(
  const Mlp & critic, const Eigen::MatrixXd & s, const Eigen::RowVectorXd & a,
  const Eigen::VectorXd & y, Eigen::VectorXd * grad)
{
  const auto n = static_cast<double>(s.cols());
  Eigen::MatrixXd in(s.rows() + 1, s.cols());
  in.topRows(s.rows()) = s;
  in.bottomRows(1) = a;
  Mlp::Cache cache;
  const Eigen::RowVectorXd q = critic.forward(in, cache);
  const Eigen::RowVectorXd err = q - y.transpose();
  const double loss = err.squaredNorm() / n;
  if (grad != nullptr) {
    *grad = Eigen::VectorXd::Zero(critic.params().size());
    critic.backward(cache, 2.0 * err / n, *grad);
  }
  return loss;
}

double actor_loss_and_grad(
  const Mlp & actor, const Mlp & critic, const Eigen::MatrixXd & s, Eigen::VectorXd * grad)
{
  const auto n = static_cast<double>(s.cols());
  Mlp::Cache actor_cache;
  const Eigen::MatrixXd a = actor.forward(s, actor_cache);
  Eigen::MatrixXd in(s.rows() + 1, s.cols());
  in.topRows(s.rows()) = s;
  in.bottomRows(1) = a;
  Mlp::Cache critic_cache;
  const Eigen::RowVectorXd q = critic.forward(in, critic_cache);
  const double loss = -q.sum() / n;
  if (grad != nullptr) {
    Eigen::VectorXd critic_scratch = Eigen::VectorXd::Zero(critic.params().size());
    const Eigen::MatrixXd d_in =
      critic.backward(critic_cache, Eigen::RowVectorXd::Constant(s.cols(), -1.0 / n), critic_scratch);
    *grad = Eigen::VectorXd::Zero(actor.params().size());
    actor.backward(actor_cache, d_in.bottomRows(1), *grad);
  }
  return loss;
}

void polyak_update(Mlp & target, const Mlp & main, double rho)
{
  target.params() = rho * target.params() + (1.0 - rho) * main.params();
}

Agent::Agent(int obs_dim, const DdpgParams & params, std::uint64_t seed)
: obs_dim_(obs_dim), params_(params)
{
  params_.validate();
  if (obs_dim_ < 1) {
    throw ParameterError("observation size must be positive");
  }
  std::vector<int> actor_sizes{obs_dim_};
  std::vector<int> critic_sizes{obs_dim_ + 1};
  for (int h : params_.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(1);
  critic_sizes.push_back(1);
  const double scale = 0.5 * (params_.action_high - params_.action_low);
  const double offset = 0.5 * (params_.action_high + params_.action_low);
  actor_ = Mlp(actor_sizes, OutputActivation::kTanh, scale, offset);
  critic_ = Mlp(critic_sizes, OutputActivation::kIdentity);
  std::mt19937_64 rng(seed);
  actor_.init_fan_in(rng, params_.final_layer_init);
  critic_.init_fan_in(rng, params_.final_layer_init);
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_opt_ = Optimizer(params_.optimizer, actor_.params().size());
  critic_opt_ = Optimizer(params_.optimizer, critic_.params().size());
}

UpdateResult Agent::update(const Batch & batch, double actor_lr, double critic_lr)
{
  const Eigen::VectorXd y = compute_targets(batch, actor_target_, critic_target_, params_.gamma);

  Eigen::VectorXd critic_grad;
  UpdateResult out;
  out.critic_loss = critic_loss_and_grad(critic_, batch.s, batch.a, y, &critic_grad);
  if (!std::isfinite(out.critic_loss) || !critic_grad.allFinite()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "non-finite critic loss %g (max |y| = %g, batch %ld)",
      out.critic_loss, y.cwiseAbs().maxCoeff(), static_cast<long>(batch.size()));
    throw TrainingFault(buf);
  }
  critic_opt_.step(critic_.params(), critic_grad, critic_lr);

  Eigen::VectorXd actor_grad;
  out.actor_loss = actor_loss_and_grad(actor_, critic_, batch.s, &actor_grad);
  if (!std::isfinite(out.actor_loss) || !actor_grad.allFinite()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "non-finite actor loss %g (critic loss %g)", out.actor_loss,
      out.critic_loss);
    throw TrainingFault(buf);
  }
  actor_opt_.step(actor_.params(), actor_grad, actor_lr);

  polyak_update(critic_target_, critic_, params_.rho);
  polyak_update(actor_target_, actor_, params_.rho);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace
{

void write_vector(std::ostream & out, const char * tag, const Eigen::VectorXd & v)
{
  out << tag << ' ' << v.size();
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", v(i));
    out << buf;
  }
  out << '\n';
}

void write_network(std::ostream & out, const char * name, const Mlp & net)
{
  out << "network " << name << ' '
      << (net.output_activation() == OutputActivation::kTanh ? "tanh" : "identity");
  char buf[80];
  std::snprintf(buf, sizeof(buf), " %.17g %.17g", net.output_scale(), net.output_offset());
  out << buf << '\n';
  out << "layers " << net.layer_count() + 1;
  for (int s : net.layer_sizes()) {
    out << ' ' << s;
  }
  out << '\n';
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weight(l);
    out << "weights " << w.rows() << ' ' << w.cols();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), " %.17g", w(i, j));
        out << buf;
      }
    }
    out << '\n';
    write_vector(out, "bias", net.bias(l));
  }
}

class Reader
{
public:
  Reader(std::istream & in, std::string path) : in_(in), path_(std::move(path)) {}

  void expect(const std::string & word)
  {
    std::string got;
    if (!(in_ >> got) || got != word) {
      fail("expected '" + word + "'" + (got.empty() ? std::string(" (file truncated)") : ", found '" + got + "'"));
    }
  }

  std::string word()
  {
    std::string w;
    if (!(in_ >> w)) {
      fail("unexpected end of file");
    }
    return w;
  }

  template<typename T>
  T number()
  {
    T v{};
    if (!(in_ >> v)) {
      fail("unexpected end of file or malformed number");
    }
    return v;
  }

  double real()
  {
    // operator>> rejects "inf"/"nan"; strtod keeps exact round trips of %.17g
    const std::string w = word();
    char * end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size()) {
      fail("malformed number '" + w + "'");
    }
    return v;
  }

  Eigen::VectorXd vector(const std::string & tag)
  {
    expect(tag);
    const auto n = number<Eigen::Index>();
    if (n < 0) {
      fail("negative vector length");
    }
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = real();
    }
    return v;
  }

  [[noreturn]] void fail(const std::string & what) const
  {
    throw CheckpointError(path_ + ": " + what);
  }

private:
  std::istream & in_;
  std::string path_;
};

Mlp read_network(Reader & r, const std::string & name)
{
  r.expect("network");
  r.expect(name);
  const std::string act = r.word();
  if (act != "tanh" && act != "identity") {
    r.fail("unknown output activation '" + act + "'");
  }
  const double scale = r.real();
  const double offset = r.real();
  r.expect("layers");
  const auto count = r.number<int>();
  if (count < 2 || count > 64) {
    r.fail("invalid layer count");
  }
  std::vector<int> sizes(static_cast<std::size_t>(count));
  for (auto & s : sizes) {
    s = r.number<int>();
    if (s < 1) {
      r.fail("invalid layer size");
    }
  }
  Mlp net(sizes, act == "tanh" ? OutputActivation::kTanh : OutputActivation::kIdentity, scale, offset);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    r.expect("weights");
    const auto rows = r.number<Eigen::Index>();
    const auto cols = r.number<Eigen::Index>();
    auto w = net.weight(l);
    if (rows != w.rows() || cols != w.cols()) {
      r.fail("weight block shape does not match layer sizes");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        w(i, j) = r.real();
      }
    }
    const Eigen::VectorXd b = r.vector("bias");
    if (b.size() != net.bias(l).size()) {
      r.fail("bias length does not match layer size");
    }
    net.bias(l) = b;
  }
  return net;
}

}  // namespace

void save_checkpoint(const Agent & agent, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw CheckpointError("cannot write checkpoint " + path.string());
  }
  out << kMagic << ' ' << kVersion << '\n';
  out << "obs_dim " << agent.obs_dim() << '\n';
  out << "optimizer "
      << (agent.params().optimizer.kind == OptimizerConfig::Kind::kAdam ? "adam" : "momentum") << '\n';
  write_network(out, "actor", agent.actor());
  write_network(out, "critic", agent.critic());
  write_network(out, "actor_target", agent.actor_target());
  write_network(out, "critic_target", agent.critic_target());
  out << "optimizer_state actor " << agent.actor_optimizer().steps() << '\n';
  write_vector(out, "m", agent.actor_optimizer().first_moment());
  write_vector(out, "v", agent.actor_optimizer().second_moment());
  out << "optimizer_state critic " << agent.critic_optimizer().steps() << '\n';
  write_vector(out, "m", agent.critic_optimizer().first_moment());
  write_vector(out, "v", agent.critic_optimizer().second_moment());
  out << "end\n";
  if (!out) {
    throw CheckpointError("failed writing checkpoint " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path & path, std::optional<int> expected_obs_dim)
{
  std::ifstream in(path);
  if (!in) {
    throw CheckpointError("cannot open checkpoint " + path.string());
  }
  Reader r(in, path.string());
  r.expect(kMagic);
  const int version = r.number<int>();
  if (version != kVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  r.expect("obs_dim");
  ck.obs_dim = r.number<int>();
  if (expected_obs_dim && *expected_obs_dim != ck.obs_dim) {
    r.fail("observation size mismatch: expected " + std::to_string(*expected_obs_dim) +
      ", found " + std::to_string(ck.obs_dim));
  }
  r.expect("optimizer");
  const std::string opt = r.word();
  if (opt != "adam" && opt != "momentum") {
    r.fail("unknown optimizer '" + opt + "'");
  }
  ck.optimizer = opt == "adam" ? OptimizerConfig::Kind::kAdam : OptimizerConfig::Kind::kMomentum;
  ck.actor = read_network(r, "actor");
  ck.critic = read_network(r, "critic");
  ck.actor_target = read_network(r, "actor_target");
  ck.critic_target = read_network(r, "critic_target");
  if (ck.actor.input_size() != ck.obs_dim || ck.critic.input_size() != ck.obs_dim + 1) {
    r.fail("network input sizes do not match obs_dim " + std::to_string(ck.obs_dim));
  }
  r.expect("optimizer_state");
  r.expect("actor");
  ck.actor_steps = r.number<std::uint64_t>();
  ck.actor_m = r.vector("m");
  ck.actor_v = r.vector("v");
  r.expect("optimizer_state");
  r.expect("critic");
  ck.critic_steps = r.number<std::uint64_t>();
  ck.critic_m = r.vector("m");
  ck.critic_v = r.vector("v");
  r.expect("end");
  return ck;
}

void restore(Agent & agent, const Checkpoint & ck)
{
  if (ck.obs_dim != agent.obs_dim() ||
      ck.actor.layer_sizes() != agent.actor().layer_sizes() ||
      ck.critic.layer_sizes() != agent.critic().layer_sizes())
  {
    throw CheckpointError("checkpoint network shapes do not match the agent");
  }
  agent.actor() = ck.actor;
  agent.critic() = ck.critic;
  agent.actor_target() = ck.actor_target;
  agent.critic_target() = ck.critic_target;
  agent.actor_optimizer().restore(ck.actor_steps, ck.actor_m, ck.actor_v);
  agent.critic_optimizer().restore(ck.critic_steps, ck.critic_m, ck.critic_v);
}

}  // namespace pathlab::ddpg
