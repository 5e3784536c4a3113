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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "pathlab/config.hpp"
#include "pathlab/csv.hpp"
#include "pathlab/demo_training.hpp"
#include "pathlab/error.hpp"

using namespace pathlab;
using namespace pathlab::training;

namespace
{

std::string slurp(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LabConfig short_run(long steps)
{
  LabConfig c;
  c.train.total_steps = steps;
  c.train.warmup_steps = 100;
  c.train.episode_cap = 150;
  c.ddpg.batch_size = 32;
  return c;
}

}  // namespace

TEST_CASE("tracking reward")
{
  CHECK(step_reward(10.0, 0.0, 0.0) == 10.0);
  CHECK(step_reward(10.0, std::numbers::pi / 2, 0.0) == doctest::Approx(-10.0).epsilon(1e-12));
  const double r = step_reward(5.0, 0.1, 0.2);
  CHECK(r == doctest::Approx(3.476).epsilon(2e-4));
  CHECK(std::abs(r - (5.0 * std::cos(0.1) - 5.0 * std::sin(0.1) - 1.0)) < 1e-12);
  // sign of v, phi and d does not matter
  CHECK(step_reward(-5.0, -0.1, -0.2) == r);
}

TEST_CASE("change-penalty reward")
{
  CHECK(reward_change_penalty(3.0, 0.3, 0.3, 0.7, 1.0) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(std::abs(reward_change_penalty(0.0, 0.2, 0.0, 1.0, 1.0) + 0.02) < 1e-12);
  CHECK(reward_change_penalty(4.0, 0.9, -0.9, 0.5, 0.0) == 2.0);
}

TEST_CASE("imitation reward")
{
  CHECK(reward_demo(4.0, 0.25, 0.25, 0.6, 1.0) == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(std::abs(reward_demo(4.0, 0.35, 0.25, 1.0, 1.0) - 3.995) < 1e-12);
  CHECK(reward_demo(4.0, 0.9, -0.9, 1.0, 0.0) == 4.0);
}

TEST_CASE("adaptive coefficients")
{
  CHECK(sigmoid(0.0) == 0.5);
  const Coefficients eq = adaptive_coefficients(0.7, 0.7);
  CHECK(eq.c_track == 0.5);
  CHECK(eq.c_diff == 0.5);
  const Coefficients c = adaptive_coefficients(2.0, 0.0);
  const double s2 = 1.0 / (1.0 + std::exp(-2.0));
  CHECK(std::abs(c.c_track - s2 / (s2 + 0.5)) < 1e-12);
  CHECK(c.c_track == doctest::Approx(0.638).epsilon(1e-3));

  // property: normalized, strictly inside (0, 1), larger disagreement raises c_diff
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> track(-30.0, 30.0);
  std::uniform_real_distribution<double> diff(0.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const double rt = track(rng);
    const double rd = diff(rng);
    const Coefficients k = adaptive_coefficients(rt, rd);
    CHECK(std::abs(k.c_track + k.c_diff - 1.0) < 1e-12);
    CHECK(k.c_track > 0.0);
    CHECK(k.c_diff > 0.0);
    CHECK(k.c_track < 1.0);
    CHECK(k.c_diff < 1.0);
    CHECK(adaptive_coefficients(rt, rd + 0.5).c_diff >= k.c_diff);
  }
}

TEST_CASE("reward breakdown reconstructs in every mode")
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(-20.0, 20.0);
  std::uniform_real_distribution<double> a(-1.0, 1.0);
  std::uniform_real_distribution<double> w(0.0, 2.0);
  for (auto mode : {RewardMode::kBase, RewardMode::kChangePenalty, RewardMode::kDemoFixed, RewardMode::kDemoAdaptive}) {
    for (int i = 0; i < 500; ++i) {
      const RewardWeights weights{w(rng), w(rng), w(rng)};
      const double rt = r(rng);
      const double steer = a(rng);
      const double demo = a(rng);
      const RewardBreakdown b = compute_reward(mode, weights, rt, steer, a(rng), demo, steer);
      CHECK(b.mode == mode);
      CHECK(std::abs(b.total - b.reconstruct()) < 1e-12);
      if (mode == RewardMode::kDemoFixed || mode == RewardMode::kDemoAdaptive) {
        // the imitation term never adds reward; zero exactly at perfect imitation
        CHECK(b.total <= b.c_track * rt + 1e-12);
        const RewardBreakdown same = compute_reward(mode, weights, rt, steer, 0.0, steer, steer);
        CHECK(same.r_penalty == 0.0);
      }
      if (mode == RewardMode::kDemoAdaptive) {
        CHECK(std::abs(b.c_track + b.c_penalty - 1.0) < 1e-12);
      }
    }
  }
  const RewardBreakdown base = compute_reward(RewardMode::kBase, {}, 3.5, 0.1, -0.4, 0.7, 0.1);
  CHECK(base.total == 3.5);
}

TEST_CASE("demonstration gate")
{
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const GateResult never = gate_action(0.1, 0.9, 0.0, rng);
    CHECK(never.executed == 0.1);
    CHECK(never.source == ActionSource::kAgent);
    const GateResult always = gate_action(0.1, 0.9, 1.0, rng);
    CHECK(always.executed == 0.9);
    CHECK(always.source == ActionSource::kDemo);
    CHECK(always.agent == 0.1);
    CHECK(always.demo == 0.9);
  }
  const int n = 100000;
  int demo = 0;
  for (int i = 0; i < n; ++i) {
    demo += gate_action(0.0, 1.0, 0.3, rng).source == ActionSource::kDemo ? 1 : 0;
  }
  const double frac = static_cast<double>(demo) / n;
  const double sigma = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(frac - 0.3) < 0.01);
  CHECK(std::abs(frac - 0.3) < 3.0 * sigma);
}

TEST_CASE("demonstrated steering as a rate")
{
  CHECK(demo_action_transform(0.5, 0.4, 0.05) == vehicle::kMaxSteeringRate);
  CHECK(demo_action_transform(0.3, 0.4, 0.05) == -vehicle::kMaxSteeringRate);
  CHECK(demo_action_transform(0.4, 0.4, 0.05) == 0.0);
  CHECK(std::abs(demo_action_transform(0.42, 0.4, 0.05) - 0.4) < 1e-12);
}

TEST_CASE("p_action decay")
{
  CHECK(p_action_at(0, 0.3, 0.0, 1000) == 0.3);
  CHECK(p_action_at(500, 0.3, 0.0, 1000) == doctest::Approx(0.15));
  CHECK(p_action_at(1000, 0.3, 0.0, 1000) == 0.0);
  CHECK(p_action_at(5000, 0.3, 0.0, 1000) == 0.0);
  // no decay window keeps the starting probability
  CHECK(p_action_at(10, 0.3, 0.0, 0) == 0.3);
}

TEST_CASE("cyclical learning rate")
{
  LrSchedule s;
  s.eta_max0 = 1e-3;
  s.decay = 0.9;
  s.total_steps = 2000;
  CHECK(s.split() == 1000);
  for (long step = 0; step < 1000; ++step) {
    REQUIRE(cyclical_lr(step, s) == 1e-3);
  }
  CHECK(s.eta_max(1) == doctest::Approx(0.9e-3).epsilon(1e-12));
  CHECK(s.eta_min(1) == doctest::Approx(0.09e-3).epsilon(1e-12));
  CHECK(s.cycle_index(1000) == 0);
  CHECK(s.cycle_index(1031) == 0);
  CHECK(s.cycle_index(1032) == 1);

  // starts each cycle at the top, bottom at mid-cycle
  CHECK(cyclical_lr(1032, s) == doctest::Approx(s.eta_max(1)).epsilon(1e-12));
  CHECK(cyclical_lr(1032 + 16, s) == doctest::Approx(s.eta_min(1)).epsilon(1e-12));

  const double increment = (s.eta_max(0) - s.eta_min(0)) / 16.0;
  double prev = cyclical_lr(1000, s);
  for (long step = 1000; step < 2000; ++step) {
    const long k = s.cycle_index(step);
    const double eta = cyclical_lr(step, s);
    CHECK(eta >= s.eta_min(k) - 1e-18);
    CHECK(eta <= s.eta_max(k) + 1e-18);
    if (step > 1000 && (step - 1000) % 32 != 0) {
      CHECK(std::abs(eta - prev) <= increment + 1e-15);
    }
    prev = eta;
  }
}

TEST_CASE("observation layout")
{
  ObservationConfig cfg;
  cfg.lookahead = 10;
  CHECK(observation_size(cfg) == 23);
  cfg.action_mode = vehicle::SteeringMode::kRate;
  CHECK(observation_size(cfg) == 24);
  cfg.action_mode = vehicle::SteeringMode::kAngle;

  // on a straight, aligned and centred
  std::vector<track::Waypoint> line;
  for (int i = 0; i <= 40; ++i) {
    line.push_back({static_cast<double>(i), 0.0});
  }
  const track::Track straight(line, false);
  vehicle::VehicleState st;
  st.x = 5.3;
  st.speed = 8.0;
  const auto proj = track::project(straight, {st.x, st.y});
  const auto obs = build_observation(st, straight, proj, cfg);
  REQUIRE(obs.size() == 23u);
  for (int i = 0; i < 10; ++i) {
    CHECK(obs[2 * i + 1] == doctest::Approx(0.0));
    CHECK(obs[2 * i] > 0.0);
  }
  CHECK(obs[20] == 8.0);
  CHECK(obs[21] == doctest::Approx(0.0));
  CHECK(obs[22] == doctest::Approx(0.0));

  // near the end of an open track the last waypoint repeats
  st.x = 36.5;
  const auto end_obs = build_observation(st, straight, track::project(straight, {st.x, st.y}), cfg);
  REQUIRE(end_obs.size() == 23u);
  CHECK(end_obs[18] == doctest::Approx(40.0 - 36.5));
  CHECK(end_obs[16] == end_obs[18]);

  const auto norm = normalize_observation(obs, cfg);
  CHECK(norm[20] == doctest::Approx(8.0 / cfg.speed_scale));
}

TEST_CASE("observation is unchanged by translating the scene")
{
  const track::Track base = track::generate_circle(50.0, 1.0);
  std::vector<track::Waypoint> moved;
  const double dx = 123.4;
  const double dy = -56.7;
  for (const auto & w : base.waypoints()) {
    moved.push_back({w.x + dx, w.y + dy});
  }
  const track::Track shifted(moved, true);
  ObservationConfig cfg;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double s = std::abs(u(rng)) * base.length();
    const auto p = base.point_at_arc(s);
    vehicle::VehicleState a;
    a.x = p.x + 0.5 * u(rng);
    a.y = p.y + 0.5 * u(rng);
    a.yaw = std::numbers::pi * u(rng);
    a.speed = 10.0 + 5.0 * u(rng);
    a.side_slip = 0.05 * u(rng);
    vehicle::VehicleState b = a;
    b.x += dx;
    b.y += dy;
    const auto oa = build_observation(a, base, track::project(base, {a.x, a.y}), cfg);
    const auto ob = build_observation(b, shifted, track::project(shifted, {b.x, b.y}), cfg);
    REQUIRE(oa.size() == ob.size());
    for (std::size_t k = 0; k < oa.size(); ++k) {
      CHECK(std::abs(oa[k] - ob[k]) < 1e-9);
    }
  }
}

TEST_CASE("heading error definitions")
{
  track::PathProjection proj;
  proj.heading_ref = 0.3;
  proj.tangent_heading = 0.3;
  vehicle::VehicleState st;
  st.yaw = 0.35;
  st.side_slip = 0.02;
  CHECK(heading_error(st, proj, HeadingErrorDef::kPathTangent) == doctest::Approx(0.07));
  CHECK(heading_error(st, proj, HeadingErrorDef::kSideSlip) == doctest::Approx(0.02));
}

TEST_CASE("zero-step training writes the initial checkpoint")
{
  const auto dir = std::filesystem::path("train_zero");
  std::filesystem::remove_all(dir);
  const auto t = track::generate_circle(50.0, 1.0);
  const TrainResult r = train(short_run(0), t, dir, 1);
  CHECK(r.steps == 0);
  CHECK(std::filesystem::exists(r.checkpoint));
  CHECK(csv::read_table(r.metrics).rows.empty());
  const DetachedPolicy policy = detach_demo(r.checkpoint, ObservationConfig{});
  CHECK(policy.actor().input_size() == 23);
  ObservationConfig other;
  other.lookahead = 5;
  CHECK_THROWS_AS(detach_demo(r.checkpoint, other), CheckpointError);
}

TEST_CASE("short training run")
{
  const auto t = track::generate_circle(50.0, 1.0);
  const LabConfig cfg = short_run(600);
  std::filesystem::remove_all("train_a");
  std::filesystem::remove_all("train_b");
  const TrainResult a = train(cfg, t, "train_a", 11);
  const TrainResult b = train(cfg, t, "train_b", 11);
  CHECK(a.steps == 600);
  CHECK(slurp(a.metrics) == slurp(b.metrics));
  CHECK(slurp(a.checkpoint) == slurp(b.checkpoint));

  const csv::Table m = csv::read_table(a.metrics);
  REQUIRE(m.rows.size() == 600u);
  const auto ep = m.column("episode");
  const auto d = m.column("lateral_error");
  const auto ct = m.column("c_track");
  const auto cd = m.column("c_diff");
  const auto lr = m.column("lr");
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto & row = m.rows[i];
    CHECK(std::abs(row[ct] + row[cd] - 1.0) < 1e-12);
    CHECK(row[lr] > 0.0);
    // only the last step of an episode may leave the corridor
    if (std::abs(row[d]) > 1.5 && i + 1 < m.rows.size()) {
      CHECK(m.rows[i + 1][ep] != row[ep]);
    }
  }
  CHECK(std::filesystem::exists("train_a/fig_coefficients.csv"));
  CHECK(std::filesystem::exists("train_a/fig_actor_loss.csv"));
  CHECK(std::filesystem::exists(a.episodes));

  // detached policy is the bare actor, inside the steering bounds
  const DetachedPolicy policy = detach_demo(a.checkpoint, cfg.train.observation);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<double> obs(23);
  for (int i = 0; i < 200; ++i) {
    for (auto & v : obs) {
      v = n(rng);
    }
    const double out = policy.act_on(obs);
    CHECK(out == ddpg::actor_forward(policy.actor(), obs));
    CHECK(std::abs(out) <= 1.0);
  }
  std::vector<double> wrong(5, 0.0);
  CHECK_THROWS(policy.act_on(wrong));
}
