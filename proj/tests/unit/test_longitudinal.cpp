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

#include <filesystem>
#include <fstream>
#include <random>

#include "pathlab/error.hpp"
#include "pathlab/longitudinal.hpp"
#include "pathlab/vehicle.hpp"

using namespace pathlab;
using namespace pathlab::longitudinal;

TEST_CASE("NEDC profile")
{
  const SpeedProfile p = nedc_profile();
  const auto & s = p.samples();
  REQUIRE(s.size() > 10);
  // idle removed: starts at rest and immediately ramps
  CHECK(s.front().t == 0.0);
  CHECK(s.front().v_ref == 0.0);
  CHECK(s[1].v_ref > 0.0);
  CHECK(p.max_speed() == doctest::Approx(120.0 / 3.6));
  CHECK(p.duration() == doctest::Approx(1180.0 - 11.0));

  // published cycle distance: 4 x 1.013 km urban + 6.955 km extra-urban
  double distance = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    distance += 0.5 * (s[i].v_ref + s[i - 1].v_ref) * (s[i].t - s[i - 1].t);
  }
  CHECK(distance == doctest::Approx(4.0 * 1013.0 + 6955.0).epsilon(0.01));

  // urban cycles repeat every 195 s
  for (double t = 0.0; t < 195.0; t += 0.5) {
    CHECK(p.at(t) == doctest::Approx(p.at(t + 195.0)));
  }
}

TEST_CASE("profile interpolation")
{
  const SpeedProfile p({{0.0, 0.0}, {10.0, 10.0}, {20.0, 4.0}});
  CHECK(p.at(10.0) == 10.0);
  CHECK(p.at(5.0) == doctest::Approx(5.0));
  CHECK(p.at(15.0) == doctest::Approx(7.0));
  CHECK(p.at(-1.0) == 0.0);
  CHECK(p.at(99.0) == 4.0);
  CHECK_THROWS_AS(SpeedProfile({{0.0, 1.0}, {0.0, 2.0}}), ParameterError);
  CHECK_THROWS_AS(SpeedProfile({{0.0, -1.0}}), ParameterError);
}

TEST_CASE("profile CSV")
{
  const auto path = std::filesystem::temp_directory_path() / "pathlab_profile.csv";
  std::ofstream(path) << "t,v\n0,0\n5,10\n10,10\n";
  const SpeedProfile p = load_profile(path);
  CHECK(p.at(2.5) == doctest::Approx(5.0));
  std::ofstream(path) << "t,v\n0,0\n0,10\n";
  CHECK_THROWS_AS(load_profile(path), FormatError);
}

TEST_CASE("speed PID")
{
  SUBCASE("on target")
  {
    SpeedPid pid;
    const Pedals out = pid.step(10.0, 10.0, 0.05);
    CHECK(out.throttle == 0.0);
    CHECK(out.brake == 0.0);
  }
  SUBCASE("saturation")
  {
    SpeedPid pid;
    const Pedals out = pid.step(0.0, 30.0, 0.05);
    CHECK(out.throttle == 1.0);
    CHECK(out.brake == 0.0);
    SpeedPid slow;
    const Pedals down = slow.step(30.0, 0.0, 0.05);
    CHECK(down.throttle == 0.0);
    CHECK(down.brake == 1.0);
  }
  SUBCASE("outputs stay exclusive and bounded")
  {
    SpeedPid pid;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> v(0.0, 35.0);
    for (int k = 0; k < 10000; ++k) {
      const Pedals out = pid.step(v(rng), v(rng), 0.05);
      CHECK(out.throttle >= 0.0);
      CHECK(out.throttle <= 1.0);
      CHECK(out.brake >= 0.0);
      CHECK(out.brake <= 1.0);
      CHECK(out.throttle * out.brake == 0.0);
    }
    CHECK(std::abs(pid.integral()) <= SpeedPidGains{}.integral_limit);
  }
}

TEST_CASE("closed-loop speed tracking")
{
  const vehicle::VehicleParams p;
  LongitudinalConfig cfg;
  cfg.mode = Mode::kProfileTracking;
  cfg.profile = {{0.0, 15.0}, {1000.0, 15.0}};
  LongitudinalController lon(cfg);
  vehicle::VehicleState s;
  double worst_late = 0.0;
  for (int k = 0; k < 1200; ++k) {
    const Pedals ped = lon.step(0.05 * k, s.speed, 0.05);
    s = vehicle::step_plant(s, vehicle::ControlCommand::angle(0.0, ped.throttle, ped.brake), p, 0.05);
    if (k >= 800) {
      worst_late = std::max(worst_late, std::abs(s.speed - 15.0));
    }
  }
  CHECK(worst_late < 0.2);
}

TEST_CASE("constant throttle bypasses the PID")
{
  LongitudinalConfig cfg;
  cfg.constant_throttle = 0.6;
  LongitudinalController lon(cfg);
  for (double v : {0.0, 10.0, 40.0}) {
    const Pedals p = lon.step(3.0, v, 0.05);
    CHECK(p.throttle == 0.6);
    CHECK(p.brake == 0.0);
  }
  cfg.constant_throttle = 1.2;
  CHECK_THROWS_AS(LongitudinalController{cfg}, ParameterError);
}
