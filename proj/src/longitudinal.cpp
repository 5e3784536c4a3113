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

#include "pathlab/longitudinal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pathlab/csv.hpp"
#include "pathlab/error.hpp"

namespace pathlab::longitudinal
{
namespace
{

struct Knot
{
  double t;
  double kmh;
};

// One ECE-15 urban cycle, 195 s.
constexpr Knot kEce15[] = {
  {0, 0}, {11, 0}, {15, 15}, {23, 15}, {25, 10}, {28, 0}, {49, 0}, {54, 15}, {56, 15},
  {61, 32}, {85, 32}, {93, 10}, {96, 0}, {117, 0}, {122, 15}, {124, 15}, {133, 35},
  {135, 35}, {143, 50}, {155, 50}, {163, 35}, {176, 35}, {185, 10}, {188, 0}, {195, 0},
};

// Extra-urban cycle, 400 s.
constexpr Knot kEudc[] = {
  {0, 0}, {20, 0}, {25, 15}, {27, 15}, {36, 35}, {38, 35}, {46, 50}, {48, 50}, {61, 70},
  {111, 70}, {119, 50}, {188, 50}, {201, 70}, {251, 70}, {286, 100}, {316, 100}, {336, 120},
  {346, 120}, {362, 80}, {370, 50}, {380, 0}, {400, 0},
};

constexpr double kLeadingIdle = 11.0;

}  // namespace

SpeedProfile::SpeedProfile(std::vector<SpeedSample> samples) : samples_(std::move(samples))
{
  if (samples_.empty()) {
    throw ParameterError("speed profile is empty");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i].v_ref >= 0.0) || !std::isfinite(samples_[i].t)) {
      throw ParameterError("speed profile sample " + std::to_string(i) + " is invalid");
    }
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw ParameterError("speed profile times must be strictly increasing");
    }
  }
}

double SpeedProfile::at(double t) const
{
  if (t <= samples_.front().t) {
    return samples_.front().v_ref;
  }
  if (t >= samples_.back().t) {
    return samples_.back().v_ref;
  }
  auto it = std::upper_bound(
    samples_.begin(), samples_.end(), t, [](double v, const SpeedSample & s) { return v < s.t; });
  const SpeedSample & b = *it;
  const SpeedSample & a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return a.v_ref + w * (b.v_ref - a.v_ref);
}

double SpeedProfile::max_speed() const
{
  double m = 0.0;
  for (const auto & s : samples_) {
    m = std::max(m, s.v_ref);
  }
  return m;
}

SpeedProfile nedc_profile()
{
  std::vector<SpeedSample> samples;
  auto append = [&](double offset, const Knot & k) {
    const double t = offset + k.t - kLeadingIdle;
    if (t < 0.0) {
      return;
    }
    const double v = k.kmh / 3.6;
    if (!samples.empty() && samples.back().t == t) {
      return;  // cycle boundary shares its knot
    }
    samples.push_back({t, v});
  };
  for (int cycle = 0; cycle < 4; ++cycle) {
    for (const Knot & k : kEce15) {
      append(195.0 * cycle, k);
    }
  }
  for (const Knot & k : kEudc) {
    append(780.0, k);
  }
  return SpeedProfile(std::move(samples));
}

SpeedProfile load_profile(const std::filesystem::path & path)
{
  const csv::Table table = csv::read_table(path);
  const std::size_t ti = table.column("t");
  const std::size_t vi = table.column("v");
  std::vector<SpeedSample> samples;
  samples.reserve(table.rows.size());
  for (const auto & row : table.rows) {
    samples.push_back({row[ti], row[vi]});
  }
  try {
    return SpeedProfile(std::move(samples));
  } catch (const ParameterError & e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SpeedPid::SpeedPid(SpeedPidGains gains) : gains_(gains)
{
  if (!(gains_.integral_limit > 0.0)) {
    throw ParameterError("speed PID integral limit must be positive");
  }
}

Pedals SpeedPid::step(double v, double v_ref, double dt)
{
  if (!(dt > 0.0)) {
    throw ParameterError("speed PID dt must be positive");
  }
  const double error = v_ref - v;
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_limit, gains_.integral_limit);
  const double derivative = has_prev_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  has_prev_ = true;
  const double raw = gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
  Pedals out;
  if (raw > 0.0) {
    out.throttle = std::clamp(raw, 0.0, 1.0);
  } else if (raw < 0.0) {
    out.brake = std::clamp(-raw, 0.0, 1.0);
  }
  return out;
}

void SpeedPid::reset()
{
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

LongitudinalController::LongitudinalController(const LongitudinalConfig & config)
: config_(config),
  profile_(config.profile.empty() ? nedc_profile() : SpeedProfile(config.profile)),
  pid_(config.gains)
{
  if (config_.constant_throttle < 0.0 || config_.constant_throttle > 1.0) {
    throw ParameterError("constant throttle must lie in [0, 1]");
  }
}

Pedals LongitudinalController::step(double time, double v, double dt)
{
  if (config_.mode == Mode::kConstantThrottle) {
    return {config_.constant_throttle, 0.0};
  }
  return pid_.step(v, profile_.at(time), dt);
}

}  // namespace pathlab::longitudinal
