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

#ifndef PATHLAB__LONGITUDINAL_HPP_
#define PATHLAB__LONGITUDINAL_HPP_

#include <filesystem>
#include <vector>

namespace pathlab::longitudinal
{

struct SpeedSample
{
  double t = 0.0;      // [s]
  double v_ref = 0.0;  // [m/s]
};

/// Piecewise-linear speed trace. Times strictly increasing, speeds non-negative.
class SpeedProfile
{
public:
  explicit SpeedProfile(std::vector<SpeedSample> samples);

  /// Linear interpolation; held constant outside the sampled range.
  double at(double t) const;
  double duration() const { return samples_.back().t - samples_.front().t; }
  double max_speed() const;
  const std::vector<SpeedSample> & samples() const { return samples_; }

private:
  std::vector<SpeedSample> samples_;
};

/// NEDC (4 x ECE-15 + EUDC) with the leading idle removed, in m/s.
SpeedProfile nedc_profile();

/// Reads a `t,v` CSV (seconds, m/s).
SpeedProfile load_profile(const std::filesystem::path & path);

struct SpeedPidGains
{
  double kp = 0.5;
  double ki = 0.05;
  double kd = 0.0;
  double integral_limit = 30.0;  // [m]
};

struct Pedals
{
  double throttle = 0.0;
  double brake = 0.0;
};

/// Speed-tracking PID; positive output drives the throttle, negative the brake.
class SpeedPid
{
public:
  explicit SpeedPid(SpeedPidGains gains = {});

  Pedals step(double v, double v_ref, double dt);
  void reset();
  double integral() const { return integral_; }

private:
  SpeedPidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

enum class Mode { kConstantThrottle, kProfileTracking };

/// Constant throttle, or PID tracking of a profile (NEDC unless replaced).
struct LongitudinalConfig
{
  Mode mode = Mode::kConstantThrottle;
  double constant_throttle = 0.4;
  SpeedPidGains gains;
  std::vector<SpeedSample> profile;  // empty = NEDC
};

/// Per-episode longitudinal controller.
class LongitudinalController
{
public:
  explicit LongitudinalController(const LongitudinalConfig & config);

  Pedals step(double time, double v, double dt);
  void reset() { pid_.reset(); }
  const LongitudinalConfig & config() const { return config_; }

private:
  LongitudinalConfig config_;
  SpeedProfile profile_;
  SpeedPid pid_;
};

}  // namespace pathlab::longitudinal

#endif  // PATHLAB__LONGITUDINAL_HPP_
