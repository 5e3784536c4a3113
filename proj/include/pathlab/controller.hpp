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

#ifndef PATHLAB__CONTROLLER_HPP_
#define PATHLAB__CONTROLLER_HPP_

#include <string>

#include "pathlab/track.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab
{

/// Common step interface shared by the MPC-PID demonstrator and the learned policy.
class LateralController
{
public:
  virtual ~LateralController() = default;

  virtual std::string name() const = 0;
  virtual vehicle::SteeringMode mode() const = 0;
  /// Clears per-episode state (integrators, previous errors).
  virtual void reset() = 0;
  /// Normalized steering in kAngle mode, steering rate in kRate mode.
  virtual double act(
    const vehicle::VehicleState & state, const track::Track & track,
    const track::PathProjection & projection) = 0;
};

}  // namespace pathlab

#endif  // PATHLAB__CONTROLLER_HPP_
