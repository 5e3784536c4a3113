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

#ifndef PATHLAB__VEHICLE_HPP_
#define PATHLAB__VEHICLE_HPP_

#include <Eigen/Dense>

namespace pathlab::vehicle
{

/// Single-track vehicle parameters, SI units throughout.
struct VehicleParams
{
  double mass = 1500.0;             // [kg]
  double yaw_inertia = 2500.0;      // [kg m^2]
  double dist_front_axle = 1.2;     // l_f [m]
  double dist_rear_axle = 1.4;      // l_r [m]
  double cornering_front = 80000.0;   // C_f [N/rad]
  double cornering_rear = 100000.0;   // C_r [N/rad]
  double max_steer = 0.5236;        // road-wheel angle at normalized steering 1.0 [rad]
  double drive_gain = 6.0;          // [m/s^2 per unit throttle]
  double drag_coeff = 0.016;        // [1/m]
  double roll_resist = 0.1;         // [m/s^2]
  double brake_decel = 8.0;         // [m/s^2 per unit brake]

  double wheelbase() const { return dist_front_axle + dist_rear_axle; }
  /// Throws ParameterError unless every field is positive and finite.
  void validate() const;
};

/// Copy of `plant` with scaled mass and cornering stiffnesses, used as the MPC's inexact model.
VehicleParams mismatched(const VehicleParams & plant, double mass_scale, double stiffness_scale);

/// Steady speed reached under constant throttle on a straight road.
double steady_speed(const VehicleParams & params, double throttle);

struct VehicleState
{
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;        // (-pi, pi]
  double speed = 0.0;      // >= 0
  double side_slip = 0.0;  // beta
  double yaw_rate = 0.0;
  double steering = 0.0;   // normalized, [-1, 1]

  bool finite() const;
};

enum class SteeringMode { kAngle, kRate };

inline constexpr double kMaxSteeringRate = 1.5708;  // [1/s], normalized steering per second

/// Plant input. The factories clamp every field into its admissible range.
struct ControlCommand
{
  SteeringMode mode = SteeringMode::kAngle;
  double steering = 0.0;       // kAngle: normalized [-1, 1]
  double steering_rate = 0.0;  // kRate: [-kMaxSteeringRate, kMaxSteeringRate]
  double throttle = 0.0;       // [0, 1]
  double brake = 0.0;          // [0, 1]

  static ControlCommand angle(double steering, double throttle, double brake = 0.0);
  static ControlCommand rate(double steering_rate, double throttle, double brake = 0.0);
};

/// Below this speed the lateral dynamics switch to kinematic-bicycle relations.
inline constexpr double kKinematicSpeed = 0.5;

/**
 * @brief Advances the nonlinear single-track plant by dt.
 *
 * Linear tires, RK4 with at least `substeps` internal steps (more at low speed
 * where the slip dynamics get stiff). In kRate mode the steering is first
 * integrated and clamped, then held for the step.
 */
VehicleState step_plant(
  const VehicleState & state, const ControlCommand & command, const VehicleParams & params,
  double dt, int substeps = 5);

/// Lateral LTI model with state [y, beta, psi, psi_dot] and physical steer angle as input.
struct LinearModel
{
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  double v_nominal = 0.0;
  double max_steer = 0.0;

  // Filled by discretize().
  Eigen::Matrix4d ad = Eigen::Matrix4d::Identity();
  Eigen::Vector4d bd = Eigen::Vector4d::Zero();
  double dt = 0.0;
};

LinearModel linear_single_track(const VehicleParams & params, double v_nominal);

/// Zero-order-hold discretization of `model` at step dt.
LinearModel discretize(LinearModel model, double dt);

/**
 * @brief Zero-order hold for a general (A, B) pair.
 *
 * Exponentiates the augmented matrix [[A, B], [0, 0]] * dt with scaling and
 * squaring; the Taylor series stops once a term's norm drops below 1e-12.
 */
void zoh_discretize(
  const Eigen::MatrixXd & a, const Eigen::MatrixXd & b, double dt, Eigen::MatrixXd & ad,
  Eigen::MatrixXd & bd);

}  // namespace pathlab::vehicle

#endif  // PATHLAB__VEHICLE_HPP_
