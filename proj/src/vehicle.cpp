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

#include "pathlab/vehicle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pathlab/angles.hpp"
#include "pathlab/error.hpp"

namespace pathlab::vehicle
{
namespace
{

// x, y, yaw, speed, side_slip, yaw_rate
using Vec6 = std::array<double, 6>;

struct Inputs
{
  double steer_rad;
  double throttle;
  double brake;
};

double longitudinal_accel(double v, const Inputs & u, const VehicleParams & p)
{
  double accel = p.drive_gain * u.throttle - p.drag_coeff * v * v - p.brake_decel * u.brake;
  if (v > 0.0) {
    accel -= p.roll_resist;
  }
  return accel;
}

Vec6 dynamic_rhs(const Vec6 & s, const Inputs & u, const VehicleParams & p)
{
  const double v = std::max(s[3], 0.0);
  const double beta = s[4];
  const double r = s[5];
  const double vx = v * std::cos(beta);
  const double vy = v * std::sin(beta);
  const double alpha_f = u.steer_rad - std::atan2(vy + p.dist_front_axle * r, vx);
  const double alpha_r = -std::atan2(vy - p.dist_rear_axle * r, vx);
  const double fy_f = p.cornering_front * alpha_f;
  const double fy_r = p.cornering_rear * alpha_r;
  const double v_safe = std::max(v, kKinematicSpeed);
  Vec6 d{};
  d[0] = v * std::cos(s[2] + beta);
  d[1] = v * std::sin(s[2] + beta);
  d[2] = r;
  d[3] = longitudinal_accel(v, u, p);
  d[4] = (fy_f * std::cos(u.steer_rad - beta) + fy_r * std::cos(beta)) / (p.mass * v_safe) - r;
  d[5] = (p.dist_front_axle * fy_f * std::cos(u.steer_rad) - p.dist_rear_axle * fy_r) / p.yaw_inertia;
  return d;
}

double kinematic_slip(double steer_rad, const VehicleParams & p)
{
  return std::atan(p.dist_rear_axle / p.wheelbase() * std::tan(steer_rad));
}

double kinematic_yaw_rate(double v, double steer_rad, const VehicleParams & p)
{
  return v * std::cos(kinematic_slip(steer_rad, p)) * std::tan(steer_rad) / p.wheelbase();
}

Vec6 kinematic_rhs(const Vec6 & s, const Inputs & u, const VehicleParams & p)
{
  const double v = std::max(s[3], 0.0);
  const double beta = kinematic_slip(u.steer_rad, p);
  Vec6 d{};
  d[0] = v * std::cos(s[2] + beta);
  d[1] = v * std::sin(s[2] + beta);
  d[2] = kinematic_yaw_rate(v, u.steer_rad, p);
  d[3] = longitudinal_accel(v, u, p);
  return d;
}

template<typename Rhs>
Vec6 rk4(const Vec6 & s, double h, Rhs && rhs)
{
  auto axpy = [](const Vec6 & x, double a, const Vec6 & y) {
    Vec6 out;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = x[i] + a * y[i];
    }
    return out;
  };
  const Vec6 k1 = rhs(s);
  const Vec6 k2 = rhs(axpy(s, 0.5 * h, k1));
  const Vec6 k3 = rhs(axpy(s, 0.5 * h, k2));
  const Vec6 k4 = rhs(axpy(s, h, k3));
  Vec6 out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

// Largest row sum of the linearized slip/yaw-rate block, an upper bound on its spectral radius.
double stiffness_bound(double v, const VehicleParams & p)
{
  const double cf = p.cornering_front;
  const double cr = p.cornering_rear;
  const double lf = p.dist_front_axle;
  const double lr = p.dist_rear_axle;
  const double row_beta = (cf + cr) / (p.mass * v) + std::abs((cr * lr - cf * lf) / (p.mass * v * v) - 1.0);
  const double row_yaw = std::abs(cr * lr - cf * lf) / p.yaw_inertia +
    (cf * lf * lf + cr * lr * lr) / (p.yaw_inertia * v);
  return std::max(row_beta, row_yaw);
}

}  // namespace

void VehicleParams::validate() const
{
  const double fields[] = {mass, yaw_inertia, dist_front_axle, dist_rear_axle, cornering_front,
    cornering_rear, max_steer, drive_gain, drag_coeff, roll_resist, brake_decel};
  for (double f : fields) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw ParameterError("vehicle parameters must be positive and finite");
    }
  }
}

VehicleParams mismatched(const VehicleParams & plant, double mass_scale, double stiffness_scale)
{
  VehicleParams out = plant;
  out.mass *= mass_scale;
  out.cornering_front *= stiffness_scale;
  out.cornering_rear *= stiffness_scale;
  out.validate();
  return out;
}

double steady_speed(const VehicleParams & params, double throttle)
{
  const double net = params.drive_gain * throttle - params.roll_resist;
  return net > 0.0 ? std::sqrt(net / params.drag_coeff) : 0.0;
}

bool VehicleState::finite() const
{
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(yaw) && std::isfinite(speed) &&
         std::isfinite(side_slip) && std::isfinite(yaw_rate) && std::isfinite(steering);
}

ControlCommand ControlCommand::angle(double steering, double throttle, double brake)
{
  ControlCommand c;
  c.mode = SteeringMode::kAngle;
  c.steering = std::clamp(steering, -1.0, 1.0);
  c.throttle = std::clamp(throttle, 0.0, 1.0);
  c.brake = std::clamp(brake, 0.0, 1.0);
  return c;
}

ControlCommand ControlCommand::rate(double steering_rate, double throttle, double brake)
{
  ControlCommand c;
  c.mode = SteeringMode::kRate;
  c.steering_rate = std::clamp(steering_rate, -kMaxSteeringRate, kMaxSteeringRate);
  c.throttle = std::clamp(throttle, 0.0, 1.0);
  c.brake = std::clamp(brake, 0.0, 1.0);
  return c;
}

VehicleState step_plant(
  const VehicleState & state, const ControlCommand & command, const VehicleParams & params,
  double dt, int substeps)
{
  if (!(dt > 0.0)) {
    throw ParameterError("plant step dt must be positive");
  }
  if (!state.finite()) {
    throw StateError("non-finite vehicle state passed to step_plant");
  }

  VehicleState next = state;
  if (command.mode == SteeringMode::kRate) {
    const double rate = std::clamp(command.steering_rate, -kMaxSteeringRate, kMaxSteeringRate);
    next.steering = std::clamp(state.steering + rate * dt, -1.0, 1.0);
  } else {
    next.steering = std::clamp(command.steering, -1.0, 1.0);
  }

  const Inputs u{
    next.steering * params.max_steer, std::clamp(command.throttle, 0.0, 1.0),
    std::clamp(command.brake, 0.0, 1.0)};

  Vec6 s{state.x, state.y, state.yaw, std::max(state.speed, 0.0), state.side_slip, state.yaw_rate};
  int remaining = std::max(substeps, 1);
  double t_left = dt;
  while (remaining > 0 && t_left > 0.0) {
    const double v = s[3];
    int needed = remaining;
    if (v >= kKinematicSpeed) {
      // keep h * |lambda| inside the RK4 stability region
      const int stable = static_cast<int>(std::ceil(t_left * stiffness_bound(v, params) / 2.5));
      needed = std::max(needed, stable);
    }
    const double h = t_left / static_cast<double>(needed);
    if (v < kKinematicSpeed) {
      s = rk4(s, h, [&](const Vec6 & x) { return kinematic_rhs(x, u, params); });
      const double v_new = std::max(s[3], 0.0);
      s[4] = kinematic_slip(u.steer_rad, params);
      s[5] = kinematic_yaw_rate(v_new, u.steer_rad, params);
    } else {
      s = rk4(s, h, [&](const Vec6 & x) { return dynamic_rhs(x, u, params); });
    }
    s[3] = std::max(s[3], 0.0);
    t_left -= h;
    remaining = needed - 1;
  }

  next.x = s[0];
  next.y = s[1];
  next.yaw = normalize_angle(s[2]);
  next.speed = s[3];
  next.side_slip = s[4];
  next.yaw_rate = s[5];
  if (!next.finite()) {
    throw StateError("plant integration produced a non-finite state");
  }
  return next;
}

LinearModel linear_single_track(const VehicleParams & params, double v_nominal)
{
  if (!(v_nominal > 0.0) || !std::isfinite(v_nominal)) {
    throw ParameterError("linear model needs v_nominal > 0");
  }
  params.validate();
  const double m = params.mass;
  const double iz = params.yaw_inertia;
  const double lf = params.dist_front_axle;
  const double lr = params.dist_rear_axle;
  const double cf = params.cornering_front;
  const double cr = params.cornering_rear;
  const double v = v_nominal;

  LinearModel model;
  model.v_nominal = v;
  model.max_steer = params.max_steer;
  // y_dot = v (psi + beta)
  model.a(0, 1) = v;
  model.a(0, 2) = v;
  model.a(1, 1) = -(cf + cr) / (m * v);
  model.a(1, 3) = (cr * lr - cf * lf) / (m * v * v) - 1.0;
  model.a(2, 3) = 1.0;
  model.a(3, 1) = (cr * lr - cf * lf) / iz;
  model.a(3, 3) = -(cf * lf * lf + cr * lr * lr) / (iz * v);
  model.b(1) = cf / (m * v);
  model.b(3) = cf * lf / iz;
  return model;
}

void zoh_discretize(
  const Eigen::MatrixXd & a, const Eigen::MatrixXd & b, double dt, Eigen::MatrixXd & ad,
  Eigen::MatrixXd & bd)
{
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * dt;
  aug.topRightCorner(n, m) = b * dt;

  const double norm = aug.lpNorm<Eigen::Infinity>();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  aug /= std::ldexp(1.0, squarings);

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n + m, n + m);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n + m, n + m);
  for (int k = 1; k < 64; ++k) {
    term = term * aug / static_cast<double>(k);
    if (term.lpNorm<Eigen::Infinity>() < 1e-12) {
      result += term;
      break;
    }
    result += term;
  }
  for (int i = 0; i < squarings; ++i) {
    result = result * result;
  }
  ad = result.topLeftCorner(n, n);
  bd = result.topRightCorner(n, m);
}

LinearModel discretize(LinearModel model, double dt)
{
  if (!(dt > 0.0)) {
    throw ParameterError("discretization step must be positive");
  }
  Eigen::MatrixXd ad;
  Eigen::MatrixXd bd;
  zoh_discretize(model.a, model.b, dt, ad, bd);
  model.ad = ad;
  model.bd = bd;
  model.dt = dt;
  return model;
}

}  // namespace pathlab::vehicle
