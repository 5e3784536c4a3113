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

#ifndef PATHLAB__MPC_PID_HPP_
#define PATHLAB__MPC_PID_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathlab/controller.hpp"
#include "pathlab/track.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab::control
{

struct MpcConfig
{
  int horizon = 20;
  double dt = 0.05;
  double v_nominal = 12.0;  // speed the internal LTI model is built for [m/s]
  // weights on the path-aligned (longitudinal, lateral) position error
  Eigen::Matrix2d q = Eigen::Vector2d(0.5, 5.0).asDiagonal();
  Eigen::Matrix2d p_term = 4.0 * Eigen::Matrix2d(Eigen::Vector2d(0.5, 5.0).asDiagonal());
  double r_input = 1.0;
  double steer_min = -1.0;
  double steer_max = 1.0;
  int qp_max_iters = 500;
  double qp_tol = 1e-8;

  void validate() const;
};

struct PidGains
{
  double kp = 0.15;
  double ki = 0.01;
  double kd = 0.3;
  double integral_limit = 2.0;  // bound on the error integral [m s]
};

struct BlendWeights
{
  double c_mpc = 0.8;
  double c_pid = 0.2;
};

/// Reference position in the path-aligned frame anchored at the current projection.
struct ReferencePoint
{
  double x = 0.0;  // along the path tangent
  double y = 0.0;  // to the left of it
};

/// `horizon` points spaced v_nominal * dt in arc length ahead of the projection.
std::vector<ReferencePoint> build_reference(
  const track::Track & track, const track::PathProjection & projection, double v_nominal,
  int horizon, double dt);

/// Lateral model state [y, beta, psi, psi_dot] in the frame used by build_reference.
struct PathFrameState
{
  Eigen::Vector4d lateral = Eigen::Vector4d::Zero();
  double longitudinal = 0.0;
};

PathFrameState path_frame_state(
  const vehicle::VehicleState & state, const track::PathProjection & projection);

/// min 0.5 u'Hu + f'u + constant over the steering sequence u.
struct CondensedQp
{
  Eigen::MatrixXd h;
  Eigen::VectorXd f;
  double constant = 0.0;

  double objective(const Eigen::VectorXd & u) const
  {
    return 0.5 * u.dot(h * u) + f.dot(u) + constant;
  }
};

/**
 * @brief Eliminates the dynamics by forward substitution.
 *
 * Stage weights Q apply to steps 1..N-1, P_term to step N, r_input to every
 * input; step 0 contributes only to the constant.
 */
CondensedQp build_condensed_qp(
  const PathFrameState & x0, std::span<const ReferencePoint> reference,
  const vehicle::LinearModel & model, const MpcConfig & config);

struct BoxQpResult
{
  Eigen::VectorXd u;
  int iterations = 0;
  double objective = 0.0;  // without the constant
  double projected_gradient_norm = 0.0;
  bool converged = false;
};

/**
 * @brief Projected gradient with Barzilai-Borwein steps for a box-constrained QP.
 *
 * H must be symmetric positive definite. A BB step that fails to decrease the
 * objective is replaced by the 1/L step, so the objective never increases.
 * When `objective_trace` is given it receives the objective after every iteration.
 */
BoxQpResult solve_box_qp(
  const Eigen::MatrixXd & h, const Eigen::VectorXd & f, double lower, double upper,
  int max_iters, double tol, std::vector<double> * objective_trace = nullptr);

struct MpcSolution
{
  double steering = 0.0;     // first input, normalized
  Eigen::VectorXd sequence;  // full optimal sequence
  double objective = 0.0;    // full cost including constants
  int iterations = 0;
  bool converged = false;
};

/// Receding-horizon solve. Throws ControllerFault on non-finite QP data.
MpcSolution solve_mpc(
  const PathFrameState & x0, std::span<const ReferencePoint> reference,
  const vehicle::LinearModel & model, const MpcConfig & config);

/// Positional PID on the signed lateral error; positive error steers right.
class LateralPid
{
public:
  explicit LateralPid(PidGains gains = {});

  double step(const track::PathProjection & projection, double dt);
  double step_error(double lateral_error, double dt);
  void reset();

  double integral() const { return integral_; }
  const PidGains & gains() const { return gains_; }

private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

/// c_mpc * u_mpc + c_pid * u_pid, clamped to [-1, 1].
double blend(double u_mpc, double u_pid, const BlendWeights & weights);

/// Everything the demonstrator needs besides the track.
struct MpcPidSettings
{
  MpcConfig mpc;
  PidGains pid;
  BlendWeights blend;
  vehicle::VehicleParams model_params;  // the MPC's (inexact) vehicle model
};

/// MPC blended with lateral PID feedback.
class MpcPidController : public LateralController
{
public:
  struct Output
  {
    double steering = 0.0;
    double u_mpc = 0.0;
    double u_pid = 0.0;
    double solve_time_s = 0.0;
  };

  explicit MpcPidController(const MpcPidSettings & settings);

  Output step(
    const vehicle::VehicleState & state, const track::Track & track,
    const track::PathProjection & projection);

  std::string name() const override { return "mpc-pid"; }
  vehicle::SteeringMode mode() const override { return vehicle::SteeringMode::kAngle; }
  void reset() override { pid_.reset(); }
  double act(
    const vehicle::VehicleState & state, const track::Track & track,
    const track::PathProjection & projection) override
  {
    return step(state, track, projection).steering;
  }

  const vehicle::LinearModel & model() const { return model_; }
  const MpcPidSettings & settings() const { return settings_; }

private:
  MpcPidSettings settings_;
  vehicle::LinearModel model_;
  LateralPid pid_;
};

/// Steering-only command from one MPC-PID step; throttle and brake stay zero.
vehicle::ControlCommand mpc_pid_step(
  MpcPidController & controller, const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection);

}  // namespace pathlab::control

#endif  // PATHLAB__MPC_PID_HPP_
