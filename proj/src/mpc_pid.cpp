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

#include "pathlab/mpc_pid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pathlab/angles.hpp"
#include "pathlab/error.hpp"

namespace pathlab::control
{
namespace
{

Eigen::VectorXd project_box(const Eigen::VectorXd & u, double lower, double upper)
{
  return u.cwiseMax(lower).cwiseMin(upper);
}

bool symmetric_psd(const Eigen::Matrix2d & m)
{
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12) {
    return false;
  }
  return m(0, 0) >= 0.0 && m(1, 1) >= 0.0 && m.determinant() >= -1e-12;
}

}  // namespace

void MpcConfig::validate() const
{
  if (horizon < 2) {
    throw ParameterError("MPC horizon must be at least 2");
  }
  if (!(dt > 0.0) || !(v_nominal > 0.0)) {
    throw ParameterError("MPC dt and v_nominal must be positive");
  }
  if (!symmetric_psd(q) || !symmetric_psd(p_term)) {
    throw ParameterError("MPC weights Q and P must be symmetric positive semidefinite");
  }
  if (!(r_input > 0.0)) {
    throw ParameterError("MPC input penalty r must be positive");
  }
  if (!(steer_min < steer_max) || qp_max_iters < 1 || !(qp_tol > 0.0)) {
    throw ParameterError("invalid MPC bounds or solver settings");
  }
}

std::vector<ReferencePoint> build_reference(
  const track::Track & track, const track::PathProjection & projection, double v_nominal,
  int horizon, double dt)
{
  const double c = std::cos(projection.tangent_heading);
  const double s = std::sin(projection.tangent_heading);
  std::vector<ReferencePoint> ref;
  ref.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  for (int k = 1; k <= horizon; ++k) {
    const track::Waypoint p = track.point_at_arc(projection.arc_position + v_nominal * dt * k);
    const double dx = p.x - projection.nearest.x;
    const double dy = p.y - projection.nearest.y;
    ref.push_back({c * dx + s * dy, -s * dx + c * dy});
  }
  return ref;
}

PathFrameState path_frame_state(
  const vehicle::VehicleState & state, const track::PathProjection & projection)
{
  const double h = projection.tangent_heading;
  const double c = std::cos(h);
  const double s = std::sin(h);
  const double dx = state.x - projection.nearest.x;
  const double dy = state.y - projection.nearest.y;
  PathFrameState out;
  out.longitudinal = c * dx + s * dy;
  out.lateral << -s * dx + c * dy, state.side_slip, normalize_angle(state.yaw - h), state.yaw_rate;
  return out;
}

CondensedQp build_condensed_qp(
  const PathFrameState & x0, std::span<const ReferencePoint> reference,
  const vehicle::LinearModel & model, const MpcConfig & config)
{
  const auto n = static_cast<Eigen::Index>(reference.size());
  if (n < 1) {
    throw ParameterError("MPC reference is empty");
  }
  if (!(model.dt > 0.0)) {
    throw ParameterError("MPC model is not discretized");
  }

  // Markov parameters g_m = C Ad^m Bd (scaled to normalized steering) and free response C Ad^k x0.
  Eigen::VectorXd markov(n);
  Eigen::VectorXd free_response(n);
  Eigen::Vector4d impulse = model.bd * model.max_steer;
  Eigen::Vector4d state = x0.lateral;
  for (Eigen::Index k = 0; k < n; ++k) {
    markov(k) = impulse(0);
    impulse = model.ad * impulse;
    state = model.ad * state;
    free_response(k) = state(0);
  }

  Eigen::MatrixXd su = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) {
      su(k, j) = markov(k - j);
    }
  }

  Eigen::VectorXd w_lat(n);
  Eigen::VectorXd lin(n);
  double constant = 0.0;
  {
    const Eigen::Vector2d e0(x0.longitudinal, x0.lateral(0));
    constant += e0.dot(config.q * e0);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Matrix2d & w = (k + 1 == n) ? config.p_term : config.q;
    const auto & r = reference[static_cast<std::size_t>(k)];
    const double ex = x0.longitudinal + model.v_nominal * model.dt * static_cast<double>(k + 1) - r.x;
    const double rho = free_response(k) - r.y;
    w_lat(k) = w(1, 1);
    lin(k) = w(1, 1) * rho + w(0, 1) * ex;
    constant += w(1, 1) * rho * rho + 2.0 * w(0, 1) * ex * rho + w(0, 0) * ex * ex;
  }

  CondensedQp qp;
  qp.h = 2.0 * (su.transpose() * w_lat.asDiagonal() * su);
  qp.h.diagonal().array() += 2.0 * config.r_input;
  qp.f = 2.0 * su.transpose() * lin;
  qp.constant = constant;
  return qp;
}

BoxQpResult solve_box_qp(
  const Eigen::MatrixXd & h, const Eigen::VectorXd & f, double lower, double upper,
  int max_iters, double tol, std::vector<double> * objective_trace)
{
  const Eigen::Index n = f.size();
  // Gershgorin bound on the largest eigenvalue
  const double lipschitz = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);

  auto objective = [&](const Eigen::VectorXd & u) { return 0.5 * u.dot(h * u) + f.dot(u); };

  BoxQpResult res;
  res.u = project_box(Eigen::VectorXd::Zero(n), lower, upper);
  Eigen::VectorXd grad = h * res.u + f;
  double obj = objective(res.u);
  double step = 1.0 / lipschitz;

  int it = 0;
  double pg_norm = (res.u - project_box(res.u - grad, lower, upper)).norm();
  while (it < max_iters && pg_norm >= tol) {
    Eigen::VectorXd candidate = project_box(res.u - step * grad, lower, upper);
    double cand_obj = objective(candidate);
    if (cand_obj > obj) {
      candidate = project_box(res.u - grad / lipschitz, lower, upper);
      cand_obj = objective(candidate);
      if (cand_obj > obj) {
        // rounding noise at the optimum
        candidate = res.u;
        cand_obj = obj;
      }
    }
    const Eigen::VectorXd s = candidate - res.u;
    const Eigen::VectorXd new_grad = h * candidate + f;
    const Eigen::VectorXd y = new_grad - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 1.0 / lipschitz;

    res.u = candidate;
    grad = new_grad;
    obj = cand_obj;
    ++it;
    if (objective_trace != nullptr) {
      objective_trace->push_back(obj);
    }
    pg_norm = (res.u - project_box(res.u - grad, lower, upper)).norm();
    if (s.squaredNorm() == 0.0 && pg_norm >= tol) {
      break;  // stalled in floating point
    }
  }
  res.iterations = it;
  res.objective = obj;
  res.projected_gradient_norm = pg_norm;
  res.converged = pg_norm < tol;
  return res;
}

MpcSolution solve_mpc(
  const PathFrameState & x0, std::span<const ReferencePoint> reference,
  const vehicle::LinearModel & model, const MpcConfig & config)
{
  if (!x0.lateral.allFinite() || !std::isfinite(x0.longitudinal)) {
    throw ControllerFault("non-finite MPC initial state");
  }
  const CondensedQp qp = build_condensed_qp(x0, reference, model, config);
  if (!qp.h.allFinite() || !qp.f.allFinite()) {
    throw ControllerFault("non-finite MPC QP data");
  }
  const BoxQpResult res =
    solve_box_qp(qp.h, qp.f, config.steer_min, config.steer_max, config.qp_max_iters, config.qp_tol);
  if (!res.u.allFinite()) {
    throw ControllerFault("MPC solver returned a non-finite sequence");
  }
  MpcSolution out;
  out.steering = res.u(0);
  out.sequence = res.u;
  out.objective = res.objective + qp.constant;
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

LateralPid::LateralPid(PidGains gains) : gains_(gains)
{
  if (!(gains_.integral_limit > 0.0)) {
    throw ParameterError("PID integral limit must be positive");
  }
}

double LateralPid::step(const track::PathProjection & projection, double dt)
{
  return step_error(projection.lateral_error, dt);
}

double LateralPid::step_error(double error, double dt)
{
  if (!(dt > 0.0)) {
    throw ParameterError("PID dt must be positive");
  }
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_limit, gains_.integral_limit);
  const double derivative = has_prev_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  has_prev_ = true;
  // left of the path (positive error) needs right (negative) steering
  return -(gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative);
}

void LateralPid::reset()
{
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

double blend(double u_mpc, double u_pid, const BlendWeights & weights)
{
  return std::clamp(weights.c_mpc * u_mpc + weights.c_pid * u_pid, -1.0, 1.0);
}

MpcPidController::MpcPidController(const MpcPidSettings & settings)
: settings_(settings),
  model_(vehicle::discretize(
    vehicle::linear_single_track(settings.model_params, settings.mpc.v_nominal), settings.mpc.dt)),
  pid_(settings.pid)
{
  settings_.mpc.validate();
  if (settings_.blend.c_mpc < 0.0 || settings_.blend.c_pid < 0.0) {
    throw ParameterError("blend weights must be non-negative");
  }
}

MpcPidController::Output MpcPidController::step(
  const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection)
{
  const auto start = std::chrono::steady_clock::now();
  const MpcConfig & cfg = settings_.mpc;
  const auto reference = build_reference(track, projection, cfg.v_nominal, cfg.horizon, cfg.dt);
  const MpcSolution sol = solve_mpc(path_frame_state(state, projection), reference, model_, cfg);

  Output out;
  out.u_mpc = sol.steering;
  out.u_pid = pid_.step(projection, cfg.dt);
  out.steering = blend(out.u_mpc, out.u_pid, settings_.blend);
  out.solve_time_s =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

vehicle::ControlCommand mpc_pid_step(
  MpcPidController & controller, const vehicle::VehicleState & state, const track::Track & track,
  const track::PathProjection & projection)
{
  return vehicle::ControlCommand::angle(controller.step(state, track, projection).steering, 0.0);
}

}  // namespace pathlab::control
