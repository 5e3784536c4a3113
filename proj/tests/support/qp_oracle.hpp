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

#ifndef PATHLAB_TESTS__QP_ORACLE_HPP_
#define PATHLAB_TESTS__QP_ORACLE_HPP_

// Reference solutions for the condensed MPC problem, built without the
// condensing code: the cost is evaluated by simulating the model forward and
// the quadratic is recovered from cost samples.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "pathlab/mpc_pid.hpp"
#include "pathlab/vehicle.hpp"

namespace pathlab::testing
{

struct MpcProblem
{
  control::PathFrameState x0;
  std::vector<control::ReferencePoint> reference;
  vehicle::LinearModel model;
  control::MpcConfig config;
};

/// Total MPC cost of a steering sequence by forward simulation.
inline double simulate_cost(const MpcProblem & p, const Eigen::VectorXd & u)
{
  const auto n = static_cast<Eigen::Index>(p.reference.size());
  Eigen::Vector4d x = p.x0.lateral;
  double cost = 0.0;
  const Eigen::Vector2d e0(p.x0.longitudinal, x(0));
  cost += e0.dot(p.config.q * e0);
  for (Eigen::Index k = 0; k < n; ++k) {
    x = p.model.ad * x + p.model.bd * (p.model.max_steer * u(k));
    const auto & r = p.reference[static_cast<std::size_t>(k)];
    const Eigen::Vector2d e(
      p.x0.longitudinal + p.model.v_nominal * p.model.dt * static_cast<double>(k + 1) - r.x, x(0) - r.y);
    const Eigen::Matrix2d & w = k + 1 == n ? p.config.p_term : p.config.q;
    cost += e.dot(w * e) + p.config.r_input * u(k) * u(k);
  }
  return cost;
}

struct DenseQp
{
  Eigen::MatrixXd h;
  Eigen::VectorXd f;
  double c = 0.0;

  double value(const Eigen::VectorXd & u) const { return 0.5 * u.dot(h * u) + f.dot(u) + c; }
};

/// Recovers H, f and the constant from cost evaluations at 0, e_i and e_i + e_j.
inline DenseQp identify_qp(const MpcProblem & p)
{
  const auto n = static_cast<Eigen::Index>(p.reference.size());
  DenseQp q;
  q.h.resize(n, n);
  q.f.resize(n);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  q.c = simulate_cost(p, zero);
  Eigen::VectorXd single(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    single(i) = simulate_cost(p, Eigen::VectorXd::Unit(n, i));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        const double minus = simulate_cost(p, -Eigen::VectorXd::Unit(n, i));
        q.h(i, i) = single(i) + minus - 2.0 * q.c;
      } else {
        const Eigen::VectorXd both = Eigen::VectorXd::Unit(n, i) + Eigen::VectorXd::Unit(n, j);
        q.h(i, j) = simulate_cost(p, both) - single(i) - single(j) + q.c;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    q.f(i) = single(i) - q.c - 0.5 * q.h(i, i);
  }
  q.h = 0.5 * (q.h + q.h.transpose());
  return q;
}

inline Eigen::VectorXd unconstrained_minimizer(const DenseQp & q)
{
  return q.h.ldlt().solve(-q.f);
}

/**
 * Exhaustive active-set search: every assignment of {free, lower, upper} to
 * the inputs, keeping the KKT-feasible candidate with the lowest cost.
 */
inline Eigen::VectorXd active_set_minimizer(const DenseQp & q, double lo, double hi)
{
  const auto n = q.f.size();
  long patterns = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    patterns *= 3;
  }
  Eigen::VectorXd best;
  double best_value = 1e300;
  for (long code = 0; code < patterns; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    long c = code;
    for (Eigen::Index i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
    }
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = state[static_cast<std::size_t>(i)];
      if (s == 0) {
        free.push_back(i);
      } else {
        u(i) = s == 1 ? lo : hi;
      }
    }
    if (!free.empty()) {
      const auto m = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd hf(m, m);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        rhs(a) = -q.f(free[a]);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (state[static_cast<std::size_t>(i)] != 0) {
            rhs(a) -= q.h(free[a], i) * u(i);
          }
        }
        for (Eigen::Index b = 0; b < m; ++b) {
          hf(a, b) = q.h(free[a], free[b]);
        }
      }
      const Eigen::VectorXd uf = hf.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) {
        u(free[a]) = uf(a);
      }
    }
    bool feasible = true;
    const Eigen::VectorXd g = q.h * u + q.f;
    for (Eigen::Index i = 0; i < n && feasible; ++i) {
      const int s = state[static_cast<std::size_t>(i)];
      if (s == 0) {
        feasible = u(i) >= lo - 1e-12 && u(i) <= hi + 1e-12;
      } else if (s == 1) {
        feasible = g(i) >= -1e-9;  // pushing further down would help otherwise
      } else {
        feasible = g(i) <= 1e-9;
      }
    }
    if (feasible && q.value(u) < best_value) {
      best_value = q.value(u);
      best = u;
    }
  }
  return best;
}

/// Random horizon-2..max problem on the default vehicle with a random reference.
inline MpcProblem random_problem(std::mt19937_64 & rng, int max_horizon, double reference_scale)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  std::uniform_int_distribution<int> horizon(2, max_horizon);
  MpcProblem p;
  const int n = horizon(rng);
  p.config.horizon = n;
  p.config.v_nominal = 5.0 + 10.0 * (u(rng) + 1.0);
  p.config.q = Eigen::Vector2d(pos(rng), 5.0 * pos(rng)).asDiagonal();
  p.config.p_term = Eigen::Vector2d(pos(rng), 5.0 * pos(rng)).asDiagonal();
  p.config.r_input = pos(rng);
  p.model = vehicle::discretize(vehicle::linear_single_track(vehicle::VehicleParams{}, p.config.v_nominal), p.config.dt);
  p.x0.longitudinal = 0.1 * u(rng);
  p.x0.lateral << 0.2 * u(rng) * reference_scale, 0.01 * u(rng), 0.05 * u(rng), 0.05 * u(rng);
  double y = 0.0;
  for (int k = 1; k <= n; ++k) {
    y += 0.3 * reference_scale * u(rng);
    p.reference.push_back({p.config.v_nominal * p.config.dt * k + 0.05 * u(rng), y});
  }
  return p;
}

}  // namespace pathlab::testing

#endif  // PATHLAB_TESTS__QP_ORACLE_HPP_
