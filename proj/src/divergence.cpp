// Copyright 2026 the igboltz authors
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

#include "igb/divergence.hpp"

#include <algorithm>
#include <cmath>

namespace igb {

const std::vector<double>& FlowTrace::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return series[i];
  }
  throw ConfigError("FlowTrace: no column named " + name);
}

void FlowTrace::validate() const {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw NumericalError("FlowTrace: times not strictly increasing");
    }
  }
  if (!states.empty() && states.size() != times.size()) {
    throw NumericalError("FlowTrace: one state per time violated");
  }
  for (const auto& s : series) {
    if (s.size() != times.size()) {
      throw NumericalError("FlowTrace: ragged scalar series");
    }
  }
}

double kl(const ExpDensity& q1, const ExpDensity& q2) {
  if (q1.space() != q2.space()) {
    throw ConfigError("kl: densities on different chart spaces");
  }
  const Eigen::VectorXd log_ratio =
      ((q1.u.node_values().array() - q1.cumulant) -
       (q2.u.node_values().array() - q2.cumulant))
          .matrix();
  return q1.mean_of(log_ratio);
}

namespace {

double xlogy(double x, double y) {
  if (x <= 1e-300) return 0.0;  // continuous extension of x log x
  return x * std::log(y);
}

}  // namespace

double kl_nodes(const ChartSpacePtr& space, const Eigen::VectorXd& r1,
                const Eigen::VectorXd& r2) {
  const Eigen::VectorXd& w = space->weights();
  double acc = 0.0;
  for (int i = 0; i < r1.size(); ++i) {
    acc += w[i] * (xlogy(r1[i], r1[i]) - xlogy(r1[i], r2[i]));
  }
  return acc;
}

double bregman_kl(const ChartVector& u1, const ChartVector& u2) {
  return cumulant(u2) - cumulant(u1) - cumulant_d1(u1, u2 - u1);
}

Eigen::VectorXd kl_grad_first(const ExpDensity& q, const ExpDensity& q2) {
  const Eigen::VectorXd log_ratio =
      ((q.u.node_values().array() - q.cumulant) -
       (q2.u.node_values().array() - q2.cumulant))
          .matrix();
  return (log_ratio.array() - q.mean_of(log_ratio)).matrix();
}

Eigen::VectorXd kl_grad_second(const ExpDensity& q1, const ExpDensity& q) {
  return (1.0 - q1.ratio.array() / q.ratio.array()).matrix();
}

double bg_entropy(const ExpDensity& q) {
  const Eigen::VectorXd log_q = ((q.u.node_values().array() - q.cumulant) +
                                 q.space()->log_maxwell().array())
                                    .matrix();
  return -q.mean_of(log_q);
}

double bg_entropy_nodes(const ChartSpacePtr& space, const Eigen::VectorXd& r) {
  const Eigen::VectorXd& w = space->weights();
  const Eigen::VectorXd& log_m = space->log_maxwell();
  double acc = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    acc += w[i] * (xlogy(r[i], r[i]) + r[i] * log_m[i]);
  }
  return -acc;
}

Eigen::VectorXd bg_entropy_gradient(const ExpDensity& q) {
  const Eigen::VectorXd log_q = ((q.u.node_values().array() - q.cumulant) +
                                 q.space()->log_maxwell().array())
                                    .matrix();
  const double h = -q.mean_of(log_q);
  return (-(log_q.array() + h)).matrix();
}

namespace {

// One RK4 / Euler step of a linear-in-state ODE y' = rhs(y).
template <typename State, typename Rhs>
State step(const State& y, double dt, Integrator integrator, const Rhs& rhs) {
  if (integrator == Integrator::euler) {
    return y + dt * rhs(y);
  }
  const State k1 = rhs(y);
  const State k2 = rhs(y + (0.5 * dt) * k1);
  const State k3 = rhs(y + (0.5 * dt) * k2);
  const State k4 = rhs(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

int steps_of(const TimeGrid& grid) {
  if (!(grid.dt > 0.0) || !(grid.t_end > 0.0) || grid.store_every < 1) {
    throw ConfigError("TimeGrid: t_end, dt, store_every must be positive");
  }
  return static_cast<int>(std::llround(grid.t_end / grid.dt));
}

}  // namespace

FlowTrace kl_flow_first(const ExpDensity& q0, const ExpDensity& q2,
                        const TimeGrid& grid, Integrator integrator) {
  if (q0.space() != q2.space()) {
    throw ConfigError("kl_flow_first: densities on different chart spaces");
  }
  const ChartSpacePtr space = q0.space();
  const int nsteps = steps_of(grid);

  FlowTrace trace;
  trace.columns = {"kl", "entropy", "norm_check"};
  trace.series.assign(3, {});

  Eigen::VectorXd c = q0.u.coeff;
  const Eigen::VectorXd target = q2.u.coeff;
  const auto rhs = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return target - y;
  };

  const auto record = [&](double t, const Eigen::VectorXd& y) {
    const ChartVector u = ChartVector::centered(space, y);
    ExpDensity q;
    try {
      q = chart_to_density(u);
    } catch (const EvalError&) {
      throw NumericalError("kl_flow_first: left the chart domain at t = " +
                           std::to_string(t));
    }
    trace.times.push_back(t);
    Eigen::VectorXd state(y.size() + 1);
    state << y, u.center;
    trace.states.push_back(state);
    trace.series[0].push_back(kl(q, q2));
    trace.series[1].push_back(bg_entropy(q));
    trace.series[2].push_back(
        std::abs((space->weights().array() * q.ratio.array()).sum() - 1.0));
  };

  record(0.0, c);
  for (int i = 1; i <= nsteps; ++i) {
    c = step(c, grid.dt, integrator, rhs);
    if (!c.allFinite()) {
      throw NumericalError("kl_flow_first: divergence blow-up at t = " +
                           std::to_string(i * grid.dt));
    }
    if (i % grid.store_every == 0 || i == nsteps) record(i * grid.dt, c);
  }
  trace.validate();
  return trace;
}

FlowTrace kl_flow_second(const ExpDensity& q0, const ExpDensity& q1,
                         const TimeGrid& grid, Integrator integrator) {
  if (q0.space() != q1.space()) {
    throw ConfigError("kl_flow_second: densities on different chart spaces");
  }
  const ChartSpacePtr space = q0.space();
  const int nsteps = steps_of(grid);

  FlowTrace trace;
  trace.columns = {"kl", "entropy", "norm_check", "min_density"};
  trace.series.assign(4, {});

  Eigen::VectorXd r = q0.ratio;
  const Eigen::VectorXd target = q1.ratio;
  const auto rhs = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return target - y;
  };

  const auto record = [&](double t, const Eigen::VectorXd& y) {
    trace.times.push_back(t);
    trace.states.push_back(y);
    trace.series[0].push_back(kl_nodes(space, y, target));
    trace.series[1].push_back(bg_entropy_nodes(space, y));
    trace.series[2].push_back(
        std::abs((space->weights().array() * y.array()).sum() - 1.0));
    trace.series[3].push_back(y.minCoeff());
  };

  record(0.0, r);
  for (int i = 1; i <= nsteps; ++i) {
    r = step(r, grid.dt, integrator, rhs);
    if (!r.allFinite()) {
      throw NumericalError("kl_flow_second: divergence blow-up at t = " +
                           std::to_string(i * grid.dt));
    }
    if (i % grid.store_every == 0 || i == nsteps) record(i * grid.dt, r);
  }
  trace.validate();
  return trace;
}

HessianReport entropy_hessian_check(const ExpDensity& q, const ChartVector& X,
                                    double eps, double rel_tol) {
  // grad H along the curve s -> e-chart of q shifted by s X, transported
  // back to q; its s-derivative is the covariant derivative D_X grad H.
  // The direction acts through its representative in the fiber at q,
  // X - E_q[X], and the Hessian sends it to its negative.
  const auto grad_at = [&](double s) -> Eigen::VectorXd {
    const ChartVector us = q.u + (s * X);
    const ExpDensity qs = chart_to_density(us);
    const Eigen::VectorXd g = bg_entropy_gradient(qs);
    return (g.array() - q.mean_of(g)).matrix();  // exponential transport to q
  };
  const Eigen::VectorXd derivative =
      (grad_at(eps) - grad_at(-eps)) / (2.0 * eps);
  const Eigen::VectorXd xn = X.node_values();
  const Eigen::VectorXd expected = (-(xn.array() - q.mean_of(xn))).matrix();

  HessianReport report;
  report.max_abs_error = (derivative - expected).cwiseAbs().maxCoeff();
  const double scale = std::max(expected.cwiseAbs().maxCoeff(), 1e-12);
  report.rel_error = report.max_abs_error / scale;
  report.ok = report.rel_error < rel_tol;
  return report;
}

}  // namespace igb
