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

#ifndef IGB_DIVERGENCE_HPP
#define IGB_DIVERGENCE_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "igb/manifold.hpp"

namespace igb {

/// Time series of a flow: strictly increasing times, one stored state per
/// time, and named scalar series of equal length.
struct FlowTrace {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> series;  // one vector per column

  const std::vector<double>& column(const std::string& name) const;
  void validate() const;
};

struct TimeGrid {
  double t_end = 5.0;
  double dt = 1e-3;
  int store_every = 10;
};

enum class Integrator { rk4, euler };

/// Kullback-Leibler divergence E_{q1}[log(q1/q2)].
double kl(const ExpDensity& q1, const ExpDensity& q2);

/// KL for node-represented densities (ratios against M), with the
/// 0 log 0 = 0 convention guarded at 1e-300 underflow.
double kl_nodes(const ChartSpacePtr& space, const Eigen::VectorXd& r1,
                const Eigen::VectorXd& r2);

/// Bregman form K(u2) - K(u1) - dK(u1)[u2 - u1].
double bregman_kl(const ChartVector& u1, const ChartVector& u2);

/// Gradient of q -> KL(q || q2) at q: log(q/q2) - KL(q||q2), a node field
/// in the tangent fiber at q (E_q of it vanishes).
Eigen::VectorXd kl_grad_first(const ExpDensity& q, const ExpDensity& q2);

/// Gradient of q -> KL(q1 || q) at q: 1 - q1/q.
Eigen::VectorXd kl_grad_second(const ExpDensity& q1, const ExpDensity& q);

/// Negative-gradient flow of q -> KL(q || q2), integrated in chart
/// coordinates where the flow is linear: du/dt = -(u - u2).
/// Trace columns: kl, entropy, norm_check; states are chart coefficients
/// with the center appended.
FlowTrace kl_flow_first(const ExpDensity& q0, const ExpDensity& q2,
                        const TimeGrid& grid,
                        Integrator integrator = Integrator::rk4);

/// Negative-gradient flow of q -> KL(q1 || q), integrated on node values
/// where the flow is linear: dr/dt = -(r - r1).  Trace columns:
/// kl, entropy, norm_check, min_density; states are node ratios.
FlowTrace kl_flow_second(const ExpDensity& q0, const ExpDensity& q1,
                         const TimeGrid& grid,
                         Integrator integrator = Integrator::rk4);

/// Boltzmann-Gibbs entropy H(q) = -E_q[log q].
double bg_entropy(const ExpDensity& q);
double bg_entropy_nodes(const ChartSpacePtr& space, const Eigen::VectorXd& r);

/// Gradient field of H at q: -(log q + H(q)) as a node field.
Eigen::VectorXd bg_entropy_gradient(const ExpDensity& q);

struct HessianReport {
  double max_abs_error = 0.0;  // nodewise |D_X grad H + X|
  double rel_error = 0.0;
  bool ok = false;
};

/// Finite-difference covariant derivative of grad H along the chart
/// direction X at q, compared against -X.
HessianReport entropy_hessian_check(const ExpDensity& q, const ChartVector& X,
                                    double eps, double rel_tol = 1e-5);

}  // namespace igb

#endif  // IGB_DIVERGENCE_HPP
