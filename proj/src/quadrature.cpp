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

#include "igb/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace igb {

namespace {

// Nodes = eigenvalues of the symmetric tridiagonal Jacobi matrix, weights =
// mass * (first eigenvector component)^2.
Grid1d golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                    double mass) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("golub_welsch: tridiagonal eigensolve failed");
  }
  const int m = static_cast<int>(diag.size());
  Grid1d grid{std::vector<double>(m), std::vector<double>(m)};
  for (int i = 0; i < m; ++i) {
    grid.first[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    grid.second[i] = mass * v0 * v0;
  }
  return grid;
}

// Enforce the exact +/- symmetry of nodes and weights of an even weight
// function; keeps odd moments identically zero in floating point.
void symmetrize(Grid1d& grid) {
  const int m = static_cast<int>(grid.first.size());
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double x = 0.5 * (grid.first[i] - grid.first[j]);
    const double w = 0.5 * (grid.second[i] + grid.second[j]);
    grid.first[i] = x;
    grid.first[j] = -x;
    grid.second[i] = w;
    grid.second[j] = w;
  }
  if (m % 2 == 1) grid.first[m / 2] = 0.0;
}

}  // namespace

Grid1d gauss_hermite_1d(int m) {
  if (m < 1) throw ConfigError("gauss_hermite_1d: need m >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
  for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Grid1d grid = golub_welsch(diag, sub, 1.0);
  symmetrize(grid);
  return grid;
}

Grid1d gauss_legendre_1d(int m) {
  if (m < 1) throw ConfigError("gauss_legendre_1d: need m >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
  for (int k = 1; k < m; ++k) {
    sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  }
  Grid1d grid = golub_welsch(diag, sub, 2.0);
  symmetrize(grid);
  return grid;
}

Grid1d gauss_laguerre_half_1d(int m) {
  if (m < 1) throw ConfigError("gauss_laguerre_half_1d: need m >= 1");
  const double alpha = 0.5;
  Eigen::VectorXd diag(m);
  Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
  for (int k = 0; k < m; ++k) diag[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(k * (k + alpha));
  // mass 1: the Jacobi-matrix weights already sum to 1 after normalization.
  return golub_welsch(diag, sub, 1.0);
}

HermiteRule make_hermite_rule(int dim, int nodes_per_axis,
                              std::size_t node_budget) {
  if (dim < 1) throw ConfigError("make_hermite_rule: dimension must be >= 1");
  if (nodes_per_axis < 2) {
    throw ConfigError("make_hermite_rule: need at least 2 nodes per axis");
  }
  double total = 1.0;
  for (int d = 0; d < dim; ++d) {
    total *= nodes_per_axis;
    if (total > static_cast<double>(node_budget)) {
      throw ResourceError(
          "make_hermite_rule: tensor grid " + std::to_string(nodes_per_axis) +
          "^" + std::to_string(dim) + " exceeds the node budget of " +
          std::to_string(node_budget));
    }
  }
  const Grid1d g1 = gauss_hermite_1d(nodes_per_axis);

  HermiteRule rule;
  rule.dim = dim;
  rule.nodes_per_axis = nodes_per_axis;
  const std::size_t count = static_cast<std::size_t>(total);
  rule.nodes.resize(count * dim);
  rule.weights.resize(count);

  std::vector<int> odo(dim, 0);
  for (std::size_t i = 0; i < count; ++i) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      rule.nodes[i * dim + d] = g1.first[odo[d]];
      w *= g1.second[odo[d]];
    }
    rule.weights[i] = w;
    for (int d = dim - 1; d >= 0; --d) {
      if (++odo[d] < nodes_per_axis) break;
      odo[d] = 0;
    }
  }
  return rule;
}

namespace {

// Neumaier-compensated accumulator; keeps symmetric cancellations exact.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double term) {
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      carry += (sum - t) + term;
    } else {
      carry += (term - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

double expect(const HermiteRule& rule, const RealFn& g) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double gi = g(rule.node(i));
    if (!std::isfinite(gi)) {
      std::string where = "(";
      for (int d = 0; d < rule.dim; ++d) {
        where += std::to_string(rule.node(i)[d]);
        where += d + 1 < rule.dim ? ", " : ")";
      }
      throw EvalError("expect: integrand non-finite at node " +
                      std::to_string(i) + " = " + where);
    }
    acc.add(rule.weights[i] * gi);
  }
  return acc.value();
}

namespace {

void validate_sphere_orders(int polar_order, int azimuthal_order) {
  if (polar_order < 2) throw ConfigError("sphere rule: polar_order must be >= 2");
  if (azimuthal_order < 4) {
    throw ConfigError("sphere rule: azimuthal_order must be >= 4");
  }
}

SphereRule assemble_sphere(int polar_order, int azimuthal_order,
                           const std::vector<double>& t,
                           const std::vector<double>& wt,
                           const Eigen::Matrix3d& frame) {
  SphereRule rule;
  rule.polar_order = polar_order;
  rule.azimuthal_order = azimuthal_order;
  rule.nodes.reserve(t.size() * azimuthal_order);
  rule.weights.reserve(t.size() * azimuthal_order);
  const double waz = 1.0 / azimuthal_order;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
    for (int j = 0; j < azimuthal_order; ++j) {
      const double theta = 2.0 * M_PI * j / azimuthal_order;
      const Eigen::Vector3d local(s * std::cos(theta), s * std::sin(theta),
                                  t[i]);
      rule.nodes.push_back(frame * local);
      rule.weights.push_back(wt[i] * waz);
    }
  }
  return rule;
}

}  // namespace

Eigen::Matrix3d frame_from_axis(const Eigen::Vector3d& axis) {
  const double norm = axis.norm();
  if (!(norm > 0.0)) throw EvalError("frame_from_axis: zero axis");
  const Eigen::Vector3d a = axis / norm;
  int k = 0;
  for (int d = 1; d < 3; ++d) {
    if (std::abs(a[d]) < std::abs(a[k])) k = d;
  }
  Eigen::Vector3d e1 = a.cross(Eigen::Vector3d::Unit(k)).normalized();
  Eigen::Vector3d e2 = a.cross(e1);
  Eigen::Matrix3d frame;
  frame.col(0) = e1;
  frame.col(1) = e2;
  frame.col(2) = a;
  return frame;
}

SphereRule make_sphere_rule_oriented(int polar_order, int azimuthal_order,
                                     const Eigen::Vector3d& axis) {
  validate_sphere_orders(polar_order, azimuthal_order);
  const Grid1d g = gauss_legendre_1d(polar_order);
  // Upper panel on [0, 1]; the lower panel is its mirror image, so the rule
  // is exactly antipodally symmetric.
  std::vector<double> t, wt;
  t.reserve(2 * polar_order);
  wt.reserve(2 * polar_order);
  for (int i = 0; i < polar_order; ++i) {
    t.push_back(0.5 * (g.first[i] + 1.0));
    wt.push_back(0.25 * g.second[i]);  // dt/2 over a half-length panel
  }
  for (int i = 0; i < polar_order; ++i) {
    t.push_back(-t[i]);
    wt.push_back(wt[i]);
  }
  return assemble_sphere(polar_order, azimuthal_order, t, wt,
                         frame_from_axis(axis));
}

SphereRule make_sphere_rule(int polar_order, int azimuthal_order) {
  return make_sphere_rule_oriented(polar_order, azimuthal_order,
                                   Eigen::Vector3d::UnitZ());
}

SphereRule make_hemisphere_rule(int polar_order, int azimuthal_order,
                                const Eigen::Vector3d& axis) {
  validate_sphere_orders(polar_order, azimuthal_order);
  const Grid1d g = gauss_legendre_1d(polar_order);
  std::vector<double> t, wt;
  for (int i = 0; i < polar_order; ++i) {
    t.push_back(0.5 * (g.first[i] + 1.0));
    wt.push_back(0.25 * g.second[i]);
  }
  return assemble_sphere(polar_order, azimuthal_order, t, wt,
                         frame_from_axis(axis));
}

SphereRule make_pushforward_rule(int polar_order, int azimuthal_order,
                                 const Eigen::Vector3d& kappa) {
  validate_sphere_orders(polar_order, azimuthal_order);
  const Grid1d g = gauss_legendre_1d(polar_order);
  // In s = sin(phi/2) on [0, 1] the image measure has density 2s ds; the
  // node direction is omega(s, theta) with polar component s.
  std::vector<double> t, wt;
  for (int i = 0; i < polar_order; ++i) {
    const double s = 0.5 * (g.first[i] + 1.0);
    t.push_back(s);
    wt.push_back(s * g.second[i]);  // 2s * (ds = w/2)
  }
  return assemble_sphere(polar_order, azimuthal_order, t, wt,
                         frame_from_axis(kappa));
}

double expect(const SphereRule& rule, const SphereFn& g) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double gi = g(rule.nodes[i]);
    if (!std::isfinite(gi)) {
      throw EvalError("expect: integrand non-finite at sphere node " +
                      std::to_string(i));
    }
    acc.add(rule.weights[i] * gi);
  }
  return acc.value();
}

}  // namespace igb
