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

#ifndef IGB_MANIFOLD_HPP
#define IGB_MANIFOLD_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "igb/basis.hpp"
#include "igb/quadrature.hpp"

namespace igb {

/// A chart family at the Maxwell density M: an ordered basis of sufficient
/// statistics together with the Hermite rule used for every expectation.
/// Basis values, gradients and quadrature means are cached at the nodes.
/// Immutable after construction; share via ChartSpacePtr.
class ChartSpace {
 public:
  /// cache_gradients = false skips the per-axis derivative tables (large
  /// tensor-product spaces that only need values).
  ChartSpace(HermiteRule rule, std::vector<BasisFunction> basis,
             bool cache_gradients = true);

  const HermiteRule& rule() const { return rule_; }
  const std::vector<BasisFunction>& basis() const { return basis_; }
  int dim() const { return rule_.dim; }
  int size() const { return static_cast<int>(basis_.size()); }

  /// N x nb table of basis values at the rule nodes.
  const Eigen::MatrixXd& values() const { return values_; }
  /// N x nb table of d/dx_axis of each basis function.
  const Eigen::MatrixXd& grad(int axis) const {
    if (grads_.empty()) {
      throw ConfigError("ChartSpace: gradient tables were not cached");
    }
    return grads_[axis];
  }
  /// Quadrature means E_M[b_i].
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Quadrature weights as a vector.
  const Eigen::VectorXd& weights() const { return weights_; }
  /// log M at the nodes.
  const Eigen::VectorXd& log_maxwell() const { return log_maxwell_; }

 private:
  HermiteRule rule_;
  std::vector<BasisFunction> basis_;
  Eigen::MatrixXd values_;
  std::vector<Eigen::MatrixXd> grads_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_maxwell_;
};

using ChartSpacePtr = std::shared_ptr<const ChartSpace>;

ChartSpacePtr make_chart_space(HermiteRule rule,
                               std::vector<BasisFunction> basis,
                               bool cache_gradients = true);

/// A point of the chart domain: u(x) = sum_i coeff_i b_i(x) - center.
/// `centered` chooses the constant so that E_M[u] = 0 at rule resolution;
/// transports re-center against other densities.
struct ChartVector {
  ChartSpacePtr space;
  Eigen::VectorXd coeff;
  double center = 0.0;

  static ChartVector centered(ChartSpacePtr space, Eigen::VectorXd coeff);
  static ChartVector zero(ChartSpacePtr space);

  double value(std::span<const double> x) const;
  double deriv(std::span<const double> x, int axis) const;

  /// Values at the rule nodes.
  Eigen::VectorXd node_values() const;
  Eigen::VectorXd grad_node_values(int axis) const;

  /// Quadratic-form matrix Q of the degree-2 Hermite part.
  Eigen::MatrixXd quadratic_form() const;

  /// Cholesky guard: I - 2Q positive definite with smallest pivot > 1e-8,
  /// a decidable proxy for u lying in the interior of dom K_M.
  bool in_guarded_domain(double* smallest_pivot = nullptr) const;
};

ChartVector operator+(const ChartVector& a, const ChartVector& b);
ChartVector operator-(const ChartVector& a, const ChartVector& b);
ChartVector operator*(double s, const ChartVector& a);

/// Exponential-family density e^{u - K_M(u)} M with cached cumulant and
/// node values of the density ratio f/M.
struct ExpDensity {
  ChartVector u;
  double cumulant = 0.0;
  Eigen::VectorXd ratio;  // e^{u - K} at the nodes; strictly positive

  const ChartSpacePtr& space() const { return u.space; }
  /// f(x)/M(x) at an arbitrary point.
  double ratio_at(std::span<const double> x) const;

  /// E_f[values] for a node-value vector.
  double mean_of(const Eigen::VectorXd& node_values) const;
};

/// K_M(u) = log E_M[e^u]; throws EvalError on overflow at a node (the
/// quadratic-form guard was bypassed).
double cumulant(const ChartVector& u);

/// First derivative dK_M(u)[v] = E_q[v] with q = e_M(u).
double cumulant_d1(const ChartVector& u, const ChartVector& v);
/// Second derivative = Cov_q(v1, v2).
double cumulant_d2(const ChartVector& u, const ChartVector& v1,
                   const ChartVector& v2);
/// Third derivative = third joint central moment under q.
double cumulant_d3(const ChartVector& u, const ChartVector& v1,
                   const ChartVector& v2, const ChartVector& v3);
/// Directional cumulant of order n <= 6: d^n K_M(u)[v,...,v], computed from
/// the central moments of v under q by the moment-cumulant relations.
double cumulant_directional(const ChartVector& u, const ChartVector& v,
                            int order);

/// Chart map e_M: u -> e^{u - K_M(u)} M.
ExpDensity chart_to_density(const ChartVector& u);

/// Inverse chart: projects log(f/M) onto the active basis.  Throws
/// EvalError when the projection residual exceeds residual_tol (the density
/// is not representable in the basis).
ChartVector density_to_chart(const ChartSpacePtr& space,
                             const Eigen::VectorXd& ratio_at_nodes,
                             double residual_tol = 1e-6);

/// Exponential transport: u - E_to[u], returned with its center shifted.
ChartVector e_transport(const ChartVector& u, const ExpDensity& from,
                        const ExpDensity& to);

/// Mixture transport of a node-value field: v * (from/to) node-wise.
Eigen::VectorXd m_transport(const Eigen::VectorXd& v, const ExpDensity& from,
                            const ExpDensity& to);

/// Duality pairing <a, b>_q = E_q[a b] for node-value fields.
double pairing(const ExpDensity& q, const Eigen::VectorXd& a,
               const Eigen::VectorXd& b);

enum class ArcStatus { connected, undetermined };

struct ArcReport {
  ArcStatus status = ArcStatus::undetermined;
  double eps = 0.0;  // smallest epsilon probed
  double forward = 0.0;   // E_p[(q/p)^{1+eps}]
  double backward = 0.0;  // E_q[(p/q)^{1+eps}]
  double forward_drift = 0.0;   // relative change under rule refinement
  double backward_drift = 0.0;

  bool connected() const { return status == ArcStatus::connected; }
};

/// Open-exponential-arc test: both tilted integrals finite at the rule and
/// stable (< 10% change when nodes per axis grow by 4) for the smallest
/// probed epsilon.  Instability yields `undetermined`, never a silent true.
ArcReport connected_by_arc(const ExpDensity& p, const ExpDensity& q,
                           const std::vector<double>& eps_grid);

/// Curve of densities given by chart vectors, plus two curves of node-value
/// fields F(t), G(t) over the same space.
using ChartCurve = std::function<ChartVector(double)>;
using FieldCurve = std::function<Eigen::VectorXd(double)>;

struct ProductRuleReport {
  double fd_derivative = 0.0;   // centered difference of t -> E_{p(t)}[F G]
  double term_mixture = 0.0;    // <D_X F, G> via mixture transport to p(t0)
  double term_exponential = 0.0;  // <F, D_X G> via exponential transport
  double rel_error = 0.0;
  bool ok = false;
};

/// Covariant product rule for the duality coupling: the scalar derivative
/// of E_{p(t)}[F(t)G(t)] splits into the two covariant terms computed in
/// the frame at p(t0).
ProductRuleReport duality_product_rule_check(const FieldCurve& F,
                                             const FieldCurve& G,
                                             const ChartCurve& p_curve,
                                             double t0, double eps,
                                             double rel_tol = 1e-5);

}  // namespace igb

#endif  // IGB_MANIFOLD_HPP
