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

#ifndef IGB_QUADRATURE_HPP
#define IGB_QUADRATURE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "igb/errors.hpp"

namespace igb {

using Grid1d = std::pair<std::vector<double>, std::vector<double>>;

/// Gauss-Hermite in the probabilist convention: nodes/weights for the
/// weight e^{-x^2/2}/sqrt(2*pi), weights summing to 1.  Exact for
/// polynomials of degree <= 2m-1.  Golub-Welsch on the Jacobi matrix.
Grid1d gauss_hermite_1d(int m);

/// Gauss-Legendre on [-1,1], weights summing to 2.
Grid1d gauss_legendre_1d(int m);

/// Generalized Gauss-Laguerre for the weight t^{1/2} e^{-t} on (0,inf),
/// normalized to total mass 1 (the law of a chi^2(3)/2 variable).
Grid1d gauss_laguerre_half_1d(int m);

/// Tensor-product Gauss-Hermite rule on R^n against the Maxwell density M.
struct HermiteRule {
  int dim = 0;
  int nodes_per_axis = 0;
  std::vector<double> nodes;    // size() * dim, row-major
  std::vector<double> weights;  // sums to 1

  std::size_t size() const { return weights.size(); }
  std::span<const double> node(std::size_t i) const {
    return {nodes.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

/// Builds the tensor rule; throws ResourceError when m^n exceeds the budget.
HermiteRule make_hermite_rule(int dim, int nodes_per_axis,
                              std::size_t node_budget = kDefaultNodeBudget);

using RealFn = std::function<double(std::span<const double>)>;

/// E_M[g] by the rule, deterministic fixed-order reduction.
/// Throws EvalError naming the offending node when g is non-finite there.
double expect(const HermiteRule& rule, const RealFn& g);

/// Quadrature rule on the unit sphere for the uniform probability mu,
/// or for an explicitly stated absolutely continuous image of it.
///
/// The polar direction uses two Gauss-Legendre panels in t = cos(phi),
/// split at the equator (so that integrands with a |t| or 1{t>0} factor
/// against the rule axis are still integrated exactly); the azimuth uses a
/// uniform trapezoid.  polar_order counts Legendre nodes per panel.
struct SphereRule {
  int polar_order = 0;
  int azimuthal_order = 0;
  std::vector<Eigen::Vector3d> nodes;  // unit vectors
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

SphereRule make_sphere_rule(int polar_order, int azimuthal_order);

/// Same rule with the polar axis rotated onto `axis` (need not be e_z).
SphereRule make_sphere_rule_oriented(int polar_order, int azimuthal_order,
                                     const Eigen::Vector3d& axis);

/// Rule for mu restricted to the hemisphere {axis . omega >= 0}
/// (weights sum to 1/2).
SphereRule make_hemisphere_rule(int polar_order, int azimuthal_order,
                                const Eigen::Vector3d& axis);

/// Rule for the image of mu under sigma -> vers(kappa - sigma).  Built in
/// the variable s = sin(phi/2), in which polynomial integrands stay
/// polynomial, so the rule is exact where the plain polar variable is not.
SphereRule make_pushforward_rule(int polar_order, int azimuthal_order,
                                 const Eigen::Vector3d& kappa);

using SphereFn = std::function<double(const Eigen::Vector3d&)>;

double expect(const SphereRule& rule, const SphereFn& g);

/// Orthonormal frame (e1, e2, axis) with deterministic choice of e1, e2.
Eigen::Matrix3d frame_from_axis(const Eigen::Vector3d& axis);

}  // namespace igb

#endif  // IGB_QUADRATURE_HPP
