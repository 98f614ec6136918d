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

#ifndef IGB_ORLICZ_HPP
#define IGB_ORLICZ_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "igb/quadrature.hpp"

namespace igb {

/// The Young pair generating the exponential Orlicz space and its dual:
/// phi(x) = cosh x - 1 and its convex conjugate
/// phi_star(y) = y arsinh y + 1 - sqrt(1 + y^2).
struct YoungPair {
  static double phi(double x);
  static double phi_prime(double x);      // sinh
  static double phi_star(double y);
  static double phi_star_prime(double y); // arsinh
};

enum class Young { phi, phi_star };

/// A strictly positive density q given as the ratio q/M at the nodes of an
/// attached Hermite rule.  E[q/M] must be 1 within 1e-8 at the rule.
struct DensityHandle {
  std::shared_ptr<const HermiteRule> rule;
  Eigen::VectorXd ratio;

  static DensityHandle maxwell(std::shared_ptr<const HermiteRule> rule);
  static DensityHandle from_ratio(std::shared_ptr<const HermiteRule> rule,
                                  const RealFn& ratio_fn);
  static DensityHandle from_nodes(std::shared_ptr<const HermiteRule> rule,
                                  Eigen::VectorXd ratio);

  /// E_q[values] for a node-value vector; tolerates +inf (used by the
  /// Luxemburg bracketing probes).
  double expect_nodes(const Eigen::VectorXd& values) const;
};

/// Luxemburg norm inf{lambda > 0 : E_q[Phi(U/lambda)] <= 1} at rule
/// resolution, by monotone bisection to relative tolerance 1e-10.
/// Returns 0 iff U vanishes at every node.  Throws NumericalError when the
/// bracket cannot be closed below lambda = 1e12 after rescaling
/// (non-membership at working precision).
double luxemburg_norm(const RealFn& U, const DensityHandle& p, Young which);
double luxemburg_norm_nodes(const Eigen::VectorXd& u_nodes,
                            const DensityHandle& p, Young which);

struct HolderReport {
  double lhs = 0.0;  // |E_q[U V]|
  double rhs = 0.0;  // 2 ||U||_phi ||V||_phi*
  bool ok = false;
};

/// Checks |E_q[UV]| <= 2 ||U||_{phi,q} ||V||_{phi*,q} + 1e-9.
HolderReport holder_pairing_check(const RealFn& U, const RealFn& V,
                                  const DensityHandle& p);

/// L^a errors of the truncated exponential series: for k = 0..kmax,
/// errors[k] = (E_q[|e^{u/a} - sum_{j<=k} (u/a)^j / j!|^a])^{1/a}.
/// pre: ||u||_{phi,q} < 1 (reported when violated).
std::vector<double> exp_series_convergence(const RealFn& u, double a,
                                           const DensityHandle& p, int kmax);

}  // namespace igb

#endif  // IGB_ORLICZ_HPP
