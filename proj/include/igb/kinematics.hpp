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

#ifndef IGB_KINEMATICS_HPP
#define IGB_KINEMATICS_HPP

#include <Eigen/Dense>
#include <optional>

#include "igb/quadrature.hpp"

namespace igb {

using Vec3 = Eigen::Vector3d;

struct VelocityPair {
  Vec3 v;
  Vec3 w;

  Vec3 center() const { return 0.5 * (v + w); }
  double half_gap() const { return 0.5 * (v - w).norm(); }
  /// vers(v - w); throws EvalError when v == w.
  Vec3 kappa() const;
};

/// Pre/post collision velocities subject to momentum and energy
/// conservation; `residuals` reports how well the invariants hold.
struct CollisionQuadruple {
  Vec3 v, w, v_post, w_post;

  struct Residuals {
    double momentum = 0.0;    // |v + w - v' - w'|, max component
    double energy = 0.0;      // | |v|^2+|w|^2 - |v'|^2-|w'|^2 |
    double gap = 0.0;         // | |v-w| - |v'-w'| |
    double dot = 0.0;         // | v.w - v'.w' |
  };
  Residuals residuals() const;
};

/// Rank-one orthogonal projector stored as its canonical unit vector
/// (first component of magnitude above 1e-12 made positive), which
/// quotients the two-fold covering omega ~ -omega by construction.
class RankOneProjector {
 public:
  explicit RankOneProjector(const Vec3& direction);

  const Vec3& omega() const { return omega_; }
  Eigen::Matrix3d matrix() const { return omega_ * omega_.transpose(); }
  Vec3 apply(const Vec3& x) const { return omega_ * omega_.dot(x); }

  /// The 6x6 symmetric orthogonal collision matrix A_Pi.
  Eigen::Matrix<double, 6, 6> collision_matrix() const;

 private:
  Vec3 omega_;
};

/// sigma-parametrized elastic collision:
/// v' = (v+w)/2 + |v-w|/2 sigma, w' = (v+w)/2 - |v-w|/2 sigma.
/// sigma must be unit within 1e-12.
CollisionQuadruple collide_sigma(const VelocityPair& pair, const Vec3& sigma);

/// Pi-parametrized collision: v' = (I-Pi)v + Pi w, w' = Pi v + (I-Pi)w.
CollisionQuadruple collide_pi(const VelocityPair& pair,
                              const RankOneProjector& projector);

/// sigma = (I - 2 Pi) kappa.  Requires v != w.
Vec3 sigma_from_pi(const VelocityPair& pair, const RankOneProjector& projector);

/// Pi spanned by vers(kappa - sigma).  Requires v != w.  Returns nullopt in
/// the degenerate case sigma == kappa (identity collision, Pi undefined).
std::optional<RankOneProjector> pi_from_sigma(const VelocityPair& pair,
                                              const Vec3& sigma);

/// Numerical rank of the 4x12 Jacobian of the conservation constraints:
/// 4 in general position, 3 on the diagonal v = w = v' = w'.
int jacobian_rank(const CollisionQuadruple& q, double tol = 1e-10);

struct PushforwardReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
};

/// Image of mu under sigma -> vers(kappa - sigma) against the half-sphere
/// density 4 (kappa.omega)^+: lhs integrates f through the pushforward
/// rule, rhs through the weighted hemisphere rule.
PushforwardReport pushforward_check_sigma_to_omega(const SphereFn& f,
                                                   const Vec3& kappa,
                                                   const SphereRule& rule);

/// Symmetrized variant: integral of f(vers(kappa - sigma)) equals the
/// full-sphere integral of f against 2 |kappa.omega|.
PushforwardReport pushforward_check_sigma_to_omega_sym(const SphereFn& f,
                                                       const Vec3& kappa,
                                                       const SphereRule& rule);

/// kappa-averaged identity: the double integral of f(vers(kappa - sigma))
/// over sigma and kappa equals the plain integral of f.
PushforwardReport pushforward_check_kappa_integrated(const SphereFn& f,
                                                     const SphereRule& rule);

/// Expectation against the uniform measure nu on rank-one projectors:
/// g is given on directions and must be sign-invariant (g(w) = g(-w));
/// violations above 1e-10 at the nodes are reported as EvalError.
double nu_expectation(const SphereFn& g, const SphereRule& rule);

}  // namespace igb

#endif  // IGB_KINEMATICS_HPP
