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

#include "igb/kinematics.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace igb {

Vec3 VelocityPair::kappa() const {
  const Vec3 d = v - w;
  const double n = d.norm();
  if (n == 0.0) {
    throw EvalError("VelocityPair::kappa: v == w, direction undefined");
  }
  return d / n;
}

CollisionQuadruple::Residuals CollisionQuadruple::residuals() const {
  Residuals r;
  r.momentum = (v + w - v_post - w_post).cwiseAbs().maxCoeff();
  r.energy = std::abs(v.squaredNorm() + w.squaredNorm() -
                      v_post.squaredNorm() - w_post.squaredNorm());
  r.gap = std::abs((v - w).norm() - (v_post - w_post).norm());
  r.dot = std::abs(v.dot(w) - v_post.dot(w_post));
  return r;
}

RankOneProjector::RankOneProjector(const Vec3& direction) {
  const double n = direction.norm();
  if (!(n > 0.0)) {
    throw EvalError("RankOneProjector: zero direction");
  }
  omega_ = direction / n;
  for (int d = 0; d < 3; ++d) {
    if (std::abs(omega_[d]) > 1e-12) {
      if (omega_[d] < 0.0) omega_ = -omega_;
      break;
    }
  }
}

Eigen::Matrix<double, 6, 6> RankOneProjector::collision_matrix() const {
  const Eigen::Matrix3d pi = matrix();
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 6, 6> a;
  a.topLeftCorner<3, 3>() = id - pi;
  a.topRightCorner<3, 3>() = pi;
  a.bottomLeftCorner<3, 3>() = pi;
  a.bottomRightCorner<3, 3>() = id - pi;
  return a;
}

CollisionQuadruple collide_sigma(const VelocityPair& pair, const Vec3& sigma) {
  if (std::abs(sigma.norm() - 1.0) > 1e-12) {
    throw EvalError("collide_sigma: sigma is not a unit vector");
  }
  const Vec3 z = pair.center();
  const double rho = pair.half_gap();
  return {pair.v, pair.w, z + rho * sigma, z - rho * sigma};
}

CollisionQuadruple collide_pi(const VelocityPair& pair,
                              const RankOneProjector& projector) {
  const Vec3 exchanged = projector.apply(pair.v - pair.w);
  return {pair.v, pair.w, pair.v - exchanged, pair.w + exchanged};
}

Vec3 sigma_from_pi(const VelocityPair& pair,
                   const RankOneProjector& projector) {
  const Vec3 kappa = pair.kappa();
  return kappa - 2.0 * projector.apply(kappa);
}

std::optional<RankOneProjector> pi_from_sigma(const VelocityPair& pair,
                                              const Vec3& sigma) {
  const Vec3 d = pair.kappa() - sigma;
  if (d.norm() < 1e-12) {
    return std::nullopt;  // sigma == kappa: identity collision, Pi undefined
  }
  return RankOneProjector(d);
}

int jacobian_rank(const CollisionQuadruple& q, double tol) {
  Eigen::Matrix<double, 4, 12> jac = Eigen::Matrix<double, 4, 12>::Zero();
  for (int d = 0; d < 3; ++d) {
    jac(d, d) = 1.0;
    jac(d, 3 + d) = 1.0;
    jac(d, 6 + d) = -1.0;
    jac(d, 9 + d) = -1.0;
  }
  jac.row(3) << 2 * q.v.transpose(), 2 * q.w.transpose(),
      -2 * q.v_post.transpose(), -2 * q.w_post.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& s = svd.singularValues();
  const double cutoff = tol * s[0];
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff) ++rank;
  }
  return rank;
}

PushforwardReport pushforward_check_sigma_to_omega(const SphereFn& f,
                                                   const Vec3& kappa,
                                                   const SphereRule& rule) {
  const SphereRule push =
      make_pushforward_rule(rule.polar_order, rule.azimuthal_order, kappa);
  const SphereRule hemi =
      make_hemisphere_rule(rule.polar_order, rule.azimuthal_order, kappa);
  PushforwardReport report;
  report.lhs = expect(push, f);
  report.rhs = expect(hemi, [&](const Vec3& omega) {
    return 4.0 * kappa.dot(omega) * f(omega);
  });
  report.abs_error = std::abs(report.lhs - report.rhs);
  return report;
}

PushforwardReport pushforward_check_sigma_to_omega_sym(
    const SphereFn& f, const Vec3& kappa, const SphereRule& rule) {
  const SphereRule push =
      make_pushforward_rule(rule.polar_order, rule.azimuthal_order, kappa);
  const SphereRule full = make_sphere_rule_oriented(
      rule.polar_order, rule.azimuthal_order, kappa);
  PushforwardReport report;
  report.lhs = expect(push, f);
  report.rhs = expect(full, [&](const Vec3& omega) {
    return 2.0 * std::abs(kappa.dot(omega)) * f(omega);
  });
  report.abs_error = std::abs(report.lhs - report.rhs);
  return report;
}

PushforwardReport pushforward_check_kappa_integrated(const SphereFn& f,
                                                     const SphereRule& rule) {
  PushforwardReport report;
  report.lhs = expect(rule, [&](const Vec3& kappa) {
    const SphereRule push =
        make_pushforward_rule(rule.polar_order, rule.azimuthal_order, kappa);
    return expect(push, f);
  });
  report.rhs = expect(rule, f);
  report.abs_error = std::abs(report.lhs - report.rhs);
  return report;
}

double nu_expectation(const SphereFn& g, const SphereRule& rule) {
  for (std::size_t i = 0; i < rule.size(); i += 7) {
    const double diff = std::abs(g(rule.nodes[i]) - g(-rule.nodes[i]));
    if (diff > 1e-10) {
      throw EvalError(
          "nu_expectation: g depends on the sign of omega (difference " +
          std::to_string(diff) + "); not a function of the projector");
    }
  }
  return expect(rule, g);
}

}  // namespace igb
