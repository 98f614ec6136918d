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

#include <doctest.h>

#include <cmath>

#include "igb/kinematics.hpp"
#include "igb/rng.hpp"

using namespace igb;

namespace {

Vec3 random_vec(SeededSampler& rng) {
  return {rng.normal(), rng.normal(), rng.normal()};
}

Vec3 random_unit(SeededSampler& rng) {
  const double t = 1.0 - 2.0 * rng.uniform();
  const double phi = 2.0 * M_PI * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  return {s * std::cos(phi), s * std::sin(phi), t};
}

}  // namespace

TEST_CASE("sigma collision: fixed point, collapse, and a worked example") {
  SeededSampler rng(61);
  const VelocityPair pair{random_vec(rng), random_vec(rng)};

  // sigma along vers(v - w) reproduces the incoming pair.
  const CollisionQuadruple fixed = collide_sigma(pair, pair.kappa());
  CHECK((fixed.v_post - pair.v).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((fixed.w_post - pair.w).cwiseAbs().maxCoeff() < 1e-14);

  // v = w collapses the sphere to a point.
  const Vec3 same(0.4, -1.0, 2.0);
  const CollisionQuadruple collapsed =
      collide_sigma({same, same}, random_unit(rng));
  CHECK((collapsed.v_post - same).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((collapsed.w_post - same).cwiseAbs().maxCoeff() < 1e-14);

  // Head-on collision turned by 90 degrees.
  const CollisionQuadruple turned =
      collide_sigma({Vec3(1, 0, 0), Vec3(-1, 0, 0)}, Vec3(0, 1, 0));
  CHECK((turned.v_post - Vec3(0, 1, 0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((turned.w_post - Vec3(0, -1, 0)).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(collide_sigma(pair, Vec3(0.5, 0.5, 0.5)), EvalError);
}

TEST_CASE("conservation laws hold across seeded collisions") {
  SeededSampler rng(67);
  for (int trial = 0; trial < 10000; ++trial) {
    const VelocityPair pair{random_vec(rng), random_vec(rng)};
    const CollisionQuadruple q = collide_sigma(pair, random_unit(rng));
    const auto r = q.residuals();
    CHECK(r.momentum < 1e-12);
    CHECK(r.energy < 1e-11);
    CHECK(r.gap < 1e-11);
    CHECK(r.dot < 1e-11);
  }
}

TEST_CASE("projector collisions: orthogonal cases and the 6x6 matrix") {
  SeededSampler rng(71);
  const VelocityPair pair{random_vec(rng), random_vec(rng)};
  const Vec3 diff = pair.v - pair.w;

  // omega orthogonal to v - w leaves the pair unchanged.
  Vec3 orth = diff.cross(Vec3(0.0, 0.0, 1.0));
  if (orth.norm() < 1e-8) orth = diff.cross(Vec3(0.0, 1.0, 0.0));
  const CollisionQuadruple unchanged =
      collide_pi(pair, RankOneProjector(orth));
  CHECK((unchanged.v_post - pair.v).cwiseAbs().maxCoeff() < 1e-13);

  // omega parallel to v - w exchanges the velocities.
  const CollisionQuadruple swapped =
      collide_pi(pair, RankOneProjector(diff));
  CHECK((swapped.v_post - pair.w).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((swapped.w_post - pair.v).cwiseAbs().maxCoeff() < 1e-13);

  // A_Pi is symmetric orthogonal, and Pi v' = Pi w, Pi w' = Pi v.
  for (int trial = 0; trial < 100; ++trial) {
    const RankOneProjector pi(random_vec(rng));
    const auto a = pi.collision_matrix();
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a * a - Eigen::Matrix<double, 6, 6>::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    const VelocityPair vw{random_vec(rng), random_vec(rng)};
    const CollisionQuadruple q = collide_pi(vw, pi);
    CHECK((pi.apply(q.v_post) - pi.apply(vw.w)).cwiseAbs().maxCoeff() <
          1e-13);
    CHECK((pi.apply(q.w_post) - pi.apply(vw.v)).cwiseAbs().maxCoeff() <
          1e-13);
  }
}

TEST_CASE("projectors canonicalize the two-fold covering") {
  const RankOneProjector plus(Vec3(0.3, -0.4, 0.5));
  const RankOneProjector minus(Vec3(-0.3, 0.4, -0.5));
  CHECK((plus.omega() - minus.omega()).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Matrix3d p = plus.matrix();
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(p.trace() - 1.0) < 1e-13);
}

TEST_CASE("sigma and Pi parametrizations are inverse to each other") {
  SeededSampler rng(73);

  // sigma = -kappa corresponds to the full exchange, omega = kappa.
  const VelocityPair pair{Vec3(1.0, 0.2, -0.3), Vec3(-0.5, 0.1, 0.8)};
  const Vec3 kappa = pair.kappa();
  const auto exchange = pi_from_sigma(pair, -kappa);
  REQUIRE(exchange.has_value());
  CHECK((exchange->matrix() - kappa * kappa.transpose())
            .cwiseAbs()
            .maxCoeff() < 1e-13);

  // Degenerate sigma = kappa: reported, not guessed.
  CHECK_FALSE(pi_from_sigma(pair, kappa).has_value());

  for (int trial = 0; trial < 100; ++trial) {
    const VelocityPair vw{random_vec(rng), random_vec(rng)};
    Vec3 sigma = random_unit(rng);
    if ((sigma - vw.kappa()).norm() < 1e-6) continue;
    const auto pi = pi_from_sigma(vw, sigma);
    REQUIRE(pi.has_value());
    const Vec3 back = sigma_from_pi(vw, *pi);
    CHECK((back - sigma).cwiseAbs().maxCoeff() < 1e-12);

    const CollisionQuadruple qs = collide_sigma(vw, sigma);
    const CollisionQuadruple qp = collide_pi(vw, *pi);
    CHECK((qs.v_post - qp.v_post).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((qs.w_post - qp.w_post).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("jacobian rank: full in general position, three on the diagonal") {
  SeededSampler rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const VelocityPair pair{random_vec(rng), random_vec(rng)};
    const CollisionQuadruple q = collide_sigma(pair, random_unit(rng));
    CHECK(jacobian_rank(q) == 4);
  }
  const CollisionQuadruple origin{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                  Vec3::Zero()};
  CHECK(jacobian_rank(origin) == 3);
  const Vec3 c(1.0, 2.0, 3.0);
  CHECK(jacobian_rank({c, c, c, c}) == 3);
}

TEST_CASE("pushforward of mu under vers(kappa - sigma)") {
  const SphereRule rule = make_sphere_rule(8, 14);
  const Vec3 kappa = Vec3(0.3, 0.8, -0.6).normalized();

  // f = 1: both sides are probabilities.
  const auto one = [](const Vec3&) { return 1.0; };
  const auto unit = pushforward_check_sigma_to_omega(one, kappa, rule);
  CHECK(std::abs(unit.lhs - 1.0) < 1e-13);
  CHECK(unit.abs_error < 1e-13);

  // Degree <= 6 polynomials.
  const auto poly = [&](const Vec3& w) {
    const double t = kappa.dot(w);
    return t * t + 0.3 * std::pow(w[0], 3) * w[1] * w[2] - 0.2 * w[2];
  };
  CHECK(pushforward_check_sigma_to_omega(poly, kappa, rule).abs_error < 1e-8);

  // Symmetric integrands against 2 |kappa . omega|.
  const auto even = [&](const Vec3& w) {
    return std::pow(kappa.dot(w), 2) + w[0] * w[0] * w[1] * w[1];
  };
  CHECK(pushforward_check_sigma_to_omega_sym(even, kappa, rule).abs_error <
        1e-8);
}

TEST_CASE("kappa-averaged pushforward returns the plain integral") {
  const SphereRule rule = make_sphere_rule(8, 14);
  const auto one = [](const Vec3&) { return 1.0; };
  CHECK(pushforward_check_kappa_integrated(one, rule).abs_error < 1e-13);

  const auto zz = [](const Vec3& s) { return s[2] * s[2]; };
  const auto report = pushforward_check_kappa_integrated(zz, rule);
  CHECK(std::abs(report.rhs - 1.0 / 3.0) < 1e-12);
  CHECK(report.abs_error < 1e-7);

  const auto odd = [](const Vec3& s) { return s[2]; };
  const auto odd_report = pushforward_check_kappa_integrated(odd, rule);
  CHECK(std::abs(odd_report.lhs) < 1e-9);
  CHECK(std::abs(odd_report.rhs) < 1e-9);

  // Degree-4 mixed polynomial.
  const auto mixed = [](const Vec3& s) {
    return s[0] * s[0] * s[1] * s[1] + 0.5 * s[2] * s[2] * s[2] * s[2];
  };
  CHECK(pushforward_check_kappa_integrated(mixed, rule).abs_error < 1e-7);
}

TEST_CASE("nu expectations: projector functionals and rotation invariance") {
  const SphereRule rule = make_sphere_rule(8, 14);
  CHECK(std::abs(nu_expectation([](const Vec3&) { return 1.0; }, rule) -
                 1.0) < 1e-13);

  // trace(Pi) = 1 pointwise.
  const auto trace_fn = [](const Vec3& w) { return w.squaredNorm(); };
  CHECK(std::abs(nu_expectation(trace_fn, rule) - 1.0) < 1e-13);

  // |Pi kappa|^2 = (kappa . omega)^2 integrates to 1/3.
  const Vec3 kappa = Vec3(1.0, -2.0, 0.5).normalized();
  const auto pk = [&](const Vec3& w) {
    const double d = kappa.dot(w);
    return d * d;
  };
  CHECK(std::abs(nu_expectation(pk, rule) - 1.0 / 3.0) < 1e-9);

  // Rotated nodes leave the value unchanged.
  const Eigen::Matrix3d frame =
      frame_from_axis(Vec3(0.4, 0.5, -0.7).normalized());
  SphereRule rotated = rule;
  for (auto& node : rotated.nodes) node = frame * node;
  CHECK(std::abs(nu_expectation(pk, rotated) - nu_expectation(pk, rule)) <
        1e-9);

  // Sign-dependent integrands are rejected.
  CHECK_THROWS_AS(nu_expectation([](const Vec3& w) { return w[2]; }, rule),
                  EvalError);
}

TEST_CASE("scalar product is conserved along seeded collisions") {
  SeededSampler rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const VelocityPair pair{random_vec(rng), random_vec(rng)};
    const CollisionQuadruple q = collide_sigma(pair, random_unit(rng));
    CHECK(std::abs(pair.v.dot(pair.w) - q.v_post.dot(q.w_post)) < 1e-11);
  }
}
