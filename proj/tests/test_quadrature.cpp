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

#include "igb/quadrature.hpp"
#include "igb/rng.hpp"

using namespace igb;

namespace {

double double_factorial_odd(int k) {
  // (2k-1)!! = moments of the standard Gaussian: E[x^{2k}].
  double acc = 1.0;
  for (int i = 2 * k - 1; i > 1; i -= 2) acc *= i;
  return acc;
}

}  // namespace

TEST_CASE("hermite rule weights are a probability") {
  for (int m : {2, 5, 8, 16, 31}) {
    const HermiteRule rule = make_hermite_rule(1, m);
    double sum = 0.0;
    for (double w : rule.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-13);
  }
}

TEST_CASE("hermite rule matches low gaussian moments") {
  for (int m : {8, 12, 20}) {
    const HermiteRule rule = make_hermite_rule(2, m);
    for (int axis : {0, 1}) {
      const double m1 =
          expect(rule, [axis](std::span<const double> x) { return x[axis]; });
      const double m2 = expect(rule, [axis](std::span<const double> x) {
        return x[axis] * x[axis];
      });
      const double m4 = expect(rule, [axis](std::span<const double> x) {
        return std::pow(x[axis], 4);
      });
      CHECK(std::abs(m1) < 1e-10);
      CHECK(std::abs(m2 - 1.0) < 1e-10);
      CHECK(std::abs(m4 - 3.0) < 1e-10);
    }
  }
}

TEST_CASE("hermite rule: second and fourth moment in one dimension") {
  const HermiteRule rule = make_hermite_rule(1, 8);
  CHECK(std::abs(expect(rule, [](std::span<const double> x) {
          return x[0] * x[0];
        }) - 1.0) < 1e-12);
  CHECK(std::abs(expect(rule, [](std::span<const double> x) {
          return std::pow(x[0], 4);
        }) - 3.0) < 1e-12);
}

TEST_CASE("hermite rule: |x|^2 in three dimensions") {
  const HermiteRule rule = make_hermite_rule(3, 8);
  const double val = expect(rule, [](std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  });
  CHECK(std::abs(val - 3.0) < 1e-12);
}

TEST_CASE("hermite rule integrates monomials exactly up to degree 2m-1") {
  for (int m : {3, 6, 9}) {
    const HermiteRule rule = make_hermite_rule(1, m);
    for (int degree = 0; degree <= 2 * m - 1; ++degree) {
      const double value = expect(rule, [degree](std::span<const double> x) {
        return std::pow(x[0], degree);
      });
      const double exact =
          degree % 2 == 1 ? 0.0 : double_factorial_odd(degree / 2);
      CHECK(std::abs(value - exact) < 1e-11 * (std::abs(exact) + 1.0));
    }
  }
}

TEST_CASE("hermite tensor rule rejects grids beyond the node budget") {
  CHECK_THROWS_AS(make_hermite_rule(6, 12), ResourceError);
  CHECK_THROWS_AS(make_hermite_rule(3, 8, 100), ResourceError);
  CHECK_THROWS_AS(make_hermite_rule(0, 8), ConfigError);
  CHECK_THROWS_AS(make_hermite_rule(1, 1), ConfigError);
}

TEST_CASE("expect: unit integrand, independence, and cosh moment") {
  const HermiteRule rule1 = make_hermite_rule(1, 32);
  CHECK(expect(rule1, [](std::span<const double>) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-14));
  const double cosh_moment = expect(
      rule1, [](std::span<const double> x) { return std::cosh(x[0]) - 1.0; });
  CHECK(std::abs(cosh_moment - (std::exp(0.5) - 1.0)) < 1e-10);

  const HermiteRule rule2 = make_hermite_rule(2, 12);
  const double cross =
      expect(rule2, [](std::span<const double> x) { return x[0] * x[1]; });
  CHECK(std::abs(cross) < 1e-13);
}

TEST_CASE("expect reports the offending node for non-finite integrands") {
  const HermiteRule rule = make_hermite_rule(1, 8);
  CHECK_THROWS_AS(expect(rule,
                         [](std::span<const double> x) {
                           return 1.0 / (x[0] - x[0]);
                         }),
                  EvalError);
}

TEST_CASE("sphere rule is a probability on unit vectors") {
  const SphereRule rule = make_sphere_rule(6, 12);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    CHECK(rule.weights[i] >= 0.0);
    sum += rule.weights[i];
    CHECK(std::abs(rule.nodes[i].norm() - 1.0) < 1e-14);
  }
  CHECK(std::abs(sum - 1.0) < 1e-13);
}

TEST_CASE("sphere rule first and second moments") {
  const SphereRule rule = make_sphere_rule(5, 10);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    mean += rule.weights[i] * rule.nodes[i];
    second += rule.weights[i] * rule.nodes[i] * rule.nodes[i].transpose();
  }
  CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
  CHECK((second - Eigen::Matrix3d::Identity() / 3.0).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("sphere rule: constant, quarter integral, and (kappa.sigma)^2") {
  const Eigen::Vector3d kappa = Eigen::Vector3d(0.2, -0.7, 1.1).normalized();
  const SphereRule rule = make_sphere_rule_oriented(8, 12, kappa);
  CHECK(expect(rule, [](const Eigen::Vector3d&) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-14));

  const double quarter = expect(rule, [&](const Eigen::Vector3d& s) {
    const double d = kappa.dot(s);
    return d > 0.0 ? d : 0.0;
  });
  CHECK(std::abs(quarter - 0.25) < 1e-10);

  const double squared = expect(rule, [&](const Eigen::Vector3d& s) {
    const double d = kappa.dot(s);
    return d * d;
  });
  CHECK(std::abs(squared - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("sphere rule validates its orders") {
  CHECK_THROWS_AS(make_sphere_rule(1, 12), ConfigError);
  CHECK_THROWS_AS(make_sphere_rule(4, 3), ConfigError);
}

TEST_CASE("pushforward and hemisphere rules carry the stated masses") {
  const Eigen::Vector3d kappa = Eigen::Vector3d(1.0, 1.0, -0.5).normalized();
  const SphereRule push = make_pushforward_rule(6, 12, kappa);
  const SphereRule hemi = make_hemisphere_rule(6, 12, kappa);
  double push_mass = 0.0, hemi_mass = 0.0;
  for (double w : push.weights) push_mass += w;
  for (double w : hemi.weights) hemi_mass += w;
  CHECK(std::abs(push_mass - 1.0) < 1e-13);
  CHECK(std::abs(hemi_mass - 0.5) < 1e-13);
  for (const auto& node : hemi.nodes) CHECK(kappa.dot(node) >= 0.0);
}

TEST_CASE("monte carlo agrees with quadrature within five standard errors") {
  const HermiteRule rule = make_hermite_rule(2, 8);
  const auto g = [](std::span<const double> x) {
    return std::pow(x[0], 4) * x[1] * x[1] + 2.0 * x[0] - std::pow(x[1], 3) +
           3.0;
  };
  const double quad = expect(rule, g);

  SeededSampler rng(20260809);
  const int n = 1'000'000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x[2] = {rng.normal(), rng.normal()};
    const double v = g(std::span<const double>(x, 2));
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - quad) < 5.0 * se);
}

TEST_CASE("seeded sampler reproduces its stream and forks substreams") {
  SeededSampler a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  CHECK(a.position() == 100);

  SeededSampler base(7);
  SeededSampler w0 = base.substream(0);
  SeededSampler w1 = base.substream(1);
  CHECK(w0.next_u64() != w1.next_u64());

  // Normal draws have the right first moments.
  SeededSampler c(3);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = c.normal();
    sum += v;
    sumsq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}
