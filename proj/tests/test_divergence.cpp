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

#include "igb/divergence.hpp"
#include "igb/orlicz.hpp"
#include "test_support.hpp"

using namespace igb;
using igb::testing::random_chart;
using igb::testing::space_1d;

namespace {

ChartVector coordinate_chart(const ChartSpacePtr& space, double a) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(space->size());
  c[0] = a;
  return ChartVector::centered(space, c);
}

}  // namespace

TEST_CASE("kl: zero at equal densities, gaussian closed form, bregman") {
  ChartSpacePtr space = space_1d();
  const ExpDensity m = chart_to_density(ChartVector::zero(space));
  CHECK(std::abs(kl(m, m)) < 1e-13);

  for (double shift : {0.5, 1.0, -1.3}) {
    const ExpDensity q = chart_to_density(coordinate_chart(space, shift));
    CHECK(std::abs(kl(q, m) - 0.5 * shift * shift) < 1e-9);
  }

  SeededSampler rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const ChartVector u1 = random_chart(space, rng, 0.35);
    const ChartVector u2 = random_chart(space, rng, 0.35);
    const double direct = kl(chart_to_density(u1), chart_to_density(u2));
    CHECK(direct >= -1e-10);
    CHECK(std::abs(direct - bregman_kl(u1, u2)) < 1e-9);
  }
}

TEST_CASE("bregman divergence: zero diagonal, tilt formula, taylor series") {
  ChartSpacePtr space = space_1d();
  const ChartVector zero = ChartVector::zero(space);
  SeededSampler rng(37);
  const ChartVector u = random_chart(space, rng, 0.4);
  CHECK(std::abs(bregman_kl(u, u)) < 1e-12);

  const ChartVector tilt = coordinate_chart(space, 1.0);
  CHECK(std::abs(bregman_kl(zero, tilt) - 0.5) < 1e-10);

  // Truncated directional expansion sum_{n=2..6} d^n K(u1)[(u2-u1)^n]/n!
  // inside the unit Luxemburg ball of the step.  The step size is chosen so
  // that orders 4..6 matter at the 1e-3 level while the order-7 tail stays
  // below 1e-5.
  const DensityHandle handle = DensityHandle::maxwell(
      std::make_shared<const HermiteRule>(space->rule()));
  Eigen::VectorXd step_coeff(space->size());
  step_coeff << 0.18, 0.09, 0.18, 0.18;
  const ChartVector step = ChartVector::centered(space, step_coeff);
  REQUIRE(luxemburg_norm_nodes(step.node_values(), handle, Young::phi) < 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const ChartVector u1 = random_chart(space, rng, 0.1);
    const ChartVector u2 = u1 + step;
    double series = 0.0;
    double factorial = 1.0;
    double series_low = 0.0;
    for (int order = 2; order <= 6; ++order) {
      factorial *= order;
      series += cumulant_directional(u1, step, order) / factorial;
      if (order == 3) series_low = series;
    }
    const double reference = bregman_kl(u1, u2);
    CHECK(std::abs(series - reference) < 1e-4);
    // Orders 4..6 tighten the truncation.
    CHECK(std::abs(series - reference) < std::abs(series_low - reference));
  }
}

TEST_CASE("kl gradients live in the tangent fiber and match differences") {
  ChartSpacePtr space = space_1d();
  const ExpDensity m = chart_to_density(ChartVector::zero(space));
  const ExpDensity shifted = chart_to_density(coordinate_chart(space, 1.0));

  CHECK(kl_grad_first(m, m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(kl_grad_second(m, m).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::VectorXd grad1 = kl_grad_first(m, shifted);
  CHECK(std::abs(m.mean_of(grad1)) < 1e-9);
  const Eigen::VectorXd grad2 = kl_grad_second(shifted, m);
  CHECK(std::abs(m.mean_of(grad2)) < 1e-9);

  // Directional derivative along chart directions against centered
  // differences of the divergence itself.
  SeededSampler rng(41);
  for (int trial = 0; trial < 15; ++trial) {
    const ChartVector u = random_chart(space, rng, 0.3);
    const ChartVector v = random_chart(space, rng, 0.3);
    const ChartVector w = random_chart(space, rng, 0.4);
    const ExpDensity q = chart_to_density(u);
    const ExpDensity q2 = chart_to_density(v);
    const double eps = 1e-5;

    const double fd1 = (kl(chart_to_density(u + (eps * w)), q2) -
                        kl(chart_to_density(u - (eps * w)), q2)) /
                       (2.0 * eps);
    Eigen::VectorXd wq = w.node_values();
    wq.array() -= q.mean_of(wq);
    const double an1 = pairing(q, kl_grad_first(q, q2), wq);
    CHECK(std::abs(fd1 - an1) < 1e-5 * (1.0 + std::abs(an1)));

    const double fd2 = (kl(q2, chart_to_density(u + (eps * w))) -
                        kl(q2, chart_to_density(u - (eps * w)))) /
                       (2.0 * eps);
    const double an2 = pairing(q, kl_grad_second(q2, q), wq);
    CHECK(std::abs(fd2 - an2) < 1e-5 * (1.0 + std::abs(an2)));
  }
}

TEST_CASE("first kl flow: constant at the target, closed form otherwise") {
  ChartSpacePtr space = space_1d();
  const ExpDensity m = chart_to_density(ChartVector::zero(space));
  const ExpDensity target = chart_to_density(coordinate_chart(space, 1.0));
  const TimeGrid grid{5.0, 1e-3, 100};

  const FlowTrace still = kl_flow_first(target, target, grid);
  for (double v : still.column("kl")) CHECK(std::abs(v) < 1e-12);

  const FlowTrace trace = kl_flow_first(m, target, grid);
  const auto& kl_series = trace.column("kl");
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    // Closed form q(t) ~ q0^{e^-t} q2^{1-e^-t}: in chart coordinates the
    // path is the exponential interpolation of the coefficients.
    const double decay = std::exp(-trace.times[k]);
    const ChartVector u_closed =
        (decay * m.u) + ((1.0 - decay) * target.u);
    const ExpDensity closed = chart_to_density(u_closed);
    const Eigen::VectorXd coeff =
        trace.states[k].head(trace.states[k].size() - 1);
    const ExpDensity integrated =
        chart_to_density(ChartVector::centered(space, coeff));
    CHECK((integrated.ratio - closed.ratio).cwiseAbs().maxCoeff() < 1e-6);
    if (k > 0) CHECK(kl_series[k] < kl_series[k - 1] + 1e-14);
    CHECK(trace.column("norm_check")[k] < 1e-8);
  }
  // Exponential contraction of the chart coordinate.
  CHECK(kl_series.back() < kl_series.front() * std::exp(-4.0));
}

TEST_CASE("second kl flow: mixture path in density space") {
  ChartSpacePtr space = space_1d();
  const ExpDensity q0 = chart_to_density(ChartVector::zero(space));
  const ExpDensity q1 = chart_to_density(coordinate_chart(space, 1.0));
  const TimeGrid grid{5.0, 1e-3, 100};

  const FlowTrace still = kl_flow_second(q1, q1, grid);
  for (double v : still.column("kl")) CHECK(std::abs(v) < 1e-12);

  const FlowTrace trace = kl_flow_second(q0, q1, grid);
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const double decay = std::exp(-trace.times[k]);
    const Eigen::VectorXd closed =
        q1.ratio + decay * (q0.ratio - q1.ratio);
    CHECK((trace.states[k] - closed).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(trace.column("norm_check")[k] < 1e-8);
    // A mixture of positive densities stays positive.
    CHECK(trace.column("min_density")[k] > 0.0);
  }
}

TEST_CASE("bg entropy: gaussian value, shift invariance, gradient") {
  ChartSpacePtr space = space_1d();
  const ExpDensity m = chart_to_density(ChartVector::zero(space));
  const double h_gauss = 0.5 * std::log(2.0 * M_PI) + 0.5;
  CHECK(std::abs(bg_entropy(m) - h_gauss) < 1e-9);
  CHECK(h_gauss == doctest::Approx(1.4189385332046727));

  for (double shift : {0.7, -1.1}) {
    const ExpDensity q = chart_to_density(coordinate_chart(space, shift));
    CHECK(std::abs(bg_entropy(q) - h_gauss) < 1e-9);
  }

  const Eigen::VectorXd grad = bg_entropy_gradient(m);
  CHECK(std::abs(m.mean_of(grad)) < 1e-9);
  // -(log M + H(M)) = (x^2 - 1)/2 in one dimension.
  const HermiteRule& rule = space->rule();
  for (std::size_t i = 0; i < rule.size(); i += 4) {
    const double x = rule.node(i)[0];
    CHECK(std::abs(grad[i] - 0.5 * (x * x - 1.0)) < 1e-10);
  }
}

TEST_CASE("entropy derivative matches the tilted covariance formula") {
  ChartSpacePtr space = space_1d();
  SeededSampler rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const ChartVector u = random_chart(space, rng, 0.3);
    const ChartVector v = random_chart(space, rng, 0.4);
    const ExpDensity q = chart_to_density(u);
    const double eps = 1e-5;
    const double fd = (bg_entropy(chart_to_density(u + (eps * v))) -
                       bg_entropy(chart_to_density(u - (eps * v)))) /
                      (2.0 * eps);
    // dH(u)[v] = -Cov_q(u + log M, v).
    const Eigen::VectorXd score =
        (u.node_values().array() + space->log_maxwell().array()).matrix();
    const Eigen::VectorXd vn = v.node_values();
    const double mean_score = q.mean_of(score);
    const double mean_v = q.mean_of(vn);
    const double cov = q.mean_of(
        ((score.array() - mean_score) * (vn.array() - mean_v)).matrix());
    CHECK(std::abs(fd + cov) < 1e-5 * (1.0 + std::abs(cov)));
  }
}

TEST_CASE("entropy upper bound H(q) <= -E_q[log M]") {
  ChartSpacePtr space = space_1d();
  SeededSampler rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const ExpDensity q = chart_to_density(random_chart(space, rng, 0.4));
    const Eigen::VectorXd log_m = space->log_maxwell();
    CHECK(bg_entropy(q) <= -q.mean_of(log_m) + 1e-10);
  }
}

TEST_CASE("entropy hessian: the covariant derivative of grad H is -X") {
  ChartSpacePtr space = space_1d();
  const ExpDensity m = chart_to_density(ChartVector::zero(space));

  const HessianReport zero_report =
      entropy_hessian_check(m, ChartVector::zero(space), 1e-4);
  CHECK(zero_report.max_abs_error < 1e-10);

  const HessianReport x_report =
      entropy_hessian_check(m, coordinate_chart(space, 1.0), 1e-4);
  CHECK(x_report.ok);

  SeededSampler rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const ExpDensity q = chart_to_density(random_chart(space, rng, 0.3));
    const ChartVector x_dir = random_chart(space, rng, 0.5);
    CHECK(entropy_hessian_check(q, x_dir, 1e-4).ok);
  }
}

TEST_CASE("flow traces validate their invariants") {
  FlowTrace trace;
  trace.times = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS(trace.validate(), NumericalError);
  trace.times = {0.0, 1.0};
  trace.columns = {"a"};
  trace.series = {{1.0}};
  CHECK_THROWS_AS(trace.validate(), NumericalError);
  trace.series = {{1.0, 2.0}};
  CHECK_NOTHROW(trace.validate());
  CHECK_THROWS_AS(trace.column("missing"), ConfigError);
}
