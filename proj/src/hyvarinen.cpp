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

#include "igb/hyvarinen.hpp"

#include <cmath>

namespace igb {

SmoothFn smooth_from_chart(const ChartVector& u) {
  SmoothFn f;
  f.value = [u](std::span<const double> x) { return u.value(x); };
  f.deriv = [u](std::span<const double> x, int j) { return u.deriv(x, j); };
  f.deriv2 = [u](std::span<const double> x, int j) {
    double acc = 0.0;
    for (int i = 0; i < u.coeff.size(); ++i) {
      acc += u.coeff[i] * u.space->basis()[i].deriv2(x, j);
    }
    return acc;
  };
  return f;
}

SmoothFn smooth_constant(double c) {
  SmoothFn f;
  f.value = [c](std::span<const double>) { return c; };
  f.deriv = [](std::span<const double>, int) { return 0.0; };
  f.deriv2 = [](std::span<const double>, int) { return 0.0; };
  return f;
}

SmoothFn stein(const SmoothFn& f, int j) {
  SmoothFn out;
  out.value = [f, j](std::span<const double> x) {
    return x[j] * f.value(x) - f.deriv(x, j);
  };
  // d_j (x_j f - d_j f) = f + x_j d_j f - d2_jj f.  Only the diagonal
  // derivative is available; no shipped identity needs the mixed one.
  out.deriv = [f, j](std::span<const double> x, int k) {
    if (k != j) {
      throw ConfigError("stein: off-diagonal derivative not available");
    }
    return f.value(x) + x[j] * f.deriv(x, j) - f.deriv2(x, j);
  };
  out.deriv2 = nullptr;
  return out;
}

AdjointReport stein_adjoint_check(const SmoothFn& f, const SmoothFn& g,
                                  const HermiteRule& rule, double tol) {
  AdjointReport report;
  for (int j = 0; j < rule.dim; ++j) {
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const auto x = rule.node(i);
      lhs += rule.weights[i] * f.value(x) * g.deriv(x, j);
      rhs += rule.weights[i] * (x[j] * f.value(x) - f.deriv(x, j)) *
             g.value(x);
    }
    report.max_error = std::max(report.max_error, std::abs(lhs - rhs));
  }
  report.ok = report.max_error < tol;
  return report;
}

double weak_laplacian_pairing(const SmoothFn& f, const SmoothFn& u,
                              const HermiteRule& rule) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    double term = 0.0;
    for (int j = 0; j < rule.dim; ++j) {
      term += f.deriv(x, j) * (x[j] * u.value(x) - u.deriv(x, j));
    }
    acc += rule.weights[i] * term;
  }
  return acc;
}

double strong_laplacian_pairing(const SmoothFn& f, const SmoothFn& u,
                                const HermiteRule& rule) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    double lap = 0.0;
    for (int j = 0; j < rule.dim; ++j) lap += f.deriv2(x, j);
    acc += rule.weights[i] * lap * u.value(x);
  }
  return acc;
}

double ScoreIdentityReport::max_error() const {
  return std::max(std::max(err[0], err[1]), std::max(err[2], err[3]));
}

namespace {

Eigen::VectorXd node_coordinate(const ChartSpace& space, int axis) {
  const HermiteRule& rule = space.rule();
  Eigen::VectorXd x(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) x[i] = rule.node(i)[axis];
  return x;
}

double weighted_mean(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  return w.dot(v);
}

}  // namespace

ScoreIdentityReport score_identities(const ChartVector& u,
                                     const ChartVector& v) {
  const ChartSpacePtr space = u.space;
  const ExpDensity g = chart_to_density(v);
  const Eigen::VectorXd wm = space->weights();
  const Eigen::VectorXd wg =
      (space->weights().array() * g.ratio.array()).matrix();

  const Eigen::VectorXd un = u.node_values();
  const Eigen::VectorXd vn = v.node_values();

  ScoreIdentityReport report;
  for (int j = 0; j < space->dim(); ++j) {
    const Eigen::VectorXd xj = node_coordinate(*space, j);
    const Eigen::VectorXd du = u.grad_node_values(j);
    const Eigen::VectorXd dv = v.grad_node_values(j);
    const Eigen::VectorXd score =
        (xj - dv).matrix();  // X_j - d_j v, the negative score of g

    // (1) E_M[d_j u] = Cov_M(u, X_j)
    const double cov_m = weighted_mean(wm, (un.array() * xj.array()).matrix()) -
                         weighted_mean(wm, un) * weighted_mean(wm, xj);
    report.err[0] =
        std::max(report.err[0], std::abs(weighted_mean(wm, du) - cov_m));

    // (2) E_g[X_j - d_j v] = 0
    report.err[1] = std::max(report.err[1], std::abs(weighted_mean(wg, score)));

    // (3) E_g[d_j u] = Cov_g(u, X_j - d_j v)
    const double mean_u_g = weighted_mean(wg, un);
    const double mean_score_g = weighted_mean(wg, score);
    const double cov_g =
        weighted_mean(wg, (un.array() * score.array()).matrix()) -
        mean_u_g * mean_score_g;
    report.err[2] =
        std::max(report.err[2], std::abs(weighted_mean(wg, du) - cov_g));

    // (4) E_g[d_j u - d_j v] = Cov_g(u - v, X_j - d_j v)
    const Eigen::VectorXd diff = un - vn;
    const double cov_diff =
        weighted_mean(wg, (diff.array() * score.array()).matrix()) -
        weighted_mean(wg, diff) * mean_score_g;
    report.err[3] = std::max(
        report.err[3], std::abs(weighted_mean(wg, du - dv) - cov_diff));
  }
  return report;
}

HyvarinenValue hyvarinen(const ExpDensity& g, const ExpDensity& f) {
  if (g.space() != f.space()) {
    throw ConfigError("hyvarinen: densities on different chart spaces");
  }
  const ChartSpacePtr space = g.space();
  const Eigen::VectorXd wg =
      (space->weights().array() * g.ratio.array()).matrix();

  double absolute = 0.0, chart = 0.0;
  for (int j = 0; j < space->dim(); ++j) {
    const Eigen::VectorXd xj = node_coordinate(*space, j);
    const Eigen::VectorXd du = f.u.grad_node_values(j);
    const Eigen::VectorXd dv = g.u.grad_node_values(j);
    // grad log f = grad u - x, grad log g = grad v - x.
    const Eigen::VectorXd log_f_score = du - xj;
    const Eigen::VectorXd log_g_score = dv - xj;
    absolute += weighted_mean(
        wg, (log_f_score - log_g_score).array().square().matrix());
    chart += weighted_mean(wg, (du - dv).array().square().matrix());
  }
  return {absolute, chart};
}

namespace {

// sum_j grad w . (grad u - grad v) as node values.
Eigen::VectorXd grad_dot(const ChartVector& w, const ChartVector& u,
                         const ChartVector& v) {
  const ChartSpacePtr space = w.space;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(space->rule().size());
  for (int j = 0; j < space->dim(); ++j) {
    acc.array() += w.grad_node_values(j).array() *
                   (u.grad_node_values(j) - v.grad_node_values(j)).array();
  }
  return acc;
}

}  // namespace

double hyvarinen_grad_first(const ExpDensity& g, const ExpDensity& f,
                            const ChartVector& w) {
  return 2.0 * g.mean_of(grad_dot(w, f.u, g.u));
}

double hyvarinen_grad_second(const ExpDensity& g, const ExpDensity& f,
                             const ChartVector& w) {
  const ChartSpacePtr space = g.space();
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(space->rule().size());
  for (int j = 0; j < space->dim(); ++j) {
    sq.array() +=
        (f.u.grad_node_values(j) - g.u.grad_node_values(j)).array().square();
  }
  const Eigen::VectorXd wn = w.node_values();
  const double cov = g.mean_of((wn.array() * sq.array()).matrix()) -
                     g.mean_of(wn) * g.mean_of(sq);
  return -2.0 * g.mean_of(grad_dot(w, f.u, g.u)) + cov;
}

PairingReport w1w2_check(const ChartVector& w1, const ChartVector& w2,
                         const ChartVector& v) {
  const ChartSpacePtr space = w1.space;
  const ExpDensity g = chart_to_density(v);

  // lhs: <Delta w2, h> with h = w1 e^{v-K}, through the Stein pairing
  // sum_j <d_j w2, x_j h - d_j h>_M and d_j h = (d_j w1 + w1 d_j v) e^{v-K}.
  const Eigen::VectorXd w1n = w1.node_values();
  const Eigen::VectorXd& wts = space->weights();
  double lhs = 0.0;
  for (int j = 0; j < space->dim(); ++j) {
    const Eigen::VectorXd xj = node_coordinate(*space, j);
    const Eigen::VectorXd dw2 = w2.grad_node_values(j);
    const Eigen::VectorXd dh =
        ((w1.grad_node_values(j).array() +
          w1n.array() * v.grad_node_values(j).array()) *
         g.ratio.array())
            .matrix();
    const Eigen::VectorXd delta_h =
        (xj.array() * w1n.array() * g.ratio.array() - dh.array()).matrix();
    lhs += wts.dot((dw2.array() * delta_h.array()).matrix());
  }

  // rhs: -E_g[grad w1 . grad w2] + E_g[w1 (X - grad v) . grad w2].
  double rhs = 0.0;
  {
    Eigen::VectorXd term = Eigen::VectorXd::Zero(space->rule().size());
    for (int j = 0; j < space->dim(); ++j) {
      const Eigen::VectorXd xj = node_coordinate(*space, j);
      const Eigen::VectorXd dw2 = w2.grad_node_values(j);
      term.array() -= w1.grad_node_values(j).array() * dw2.array();
      term.array() += w1n.array() *
                      (xj - v.grad_node_values(j)).array() * dw2.array();
    }
    rhs = g.mean_of(term);
  }

  PairingReport report;
  report.lhs = lhs;
  report.rhs = rhs;
  report.abs_error = std::abs(lhs - rhs);
  return report;
}

}  // namespace igb
