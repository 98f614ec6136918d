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

#include "igb/orlicz.hpp"

#include <cmath>

namespace igb {

double YoungPair::phi(double x) { return std::cosh(x) - 1.0; }

double YoungPair::phi_prime(double x) { return std::sinh(x); }

double YoungPair::phi_star(double y) {
  const double a = std::abs(y);
  if (a < 1e-2) {
    // Series around 0; the closed form cancels catastrophically there.
    const double y2 = y * y;
    return y2 * (0.5 + y2 * (-1.0 / 24.0 + y2 / 80.0));
  }
  return y * std::asinh(y) + 1.0 - std::sqrt(1.0 + y * y);
}

double YoungPair::phi_star_prime(double y) { return std::asinh(y); }

DensityHandle DensityHandle::maxwell(
    std::shared_ptr<const HermiteRule> rule) {
  DensityHandle h;
  h.ratio = Eigen::VectorXd::Ones(rule->size());
  h.rule = std::move(rule);
  return h;
}

DensityHandle DensityHandle::from_nodes(
    std::shared_ptr<const HermiteRule> rule, Eigen::VectorXd ratio) {
  if (static_cast<std::size_t>(ratio.size()) != rule->size()) {
    throw ConfigError("DensityHandle: ratio size mismatch with rule");
  }
  if ((ratio.array() <= 0.0).any()) {
    throw EvalError("DensityHandle: density ratio must be strictly positive");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < rule->size(); ++i) {
    mass += rule->weights[i] * ratio[i];
  }
  if (std::abs(mass - 1.0) > 1e-8) {
    throw EvalError("DensityHandle: E[q/M] = " + std::to_string(mass) +
                    ", not 1 within 1e-8 at the attached rule");
  }
  DensityHandle h;
  h.rule = std::move(rule);
  h.ratio = std::move(ratio);
  return h;
}

DensityHandle DensityHandle::from_ratio(
    std::shared_ptr<const HermiteRule> rule, const RealFn& ratio_fn) {
  Eigen::VectorXd r(rule->size());
  for (std::size_t i = 0; i < rule->size(); ++i) r[i] = ratio_fn(rule->node(i));
  return from_nodes(std::move(rule), std::move(r));
}

double DensityHandle::expect_nodes(const Eigen::VectorXd& values) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule->size(); ++i) {
    acc += rule->weights[i] * ratio[i] * values[i];
  }
  return acc;
}

namespace {

Eigen::VectorXd evaluate(const RealFn& f, const HermiteRule& rule) {
  Eigen::VectorXd v(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) v[i] = f(rule.node(i));
  return v;
}

double young(Young which, double x) {
  return which == Young::phi ? YoungPair::phi(x) : YoungPair::phi_star(x);
}

// E_q[Phi(U/lambda)] - 1.  May return +inf: during bracketing an overflow
// just means lambda is too small.
double modular_excess(const Eigen::VectorXd& u, const DensityHandle& p,
                      Young which, double lambda) {
  double acc = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    acc += p.rule->weights[i] * p.ratio[i] * young(which, u[i] / lambda);
    if (!std::isfinite(acc)) return std::numeric_limits<double>::infinity();
  }
  return acc - 1.0;
}

}  // namespace

double luxemburg_norm_nodes(const Eigen::VectorXd& u_nodes,
                            const DensityHandle& p, Young which) {
  if (u_nodes.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  double lo = 1e-8, hi = 1e8;
  while (modular_excess(u_nodes, p, which, hi) > 0.0) {
    hi *= 10.0;
    if (hi > 1e12) {
      throw NumericalError(
          "luxemburg_norm: modular > 1 for all lambda up to 1e12; not a "
          "member at working precision");
    }
  }
  while (modular_excess(u_nodes, p, which, lo) <= 0.0) {
    // The norm sits below the default bracket; chase it downward.
    hi = lo;
    lo *= 0.1;
    if (lo < 1e-300) return 0.0;
  }
  while ((hi - lo) / hi > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (modular_excess(u_nodes, p, which, mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double luxemburg_norm(const RealFn& U, const DensityHandle& p, Young which) {
  return luxemburg_norm_nodes(evaluate(U, *p.rule), p, which);
}

HolderReport holder_pairing_check(const RealFn& U, const RealFn& V,
                                  const DensityHandle& p) {
  const Eigen::VectorXd u = evaluate(U, *p.rule);
  const Eigen::VectorXd v = evaluate(V, *p.rule);
  HolderReport report;
  report.lhs = std::abs(p.expect_nodes((u.array() * v.array()).matrix()));
  report.rhs = 2.0 * luxemburg_norm_nodes(u, p, Young::phi) *
               luxemburg_norm_nodes(v, p, Young::phi_star);
  report.ok = report.lhs <= report.rhs + 1e-9;
  return report;
}

std::vector<double> exp_series_convergence(const RealFn& u, double a,
                                           const DensityHandle& p, int kmax) {
  if (a < 1.0) throw ConfigError("exp_series_convergence: need a >= 1");
  if (kmax < 0) throw ConfigError("exp_series_convergence: need kmax >= 0");
  const Eigen::VectorXd un = evaluate(u, *p.rule);
  const double norm = luxemburg_norm_nodes(un, p, Young::phi);
  if (!(norm < 1.0)) {
    throw EvalError("exp_series_convergence: ||u||_phi = " +
                    std::to_string(norm) + " violates the open unit ball");
  }
  const Eigen::VectorXd scaled = un / a;
  const Eigen::VectorXd target = scaled.array().exp();

  std::vector<double> errors;
  errors.reserve(kmax + 1);
  Eigen::VectorXd partial = Eigen::VectorXd::Ones(un.size());
  Eigen::VectorXd term = Eigen::VectorXd::Ones(un.size());
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) {
      term = (term.array() * scaled.array() / k).matrix();
      partial += term;
    }
    const Eigen::VectorXd diff =
        (target - partial).array().abs().pow(a).matrix();
    errors.push_back(std::pow(p.expect_nodes(diff), 1.0 / a));
  }
  return errors;
}

}  // namespace igb
