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

#include "igb/manifold.hpp"

#include <cmath>

namespace igb {

ChartSpace::ChartSpace(HermiteRule rule, std::vector<BasisFunction> basis,
                       bool cache_gradients)
    : rule_(std::move(rule)), basis_(std::move(basis)) {
  for (const auto& b : basis_) {
    if (b.dim() != rule_.dim) {
      throw ConfigError("ChartSpace: basis dimension mismatch with rule");
    }
  }
  const std::size_t n = rule_.size();
  const int nb = static_cast<int>(basis_.size());
  values_.resize(n, nb);
  if (cache_gradients) grads_.assign(rule_.dim, Eigen::MatrixXd(n, nb));
  weights_.resize(n);
  log_maxwell_.resize(n);
  const double log_norm = -0.5 * rule_.dim * std::log(2.0 * M_PI);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = rule_.node(i);
    weights_[i] = rule_.weights[i];
    double sq = 0.0;
    for (int d = 0; d < rule_.dim; ++d) sq += x[d] * x[d];
    log_maxwell_[i] = log_norm - 0.5 * sq;
    for (int j = 0; j < nb; ++j) {
      values_(i, j) = basis_[j].value(x);
      if (!grads_.empty()) {
        for (int d = 0; d < rule_.dim; ++d) {
          grads_[d](i, j) = basis_[j].deriv(x, d);
        }
      }
    }
  }
  mean_ = values_.transpose() * weights_;
}

ChartSpacePtr make_chart_space(HermiteRule rule,
                               std::vector<BasisFunction> basis,
                               bool cache_gradients) {
  return std::make_shared<const ChartSpace>(std::move(rule), std::move(basis),
                                            cache_gradients);
}

ChartVector ChartVector::centered(ChartSpacePtr space, Eigen::VectorXd coeff) {
  if (coeff.size() != space->size()) {
    throw ConfigError("ChartVector: coefficient count mismatch");
  }
  ChartVector u;
  u.center = space->mean().dot(coeff);
  u.space = std::move(space);
  u.coeff = std::move(coeff);
  return u;
}

ChartVector ChartVector::zero(ChartSpacePtr space) {
  const int nb = space->size();
  return centered(std::move(space), Eigen::VectorXd::Zero(nb));
}

double ChartVector::value(std::span<const double> x) const {
  double acc = -center;
  for (int j = 0; j < coeff.size(); ++j) {
    acc += coeff[j] * space->basis()[j].value(x);
  }
  return acc;
}

double ChartVector::deriv(std::span<const double> x, int axis) const {
  double acc = 0.0;
  for (int j = 0; j < coeff.size(); ++j) {
    acc += coeff[j] * space->basis()[j].deriv(x, axis);
  }
  return acc;
}

Eigen::VectorXd ChartVector::node_values() const {
  return ((space->values() * coeff).array() - center).matrix();
}

Eigen::VectorXd ChartVector::grad_node_values(int axis) const {
  return space->grad(axis) * coeff;
}

Eigen::MatrixXd ChartVector::quadratic_form() const {
  const int n = space->dim();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  const auto& basis = space->basis();
  for (int j = 0; j < coeff.size(); ++j) {
    if (basis[j].kind() != BasisFunction::Kind::hermite) continue;
    const auto& alpha = basis[j].multi_index();
    int total = 0;
    for (int a : alpha) total += a;
    if (total != 2) continue;
    int first = -1, second = -1;
    for (int d = 0; d < n; ++d) {
      if (alpha[d] == 2) first = second = d;
      if (alpha[d] == 1) (first < 0 ? first : second) = d;
    }
    if (first == second) {
      q(first, first) += coeff[j];  // He_2(x) = x^2 - 1
    } else {
      q(first, second) += 0.5 * coeff[j];  // cross term x_i x_j
      q(second, first) += 0.5 * coeff[j];
    }
  }
  return q;
}

bool ChartVector::in_guarded_domain(double* smallest_pivot) const {
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(space->dim(), space->dim()) -
      2.0 * quadratic_form();
  // Plain Cholesky with explicit pivots d_k.
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  double min_pivot = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    double d = a(k, k);
    for (int j = 0; j < k; ++j) d -= l(k, j) * l(k, j);
    min_pivot = std::min(min_pivot, d);
    if (d <= 0.0) {
      if (smallest_pivot) *smallest_pivot = min_pivot;
      return false;
    }
    l(k, k) = std::sqrt(d);
    for (int i = k + 1; i < n; ++i) {
      double v = a(i, k);
      for (int j = 0; j < k; ++j) v -= l(i, j) * l(k, j);
      l(i, k) = v / l(k, k);
    }
  }
  if (smallest_pivot) *smallest_pivot = min_pivot;
  return min_pivot > 1e-8;
}

namespace {

void check_same_space(const ChartVector& a, const ChartVector& b) {
  if (a.space != b.space) {
    throw ConfigError("chart vectors live on different chart spaces");
  }
}

}  // namespace

ChartVector operator+(const ChartVector& a, const ChartVector& b) {
  check_same_space(a, b);
  ChartVector r = a;
  r.coeff += b.coeff;
  r.center += b.center;
  return r;
}

ChartVector operator-(const ChartVector& a, const ChartVector& b) {
  check_same_space(a, b);
  ChartVector r = a;
  r.coeff -= b.coeff;
  r.center -= b.center;
  return r;
}

ChartVector operator*(double s, const ChartVector& a) {
  ChartVector r = a;
  r.coeff *= s;
  r.center *= s;
  return r;
}

double ExpDensity::ratio_at(std::span<const double> x) const {
  return std::exp(u.value(x) - cumulant);
}

double ExpDensity::mean_of(const Eigen::VectorXd& node_values) const {
  return (u.space->weights().array() * ratio.array() * node_values.array())
      .sum();
}

double cumulant(const ChartVector& u) {
  const Eigen::VectorXd uv = u.node_values();
  const double shift = uv.maxCoeff();
  if (!std::isfinite(shift) || shift > 700.0) {
    throw EvalError(
        "cumulant: e^u overflows at a node; the quadratic-form guard was "
        "bypassed");
  }
  const double s =
      (u.space->weights().array() * (uv.array() - shift).exp()).sum();
  return shift + std::log(s);
}

namespace {

struct Tilted {
  Eigen::VectorXd weight;  // quadrature weights times e^{u-K}
};

Tilted tilt(const ChartVector& u) {
  const double k = cumulant(u);
  const Eigen::VectorXd uv = u.node_values();
  Tilted t;
  t.weight = (u.space->weights().array() * (uv.array() - k).exp()).matrix();
  return t;
}

}  // namespace

double cumulant_d1(const ChartVector& u, const ChartVector& v) {
  check_same_space(u, v);
  return tilt(u).weight.dot(v.node_values());
}

double cumulant_d2(const ChartVector& u, const ChartVector& v1,
                   const ChartVector& v2) {
  check_same_space(u, v1);
  check_same_space(u, v2);
  const Tilted t = tilt(u);
  const Eigen::VectorXd a = v1.node_values();
  const Eigen::VectorXd b = v2.node_values();
  const double ma = t.weight.dot(a);
  const double mb = t.weight.dot(b);
  return (t.weight.array() * (a.array() - ma) * (b.array() - mb)).sum();
}

double cumulant_d3(const ChartVector& u, const ChartVector& v1,
                   const ChartVector& v2, const ChartVector& v3) {
  const Tilted t = tilt(u);
  const Eigen::VectorXd a = v1.node_values();
  const Eigen::VectorXd b = v2.node_values();
  const Eigen::VectorXd c = v3.node_values();
  const double ma = t.weight.dot(a);
  const double mb = t.weight.dot(b);
  const double mc = t.weight.dot(c);
  return (t.weight.array() * (a.array() - ma) * (b.array() - mb) *
          (c.array() - mc))
      .sum();
}

double cumulant_directional(const ChartVector& u, const ChartVector& v,
                            int order) {
  if (order < 1 || order > 6) {
    throw ConfigError("cumulant_directional: order must be in [1, 6]");
  }
  const Tilted t = tilt(u);
  const Eigen::VectorXd a = v.node_values();
  const double m1 = t.weight.dot(a);
  if (order == 1) return m1;
  // Central moments mu_2..mu_6 of v under the tilted density.
  double mu[7] = {1.0, 0.0, 0, 0, 0, 0, 0};
  for (int k = 2; k <= order; ++k) {
    mu[k] = (t.weight.array() * (a.array() - m1).pow(k)).sum();
  }
  switch (order) {
    case 2: return mu[2];
    case 3: return mu[3];
    case 4: return mu[4] - 3.0 * mu[2] * mu[2];
    case 5: return mu[5] - 10.0 * mu[3] * mu[2];
    case 6:
      return mu[6] - 15.0 * mu[4] * mu[2] - 10.0 * mu[3] * mu[3] +
             30.0 * mu[2] * mu[2] * mu[2];
  }
  return 0.0;
}

ExpDensity chart_to_density(const ChartVector& u) {
  ExpDensity f;
  f.cumulant = cumulant(u);
  f.ratio = (u.node_values().array() - f.cumulant).exp().matrix();
  f.u = u;
  if ((f.ratio.array() <= 0.0).any()) {
    throw EvalError("chart_to_density: density ratio not strictly positive");
  }
  return f;
}

ChartVector density_to_chart(const ChartSpacePtr& space,
                             const Eigen::VectorXd& ratio_at_nodes,
                             double residual_tol) {
  if ((ratio_at_nodes.array() <= 0.0).any()) {
    throw EvalError("density_to_chart: ratio must be strictly positive");
  }
  const Eigen::VectorXd target = ratio_at_nodes.array().log();
  // Weighted least squares of log(f/M) on span{1, b_1..b_nb}; the constant
  // component carries -K and is dropped by re-centering.
  const int nb = space->size();
  const Eigen::VectorXd& w = space->weights();
  Eigen::MatrixXd design(space->rule().size(), nb + 1);
  design.col(0).setOnes();
  design.rightCols(nb) = space->values();
  const Eigen::MatrixXd wd = w.asDiagonal() * design;
  const Eigen::MatrixXd gram = design.transpose() * wd;
  const Eigen::VectorXd rhs = wd.transpose() * target;
  const Eigen::VectorXd sol = gram.ldlt().solve(rhs);
  const Eigen::VectorXd fitted = design * sol;
  const double residual = std::sqrt(
      (w.array() * (target - fitted).array().square()).sum());
  if (residual > residual_tol) {
    throw EvalError(
        "density_to_chart: projection residual " + std::to_string(residual) +
        " exceeds tolerance; density is not representable in the basis");
  }
  return ChartVector::centered(space, sol.tail(nb));
}

ChartVector e_transport(const ChartVector& u, const ExpDensity& from,
                        const ExpDensity& to) {
  (void)from;  // the exponential transport depends on the target only
  ChartVector r = u;
  r.center += to.mean_of(u.node_values());
  return r;
}

Eigen::VectorXd m_transport(const Eigen::VectorXd& v, const ExpDensity& from,
                            const ExpDensity& to) {
  return (v.array() * from.ratio.array() / to.ratio.array()).matrix();
}

double pairing(const ExpDensity& q, const Eigen::VectorXd& a,
               const Eigen::VectorXd& b) {
  return (q.u.space->weights().array() * q.ratio.array() * a.array() *
          b.array())
      .sum();
}

namespace {

// E_p[(q/p)^{1+eps}] evaluated over an arbitrary rule by direct evaluation
// of both chart vectors.  Infinity-tolerant: overflow is information here.
double tilted_power(const HermiteRule& rule, const ChartVector& up, double kp,
                    const ChartVector& uq, double kq, double eps) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    const double lr = (uq.value(x) - kq) - (up.value(x) - kp);
    acc += rule.weights[i] * std::exp((1.0 + eps) * lr);
  }
  return acc;
}

}  // namespace

ArcReport connected_by_arc(const ExpDensity& p, const ExpDensity& q,
                           const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw ConfigError("connected_by_arc: empty eps grid");
  double eps = eps_grid.front();
  for (double e : eps_grid) eps = std::min(eps, e);
  if (eps <= 0.0) throw ConfigError("connected_by_arc: eps must be positive");

  const ChartSpace& space = *p.space();
  const HermiteRule& coarse = space.rule();
  const HermiteRule fine =
      make_hermite_rule(coarse.dim, coarse.nodes_per_axis + 4);

  ArcReport report;
  report.eps = eps;
  const double kp = p.cumulant, kq = q.cumulant;
  report.forward = tilted_power(coarse, p.u, kp, q.u, kq, eps);
  report.backward = tilted_power(coarse, q.u, kq, p.u, kp, eps);
  const double fwd_fine = tilted_power(fine, p.u, kp, q.u, kq, eps);
  const double bwd_fine = tilted_power(fine, q.u, kq, p.u, kp, eps);

  const bool finite = std::isfinite(report.forward) &&
                      std::isfinite(report.backward) &&
                      std::isfinite(fwd_fine) && std::isfinite(bwd_fine);
  report.forward_drift =
      finite ? std::abs(fwd_fine - report.forward) / std::abs(fwd_fine) : 1.0;
  report.backward_drift =
      finite ? std::abs(bwd_fine - report.backward) / std::abs(bwd_fine) : 1.0;
  const bool stable =
      finite && report.forward_drift < 0.10 && report.backward_drift < 0.10;
  report.status = stable ? ArcStatus::connected : ArcStatus::undetermined;
  return report;
}

ProductRuleReport duality_product_rule_check(const FieldCurve& F,
                                             const FieldCurve& G,
                                             const ChartCurve& p_curve,
                                             double t0, double eps,
                                             double rel_tol) {
  const ExpDensity p0 = chart_to_density(p_curve(t0));
  const auto density_at = [&](double t) { return chart_to_density(p_curve(t)); };

  // A pretangent field is centered in its own fiber; enforce that on F so
  // the coupling matches its transported representation exactly.
  const auto f_fiber = [&](double t) -> Eigen::VectorXd {
    const ExpDensity pt = density_at(t);
    const Eigen::VectorXd f = F(t);
    return (f.array() - pt.mean_of(f)).matrix();
  };

  const auto coupling = [&](double t) {
    const ExpDensity pt = density_at(t);
    return pairing(pt, f_fiber(t), G(t));
  };

  ProductRuleReport report;
  report.fd_derivative =
      (coupling(t0 + eps) - coupling(t0 - eps)) / (2.0 * eps);

  // Mixture transport of F and exponential transport of G into the fixed
  // frame at p(t0); there the naive product rule is the covariant one.
  const auto f_at_p0 = [&](double t) -> Eigen::VectorXd {
    return m_transport(f_fiber(t), density_at(t), p0);
  };
  const auto g_at_p0 = [&](double t) -> Eigen::VectorXd {
    const Eigen::VectorXd g = G(t);
    return (g.array() - p0.mean_of(g)).matrix();
  };
  const Eigen::VectorXd df =
      (f_at_p0(t0 + eps) - f_at_p0(t0 - eps)) / (2.0 * eps);
  const Eigen::VectorXd dg =
      (g_at_p0(t0 + eps) - g_at_p0(t0 - eps)) / (2.0 * eps);
  report.term_mixture = pairing(p0, df, g_at_p0(t0));
  report.term_exponential = pairing(p0, f_at_p0(t0), dg);

  const double sum = report.term_mixture + report.term_exponential;
  const double scale =
      std::max({std::abs(report.fd_derivative), std::abs(sum), 1e-12});
  report.rel_error = std::abs(report.fd_derivative - sum) / scale;
  report.ok = report.rel_error < rel_tol;
  return report;
}

}  // namespace igb
