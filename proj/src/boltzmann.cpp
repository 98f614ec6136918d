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

#include "igb/boltzmann.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace igb {

namespace {

constexpr int kMaxHermiteDegree = 12;
// C(12+3, 3) = 455 basis functions at the degree cap.
constexpr int kMaxBasisSize = 480;

// Normalized probabilist Hermite values hhat_0..hhat_k at x.
void hermite_normalized_all(int k, double x, double* out) {
  out[0] = 1.0;
  if (k == 0) return;
  out[1] = x;
  for (int i = 1; i < k; ++i) {
    out[i + 1] =
        (x * out[i] - std::sqrt(static_cast<double>(i)) * out[i - 1]) /
        std::sqrt(static_cast<double>(i + 1));
  }
}

}  // namespace

HermiteBasis3::HermiteBasis3(int degree) : degree_(degree) {
  if (degree < 0 || degree > kMaxHermiteDegree) {
    throw ConfigError("HermiteBasis3: degree out of range [0, 12]");
  }
  lookup_.assign((degree + 1) * (degree + 1) * (degree + 1), -1);
  for (int total = 0; total <= degree; ++total) {
    for (int ax = total; ax >= 0; --ax) {
      for (int ay = total - ax; ay >= 0; --ay) {
        const int az = total - ax - ay;
        lookup_[(ax * (degree + 1) + ay) * (degree + 1) + az] =
            static_cast<int>(indices_.size());
        indices_.push_back({ax, ay, az});
      }
    }
  }
}

int HermiteBasis3::index_of(int ax, int ay, int az) const {
  if (ax < 0 || ay < 0 || az < 0 || ax + ay + az > degree_) return -1;
  return lookup_[(ax * (degree_ + 1) + ay) * (degree_ + 1) + az];
}

void HermiteBasis3::eval(const Vec3& x, double* out) const {
  double hx[kMaxHermiteDegree + 1];
  double hy[kMaxHermiteDegree + 1];
  double hz[kMaxHermiteDegree + 1];
  hermite_normalized_all(degree_, x[0], hx);
  hermite_normalized_all(degree_, x[1], hy);
  hermite_normalized_all(degree_, x[2], hz);
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    const auto& a = indices_[j];
    out[j] = hx[a[0]] * hy[a[1]] * hz[a[2]];
  }
}

double HermiteBasis3::eval_one(int j, const Vec3& x) const {
  const auto& a = indices_[j];
  double h[kMaxHermiteDegree + 1];
  double value = 1.0;
  for (int d = 0; d < 3; ++d) {
    hermite_normalized_all(a[d], x[d], h);
    value *= h[a[d]];
  }
  return value;
}

Interaction Interaction::maxwell(double constant) {
  if (!(constant > 0.0)) throw ConfigError("Interaction: constant must be > 0");
  Interaction b;
  b.kind_ = Kind::maxwell_constant;
  b.constant_ = constant;
  b.lambda_ = 0.0;
  b.bound_a_ = constant;
  b.bound_b_ = constant;
  b.bound_c_ = constant;
  b.bound_lambda_ = 0.0;
  return b;
}

Interaction Interaction::power_law(double lambda, double constant) {
  if (!(constant > 0.0)) throw ConfigError("Interaction: constant must be > 0");
  if (!(lambda > 0.0) || lambda > 2.0) {
    throw ConfigError(
        "Interaction: power-law exponent must lie in (0, 2] to satisfy the "
        "quadratic upper bound");
  }
  Interaction b;
  b.kind_ = Kind::power_law;
  b.constant_ = constant;
  b.lambda_ = lambda;
  // r^lambda <= 1 + r^2 for lambda in (0, 2].
  b.bound_a_ = constant;
  b.bound_b_ = constant;
  b.bound_c_ = constant;
  b.bound_lambda_ = lambda;
  return b;
}

double Interaction::from_gap(double gap) const {
  switch (kind_) {
    case Kind::maxwell_constant:
      return constant_;
    case Kind::power_law:
      return constant_ * std::pow(gap, lambda_);
  }
  return 0.0;
}

PolyDensity PolyDensity::from_coeff(HermiteBasis3Ptr basis,
                                    Eigen::VectorXd coeff) {
  if (coeff.size() != basis->size()) {
    throw ConfigError("PolyDensity: coefficient count mismatch");
  }
  if (std::abs(coeff[0] - 1.0) > 1e-10) {
    throw EvalError("PolyDensity: degree-0 coefficient must be 1 (unit mass)");
  }
  PolyDensity f;
  f.basis = std::move(basis);
  f.coeff = std::move(coeff);
  return f;
}

PolyDensity PolyDensity::maxwell(HermiteBasis3Ptr basis) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  c[0] = 1.0;
  return from_coeff(std::move(basis), std::move(c));
}

PolyDensity PolyDensity::isotropic4(HermiteBasis3Ptr basis, double c) {
  if (basis->degree() < 4) {
    throw ConfigError("PolyDensity::isotropic4: need degree >= 4");
  }
  // |v|^4 - 10|v|^2 + 15 = sum_i He4(v_i) + 2 sum_{i<j} He2(v_i) He2(v_j),
  // squared norm 120.
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis->size());
  coeff[0] = 1.0;
  const double scale = c / std::sqrt(120.0);
  const double quartic = std::sqrt(24.0) * scale;
  const double cross = 4.0 * scale;
  coeff[basis->index_of(4, 0, 0)] += quartic;
  coeff[basis->index_of(0, 4, 0)] += quartic;
  coeff[basis->index_of(0, 0, 4)] += quartic;
  coeff[basis->index_of(2, 2, 0)] += cross;
  coeff[basis->index_of(2, 0, 2)] += cross;
  coeff[basis->index_of(0, 2, 2)] += cross;
  return from_coeff(std::move(basis), std::move(coeff));
}

double PolyDensity::eval(const Vec3& x) const {
  double h[kMaxBasisSize];
  basis->eval(x, h);
  double acc = 0.0;
  for (int j = 0; j < coeff.size(); ++j) acc += coeff[j] * h[j];
  return acc;
}

Vec3 PolyDensity::mean() const {
  return {coeff[basis->index_of(1, 0, 0)], coeff[basis->index_of(0, 1, 0)],
          coeff[basis->index_of(0, 0, 1)]};
}

double PolyDensity::energy() const {
  const double s2 = std::sqrt(2.0);
  return 3.0 * coeff[0] + s2 * (coeff[basis->index_of(2, 0, 0)] +
                                coeff[basis->index_of(0, 2, 0)] +
                                coeff[basis->index_of(0, 0, 2)]);
}

Eigen::Matrix3d PolyDensity::second_moment() const {
  Eigen::Matrix3d m;
  const double s2 = std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> idx{0, 0, 0};
    idx[i] = 2;
    m(i, i) = coeff[0] + s2 * coeff[basis->index_of(idx[0], idx[1], idx[2])];
    for (int j = i + 1; j < 3; ++j) {
      std::array<int, 3> cross{0, 0, 0};
      cross[i] = 1;
      cross[j] = 1;
      m(i, j) = m(j, i) =
          coeff[basis->index_of(cross[0], cross[1], cross[2])];
    }
  }
  return m;
}

double PolyDensity::min_on_rule(const HermiteRule& rule) const {
  double lowest = std::numeric_limits<double>::infinity();
  std::vector<double> h(basis->size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    basis->eval(Vec3(x[0], x[1], x[2]), h.data());
    double p = 0.0;
    for (int j = 0; j < coeff.size(); ++j) p += coeff[j] * h[j];
    lowest = std::min(lowest, p);
  }
  return lowest;
}

InvariantQuad InvariantQuad::make(int mz, int mt, int polar, int azimuthal) {
  InvariantQuad q;
  const Grid1d gz = gauss_hermite_1d(mz);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  q.z.reserve(static_cast<std::size_t>(mz) * mz * mz);
  q.wz.reserve(q.z.capacity());
  for (int i = 0; i < mz; ++i) {
    for (int j = 0; j < mz; ++j) {
      for (int k = 0; k < mz; ++k) {
        q.z.emplace_back(gz.first[i] * inv_sqrt2, gz.first[j] * inv_sqrt2,
                         gz.first[k] * inv_sqrt2);
        q.wz.push_back(gz.second[i] * gz.second[j] * gz.second[k]);
      }
    }
  }
  const Grid1d gt = gauss_laguerre_half_1d(mt);
  q.radius.resize(mt);
  q.wr.resize(mt);
  for (int i = 0; i < mt; ++i) {
    q.radius[i] = std::sqrt(gt.first[i]);
    q.wr[i] = gt.second[i];
  }
  q.sphere = make_sphere_rule(polar, azimuthal);
  return q;
}

ExpDensity tensorize(const ExpDensity& f, const ExpDensity& g,
                     int nodes_per_axis) {
  const auto lift = [](const BasisFunction& b, bool first) -> BasisFunction {
    std::vector<int> alpha(6, 0);
    std::vector<double> freq(6, 0.0);
    const int offset = first ? 0 : 3;
    switch (b.kind()) {
      case BasisFunction::Kind::hermite:
        for (int d = 0; d < b.dim(); ++d) {
          alpha[offset + d] = b.multi_index()[d];
        }
        return BasisFunction::hermite(alpha);
      case BasisFunction::Kind::cosine:
        for (int d = 0; d < b.dim(); ++d) freq[offset + d] = b.frequency()[d];
        return BasisFunction::cosine(freq);
      case BasisFunction::Kind::sine:
        for (int d = 0; d < b.dim(); ++d) freq[offset + d] = b.frequency()[d];
        return BasisFunction::sine(freq);
    }
    throw ConfigError("tensorize: unknown basis kind");
  };
  if (f.space()->dim() != 3 || g.space()->dim() != 3) {
    throw ConfigError("tensorize: factors must live on R^3");
  }
  std::vector<BasisFunction> basis6;
  basis6.reserve(f.space()->size() + g.space()->size());
  for (const auto& b : f.space()->basis()) basis6.push_back(lift(b, true));
  for (const auto& b : g.space()->basis()) basis6.push_back(lift(b, false));
  ChartSpacePtr space6 = make_chart_space(
      make_hermite_rule(6, nodes_per_axis), std::move(basis6),
      /*cache_gradients=*/false);
  Eigen::VectorXd coeff(space6->size());
  coeff << f.u.coeff, g.u.coeff;
  return chart_to_density(ChartVector::centered(space6, coeff));
}

double condition_on_invariants(const PairFn& g, const VelocityPair& pair,
                               const SphereRule& sphere) {
  const Vec3 z = pair.center();
  const double rho = pair.half_gap();
  double acc = 0.0;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    acc += sphere.weights[i] *
           g(z + rho * sphere.nodes[i], z - rho * sphere.nodes[i]);
  }
  return acc;
}

double condition_pi_weighted(const PairFn& g, const VelocityPair& pair,
                             const SphereRule& sphere) {
  const Vec3 kappa = pair.kappa();
  const SphereRule oriented = make_sphere_rule_oriented(
      sphere.polar_order, sphere.azimuthal_order, kappa);
  const Vec3 diff = pair.v - pair.w;
  double acc = 0.0;
  for (std::size_t i = 0; i < oriented.size(); ++i) {
    const Vec3& omega = oriented.nodes[i];
    const Vec3 exchanged = omega * omega.dot(diff);
    acc += oriented.weights[i] * 2.0 * std::abs(omega.dot(kappa)) *
           g(pair.v - exchanged, pair.w + exchanged);
  }
  return acc;
}

double tilted_conditional(const PairFn& f_tensor, const PairFn& g,
                          const VelocityPair& pair, const SphereRule& sphere) {
  const Vec3 z = pair.center();
  const double rho = pair.half_gap();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    const Vec3 vp = z + rho * sphere.nodes[i];
    const Vec3 wp = z - rho * sphere.nodes[i];
    const double fi = f_tensor(vp, wp);
    num += sphere.weights[i] * g(vp, wp) * fi;
    den += sphere.weights[i] * fi;
  }
  if (std::abs(den) < 1e-12) {
    throw EvalError("tilted_conditional: vanishing denominator");
  }
  return num / den;
}

double a_operator(const PointFn& g, const VelocityPair& pair,
                  const SphereRule& sphere) {
  const auto gbar = [&g](const Vec3& v, const Vec3& w) {
    return 0.5 * (g(v) + g(w));
  };
  return condition_on_invariants(gbar, pair, sphere) - gbar(pair.v, pair.w);
}

double a_operator_pair(const PairFn& f, const VelocityPair& pair,
                       const SphereRule& sphere) {
  return condition_on_invariants(f, pair, sphere) - f(pair.v, pair.w);
}

namespace {

// Deterministic parallel reduction: fixed chunking over the leading tensor
// axis, per-chunk partial sums combined in chunk order.
template <typename Body>
std::vector<std::vector<double>> chunked_parallel(
    int chunks, int threads, int accumulators, const Body& body) {
  std::vector<std::vector<double>> partial(
      chunks, std::vector<double>(accumulators, 0.0));
  if (threads <= 1) {
    for (int c = 0; c < chunks; ++c) body(c, partial[c].data());
    return partial;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, chunks);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
        body(c, partial[c].data());
      }
    });
  }
  for (auto& th : pool) th.join();
  return partial;
}

struct WeakFormOrders {
  int m = 0, polar = 0, azimuthal = 0;
};

WeakFormOrders resolve_weak_orders(int degree, const WeakFormOptions& opts) {
  WeakFormOrders o;
  o.m = opts.nodes_per_axis > 0 ? opts.nodes_per_axis
                                : std::max(degree + 3, (3 * degree) / 2 + 1);
  o.polar = opts.sphere_polar > 0 ? opts.sphere_polar : std::max(degree + 1, 6);
  o.azimuthal = opts.sphere_azimuthal > 0 ? opts.sphere_azimuthal
                                          : std::max(2 * degree + 2, 12);
  return o;
}

}  // namespace

double maxwell_weak_form(const PolyDensity& f, const PointFn& g,
                         const Interaction& b, const WeakFormOptions& opts) {
  const int degree = f.basis->degree();
  const WeakFormOrders o = resolve_weak_orders(degree, opts);
  const Grid1d g1 = gauss_hermite_1d(o.m);
  const SphereRule sphere = make_sphere_rule(o.polar, o.azimuthal);
  const auto body = [&](int chunk, double* acc) {
    std::array<int, 6> odo{chunk, 0, 0, 0, 0, 0};
    do {
      Vec3 v(g1.first[odo[0]], g1.first[odo[1]], g1.first[odo[2]]);
      Vec3 w(g1.first[odo[3]], g1.first[odo[4]], g1.first[odo[5]]);
      double weight = g1.second[odo[0]];
      for (int d = 1; d < 6; ++d) weight *= g1.second[odo[d]];

      const Vec3 z = 0.5 * (v + w);
      const double rho = 0.5 * (v - w).norm();
      double sigma_avg = 0.0;
      for (std::size_t s = 0; s < sphere.size(); ++s) {
        sigma_avg += sphere.weights[s] *
                     (g(z + rho * sphere.nodes[s]) + g(z - rho * sphere.nodes[s]));
      }
      const double ag = 0.5 * sigma_avg - 0.5 * (g(v) + g(w));
      const double tilt = b(v, w) * f.eval(v) * f.eval(w);
      acc[0] += weight * tilt * ag;
      acc[1] += weight * tilt;

      // advance the trailing five axes
      int d = 5;
      for (; d >= 1; --d) {
        if (++odo[d] < o.m) break;
        odo[d] = 0;
      }
      if (d == 0) break;
    } while (true);
  };

  const auto partial = chunked_parallel(o.m, opts.threads, 2, body);
  double num = 0.0, den = 0.0;
  for (const auto& p : partial) {
    num += p[0];
    den += p[1];
  }
  if (std::abs(den) < 1e-12) {
    throw EvalError("maxwell_weak_form: degenerate normalization E[b f x f]");
  }
  return num / den;
}

Eigen::VectorXd maxwell_weak_form_basis(const PolyDensity& f,
                                        const Interaction& b,
                                        const WeakFormOptions& opts) {
  const int degree = f.basis->degree();
  const int nb = f.basis->size();
  const WeakFormOrders o = resolve_weak_orders(degree, opts);
  const Grid1d g1 = gauss_hermite_1d(o.m);
  const SphereRule sphere = make_sphere_rule(o.polar, o.azimuthal);
  const HermiteBasis3& basis = *f.basis;

  // Precompute P on the 3D subgrid; the pair loop looks both factors up.
  const int m3 = o.m * o.m * o.m;
  std::vector<Vec3> points(m3);
  std::vector<double> pvals(m3), wvals(m3);
  {
    int idx = 0;
    for (int i = 0; i < o.m; ++i) {
      for (int j = 0; j < o.m; ++j) {
        for (int k = 0; k < o.m; ++k, ++idx) {
          points[idx] = Vec3(g1.first[i], g1.first[j], g1.first[k]);
          pvals[idx] = f.eval(points[idx]);
          wvals[idx] = g1.second[i] * g1.second[j] * g1.second[k];
        }
      }
    }
  }

  const auto body = [&](int chunk, double* acc) {
    std::vector<double> hp(nb), hm(nb), hv(nb), hw(nb), bar(nb);
    for (int wi = chunk; wi < m3; wi += o.m) {
      const Vec3& w = points[wi];
      basis.eval(w, hw.data());
      for (int vi = 0; vi < m3; ++vi) {
        const Vec3& v = points[vi];
        const double weight = wvals[vi] * wvals[wi];
        const Vec3 z = 0.5 * (v + w);
        const double rho = 0.5 * (v - w).norm();
        std::fill(bar.begin(), bar.end(), 0.0);
        for (std::size_t s = 0; s < sphere.size(); ++s) {
          basis.eval(z + rho * sphere.nodes[s], hp.data());
          basis.eval(z - rho * sphere.nodes[s], hm.data());
          const double ws = sphere.weights[s];
          for (int a = 0; a < nb; ++a) bar[a] += ws * (hp[a] + hm[a]);
        }
        basis.eval(v, hv.data());
        const double tilt = b(v, w) * pvals[vi] * pvals[wi];
        const double wt = weight * tilt;
        for (int a = 0; a < nb; ++a) {
          acc[a] += wt * 0.5 * (bar[a] - hv[a] - hw[a]);
        }
        acc[nb] += wt;
      }
    }
  };

  const auto partial = chunked_parallel(o.m, opts.threads, nb + 1, body);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(nb + 1);
  for (const auto& p : partial) {
    for (int a = 0; a <= nb; ++a) total[a] += p[a];
  }
  if (std::abs(total[nb]) < 1e-12) {
    throw EvalError("maxwell_weak_form_basis: degenerate normalization");
  }
  return total.head(nb) / total[nb];
}

CollisionTensor CollisionTensor::build(HermiteBasis3Ptr basis) {
  const int degree = basis->degree();
  const int nb = basis->size();
  // Orders chosen so every integrand the tensor meets is integrated
  // exactly: z-degree <= 3d, t-degree <= 3d/2, sigma-degree <= 2d.
  const int mz = std::max(degree + 3, (3 * degree) / 2 + 1);
  const int mt = std::max(4, (3 * degree) / 4 + 2);
  const int polar = std::max(2, degree + 1);
  const int azimuthal = std::max(4, 2 * degree + 2);
  const InvariantQuad iq = InvariantQuad::make(mz, mt, polar, azimuthal);

  CollisionTensor tensor;
  tensor.basis_ = basis;
  tensor.slices_.assign(nb, Eigen::MatrixXd::Zero(nb, nb));

  const std::size_t ns = iq.sphere.size();
  Eigen::MatrixXd gp(nb, ns), gm(nb, ns);
  Eigen::VectorXd ta(nb);
  Eigen::MatrixXd smat(nb, nb);
  std::vector<double> h(nb);
  const Eigen::VectorXd ws =
      Eigen::Map<const Eigen::VectorXd>(iq.sphere.weights.data(), ns);

  for (std::size_t zi = 0; zi < iq.z.size(); ++zi) {
    for (std::size_t ri = 0; ri < iq.radius.size(); ++ri) {
      const double node_weight = iq.wz[zi] * iq.wr[ri];
      const double r = iq.radius[ri];
      for (std::size_t s = 0; s < ns; ++s) {
        basis->eval(iq.z[zi] + r * iq.sphere.nodes[s], h.data());
        for (int j = 0; j < nb; ++j) gp(j, s) = h[j];
        basis->eval(iq.z[zi] - r * iq.sphere.nodes[s], h.data());
        for (int j = 0; j < nb; ++j) gm(j, s) = h[j];
      }
      // S_{jk} = E_sigma[h_j(z + R sigma) h_k(z - R sigma)], and the
      // kappa-average of h_a(z + R kappa) reuses the same node values.
      smat.noalias() = gp * ws.asDiagonal() * gm.transpose();
      ta.noalias() = gp * ws;
      for (int a = 0; a < nb; ++a) {
        tensor.slices_[a].noalias() += (node_weight * ta[a]) * smat;
      }
    }
  }

  // The five collision invariants must be annihilated: for each invariant
  // functional l, sum_a l_a C_a = sym(l e_0^T) exactly.
  const auto defect_of = [&](const Eigen::VectorXd& l) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nb, nb);
    for (int a = 0; a < nb; ++a) s += l[a] * tensor.slices_[a];
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(nb, nb);
    expected.col(0) += 0.5 * l;
    expected.row(0) += 0.5 * l.transpose();
    return (s - expected).cwiseAbs().maxCoeff();
  };
  double defect = 0.0;
  {
    Eigen::VectorXd l = Eigen::VectorXd::Zero(nb);
    l[0] = 1.0;  // mass
    defect = std::max(defect, defect_of(l));
    for (int d = 0; d < 3; ++d) {  // momentum components
      std::array<int, 3> idx{0, 0, 0};
      idx[d] = 1;
      l.setZero();
      l[basis->index_of(idx[0], idx[1], idx[2])] = 1.0;
      defect = std::max(defect, defect_of(l));
    }
    l.setZero();  // energy |v|^2 = 3 h_0 + sqrt(2) sum_i h_{2 e_i}
    l[0] = 3.0;
    const double s2 = std::sqrt(2.0);
    l[basis->index_of(2, 0, 0)] = s2;
    l[basis->index_of(0, 2, 0)] = s2;
    l[basis->index_of(0, 0, 2)] = s2;
    defect = std::max(defect, defect_of(l));
  }
  tensor.invariant_defect_ = defect;
  if (defect > 1e-10) {
    throw NumericalError(
        "CollisionTensor: collision invariants not annihilated, defect " +
        std::to_string(defect));
  }
  return tensor;
}

Eigen::VectorXd CollisionTensor::apply(const Eigen::VectorXd& coeff) const {
  const int nb = static_cast<int>(slices_.size());
  Eigen::VectorXd rate(nb);
  for (int a = 0; a < nb; ++a) {
    rate[a] = coeff.dot(slices_[a] * coeff);
  }
  rate -= coeff[0] * coeff;  // loss term c_a c_0
  return rate;
}

namespace {

double interaction_normalizer(const PointFn& ratio, const Interaction& b,
                              const InvariantQuad& iq) {
  if (b.is_maxwell()) return b.constant();
  double z = 0.0;
  for (std::size_t zi = 0; zi < iq.z.size(); ++zi) {
    for (std::size_t ri = 0; ri < iq.radius.size(); ++ri) {
      const double r = iq.radius[ri];
      double avg = 0.0;
      for (std::size_t s = 0; s < iq.sphere.size(); ++s) {
        avg += iq.sphere.weights[s] * ratio(iq.z[zi] + r * iq.sphere.nodes[s]) *
               ratio(iq.z[zi] - r * iq.sphere.nodes[s]);
      }
      z += iq.wz[zi] * iq.wr[ri] * b.from_gap(2.0 * r) * avg;
    }
  }
  return z;
}

}  // namespace

double q_operator(const PointFn& ratio, const Interaction& b, const Vec3& v,
                  int w_nodes, int sphere_polar, int sphere_azimuthal) {
  const SphereRule sphere = make_sphere_rule(sphere_polar, sphere_azimuthal);
  double normalizer = b.constant();
  if (!b.is_maxwell()) {
    normalizer =
        interaction_normalizer(ratio, b, InvariantQuad::make(12, 16, 6, 12));
  }
  const Grid1d gw = gauss_hermite_1d(w_nodes);
  const double fv = ratio(v);
  double acc = 0.0;
  std::array<int, 3> odo{0, 0, 0};
  do {
    const Vec3 w(gw.first[odo[0]], gw.first[odo[1]], gw.first[odo[2]]);
    const double weight =
        gw.second[odo[0]] * gw.second[odo[1]] * gw.second[odo[2]];
    const Vec3 z = 0.5 * (v + w);
    const double rho = 0.5 * (v - w).norm();
    double gain = 0.0;
    for (std::size_t s = 0; s < sphere.size(); ++s) {
      gain += sphere.weights[s] * ratio(z + rho * sphere.nodes[s]) *
              ratio(z - rho * sphere.nodes[s]);
    }
    acc += weight * (b(v, w) / normalizer) * (gain - fv * ratio(w));
    int d = 2;
    for (; d >= 0; --d) {
      if (++odo[d] < w_nodes) break;
      odo[d] = 0;
    }
    if (d < 0) break;
  } while (true);
  const double maxwell_v =
      std::exp(-0.5 * v.squaredNorm()) / std::pow(2.0 * M_PI, 1.5);
  return maxwell_v * acc;
}

double q_operator(const PolyDensity& f, const Interaction& b, const Vec3& v) {
  const int m = std::max(f.basis->degree() + 3, 12);
  return q_operator([&f](const Vec3& x) { return f.eval(x); }, b, v, m);
}

Eigen::VectorXd q_galerkin(const PolyDensity& f, const Interaction& b,
                           const CollisionTensor& tensor) {
  if (!b.is_maxwell()) {
    throw ConfigError(
        "q_galerkin: power-law kernels break polynomial closure; use the "
        "particle solver or the weak-form functionals");
  }
  if (f.basis->size() != tensor.basis()->size()) {
    throw ConfigError("q_galerkin: basis mismatch with the tensor");
  }
  // Normalized maxwell interaction is identically 1, so the tensor applies
  // as built.
  return tensor.apply(f.coeff);
}

namespace {

double log_positive(double p, const char* what) {
  if (!(p > 0.0)) {
    throw EvalError(std::string(what) +
                    ": density not strictly positive at a quadrature node");
  }
  return std::log(p);
}

// Conditional-route entropy production on the invariant grid; the
// symmetrized covariance form is nonnegative by construction.
double sigma_conditional_route(const PointFn& ratio, const Interaction& b,
                               const InvariantQuad& iq) {
  double num = 0.0, den = 0.0;
  const std::size_t ns = iq.sphere.size();
  std::vector<double> gvals(ns), lvals(ns);
  for (std::size_t zi = 0; zi < iq.z.size(); ++zi) {
    for (std::size_t ri = 0; ri < iq.radius.size(); ++ri) {
      const double r = iq.radius[ri];
      const double node_weight = iq.wz[zi] * iq.wr[ri];
      const double bt = b.from_gap(2.0 * r);
      double eg = 0.0, el = 0.0, egl = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        const double gp = ratio(iq.z[zi] + r * iq.sphere.nodes[s]);
        const double gm = ratio(iq.z[zi] - r * iq.sphere.nodes[s]);
        const double g = gp * gm;
        const double l = log_positive(g, "entropy_production");
        const double w = iq.sphere.weights[s];
        eg += w * g;
        el += w * l;
        egl += w * g * l;
      }
      num += node_weight * bt * 0.5 * (egl - eg * el);
      den += node_weight * bt * eg;
    }
  }
  return num / den;
}

// Definitional route: -E_{b f x f}[A log f] by a direct 6D tensor rule.
double sigma_direct_route(const PointFn& ratio, const Interaction& b, int m,
                          int polar, int azimuthal, int threads) {
  const Grid1d g1 = gauss_hermite_1d(m);
  const SphereRule sphere = make_sphere_rule(polar, azimuthal);

  const auto body = [&](int chunk, double* acc) {
    std::array<int, 6> odo{chunk, 0, 0, 0, 0, 0};
    do {
      const Vec3 v(g1.first[odo[0]], g1.first[odo[1]], g1.first[odo[2]]);
      const Vec3 w(g1.first[odo[3]], g1.first[odo[4]], g1.first[odo[5]]);
      double weight = g1.second[odo[0]];
      for (int d = 1; d < 6; ++d) weight *= g1.second[odo[d]];

      const Vec3 z = 0.5 * (v + w);
      const double rho = 0.5 * (v - w).norm();
      double avg = 0.0;
      for (std::size_t s = 0; s < sphere.size(); ++s) {
        const double gp = ratio(z + rho * sphere.nodes[s]);
        const double gm = ratio(z - rho * sphere.nodes[s]);
        avg += sphere.weights[s] *
               0.5 * log_positive(gp * gm, "entropy_production");
      }
      const double pv = ratio(v);
      const double pw = ratio(w);
      const double lambda_here =
          0.5 * (log_positive(pv, "entropy_production") +
                 log_positive(pw, "entropy_production"));
      const double tilt = b(v, w) * pv * pw;
      acc[0] += weight * tilt * (avg - lambda_here);
      acc[1] += weight * tilt;

      int d = 5;
      for (; d >= 1; --d) {
        if (++odo[d] < m) break;
        odo[d] = 0;
      }
      if (d == 0) break;
    } while (true);
  };

  const auto partial = chunked_parallel(m, threads, 2, body);
  double num = 0.0, den = 0.0;
  for (const auto& p : partial) {
    num += p[0];
    den += p[1];
  }
  return -num / den;
}

}  // namespace

EntropyProductionReport entropy_production_ratio(
    const PointFn& ratio, const Interaction& b,
    const EntropyProductionOptions& opts) {
  EntropyProductionReport report;
  const InvariantQuad iq =
      InvariantQuad::make(opts.mz, opts.mt, opts.polar, opts.azimuthal);
  report.value = sigma_conditional_route(ratio, b, iq);
  if (opts.with_direct) {
    report.value_direct =
        sigma_direct_route(ratio, b, opts.direct_nodes_per_axis,
                           opts.direct_polar, opts.direct_azimuthal,
                           opts.threads);
    report.agreement = std::abs(report.value - report.value_direct);
  }
  return report;
}

EntropyProductionReport entropy_production(
    const PolyDensity& f, const Interaction& b,
    const EntropyProductionOptions& opts) {
  return entropy_production_ratio(
      [&f](const Vec3& x) { return f.eval(x); }, b, opts);
}

namespace {

struct DiagTables {
  HermiteRule rule;
  Eigen::MatrixXd values;   // node x basis
  Eigen::VectorXd weights;
  Eigen::VectorXd log_m;    // log M at nodes
  Eigen::VectorXd sq_norm;  // |x|^2 at nodes
};

DiagTables make_diag_tables(const HermiteBasis3& basis, int m) {
  DiagTables t;
  t.rule = make_hermite_rule(3, m);
  const std::size_t n = t.rule.size();
  const int nb = basis.size();
  t.values.resize(n, nb);
  t.weights.resize(n);
  t.log_m.resize(n);
  t.sq_norm.resize(n);
  std::vector<double> h(nb);
  const double log_norm = -1.5 * std::log(2.0 * M_PI);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = t.rule.node(i);
    const Vec3 p(x[0], x[1], x[2]);
    basis.eval(p, h.data());
    for (int j = 0; j < nb; ++j) t.values(i, j) = h[j];
    t.weights[i] = t.rule.weights[i];
    t.sq_norm[i] = p.squaredNorm();
    t.log_m[i] = log_norm - 0.5 * t.sq_norm[i];
  }
  return t;
}

}  // namespace

FlowTrace relax(const PolyDensity& f0, const Interaction& b,
                const CollisionTensor& tensor, const RelaxOptions& opts) {
  if (!b.is_maxwell()) {
    throw ConfigError(
        "relax: the Galerkin flow supports maxwell_constant interactions "
        "only");
  }
  if (f0.basis->size() != tensor.basis()->size()) {
    throw ConfigError("relax: basis mismatch with the tensor");
  }
  const HermiteBasis3& basis = *f0.basis;
  const DiagTables diag = make_diag_tables(basis, opts.diag_nodes_per_axis);
  const InvariantQuad iq = InvariantQuad::make(
      opts.sigma_mz, opts.sigma_mt, opts.sigma_polar, opts.sigma_azimuthal);

  const int nsteps = static_cast<int>(std::llround(opts.grid.t_end / opts.grid.dt));
  if (nsteps < 1 || opts.grid.dt <= 0.0 || opts.grid.store_every < 1) {
    throw ConfigError("relax: invalid time grid");
  }

  FlowTrace trace;
  trace.columns = {"H",           "entropy_production",
                   "mass",        "mom_x",
                   "mom_y",       "mom_z",
                   "energy",      "kl_to_equilibrium",
                   "clipped_mass", "dh_dt"};
  trace.series.assign(trace.columns.size(), {});

  const int ix = basis.index_of(1, 0, 0);
  const int iy = basis.index_of(0, 1, 0);
  const int iz = basis.index_of(0, 0, 1);
  const double s2 = std::sqrt(2.0);
  const int ixx = basis.index_of(2, 0, 0);
  const int iyy = basis.index_of(0, 2, 0);
  const int izz = basis.index_of(0, 0, 2);

  const auto record = [&](double t, const Eigen::VectorXd& c) {
    const Eigen::VectorXd p_nodes = diag.values * c;
    const double p_min = p_nodes.minCoeff();
    double clipped_mass = 0.0;
    Eigen::VectorXd p_safe = p_nodes;
    if (p_min < 1e-12) {
      if (p_min < -1e-8 && opts.positivity == PositivityResponse::abort) {
        throw NumericalError("relax: density lost positivity at t = " +
                             std::to_string(t) + " (min " +
                             std::to_string(p_min) + ")");
      }
      for (int i = 0; i < p_safe.size(); ++i) {
        if (p_safe[i] < 1e-12) {
          clipped_mass += diag.weights[i] * (1e-12 - p_safe[i]);
          p_safe[i] = 1e-12;
        }
      }
    }

    const Eigen::VectorXd log_f =
        (p_safe.array().log() + diag.log_m.array()).matrix();
    const double h_val = -(diag.weights.array() * p_safe.array() *
                           log_f.array())
                              .sum();
    // Exact t-derivative of the quadrature entropy along the Galerkin flow.
    const Eigen::VectorXd rate_nodes = diag.values * tensor.apply(c);
    const double dh_dt = -(diag.weights.array() * rate_nodes.array() *
                           (1.0 + log_f.array()))
                              .sum();

    const double mass = c[0];
    const Vec3 mom(c[ix], c[iy], c[iz]);
    const double energy = 3.0 * c[0] + s2 * (c[ixx] + c[iyy] + c[izz]);

    // KL against the moment-matched Maxwellian N(mean, T I).
    const Vec3 mean = mom / mass;
    const double temp = (energy / mass - mean.squaredNorm()) / 3.0;
    double kl_eq = 0.0;
    {
      const double log_norm_t = -1.5 * std::log(2.0 * M_PI * temp);
      for (int i = 0; i < p_safe.size(); ++i) {
        const auto x = diag.rule.node(i);
        const Vec3 p(x[0], x[1], x[2]);
        const double log_mt =
            log_norm_t - 0.5 * (p - mean).squaredNorm() / temp;
        kl_eq += diag.weights[i] * p_safe[i] * (log_f[i] - log_mt);
      }
    }

    const double sigma = sigma_conditional_route(
        [&](const Vec3& x) {
          double h[kMaxBasisSize];
          basis.eval(x, h);
          double acc = 0.0;
          for (int j = 0; j < c.size(); ++j) acc += c[j] * h[j];
          return std::max(acc, 1e-12);
        },
        b, iq);

    trace.times.push_back(t);
    trace.states.push_back(c);
    trace.series[0].push_back(h_val);
    trace.series[1].push_back(sigma);
    trace.series[2].push_back(mass);
    trace.series[3].push_back(mom[0]);
    trace.series[4].push_back(mom[1]);
    trace.series[5].push_back(mom[2]);
    trace.series[6].push_back(energy);
    trace.series[7].push_back(kl_eq);
    trace.series[8].push_back(clipped_mass);
    trace.series[9].push_back(dh_dt);
  };

  Eigen::VectorXd c = f0.coeff;
  record(0.0, c);
  const auto rhs = [&tensor](const Eigen::VectorXd& y) {
    return tensor.apply(y);
  };
  for (int i = 1; i <= nsteps; ++i) {
    if (opts.integrator == Integrator::euler) {
      c += opts.grid.dt * rhs(c);
    } else {
      const Eigen::VectorXd k1 = rhs(c);
      const Eigen::VectorXd k2 = rhs(c + (0.5 * opts.grid.dt) * k1);
      const Eigen::VectorXd k3 = rhs(c + (0.5 * opts.grid.dt) * k2);
      const Eigen::VectorXd k4 = rhs(c + opts.grid.dt * k3);
      c += (opts.grid.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!c.allFinite()) {
      throw NumericalError("relax: coefficients blew up at t = " +
                           std::to_string(i * opts.grid.dt));
    }
    if (i % opts.grid.store_every == 0 || i == nsteps) {
      record(i * opts.grid.dt, c);
    }
  }
  trace.validate();
  return trace;
}

std::function<Vec3(SeededSampler&)> make_poly_sampler(const PolyDensity& f) {
  // Rejection from N(0, s^2 I) with s^2 = 2; the envelope constant covers
  // P(x) M(x) / M_s(x) = P(x) s^3 e^{-|x|^2/4}.
  const double s = std::sqrt(2.0);
  const PolyDensity target = f;
  const auto envelope_ratio = [target](const Vec3& x) {
    const double p = std::max(target.eval(x), 0.0);
    return p * 2.0 * std::sqrt(2.0) * std::exp(-0.25 * x.squaredNorm());
  };
  double bound = 0.0;
  const SphereRule dirs = make_sphere_rule(4, 8);
  for (double r = 0.0; r <= 12.0; r += 0.05) {
    for (const auto& d : dirs.nodes) {
      bound = std::max(bound, envelope_ratio(r * d));
    }
  }
  bound *= 1.3;
  return [envelope_ratio, bound, s](SeededSampler& rng) -> Vec3 {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const Vec3 x(s * rng.normal(), s * rng.normal(), s * rng.normal());
      const double r = envelope_ratio(x);
      if (r > bound) {
        throw NumericalError("make_poly_sampler: envelope bound violated");
      }
      if (rng.uniform() * bound <= r) return x;
    }
    throw NumericalError("make_poly_sampler: acceptance stalled");
  };
}

namespace {

const char* kMomentNames[16] = {"mean_x", "mean_y", "mean_z", "m2_xx",
                                "m2_yy",  "m2_zz",  "m2_xy",  "m2_xz",
                                "m2_yz",  "m3_x",   "m3_y",   "m3_z",
                                "m4",     "m4_x",   "m4_y",   "m4_z"};

void moment_values(const Vec3& v, double* out) {
  out[0] = v[0];
  out[1] = v[1];
  out[2] = v[2];
  out[3] = v[0] * v[0];
  out[4] = v[1] * v[1];
  out[5] = v[2] * v[2];
  out[6] = v[0] * v[1];
  out[7] = v[0] * v[2];
  out[8] = v[1] * v[2];
  out[9] = v[0] * v[0] * v[0];
  out[10] = v[1] * v[1] * v[1];
  out[11] = v[2] * v[2] * v[2];
  const double sq = v.squaredNorm();
  out[12] = sq * sq;
  out[13] = out[3] * out[3];
  out[14] = out[4] * out[4];
  out[15] = out[5] * out[5];
}

}  // namespace

std::vector<std::pair<std::string, double>> moment_panel(const PolyDensity& f) {
  const int m = std::max(f.basis->degree() + 5, 10);
  const HermiteRule rule = make_hermite_rule(3, m);
  std::vector<double> acc(16, 0.0);
  double vals[16];
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto x = rule.node(i);
    const Vec3 p(x[0], x[1], x[2]);
    const double weight = rule.weights[i] * f.eval(p);
    moment_values(p, vals);
    for (int j = 0; j < 16; ++j) acc[j] += weight * vals[j];
  }
  std::vector<std::pair<std::string, double>> panel;
  panel.reserve(16);
  for (int j = 0; j < 16; ++j) panel.emplace_back(kMomentNames[j], acc[j]);
  return panel;
}

FlowTrace particle_relax(const std::function<Vec3(SeededSampler&)>& sample_f0,
                         const Interaction& b, const ParticleOptions& opts) {
  if (opts.n_particles < 10000) {
    throw ConfigError("particle_relax: need at least 1e4 particles");
  }
  SeededSampler rng(opts.seed);
  const int n = opts.n_particles;
  std::vector<Vec3> velocity(n);
  for (auto& v : velocity) v = sample_f0(rng);

  const int nsteps =
      static_cast<int>(std::llround(opts.grid.t_end / opts.grid.dt));

  FlowTrace trace;
  for (const char* name : kMomentNames) trace.columns.push_back(name);
  for (const char* name : kMomentNames) {
    trace.columns.push_back(std::string("se_") + name);
  }
  trace.series.assign(trace.columns.size(), {});

  std::vector<int> index(n);
  std::iota(index.begin(), index.end(), 0);

  const auto record = [&](double t) {
    double sum[16] = {0}, sumsq[16] = {0}, vals[16];
    for (const auto& v : velocity) {
      moment_values(v, vals);
      for (int j = 0; j < 16; ++j) {
        sum[j] += vals[j];
        sumsq[j] += vals[j] * vals[j];
      }
    }
    trace.times.push_back(t);
    for (int j = 0; j < 16; ++j) {
      const double mean = sum[j] / n;
      const double var = std::max(sumsq[j] / n - mean * mean, 0.0);
      trace.series[j].push_back(mean);
      trace.series[16 + j].push_back(std::sqrt(var / n));
    }
  };

  const auto uniform_sigma = [&rng]() -> Vec3 {
    const double t = 1.0 - 2.0 * rng.uniform();
    const double theta = 2.0 * M_PI * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    return {s * std::cos(theta), s * std::sin(theta), t};
  };

  record(0.0);
  for (int step = 1; step <= nsteps; ++step) {
    // Majorant normalization for the acceptance step.  For maxwell kernels
    // the normalized rate is exactly 1; power laws use a safe majorant
    // b_max = b(2 max |v|) and an empirical estimate of E_{f x f}[b].
    double rate_scale = 1.0;
    double b_max = 1.0;
    if (!b.is_maxwell()) {
      double vmax = 0.0;
      for (const auto& v : velocity) vmax = std::max(vmax, v.norm());
      b_max = b.from_gap(2.0 * vmax);
      double z_est = 0.0;
      const int probes = 512;
      for (int i = 0; i < probes; ++i) {
        const auto& va = velocity[rng.next_u64() % n];
        const auto& vb = velocity[rng.next_u64() % n];
        z_est += b(va, vb);
      }
      z_est /= probes;
      rate_scale = b_max / std::max(z_est, 1e-300);
    }
    const double expected_pairs = 0.5 * n * opts.grid.dt * rate_scale;
    const int pairs =
        static_cast<int>(std::floor(expected_pairs + rng.uniform()));

    // Partial Fisher-Yates: the first 2*pairs entries become the colliding
    // disjoint pairs.
    const int draw = std::min(2 * pairs, n);
    for (int i = 0; i < draw; ++i) {
      const int j = i + static_cast<int>(rng.next_u64() % (n - i));
      std::swap(index[i], index[j]);
    }
    for (int k = 0; k + 1 < draw; k += 2) {
      Vec3& va = velocity[index[k]];
      Vec3& vb = velocity[index[k + 1]];
      if (!b.is_maxwell()) {
        const double accept = b(va, vb) / b_max;
        if (rng.uniform() > accept) continue;
      }
      const CollisionQuadruple q =
          collide_sigma(VelocityPair{va, vb}, uniform_sigma());
      va = q.v_post;
      vb = q.w_post;
    }

    if (step % opts.grid.store_every == 0 || step == nsteps) {
      record(step * opts.grid.dt);
    }
  }
  trace.validate();
  return trace;
}

}  // namespace igb
