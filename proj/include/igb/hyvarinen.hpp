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

#ifndef IGB_HYVARINEN_HPP
#define IGB_HYVARINEN_HPP

#include <functional>

#include "igb/manifold.hpp"

namespace igb {

/// A function with analytic first and second partial derivatives, the
/// currency of the Gaussian-weighted Sobolev layer.  Finite differences
/// never enter production paths; they are test oracles only.
struct SmoothFn {
  std::function<double(std::span<const double>)> value;
  std::function<double(std::span<const double>, int)> deriv;
  std::function<double(std::span<const double>, int)> deriv2;
};

SmoothFn smooth_from_chart(const ChartVector& u);
SmoothFn smooth_constant(double c);

/// Stein operator delta_j f = x_j f - d_j f.  The derivative fields of the
/// result require deriv/deriv2 of the input.
SmoothFn stein(const SmoothFn& f, int j);

struct AdjointReport {
  double max_error = 0.0;  // worst axis
  bool ok = false;
};

/// <f, d_j g>_M = <x_j f - d_j f, g>_M for every axis.
AdjointReport stein_adjoint_check(const SmoothFn& f, const SmoothFn& g,
                                  const HermiteRule& rule, double tol = 1e-8);

/// Weak pairing <Delta f, u> = sum_j <d_j f, delta_j u>_M.
double weak_laplacian_pairing(const SmoothFn& f, const SmoothFn& u,
                              const HermiteRule& rule);

/// Strong form <sum_j d2_jj f, u>_M for twice-differentiable f.
double strong_laplacian_pairing(const SmoothFn& f, const SmoothFn& u,
                                const HermiteRule& rule);

struct ScoreIdentityReport {
  // Componentwise worst errors of the four identities:
  // E_M[grad u] = Cov_M(u, X);  E_g[X - grad v] = 0;
  // E_g[grad u] = Cov_g(u, X - grad v);
  // E_g[grad u - grad v] = Cov_g(u - v, X - grad v).
  double err[4] = {0, 0, 0, 0};
  double max_error() const;
};

ScoreIdentityReport score_identities(const ChartVector& u,
                                     const ChartVector& v);

struct HyvarinenValue {
  double value = 0.0;       // E_g[|grad log f - grad log g|^2]
  double chart_form = 0.0;  // E_M[|grad u - grad v|^2 e^{v - K(v)}]
};

/// Hyvarinen divergence DH(g || f) between exponential densities
/// f = e_M(u), g = e_M(v); both computational forms are returned.
HyvarinenValue hyvarinen(const ExpDensity& g, const ExpDensity& f);

/// Directional derivative of u -> DH_M(v || u) in the direction w:
/// 2 E_g[grad w . (grad u - grad v)].
double hyvarinen_grad_first(const ExpDensity& g, const ExpDensity& f,
                            const ChartVector& w);

/// Directional derivative of v -> DH_M(v || u) in the direction w:
/// -2 E_g[grad w . (grad u - grad v)] + Cov_g(w, |grad u - grad v|^2).
double hyvarinen_grad_second(const ExpDensity& g, const ExpDensity& f,
                             const ChartVector& w);

struct PairingReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_error = 0.0;
};

/// <Delta w2, w1 e^{v - K(v)}> = -E_g[grad w1 . grad w2]
///                               + E_g[w1 (X - grad v) . grad w2].
PairingReport w1w2_check(const ChartVector& w1, const ChartVector& w2,
                         const ChartVector& v);

}  // namespace igb

#endif  // IGB_HYVARINEN_HPP
