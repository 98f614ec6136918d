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

#ifndef IGB_BOLTZMANN_HPP
#define IGB_BOLTZMANN_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "igb/divergence.hpp"
#include "igb/kinematics.hpp"
#include "igb/manifold.hpp"
#include "igb/quadrature.hpp"
#include "igb/rng.hpp"

namespace igb {

/// Orthonormal Hermite basis on R^3 up to a total degree, graded
/// lexicographic order; h_0 = 1, h_{e_i}(x) = x_i.
class HermiteBasis3 {
 public:
  explicit HermiteBasis3(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<std::array<int, 3>>& indices() const { return indices_; }
  int index_of(int ax, int ay, int az) const;

  /// All basis values at x, written into out[size()].
  void eval(const Vec3& x, double* out) const;
  double eval_one(int j, const Vec3& x) const;

 private:
  int degree_;
  std::vector<std::array<int, 3>> indices_;
  std::vector<int> lookup_;
};

using HermiteBasis3Ptr = std::shared_ptr<const HermiteBasis3>;

/// Collision kernel depending on (v, w) only through |v - w|, with
/// two-sided growth-bound metadata C |v-w|^lambda <= b <= A + B |v-w|^2.
class Interaction {
 public:
  enum class Kind { maxwell_constant, power_law };

  static Interaction maxwell(double constant = 1.0);
  static Interaction power_law(double lambda, double constant);

  Kind kind() const { return kind_; }
  bool is_maxwell() const { return kind_ == Kind::maxwell_constant; }
  double constant() const { return constant_; }
  double lambda() const { return lambda_; }

  double operator()(const Vec3& v, const Vec3& w) const {
    return from_gap((v - w).norm());
  }
  double from_gap(double gap) const;

  double bound_a() const { return bound_a_; }
  double bound_b() const { return bound_b_; }
  double bound_c() const { return bound_c_; }
  double bound_lambda() const { return bound_lambda_; }

 private:
  Kind kind_ = Kind::maxwell_constant;
  double constant_ = 1.0;
  double lambda_ = 0.0;
  double bound_a_ = 1.0, bound_b_ = 1.0, bound_c_ = 1.0, bound_lambda_ = 0.0;
};

/// Spectral state of the relaxation solver: f = P . M with P expanded in
/// the orthonormal Hermite basis.  coeff[0] = 1 pins unit mass.
struct PolyDensity {
  HermiteBasis3Ptr basis;
  Eigen::VectorXd coeff;

  static PolyDensity from_coeff(HermiteBasis3Ptr basis, Eigen::VectorXd coeff);
  static PolyDensity maxwell(HermiteBasis3Ptr basis);
  /// M (1 + c qhat) with qhat the unit-norm isotropic degree-4 polynomial;
  /// positive everywhere for |c| < 1.09.
  static PolyDensity isotropic4(HermiteBasis3Ptr basis, double c);

  double eval(const Vec3& x) const;  // P(x)
  Vec3 mean() const;
  double energy() const;  // E_f[|v|^2]
  Eigen::Matrix3d second_moment() const;

  /// Smallest value of P over the rule nodes (positivity monitor).
  double min_on_rule(const HermiteRule& rule) const;
};

using PairFn = std::function<double(const Vec3&, const Vec3&)>;
using PointFn = std::function<double(const Vec3&)>;

/// Quadrature grid over the collision invariants: z = (v+w)/2 with
/// z ~ N(0, I/2), t = R^2 = |v-w|^2/4 ~ chi^2(3)/2 via half-integer
/// Laguerre, and a sphere rule for the free direction.  Exact for the
/// polynomial integrands the Galerkin tensor produces.
struct InvariantQuad {
  std::vector<Vec3> z;
  std::vector<double> wz;
  std::vector<double> radius;   // R = sqrt(t)
  std::vector<double> wr;
  SphereRule sphere;

  static InvariantQuad make(int mz, int mt, int polar, int azimuthal);
};

/// Tensor product of two exponential densities: a density on R^6 whose
/// chart vector is u (+) v; the cumulant is additive.
ExpDensity tensorize(const ExpDensity& f, const ExpDensity& g,
                     int nodes_per_axis = 8);

/// sigma-averaged conditional expectation on the collision invariants:
/// ghat(v, w) = integral of g(A^_sigma(v, w)) d mu(sigma).
double condition_on_invariants(const PairFn& g, const VelocityPair& pair,
                               const SphereRule& sphere);

/// Pi-weighted form of the same conditional:
/// 2 integral of g(A_Pi(v, w)) |Pi kappa| d nu(Pi).
double condition_pi_weighted(const PairFn& g, const VelocityPair& pair,
                             const SphereRule& sphere);

/// Conditional expectation under the tilted density f . (M x M) by Bayes:
/// ratio of the sigma-averages of g f and f.  Denominators below 1e-12
/// are reported as EvalError.
double tilted_conditional(const PairFn& f_tensor, const PairFn& g,
                          const VelocityPair& pair, const SphereRule& sphere);

/// A g (v, w) = conditional of gbar on the invariants minus gbar,
/// gbar = (g(v) + g(w))/2.
double a_operator(const PointFn& g, const VelocityPair& pair,
                  const SphereRule& sphere);

/// Same for a two-variable F (no symmetrization): conditional minus F.
double a_operator_pair(const PairFn& f, const VelocityPair& pair,
                       const SphereRule& sphere);

struct WeakFormOptions {
  int nodes_per_axis = 0;  // 0: auto from the basis degree
  int sphere_polar = 0;
  int sphere_azimuthal = 0;
  int threads = 1;
};

/// Maxwell weak form E_{b f x f}[A g], normalized by E_{f x f}[b];
/// direct tensor-Hermite x sphere quadrature.
double maxwell_weak_form(const PolyDensity& f, const PointFn& g,
                         const Interaction& b,
                         const WeakFormOptions& opts = {});

/// Weak form of every basis element of f in one quadrature sweep:
/// returns the vector E_{b f x f}[A h_a].
Eigen::VectorXd maxwell_weak_form_basis(const PolyDensity& f,
                                        const Interaction& b,
                                        const WeakFormOptions& opts = {});

/// Precomputed Galerkin contraction of the collision operator for Maxwell
/// pseudo-molecules (b normalized to 1): dc_a/dt = sum_jk C[a]_{jk} c_j c_k
/// minus the loss term c_a c_0.  Exact given the auto-scaled quadrature
/// orders; the five collision invariants are annihilated to roundoff.
class CollisionTensor {
 public:
  static CollisionTensor build(HermiteBasis3Ptr basis);

  const HermiteBasis3Ptr& basis() const { return basis_; }
  const Eigen::MatrixXd& slice(int a) const { return slices_[a]; }

  /// Time derivative of the coefficient vector.
  Eigen::VectorXd apply(const Eigen::VectorXd& coeff) const;

  /// Largest violation of mass/momentum/energy annihilation, measured at
  /// build time over the tensor entries.
  double invariant_defect() const { return invariant_defect_; }

 private:
  HermiteBasis3Ptr basis_;
  std::vector<Eigen::MatrixXd> slices_;
  double invariant_defect_ = 0.0;
};

/// Q(f)(v) for a density f = ratio . M given through its ratio; the
/// interaction is used in its normalized form b / E_{f x f}[b].
double q_operator(const PointFn& ratio, const Interaction& b, const Vec3& v,
                  int w_nodes = 16, int sphere_polar = 6,
                  int sphere_azimuthal = 12);
double q_operator(const PolyDensity& f, const Interaction& b, const Vec3& v);

/// Galerkin projection of Q(f) onto the Hermite basis (maxwell_constant
/// interactions only; power-law kernels break polynomial closure).
Eigen::VectorXd q_galerkin(const PolyDensity& f, const Interaction& b,
                           const CollisionTensor& tensor);

struct EntropyProductionOptions {
  // Invariant-grid orders (conditional route).
  int mz = 10, mt = 12, polar = 5, azimuthal = 12;
  // Direct 6D tensor-rule orders (definitional route).
  int direct_nodes_per_axis = 8;
  int direct_polar = 5, direct_azimuthal = 12;
  int threads = 1;
  bool with_direct = true;
};

struct EntropyProductionReport {
  double value = 0.0;         // symmetrized conditional route, >= 0
  double value_direct = 0.0;  // -E_{b f x f}[A log f], direct quadrature
  double agreement = 0.0;     // |value - value_direct|
};

EntropyProductionReport entropy_production(
    const PolyDensity& f, const Interaction& b,
    const EntropyProductionOptions& opts = {});
EntropyProductionReport entropy_production_ratio(
    const PointFn& ratio, const Interaction& b,
    const EntropyProductionOptions& opts = {});

enum class PositivityResponse { clip_and_flag, abort };

struct RelaxOptions {
  TimeGrid grid{8.0, 1e-3, 10};
  Integrator integrator = Integrator::rk4;
  PositivityResponse positivity = PositivityResponse::clip_and_flag;
  int diag_nodes_per_axis = 16;  // 3D rule for H, KL and positivity checks
  int sigma_mz = 10, sigma_mt = 12, sigma_polar = 5, sigma_azimuthal = 12;
};

/// Relaxation flow df/dt = Q(f) through the Galerkin contraction.
/// Trace columns: H, entropy_production, mass, mom_x, mom_y, mom_z, energy,
/// kl_to_equilibrium, clipped_mass, dh_dt; states are coefficient vectors.
/// dh_dt is the exact derivative of the quadrature entropy along the flow,
/// -E_M[(Q(f)/M) log f].
FlowTrace relax(const PolyDensity& f0, const Interaction& b,
                const CollisionTensor& tensor, const RelaxOptions& opts = {});

struct ParticleOptions {
  TimeGrid grid{8.0, 1e-2, 10};
  int n_particles = 100000;
  std::uint64_t seed = 1;
};

/// Velocity sampler for f = P . M by rejection from a wider Gaussian.
std::function<Vec3(SeededSampler&)> make_poly_sampler(const PolyDensity& f);

/// Nanbu-Babovsky binary-collision Monte Carlo with sigma ~ mu and
/// acceptance proportional to b; momentum and energy are conserved exactly
/// per collision.  Trace columns: moments up to order 4 and their standard
/// errors (mean_*, m2_*, m3_*, m4, m4_*, se_...).
FlowTrace particle_relax(const std::function<Vec3(SeededSampler&)>& sample_f0,
                         const Interaction& b, const ParticleOptions& opts);

/// The same moment panel evaluated on a PolyDensity (for cross-solver
/// comparisons against particle_relax).
std::vector<std::pair<std::string, double>> moment_panel(const PolyDensity& f);

}  // namespace igb

#endif  // IGB_BOLTZMANN_HPP
