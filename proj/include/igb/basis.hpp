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

#ifndef IGB_BASIS_HPP
#define IGB_BASIS_HPP

#include <span>
#include <vector>

#include "igb/errors.hpp"

namespace igb {

/// Probabilist Hermite polynomial He_k(x), He_0 = 1, He_1 = x,
/// He_{k+1} = x He_k - k He_{k-1}.
double hermite_he(int k, double x);

/// Evaluates He_0..He_k into out (size k+1).
void hermite_he_all(int k, double x, double* out);

/// One chart basis function: either a product of probabilist Hermite
/// polynomials of total degree 1 or 2, or a bounded trigonometric feature
/// cos(k.x) / sin(k.x).  Every kind carries analytic first and second
/// derivatives.
class BasisFunction {
 public:
  enum class Kind { hermite, cosine, sine };

  static BasisFunction hermite(std::vector<int> multi_index);
  static BasisFunction cosine(std::vector<double> frequency);
  static BasisFunction sine(std::vector<double> frequency);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<int>& multi_index() const { return multi_index_; }
  const std::vector<double>& frequency() const { return frequency_; }

  double value(std::span<const double> x) const;
  /// d/dx_j.
  double deriv(std::span<const double> x, int j) const;
  /// d^2/dx_j^2.
  double deriv2(std::span<const double> x, int j) const;
  double laplacian(std::span<const double> x) const;

 private:
  Kind kind_ = Kind::hermite;
  int dim_ = 0;
  std::vector<int> multi_index_;
  std::vector<double> frequency_;
};

}  // namespace igb

#endif  // IGB_BASIS_HPP
