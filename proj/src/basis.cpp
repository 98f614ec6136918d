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

#include "igb/basis.hpp"

#include <cmath>
#include <numeric>

namespace igb {

double hermite_he(int k, double x) {
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = x;
  for (int i = 1; i < k; ++i) {
    const double next = x * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite_he_all(int k, double x, double* out) {
  out[0] = 1.0;
  if (k == 0) return;
  out[1] = x;
  for (int i = 1; i < k; ++i) out[i + 1] = x * out[i] - i * out[i - 1];
}

BasisFunction BasisFunction::hermite(std::vector<int> multi_index) {
  int total = 0;
  for (int a : multi_index) {
    if (a < 0) throw ConfigError("BasisFunction::hermite: negative index");
    total += a;
  }
  if (total < 1 || total > 2) {
    throw ConfigError(
        "BasisFunction::hermite: total degree must be 1 or 2, got " +
        std::to_string(total));
  }
  BasisFunction b;
  b.kind_ = Kind::hermite;
  b.dim_ = static_cast<int>(multi_index.size());
  b.multi_index_ = std::move(multi_index);
  return b;
}

BasisFunction BasisFunction::cosine(std::vector<double> frequency) {
  BasisFunction b;
  b.kind_ = Kind::cosine;
  b.dim_ = static_cast<int>(frequency.size());
  b.frequency_ = std::move(frequency);
  return b;
}

BasisFunction BasisFunction::sine(std::vector<double> frequency) {
  BasisFunction b;
  b.kind_ = Kind::sine;
  b.dim_ = static_cast<int>(frequency.size());
  b.frequency_ = std::move(frequency);
  return b;
}

namespace {

double dot(std::span<const double> x, const std::vector<double>& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) acc += k[i] * x[i];
  return acc;
}

}  // namespace

double BasisFunction::value(std::span<const double> x) const {
  switch (kind_) {
    case Kind::hermite: {
      double prod = 1.0;
      for (int d = 0; d < dim_; ++d) prod *= hermite_he(multi_index_[d], x[d]);
      return prod;
    }
    case Kind::cosine:
      return std::cos(dot(x, frequency_));
    case Kind::sine:
      return std::sin(dot(x, frequency_));
  }
  return 0.0;
}

double BasisFunction::deriv(std::span<const double> x, int j) const {
  switch (kind_) {
    case Kind::hermite: {
      // He_k' = k He_{k-1}.
      const int kj = multi_index_[j];
      if (kj == 0) return 0.0;
      double prod = kj * hermite_he(kj - 1, x[j]);
      for (int d = 0; d < dim_; ++d) {
        if (d != j) prod *= hermite_he(multi_index_[d], x[d]);
      }
      return prod;
    }
    case Kind::cosine:
      return -frequency_[j] * std::sin(dot(x, frequency_));
    case Kind::sine:
      return frequency_[j] * std::cos(dot(x, frequency_));
  }
  return 0.0;
}

double BasisFunction::deriv2(std::span<const double> x, int j) const {
  switch (kind_) {
    case Kind::hermite: {
      const int kj = multi_index_[j];
      if (kj < 2) return 0.0;
      double prod = kj * (kj - 1) * hermite_he(kj - 2, x[j]);
      for (int d = 0; d < dim_; ++d) {
        if (d != j) prod *= hermite_he(multi_index_[d], x[d]);
      }
      return prod;
    }
    case Kind::cosine:
      return -frequency_[j] * frequency_[j] * std::cos(dot(x, frequency_));
    case Kind::sine:
      return -frequency_[j] * frequency_[j] * std::sin(dot(x, frequency_));
  }
  return 0.0;
}

double BasisFunction::laplacian(std::span<const double> x) const {
  double acc = 0.0;
  for (int j = 0; j < dim_; ++j) acc += deriv2(x, j);
  return acc;
}

}  // namespace igb
