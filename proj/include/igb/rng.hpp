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

#ifndef IGB_RNG_HPP
#define IGB_RNG_HPP

#include <array>
#include <cstdint>

namespace igb {

/// Deterministic random stream: xoshiro256++ seeded through SplitMix64.
///
/// The same (seed, draw sequence) produces the same outputs on every
/// platform; no implementation-defined distributions are used.  Uniforms
/// take the top 53 bits of the generator output, normals are produced by
/// the Box-Muller transform (pairs, second value cached).  Parallel workers
/// use substream(worker), which derives an independent child seed from
/// (seed, worker index).
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_pos();

  /// Standard normal draw.
  double normal();

  std::uint64_t seed() const { return seed_; }

  /// Number of raw 64-bit draws so far.
  std::uint64_t position() const { return draws_; }

  /// Independent stream for a parallel worker.
  SeededSampler substream(std::uint64_t worker) const;

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t draws_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace igb

#endif  // IGB_RNG_HPP
