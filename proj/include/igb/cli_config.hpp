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

#ifndef IGB_CLI_CONFIG_HPP
#define IGB_CLI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "igb/basis.hpp"

namespace igb {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitCheckFailure = 4;

struct QuadratureConfig {
  int hermite_nodes = 24;
  int sphere_polar = 6;
  int sphere_azimuthal = 12;
};

struct TimeConfig {
  double t_end = 5.0;
  double dt = 1e-3;
  std::string integrator = "rk4";
  int store_every = 10;
};

struct InteractionConfig {
  std::string type = "maxwell";
  double constant = 1.0;
  double lambda = 1.0;
};

/// Fully resolved run configuration; `resolved_json` echoes the effective
/// settings (defaults applied) as a JSON document.
struct RunConfig {
  std::string run;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;

  int dimension = 1;
  QuadratureConfig quadrature;

  // geodesic
  std::vector<BasisFunction> basis;
  std::vector<double> u0;
  std::vector<double> u_target;
  std::string flow = "first";

  // boltzmann
  int basis_degree = 4;
  InteractionConfig interaction;
  std::string initial_kind = "isotropic4";
  double initial_coefficient = 0.1;
  std::vector<double> initial_values;

  TimeConfig time;

  std::string resolved_json;
};

/// Parses and validates a JSON config document.  Unknown keys and invariant
/// violations raise ConfigError with a path-qualified message.
RunConfig parse_config(const std::string& text);

/// Executes the configured run; returns a process exit code.  Output files
/// are written atomically (temp-and-rename), and a one-line summary with
/// the key scalars goes to stdout.
int run(const RunConfig& config);

/// Writes rows as CSV with 17-significant-digit formatting (lossless
/// double round trip), atomically.
void write_csv_atomic(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace igb

#endif  // IGB_CLI_CONFIG_HPP
