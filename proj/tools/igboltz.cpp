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

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "igb/cli_config.hpp"
#include "igb/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "igboltz: Orlicz-space information geometry and a spectral solver for "
      "the spatially homogeneous Boltzmann equation"};

  std::string config_path;
  std::string out_override;
  int threads = 0;
  long long seed = -1;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_override, "output path (overrides config)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--seed", seed, "seed (overrides config)");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "config error: cannot read " << config_path << "\n";
    return igb::kExitConfigError;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  igb::RunConfig config;
  try {
    config = igb::parse_config(buffer.str());
  } catch (const igb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return igb::kExitConfigError;
  }
  if (!out_override.empty()) config.out = out_override;
  if (threads > 0) config.threads = threads;
  if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);

  return igb::run(config);
}
