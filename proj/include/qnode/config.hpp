// Copyright 2026 The qnode Authors
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

// config.hpp: the single-file run configuration.
//
// The file is JSON. "optics" and "crystal" are required and may be a preset
// name or an object; an object may name a "preset" and override fields of
// it. All other sections are optional and start from the built-in
// defaults. Unknown keys are rejected. See docs/config.md for the key tree.

#pragma once

#include "qnode/protocol.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnode::config {

/// Invalid configuration; path() names the offending key, e.g. "gate.delta_hz".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parameters of the individual simulate commands.
struct RunConfig {
  std::vector<double> delta_t{0.0};              ///< s, two-photon storage times
  std::vector<double> storage_times{0.0};        ///< s, storage sequence
  bool dd = true;
  std::vector<double> fractions{0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};
  double ramsey_time = 0.1;                      ///< s
  double thermometry_time = 1e-3;                ///< s
  double n_bar_base = 0.3;
  double sideband_scale = 0.5;
  long long process_shots = 10000;               ///< per preparation and basis
};

struct Config {
  protocol::ProtocolConfig protocol;
  RunConfig run;
  std::string digest;  ///< FNV-1a 64 of the file bytes, hex
};

bsa::OpticsConfig optics_preset(const std::string& name);
dynamics::CrystalConfig crystal_preset(const std::string& name);
std::vector<std::string> optics_preset_names();
std::vector<std::string> crystal_preset_names();

/// Parses and validates; throws ConfigError.
Config parse(const std::string& bytes);
Config load(const std::string& path);

/// Optics from a preset name or a config/optics JSON file path.
bsa::OpticsConfig load_optics(const std::string& preset_or_path);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace qnode::config
