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

// cli.hpp: the commands behind the qnode executable.
//
// Every command writes its primary outputs into `out` and a manifest.json
// holding the only time-dependent fields, so reruns with the same config
// bytes and seed reproduce all other files byte for byte.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>

namespace qnode::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,    ///< configuration, arguments or dataset
  kRuntimeError = 3,  ///< physics or numerical failure
  kDegraded = 4,      ///< finished, but an analysis did not converge
};

struct SimulateOptions {
  std::string config;
  std::string command = "two-photon";  ///< two-photon | storage | ramsey | thermometry
  std::string out = ".";
  std::uint64_t seed = 1;
  int shots = 2400;
};

struct AnalyzeOptions {
  std::string dataset;
  std::string detector = "all";  ///< "all" or 0..3
  std::string optics = "measured";
  std::string out = ".";
};

struct BootstrapOptions {
  std::string dataset;
  std::string optics = "measured";
  std::string out = ".";
  int replicates = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ProcessTomoOptions {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
};

/// Diagnostics go to `log`; the return value is an ExitCode.
int cmd_simulate(const SimulateOptions& opt, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& log);
int cmd_bootstrap(const BootstrapOptions& opt, std::ostream& log);
int cmd_process_tomo(const ProcessTomoOptions& opt, std::ostream& log);

}  // namespace qnode::cli
