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

// bootstrap.hpp: nonparametric bootstrap of the tomography pipeline.
//
// Random streams: replicate r of a resampling with seed s uses Philox
// generators keyed by s with stream words (r, 8 * setting + slot), where
// slot 0 drives the attempt and detector draws and slot 1 + h the ion
// readouts on detector h. Results therefore do not depend on how replicates
// are distributed over worker threads.

#pragma once

#include "qnode/tomo.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnode::bootstrap {

/// Raised when too many replicates fail to produce a statistic.
class BootstrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResamplingSpec {
  int replicates = 1000;
  std::uint64_t seed = 0;
  std::string statistic = "state_fidelity";
  int workers = 1;
};

/// Attempts ~ Poisson(observed attempts); outcomes over {empty, d0..d3}
/// ~ multinomial with the observed frequencies; bright readouts per
/// detector ~ binomial with the observed bright fraction.
tomo::ClickDataset resample_dataset(const tomo::ClickDataset& data, std::uint64_t seed, std::uint32_t replicate = 0);

/// Multinomial redraw of a four-outcome two-ion readout, total preserved.
std::array<long long, 4> resample_two_ion(const std::array<long long, 4>& counts, std::uint64_t seed,
                                          std::uint32_t replicate = 0);

struct Interval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int replicates = 0;
  int failures = 0;
  std::vector<double> values;  ///< successful replicate statistics, replicate order
};

using Pipeline = std::function<double(const tomo::ClickDataset&)>;

/// 95% percentile interval (2.5 and 97.5 percentiles, linear interpolation).
/// A replicate fails when the pipeline throws or returns a non-finite value;
/// more than 5% failures raise BootstrapError.
Interval bootstrap_ci(const tomo::ClickDataset& data, const ResamplingSpec& spec, const Pipeline& pipeline);

}  // namespace qnode::bootstrap
