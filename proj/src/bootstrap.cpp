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

#include "qnode/bootstrap.hpp"

#include "qnode/rng.hpp"
#include "qnode/stats.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

namespace qnode::bootstrap {

tomo::ClickDataset resample_dataset(const tomo::ClickDataset& data, std::uint64_t seed, std::uint32_t replicate) {
  tomo::ClickDataset out = data;
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    const tomo::SettingCounts& s = data.settings[i];
    tomo::SettingCounts& r = out.settings[i];
    const auto base = static_cast<std::uint32_t>(8 * i);
    rng::Philox gen(seed, replicate, base);

    r.attempts = rng::poisson(static_cast<double>(s.attempts), gen);
    std::array<double, 5> probs{static_cast<double>(s.n_empty)};
    for (int h = 0; h < bsa::kDetectors; ++h) probs[h + 1] = static_cast<double>(s.clicks[h]);
    std::array<long long, 5> n{};
    if (s.attempts > 0) rng::multinomial(r.attempts, probs, n, gen);
    r.n_empty = n[0];
    for (int h = 0; h < bsa::kDetectors; ++h) {
      rng::Philox ion_gen(seed, replicate, base + 1 + static_cast<std::uint32_t>(h));
      r.clicks[h] = n[h + 1];
      const double pb = s.clicks[h] > 0 ? static_cast<double>(s.ion[h][0]) / static_cast<double>(s.clicks[h]) : 0.0;
      r.ion[h][0] = rng::binomial(r.clicks[h], pb, ion_gen);
      r.ion[h][1] = r.clicks[h] - r.ion[h][0];
    }
  }
  return out;
}

std::array<long long, 4> resample_two_ion(const std::array<long long, 4>& counts, std::uint64_t seed,
                                          std::uint32_t replicate) {
  long long total = 0;
  std::array<double, 4> probs{};
  for (int k = 0; k < 4; ++k) {
    if (counts[k] < 0) throw tomo::DataError("two-ion readout counts must be non-negative");
    total += counts[k];
    probs[k] = static_cast<double>(counts[k]);
  }
  std::array<long long, 4> out{};
  if (total == 0) return out;
  rng::Philox gen(seed, replicate, 0xFFFFFFFFu);
  rng::multinomial(total, probs, out, gen);
  return out;
}

Interval bootstrap_ci(const tomo::ClickDataset& data, const ResamplingSpec& spec, const Pipeline& pipeline) {
  if (spec.replicates < 2) throw std::invalid_argument("bootstrap: replicates must be at least 2");
  data.validate();
  Interval result;
  result.point = pipeline(data);
  result.replicates = spec.replicates;

  std::vector<std::optional<double>> values(static_cast<std::size_t>(spec.replicates));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < spec.replicates; r = next++) {
      try {
        const double v = pipeline(resample_dataset(data, spec.seed, static_cast<std::uint32_t>(r)));
        if (std::isfinite(v)) values[static_cast<std::size_t>(r)] = v;
      } catch (const std::exception&) {
        // counted as a failure below
      }
    }
  };
  const int workers = std::max(1, std::min(spec.workers, spec.replicates));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& v : values) {
    if (v) result.values.push_back(*v);
    else ++result.failures;
  }
  if (result.failures > 0.05 * spec.replicates)
    throw BootstrapError("bootstrap: " + std::to_string(result.failures) + " of " + std::to_string(spec.replicates) +
                         " replicates failed (limit 5%); statistic '" + spec.statistic + "', seed " +
                         std::to_string(spec.seed));
  result.lo = stats::percentile(result.values, 0.025);
  result.hi = stats::percentile(result.values, 0.975);
  return result;
}

}  // namespace qnode::bootstrap
