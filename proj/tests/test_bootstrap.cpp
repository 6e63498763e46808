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

#include "helpers.hpp"

#include "qnode/bootstrap.hpp"
#include "qnode/fidelity.hpp"
#include "qnode/stats.hpp"

#include <doctest.h>

using namespace qnode;
using namespace qnode::testing;

namespace {

DensityMatrix ion_photon_werner(double p) {
  // Werner mixture around (|down, H> + |up, V>)/sqrt(2).
  const double s = 1.0 / std::sqrt(2.0);
  const ComplexVector psi = ket({0.0, s, s, 0.0});
  return DensityMatrix::project(p * psi * psi.adjoint() + (1.0 - p) * qlin::identity(4) / 4.0);
}

bootstrap::Pipeline fidelity_pipeline(int h, const bsa::OpticsConfig& optics) {
  return [h, optics](const tomo::ClickDataset& d) {
    return fidelity::entangled_fraction_fidelity(tomo::mle_state(d, h, optics).rho);
  };
}

bool same_counts(const tomo::ClickDataset& a, const tomo::ClickDataset& b) {
  for (std::size_t i = 0; i < a.settings.size(); ++i) {
    const auto &x = a.settings[i], &y = b.settings[i];
    if (x.attempts != y.attempts || x.n_empty != y.n_empty || x.clicks != y.clicks || x.ion != y.ion) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("degenerate outcomes stay degenerate") {
  tomo::ClickDataset d = tomo::empty_dataset();
  for (auto& s : d.settings) {
    s.attempts = 400;
    s.clicks[2] = 400;
    s.ion[2] = {400, 0};
  }
  for (std::uint32_t r = 0; r < 5; ++r) {
    const tomo::ClickDataset x = bootstrap::resample_dataset(d, 9, r);
    for (const auto& s : x.settings) {
      CHECK(s.n_empty == 0);
      CHECK(s.clicks[2] == s.attempts);
      CHECK(s.ion[2][0] == s.attempts);
      CHECK(s.clicks[0] + s.clicks[1] + s.clicks[3] == 0);
    }
    CHECK_NOTHROW(x.validate());
  }
}

TEST_CASE("resampling is unbiased and reproducible") {
  const bsa::OpticsConfig s1 = bsa::OpticsConfig::measured();
  const tomo::ClickDataset d = tomo::simulate_dataset(ion_photon_werner(0.8), s1, 300, 61);
  CHECK(same_counts(bootstrap::resample_dataset(d, 5, 3), bootstrap::resample_dataset(d, 5, 3)));
  CHECK_FALSE(same_counts(bootstrap::resample_dataset(d, 5, 3), bootstrap::resample_dataset(d, 6, 3)));
  CHECK_FALSE(same_counts(bootstrap::resample_dataset(d, 5, 3), bootstrap::resample_dataset(d, 5, 4)));

  const int n = 10000;
  const int k = 7;  // one setting is enough to exercise every draw
  double attempts = 0.0, clicks = 0.0, bright = 0.0;
  double attempts2 = 0.0, clicks2 = 0.0, bright2 = 0.0;
  for (int r = 0; r < n; ++r) {
    const tomo::ClickDataset x = bootstrap::resample_dataset(d, 77, static_cast<std::uint32_t>(r));
    if (r < 200) CHECK_NOTHROW(x.validate());
    const auto& s = x.settings[k];
    attempts += s.attempts;
    attempts2 += double(s.attempts) * s.attempts;
    clicks += s.clicks[1];
    clicks2 += double(s.clicks[1]) * s.clicks[1];
    bright += s.ion[1][0];
    bright2 += double(s.ion[1][0]) * s.ion[1][0];
  }
  auto within = [n](double sum, double sum2, double target) {
    const double m = sum / n, var = sum2 / n - m * m;
    return std::abs(m - target) <= 3.0 * std::sqrt(var / n);
  };
  const auto& s = d.settings[k];
  CHECK(within(attempts, attempts2, double(s.attempts)));
  CHECK(within(clicks, clicks2, double(s.clicks[1])));
  CHECK(within(bright, bright2, double(s.ion[1][0])));
}

TEST_CASE("two-ion readout resampling") {
  for (std::uint32_t r = 0; r < 20; ++r)
    CHECK(bootstrap::resample_two_ion({100, 0, 0, 0}, 3, r) == std::array<long long, 4>{100, 0, 0, 0});
  double sum = 0.0;
  for (std::uint32_t r = 0; r < 10000; ++r) {
    const auto c = bootstrap::resample_two_ion({50, 50, 0, 0}, 4, r);
    CHECK(c[0] + c[1] + c[2] + c[3] == 100);
    CHECK(c[2] + c[3] == 0);
    sum += c[0];
  }
  CHECK(std::abs(sum / 10000.0 - 50.0) < 1.5);
  const auto c = bootstrap::resample_two_ion({10, 20, 30, 40}, 5, 0);
  CHECK(c[0] + c[1] + c[2] + c[3] == 100);
}

TEST_CASE("percentile intervals") {
  const tomo::ClickDataset d = tomo::simulate_dataset(ion_photon_werner(1.0), bsa::OpticsConfig::ideal(), 500, 62);
  bootstrap::ResamplingSpec spec;
  spec.replicates = 50;
  spec.seed = 8;
  const auto flat = bootstrap::bootstrap_ci(d, spec, [](const tomo::ClickDataset&) { return 0.75; });
  CHECK(flat.point == 0.75);
  CHECK(flat.lo == 0.75);
  CHECK(flat.hi == 0.75);

  spec.replicates = 200;
  const auto ci = bootstrap::bootstrap_ci(d, spec, fidelity_pipeline(0, bsa::OpticsConfig::ideal()));
  CHECK(ci.lo <= ci.point);
  CHECK(ci.point <= ci.hi);
  CHECK(ci.values.size() == 200);
  CHECK(ci.lo == doctest::Approx(stats::percentile(ci.values, 0.025)));
  CHECK(ci.hi == doctest::Approx(stats::percentile(ci.values, 0.975)));

  // Independent of the worker count.
  spec.replicates = 40;
  spec.workers = 1;
  const auto a = bootstrap::bootstrap_ci(d, spec, fidelity_pipeline(2, bsa::OpticsConfig::ideal()));
  spec.workers = 3;
  const auto b = bootstrap::bootstrap_ci(d, spec, fidelity_pipeline(2, bsa::OpticsConfig::ideal()));
  CHECK(a.values == b.values);
  CHECK(a.lo == b.lo);

  // Replicates = 2 is allowed.
  spec.replicates = 2;
  const auto two = bootstrap::bootstrap_ci(d, spec, fidelity_pipeline(0, bsa::OpticsConfig::ideal()));
  CHECK(two.lo <= two.hi);

  spec.replicates = 100;
  int calls = 0;
  spec.workers = 1;
  CHECK_THROWS_AS(bootstrap::bootstrap_ci(d, spec,
                                          [&calls](const tomo::ClickDataset&) {
                                            if (calls++ % 10 == 3) throw std::runtime_error("fit failed");
                                            return 0.5;
                                          }),
                  bootstrap::BootstrapError);
  calls = 0;
  CHECK_NOTHROW(bootstrap::bootstrap_ci(d, spec, [&calls](const tomo::ClickDataset&) {
    if (calls++ == 50) throw std::runtime_error("fit failed");
    return 0.5;
  }));
}

TEST_CASE("intervals narrow with more data") {
  const bsa::OpticsConfig ideal = bsa::OpticsConfig::ideal();
  const DensityMatrix truth = ion_photon_werner(0.8);
  bootstrap::ResamplingSpec spec;
  spec.replicates = 100;
  double w1 = 0.0, w4 = 0.0;
  for (int run = 0; run < 20; ++run) {
    spec.seed = 1000 + run;
    const auto small = tomo::simulate_dataset(truth, ideal, 250, 2000 + run);
    const auto large = tomo::simulate_dataset(truth, ideal, 1000, 3000 + run);
    const auto a = bootstrap::bootstrap_ci(small, spec, fidelity_pipeline(0, ideal));
    const auto b = bootstrap::bootstrap_ci(large, spec, fidelity_pipeline(0, ideal));
    w1 += a.hi - a.lo;
    w4 += b.hi - b.lo;
  }
  CHECK(w4 <= 0.7 * w1);
}
