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

// stats.hpp: small statistics helpers used by the protocol analysis,
// bootstrap intervals and the acceptance checks.

#pragma once

#include <span>
#include <vector>

namespace qnode::stats {

/// Linear-interpolation percentile (Hyndman-Fan type 7, the R/NumPy default):
/// h = (n - 1) q, result = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])
/// on the sorted sample. q in [0, 1].
double percentile(std::vector<double> sample, double q);

double mean(std::span<const double> x);
/// Unbiased sample standard deviation.
double stddev(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r_squared = 0.0;
};

/// Least squares y = intercept + slope x. With `sigma` given the fit is
/// weighted by 1/sigma^2 and the standard errors follow from sigma alone;
/// otherwise they come from the residual scatter.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {});

/// Upper tail probability of the chi-squared distribution.
double chi_square_sf(double statistic, double dof);

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson goodness of fit of observed trial counts (values >= 1) to the
/// geometric law P(k) = p (1 - p)^(k - 1). Adjacent bins are pooled from the
/// left until each expected count is at least 5; the last bin is the tail.
GofResult geometric_gof(std::span<const long long> trials, double p);

struct GaussianDecayFit {
  double amplitude = 0.0;
  double time_constant = 0.0;
  double time_constant_se = 0.0;
  bool converged = false;
};

/// Fits y = floor + amplitude * exp(-(t / T)^2) by Levenberg-Marquardt,
/// with weights 1/sigma^2 when sigma is given.
GaussianDecayFit gaussian_decay_fit(std::span<const double> t, std::span<const double> y, double floor,
                                    std::span<const double> sigma = {});

}  // namespace qnode::stats
