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

#include "qnode/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qnode::stats {

double percentile(std::vector<double> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile level must lie in [0, 1]");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sample.size()) return sample.back();
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[lo + 1] - sample[lo]);
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || (!sigma.empty() && sigma.size() != n))
    throw std::invalid_argument("linear_fit: need at least two points of matching length");
  const bool weighted = !sigma.empty();
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
    sw += w, sx += w * x[i], sy += w * y[i], sxx += w * x[i] * x[i], sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("linear_fit: x values are degenerate");
  LinearFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;

  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / sw;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weighted ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss_res += w * r * r;
    ss_tot += w * (y[i] - ybar) * (y[i] - ybar);
  }
  const double var_scale = weighted ? 1.0 : (n > 2 ? ss_res / static_cast<double>(n - 2) : 0.0);
  f.slope_se = std::sqrt(var_scale * sw / det);
  f.intercept_se = std::sqrt(var_scale * sxx / det);
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_sf: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

GofResult geometric_gof(std::span<const long long> trials, double p) {
  if (trials.empty()) throw std::invalid_argument("geometric_gof: no data");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric_gof: p must lie in (0, 1]");
  const double n = static_cast<double>(trials.size());
  const long long kmax = *std::max_element(trials.begin(), trials.end());
  std::vector<double> observed(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (long long k : trials) {
    if (k < 1) throw std::invalid_argument("geometric_gof: trial counts start at 1");
    observed[static_cast<std::size_t>(k)] += 1.0;
  }

  // Bins [lo, hi); the final bin absorbs the tail P(K >= lo).
  std::vector<double> obs_bins, exp_bins;
  double o_acc = 0.0, e_acc = 0.0;
  long long k = 1;
  for (; k <= kmax; ++k) {
    const double tail_after = n * std::pow(1.0 - p, static_cast<double>(k));
    o_acc += observed[static_cast<std::size_t>(k)];
    e_acc += n * p * std::pow(1.0 - p, static_cast<double>(k - 1));
    if (e_acc >= 5.0 && tail_after >= 5.0) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  // Whatever is left, plus the unobserved tail beyond kmax.
  e_acc += n * std::pow(1.0 - p, static_cast<double>(kmax));
  obs_bins.push_back(o_acc);
  exp_bins.push_back(e_acc);

  GofResult g;
  for (std::size_t i = 0; i < obs_bins.size(); ++i)
    g.statistic += (obs_bins[i] - exp_bins[i]) * (obs_bins[i] - exp_bins[i]) / exp_bins[i];
  g.dof = static_cast<int>(obs_bins.size()) - 1;
  g.p_value = g.dof > 0 ? chi_square_sf(g.statistic, g.dof) : 1.0;
  return g;
}

namespace {

struct DecayFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::span<const double> t, y, sigma;
  double floor;

  int inputs() const { return 2; }
  int values() const { return static_cast<int>(t.size()); }

  double weight(std::size_t i) const { return sigma.empty() ? 1.0 : 1.0 / sigma[i]; }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double u = t[i] / p(1);
      r(static_cast<Eigen::Index>(i)) = weight(i) * (floor + p(0) * std::exp(-u * u) - y[i]);
    }
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double u = t[i] / p(1);
      const double e = std::exp(-u * u);
      const auto row = static_cast<Eigen::Index>(i);
      j(row, 0) = weight(i) * e;
      j(row, 1) = weight(i) * p(0) * e * 2.0 * u * u / p(1);
    }
    return 0;
  }
};

}  // namespace

GaussianDecayFit gaussian_decay_fit(std::span<const double> t, std::span<const double> y, double floor,
                                    std::span<const double> sigma) {
  if (t.size() < 3 || y.size() != t.size() || (!sigma.empty() && sigma.size() != t.size()))
    throw std::invalid_argument("gaussian_decay_fit: need at least three points of matching length");
  DecayFunctor f{{}, {}, {}, floor};
  f.t = t, f.y = y, f.sigma = sigma;

  // Start from the amplitude at the earliest point and the time where the
  // signal falls closest to 1/e of it.
  const std::size_t i0 = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
  const double a0 = std::max(y[i0] - floor, 1e-6);
  double t0 = *std::max_element(t.begin(), t.end()) / 2.0, best = 1e300;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = std::abs((y[i] - floor) - a0 / std::exp(1.0));
    if (t[i] > 0.0 && d < best) best = d, t0 = t[i];
  }
  Eigen::VectorXd p(2);
  p << a0, t0;
  Eigen::LevenbergMarquardt<DecayFunctor> lm(f);
  const auto status = lm.minimize(p);

  GaussianDecayFit out;
  out.amplitude = p(0);
  out.time_constant = std::abs(p(1));
  out.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall;

  Eigen::MatrixXd j(t.size(), 2);
  f.df(p, j);
  Eigen::VectorXd r(t.size());
  f(p, r);
  const Eigen::Matrix2d cov_unit = (j.transpose() * j).inverse();
  const double scale = sigma.empty() && t.size() > 2 ? r.squaredNorm() / static_cast<double>(t.size() - 2) : 1.0;
  out.time_constant_se = std::sqrt(std::max(0.0, scale * cov_unit(1, 1)));
  return out;
}

}  // namespace qnode::stats
