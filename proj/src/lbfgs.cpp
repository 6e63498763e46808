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

#include "qnode/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace qnode::lbfgs {

Result minimize(const Objective& fg, Eigen::VectorXd x0, const Options& opts) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n);
  res.f = fg(res.x, g);
  if (!std::isfinite(res.f)) throw std::invalid_argument("lbfgs: objective is not finite at the starting point");

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g_new(n), x_new(n), d(n);

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;

    // Two-loop recursion.
    d = -g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(d);
      d -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(d);
      d += (alpha[k] - beta) * s_hist[k];
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    // First step without curvature history is scaled to unit length.
    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(d.norm(), 1e-300)) : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * d;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.grad_norm = g.norm();
      res.converged = res.grad_norm < opts.g_tol;
      return res;
    }

    const double df = res.f - f_new;
    Eigen::VectorXd s = x_new - res.x, y = g_new - g;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      }
    }
    res.grad_norm = g.norm();
    if (std::abs(df) < opts.f_tol && res.grad_norm < opts.g_tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace qnode::lbfgs
