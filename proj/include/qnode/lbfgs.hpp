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

// lbfgs.hpp: limited-memory BFGS minimizer with a backtracking line search.
//
// The objective may return +inf to mark an infeasible point; the line
// search then shrinks the step, so +inf acts as a barrier.

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace qnode::lbfgs {

struct Options {
  int max_iterations = 5000;
  int history = 12;
  double f_tol = 1e-9;  ///< |f_k - f_{k+1}| below this ...
  double g_tol = 1e-6;  ///< ... together with ||grad|| below this is convergence
};

struct Result {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Objective: returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

Result minimize(const Objective& fg, Eigen::VectorXd x0, const Options& opts = {});

}  // namespace qnode::lbfgs
