/*
 * Copyright 2026 The plategp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */


#ifndef PLATEGP_CONJUGATE_GRADIENT_HPP
#define PLATEGP_CONJUGATE_GRADIENT_HPP

#include <Eigen/Core>

#include <functional>
#include <string>

namespace plategp {

/// Objective for minimization. Writes the gradient into `gradient` and returns
/// the value; +inf (or NaN) marks an infeasible point, and the line search
/// backs off from it.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& gradient)>;

struct CgOptions {
  int max_iterations = 200;
  int max_evaluations = 2000;
  /// Converged when the infinity norm of the gradient falls below this.
  double gradient_tolerance = 1e-4;
  /// Also converged after `stall_iterations` consecutive steps whose relative
  /// reduction (f_k - f_k+1) / max(|f_k|, |f_k+1|, 1) is at most this.
  /// Handles objectives whose gradient sits at the round-off floor.
  double function_tolerance = 1e-10;
  int stall_iterations = 1;
  /// Sufficient decrease and curvature constants of the strong Wolfe conditions.
  double c1 = 1e-4;
  double c2 = 0.1;
  /// Largest coordinate change per line search.
  double max_step = 2.0;
};

struct CgResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Polak-Ribiere+ nonlinear conjugate gradient with a strong Wolfe line search.
/// Throws std::invalid_argument if the objective is not finite at x0.
CgResult minimize_cg(const Objective& f, Eigen::VectorXd x0, const CgOptions& options = {});

}  // namespace plategp

#endif  // PLATEGP_CONJUGATE_GRADIENT_HPP
