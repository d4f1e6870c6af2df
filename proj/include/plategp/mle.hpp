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


#ifndef PLATEGP_MLE_HPP
#define PLATEGP_MLE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "plategp/conjugate_gradient.hpp"
#include "plategp/gp_model.hpp"

namespace plategp {

/// Uniform hyperprior support, identical for every component of theta^e on
/// the natural scale.
struct HyperpriorBounds {
  double lower = 1e-12;
  double upper = 1e12;

  [[nodiscard]] bool contains(const Eigen::VectorXd& natural) const;
  void validate() const;
};

struct MleOptions {
  /// cg.gradient_tolerance is relative: the run has converged when the
  /// projected gradient is below it times max(1, |log p|).
  CgOptions cg;
  int max_restarts = 5;
  /// Standard deviation of the log-normal perturbation applied to theta_0 on restart.
  double restart_spread = 0.5;
  /// Estimates of D below this are treated as collapsed and trigger a restart. 0 disables.
  double rigidity_floor = 0.0;
  std::uint64_t seed = 0;
  HyperpriorBounds bounds;
};

struct MleResult {
  ExtendedHyperparams params;
  double log_likelihood = 0.0;
  double jitter = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  /// Projected gradient infinity norm below tolerance at the reported estimate.
  bool converged = false;
  /// Negative definite Hessian and no component sitting on a bound.
  bool identifiable = false;
  bool rigidity_collapsed = false;
  double gradient_norm = 0.0;
  std::string message;
};

/// Maximizes the log marginal likelihood in log-parameter space. D stays at
/// its initial value when the dataset cannot identify it. Non-convergence is
/// reported through the flags, never thrown.
MleResult mle_optimize(const MarginalLikelihood& likelihood, const ExtendedHyperparams& initial,
                       const MleOptions& options = {});

/// Starting point shared by the optimizer and the sampler. For a scan of
/// isotropic length scales (fractions of the observation extent), A and D are
/// matched to the mean square of the rigidity-free and rigidity-carrying
/// blocks and the noise set to 1% of each block's mean square; the scan point
/// with the highest likelihood is returned.
ExtendedHyperparams initial_hyperparams(const Dataset& data, double poisson);

}  // namespace plategp

#endif  // PLATEGP_MLE_HPP
