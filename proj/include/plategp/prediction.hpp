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


#ifndef PLATEGP_PREDICTION_HPP
#define PLATEGP_PREDICTION_HPP

#include <Eigen/Core>

#include <span>
#include <vector>

#include "plategp/gp_model.hpp"
#include "plategp/mcmc.hpp"

namespace plategp {

/// One plate quantity at one location.
struct Target {
  Point location;
  QuantityKind quantity = QuantityKind::w;
};

/// Targets for every grid point and each listed quantity, quantity-major.
std::vector<Target> grid_targets(std::span<const Point> points, std::span<const QuantityKind> quantities);

struct Prediction {
  Eigen::VectorXd mean;
  /// Marginal predictive variances, clamped at 0.
  Eigen::VectorXd variance;
  double jitter = 0.0;
};

/// Fixed-hyperparameter predictive posterior of the targets given the
/// likelihood's dataset:
///   m = K*^T (K+E)^-1 z,   v = diag(K**) - diag(K*^T (K+E)^-1 K*).
/// Throws std::invalid_argument for targets outside the plate and
/// IllConditionedError when K+E cannot be factorized.
Prediction predictive_posterior(const MarginalLikelihood& likelihood, const ExtendedHyperparams& params,
                                std::span<const Target> targets);

/// Convenience overload that builds the likelihood evaluator.
Prediction predictive_posterior(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                std::span<const Target> targets);

struct PredictiveSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd lower;  // q_{0.005} by default
  Eigen::VectorXd upper;  // q_{0.995}
  std::size_t draws_used = 0;
};

struct MixtureOptions {
  std::size_t stride = 10;
  double lower_probability = 0.005;
  double upper_probability = 0.995;
  /// Bisection stops once the bracket's CDF values differ by less than this.
  double probability_tolerance = 1e-6;
  /// Worker threads for the per-draw solves; 0 means hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// Equal-weight Gaussian mixture over the trace thinned by `stride`
/// (draws 0, stride, 2 stride, ...). Mixture variance is the mean per-draw
/// variance plus the variance of the per-draw means; the band comes from the
/// mixture quantiles. Throws std::invalid_argument when no draws remain.
PredictiveSummary mc_predictive(const MarginalLikelihood& likelihood, const McmcTrace& trace,
                                std::span<const Target> targets, const MixtureOptions& options = {});

/// Summary of a single fixed-parameter prediction, with Gaussian quantiles.
PredictiveSummary summarize(const Prediction& prediction, const MixtureOptions& options = {});

/// Quantile of the equal-weight mixture sum_i N(means_i, variances_i) / n,
/// found by bisection on the mixture CDF. Zero-variance components are point
/// masses. Throws std::invalid_argument for mismatched or empty inputs or p
/// outside (0, 1).
double gaussian_mixture_quantile(std::span<const double> means, std::span<const double> variances, double p,
                                 double probability_tolerance = 1e-6);

/// Mixture CDF at x.
double gaussian_mixture_cdf(std::span<const double> means, std::span<const double> variances, double x);

}  // namespace plategp

#endif  // PLATEGP_PREDICTION_HPP
