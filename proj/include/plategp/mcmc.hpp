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


#ifndef PLATEGP_MCMC_HPP
#define PLATEGP_MCMC_HPP

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plategp/gp_model.hpp"
#include "plategp/mle.hpp"

namespace plategp {

enum class ProposalAdaptation {
  none,
  /// Scale the initial diagonal proposal toward the target acceptance band.
  diagonal_scale,
  /// As diagonal_scale, then switch to the scaled empirical covariance of the
  /// adaptation-phase draws.
  empirical_covariance,
};

struct SamplerOptions {
  int samples = 20000;  // retained draws
  int burn_in = 5000;
  /// Initial proposal variance per coordinate. Empty means 0.01 everywhere.
  Eigen::VectorXd proposal_variance;
  ProposalAdaptation adaptation = ProposalAdaptation::empirical_covariance;
  /// Adaptation runs over the first fraction of the burn-in, then the
  /// proposal is frozen for the rest of the chain.
  double adaptation_fraction = 0.6;
  int adaptation_batch = 100;
  double target_acceptance_low = 0.2;
  double target_acceptance_high = 0.4;
  /// Abort when this many consecutive post-adaptation proposals are all
  /// rejected. 0 disables the check.
  int stall_window = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Raised when a chain stops moving, usually because the proposal is too wide.
class SamplerStalledError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log of an unnormalized target density; -inf outside its support.
using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct ChainResult {
  /// One row per retained draw.
  Eigen::MatrixXd draws;
  Eigen::VectorXd log_density;
  /// Whether the proposal made at each retained iteration was accepted.
  std::vector<std::uint8_t> accepted;
  double acceptance_rate = 0.0;
  /// Frozen proposal covariance used for the retained draws.
  Eigen::MatrixXd proposal_covariance;
};

/// Random-walk Metropolis-Hastings with Gaussian proposals. The proposal is
/// symmetric, so the acceptance ratio is the density ratio, evaluated in the
/// log domain. Throws std::invalid_argument if the start has non-finite
/// density.
ChainResult metropolis_hastings(const LogDensity& log_density, const Eigen::VectorXd& start,
                                const SamplerOptions& options);

/// Fraction of accepted proposals.
double acceptance_rate(const std::vector<std::uint8_t>& accepted);

struct McmcConfig {
  SamplerOptions sampler;
  ExtendedHyperparams initial;
  HyperpriorBounds bounds;
};

struct McmcTrace {
  ParameterLayout layout;
  /// Natural-scale draws, one row per retained iteration, columns per layout.
  Eigen::MatrixXd draws;
  /// log p(z | theta) + log p(theta), dropping the uniform prior's constant.
  Eigen::VectorXd log_posterior;
  std::vector<std::uint8_t> accepted;
  double acceptance_rate = 0.0;
  /// Largest jitter needed by any retained draw.
  double max_jitter = 0.0;
  Eigen::MatrixXd proposal_covariance;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(draws.rows()); }
  [[nodiscard]] bool empty() const { return draws.rows() == 0; }
  [[nodiscard]] ExtendedHyperparams draw(std::size_t i) const;
};

/// Samples p(theta^e | z) under a uniform hyperprior on the natural scale. The
/// walk runs in log space, so the Jacobian sum(log theta) enters the target.
/// D is held at its initial value when the data cannot identify it.
McmcTrace mh_sample(const MarginalLikelihood& likelihood, const McmcConfig& config);

/// Per-component arithmetic mean of the natural-scale draws.
/// Throws std::invalid_argument for an empty trace.
ExtendedHyperparams mcmc_mean(const McmcTrace& trace);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;
};

struct ChainDiagnostics {
  double acceptance_rate = 0.0;
  std::vector<std::string> names;
  std::vector<Histogram> histograms;
  /// Pearson correlation of the natural-scale draws; 0 where a component is constant.
  Eigen::MatrixXd correlation;
  /// True when some component never moved.
  bool degenerate = false;
};

ChainDiagnostics chain_diagnostics(const McmcTrace& trace, int bins = 30);

/// Pearson correlation matrix of the columns; constant columns get 0 off the
/// diagonal and the flag is set.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples, bool& degenerate);

}  // namespace plategp

#endif  // PLATEGP_MCMC_HPP
