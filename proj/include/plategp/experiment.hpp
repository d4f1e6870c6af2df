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


#ifndef PLATEGP_EXPERIMENT_HPP
#define PLATEGP_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plategp/experiment_config.hpp"
#include "plategp/mcmc.hpp"
#include "plategp/mle.hpp"
#include "plategp/oracles.hpp"
#include "plategp/prediction.hpp"

namespace plategp {

enum class SupportKind { simply_supported, clamped };

/// The sinusoidal load is paired with simple supports (Navier), the uniform
/// load with clamped edges (Ritz).
SupportKind support_for(LoadKind load);

/// Ground truth for one configured plate.
class PlateOracle {
 public:
  explicit PlateOracle(const ExperimentConfig& cfg);

  [[nodiscard]] SupportKind support() const { return support_; }
  [[nodiscard]] const PlateGeometry& geometry() const { return geometry_; }
  /// For the clamped plate, q returns the prescribed load: the term-wise
  /// series for q does not converge pointwise.
  [[nodiscard]] double operator()(QuantityKind kind, Point x) const;

 private:
  PlateGeometry geometry_;
  LoadSpec load_;
  SupportKind support_;
  std::optional<RitzSolution> ritz_;
};

std::vector<QuantityKind> case_quantities(LearningCase c);

/// Row-major grid: y outer, x inner. With inset f the outermost points sit at
/// f*a and (1-f)*a.
std::vector<Point> grid_points(const GridSpec& grid, const PlateGeometry& geometry);

/// Per-replication seed, splitmix64 of master + counter * 0x9e3779b97f4a7c15.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

/// Oracle values of the case's quantities on the training grid plus Gaussian
/// noise with sd = std(true values over the grid) / snr per quantity; a
/// constant field gets no noise. snr = +inf gives exact values. Noise is drawn
/// quantity by quantity, grid order, from mt19937_64(seed).
Dataset generate_training_data(const ExperimentConfig& cfg, const PlateOracle& oracle, LearningCase learning_case,
                               double snr, std::uint64_t seed);

/// Noise standard deviation used for one quantity's true values.
double noise_sd(std::span<const double> truth, double snr);

/// Appends noiseless zero observations along the edges at points_per_edge
/// uniformly spaced points per edge, corners included and deduplicated per
/// quantity: w on every edge, and for clamped edges also r_x on x = 0, a and
/// r_y on y = 0, b.
Dataset inject_boundary_conditions(const Dataset& data, const PlateGeometry& geometry, BoundaryMode mode,
                                   SupportKind support, int points_per_edge);

struct LearnOutcome {
  std::string config_hash;
  std::uint64_t seed = 0;
  Dataset data;
  ExtendedHyperparams initial;
  MleResult mle;
  std::optional<McmcTrace> trace;
  std::optional<ExtendedHyperparams> posterior_mean;
  std::optional<ChainDiagnostics> diagnostics;
  double true_rigidity = 1.0;
  double runtime_seconds = 0.0;

  /// (D_hat - D_true) / D_true.
  [[nodiscard]] double mle_rigidity_error() const;
  /// (D_bar - D_true) / D_true; NaN without a trace.
  [[nodiscard]] double mcmc_rigidity_error() const;
  /// Largest jitter over the MLE and the retained draws.
  [[nodiscard]] double final_jitter() const;
};

/// Dataset for the configured case, SNR, seed and boundary mode.
Dataset build_dataset(const ExperimentConfig& cfg, const PlateOracle& oracle);

/// MLE and MCMC from the same initial hyperparameters on one dataset.
/// MLE non-convergence is recorded in the outcome, not thrown.
LearnOutcome run_learning_case(const ExperimentConfig& cfg, const PlateOracle& oracle, bool run_mcmc = true);
/// Learning on a given dataset; `seed` feeds the sampler and MLE restarts.
LearnOutcome learn_on(const ExperimentConfig& cfg, Dataset data, bool run_mcmc, const McmcSettings& mcmc,
                      std::uint64_t seed);
/// As above with the configured run's seed.
LearnOutcome learn_on(const ExperimentConfig& cfg, Dataset data, bool run_mcmc, const McmcSettings& mcmc);

struct ReplicationRecord {
  std::size_t index = 0;
  double snr = 0.0;
  LearningCase learning_case = LearningCase::L1;
  std::uint64_t seed = 0;
  double mle_rigidity = 0.0;
  bool mle_converged = false;
  /// MLE estimate below the outlier floor.
  bool mle_excluded = false;
  double mcmc_rigidity = 0.0;  // NaN when not run or failed
  double acceptance_rate = 0.0;
  std::string failure;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] double iqr() const { return q75 - q25; }
};

/// Linear-interpolation quantile of sorted data (p in [0, 1]).
double sorted_quantile(std::span<const double> sorted, double p);
/// Throws std::invalid_argument for empty input.
SummaryStats summarize_values(std::vector<double> values);

struct StudyRow {
  double snr = 0.0;
  LearningCase learning_case = LearningCase::L1;
  std::string estimator;  // "mle" or "mcmc"
  std::size_t excluded = 0;
  std::size_t failed = 0;
  SummaryStats stats;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ReplicationRecord> replications;

  [[nodiscard]] const StudyRow* find(double snr, LearningCase c, std::string_view estimator) const;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// cfg.replications noise draws per (SNR, case). Replication r uses
/// derive_seed(cfg.seed, r) for its noise at every SNR and case, so the
/// comparisons see common random numbers.
StudyResult monte_carlo_study(const ExperimentConfig& cfg, const ProgressFn& progress = {});

struct FieldRow {
  Point location;
  QuantityKind quantity = QuantityKind::w;
  double mean = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct FieldSet {
  std::vector<FieldRow> predicted;
  /// Same schema; mean and band equal the true value, variance 0.
  std::vector<FieldRow> oracle;
  /// max |oracle| per quantity.
  std::map<QuantityKind, double> normalization;
};

/// Prediction grid fields for cfg.predict_quantities, from the trace mixture
/// when present, otherwise from the fixed hyperparameters.
FieldSet predict_fields(const ExperimentConfig& cfg, const PlateOracle& oracle, const Dataset& data,
                        const McmcTrace* trace, const ExtendedHyperparams& params);

/// Divides mean and band by the quantity's normalization and variance by its square.
std::vector<FieldRow> normalized(std::span<const FieldRow> rows, const std::map<QuantityKind, double>& scale);

/// Rows whose y equals the given value (grid lines).
std::vector<FieldRow> line_extract(std::span<const FieldRow> rows, double y);

}  // namespace plategp

#endif  // PLATEGP_EXPERIMENT_HPP
