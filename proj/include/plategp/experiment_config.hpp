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


#ifndef PLATEGP_EXPERIMENT_CONFIG_HPP
#define PLATEGP_EXPERIMENT_CONFIG_HPP

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plategp/mcmc.hpp"
#include "plategp/mle.hpp"
#include "plategp/oracles.hpp"

namespace plategp {

/// Invalid or unreadable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LearningCase { L1, L2, L3 };
enum class BoundaryMode { none, displacement_rotation };

std::string_view to_string(LearningCase c);
std::string_view to_string(BoundaryMode m);
std::string_view to_string(ProposalAdaptation a);
LearningCase parse_learning_case(std::string_view name);

/// Equidistant grid over the plate with the outermost points moved inward by
/// `inset` times the span.
struct GridSpec {
  int points = 5;
  double inset = 0.05;
};

struct McmcSettings {
  int samples = 20000;
  int burn_in = 5000;
  double proposal_variance = 0.01;
  ProposalAdaptation adaptation = ProposalAdaptation::empirical_covariance;
  int stall_window = 2000;
  /// Thinning stride for the predictive mixture.
  int stride = 10;

  [[nodiscard]] SamplerOptions sampler(std::uint64_t seed) const;
};

struct MleSettings {
  int max_restarts = 5;
  double rigidity_floor = 0.0;
  double gradient_tolerance = 1e-4;
  int max_iterations = 200;

  [[nodiscard]] MleOptions options(const HyperpriorBounds& bounds, std::uint64_t seed) const;
};

struct StudySettings {
  std::vector<double> snr_levels = {5.0, 10.0, 20.0, 100.0};
  std::vector<LearningCase> cases = {LearningCase::L1, LearningCase::L2, LearningCase::L3};
  /// MLE runs with D below this fraction of the true D are excluded from the statistics.
  double outlier_fraction = 0.1;
  bool run_mcmc = true;
  /// Chains are shorter than a single learning run so a study stays at desk scale.
  McmcSettings mcmc{4000, 2000, 0.01, ProposalAdaptation::empirical_covariance, 2000, 10};
};

struct ExperimentConfig {
  PlateGeometry geometry;
  LoadSpec load;
  GridSpec training_grid{5, 0.05};
  GridSpec prediction_grid{21, 0.0};
  /// +inf means noiseless training data.
  double snr = 10.0;
  LearningCase learning_case = LearningCase::L3;
  BoundaryMode boundary_mode = BoundaryMode::none;
  int boundary_points_per_edge = 5;
  int replications = 100;
  std::uint64_t seed = 1;
  McmcSettings mcmc;
  MleSettings mle;
  HyperpriorBounds bounds;
  StudySettings study;
  int ritz_modes = 200;
  std::vector<QuantityKind> predict_quantities = {QuantityKind::w, QuantityKind::kappa_x, QuantityKind::M_x};
  std::string output_dir = "out";
  /// Worker threads for replications and predictive mixtures; 0 means all cores.
  unsigned threads = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Strict parse: unknown keys, wrong types and invalid values are ConfigErrors.
/// Missing keys keep their defaults. SNR accepts a number or "inf".
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field written out, keys sorted; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace plategp

#endif  // PLATEGP_EXPERIMENT_CONFIG_HPP
