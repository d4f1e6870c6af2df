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

#ifndef PLATEGP_GP_MODEL_HPP
#define PLATEGP_GP_MODEL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plategp/kernel.hpp"
#include "plategp/plate_operators.hpp"

namespace plategp {

enum class NoiseClass { noisy, noiseless_bc };

struct Observation {
  Point location;
  QuantityKind quantity = QuantityKind::w;
  double value = 0.0;
  NoiseClass noise = NoiseClass::noisy;
};

/// Rectangular plate mid-surface [0, length_x] x [0, length_y].
struct PlateDomain {
  double length_x = 1.0;
  double length_y = 1.0;

  [[nodiscard]] bool contains(Point p) const;
};

/// Observations grouped into quantity blocks. Blocks follow QuantityKind
/// order; within a block the insertion order is kept.
class Dataset {
 public:
  Dataset() = default;
  /// Throws std::invalid_argument for out-of-domain locations, non-finite
  /// values, or noiseless observations of quantities other than w, r_x, r_y.
  Dataset(PlateDomain domain, std::vector<Observation> observations);

  [[nodiscard]] std::span<const Observation> observations() const { return observations_; }
  [[nodiscard]] const Observation& operator[](std::size_t i) const { return observations_[i]; }
  [[nodiscard]] std::size_t size() const { return observations_.size(); }
  [[nodiscard]] bool empty() const { return observations_.empty(); }
  [[nodiscard]] const PlateDomain& domain() const { return domain_; }

  [[nodiscard]] Eigen::VectorXd values() const;
  /// Quantities present, in block order.
  [[nodiscard]] std::vector<QuantityKind> quantities() const;
  /// Quantities with at least one noisy observation, in block order.
  [[nodiscard]] std::vector<QuantityKind> noisy_quantities() const;
  [[nodiscard]] std::size_t count(QuantityKind kind) const;
  /// D is identifiable only with at least one D-free and one D-carrying block.
  [[nodiscard]] bool supports_rigidity_learning() const;

  [[nodiscard]] Dataset with_appended(std::span<const Observation> extra) const;

 private:
  PlateDomain domain_;
  std::vector<Observation> observations_;
};

/// theta^e = (A, l_x, l_y, D, sigma^2 per noisy quantity).
struct ExtendedHyperparams {
  KernelParams kernel;
  double rigidity = 1.0;
  std::map<QuantityKind, double> noise_variance;

  void validate() const;
};

/// Fixed ordering of theta^e as a flat vector:
/// [A, l_x, l_y, D, sigma^2_{q1}, sigma^2_{q2}, ...] with noise entries in block order.
class ParameterLayout {
 public:
  static constexpr Eigen::Index kAmplitude = 0;
  static constexpr Eigen::Index kLengthX = 1;
  static constexpr Eigen::Index kLengthY = 2;
  static constexpr Eigen::Index kRigidity = 3;
  static constexpr Eigen::Index kFirstNoise = 4;

  ParameterLayout() = default;
  explicit ParameterLayout(std::vector<QuantityKind> noise_quantities);

  static ParameterLayout of(const ExtendedHyperparams& params);
  static ParameterLayout of(const Dataset& data);

  [[nodiscard]] Eigen::Index size() const { return kFirstNoise + static_cast<Eigen::Index>(noise_.size()); }
  [[nodiscard]] std::span<const QuantityKind> noise_quantities() const { return noise_; }
  /// Column names: A, l_x, l_y, D, sigma2_<quantity>...
  [[nodiscard]] std::vector<std::string> names() const;

  [[nodiscard]] Eigen::VectorXd to_natural(const ExtendedHyperparams& params) const;
  [[nodiscard]] Eigen::VectorXd to_log(const ExtendedHyperparams& params) const;
  [[nodiscard]] ExtendedHyperparams from_natural(const Eigen::VectorXd& values) const;
  [[nodiscard]] ExtendedHyperparams from_log(const Eigen::VectorXd& log_values) const;

  friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;

 private:
  std::vector<QuantityKind> noise_;
};

/// Diagonal jitter schedule used when K + E is not numerically positive definite.
/// The jitter is relative: row i receives eps * K_ii (or eps when K_ii is 0), so
/// quantities of very different magnitude are regularized alike.
struct JitterPolicy {
  double initial = 1e-10;
  double factor = 10.0;
  double ceiling = 1e-5;
};

/// Raised when K + E + eps diag(K) cannot be factorized even at the jitter ceiling.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky factor of K + E + eps diag(K) together with the eps that made it succeed.
class FactorizedCovariance {
 public:
  /// Tries eps = initial, initial*factor, ... up to the ceiling.
  FactorizedCovariance(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& noise_diagonal,
                       const JitterPolicy& policy);

  [[nodiscard]] double jitter() const { return jitter_; }
  [[nodiscard]] double log_determinant() const;
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  [[nodiscard]] Eigen::MatrixXd inverse() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// Per-row jitter scale: K_ii, or 1 where K_ii is 0.
Eigen::VectorXd jitter_scale(const Eigen::MatrixXd& covariance);

/// K[i][j] = cross_covariance(quantity_i, quantity_j, x_i, x_j). Upper triangle
/// computed, lower mirrored, so K is exactly symmetric.
Eigen::MatrixXd assemble_covariance(const Dataset& data, const ExtendedHyperparams& params, double poisson);

/// Diagonal of E + jitter I: sigma^2 of the row's quantity for noisy rows, 0 for
/// noiseless boundary rows, plus `jitter` everywhere.
/// Throws std::invalid_argument when a noisy quantity has no sigma^2.
Eigen::VectorXd assemble_noise(const Dataset& data, const ExtendedHyperparams& params, double jitter = 0.0);

struct LikelihoodValue {
  double value = 0.0;
  double jitter = 0.0;
};

struct LikelihoodGradient {
  double value = 0.0;
  double jitter = 0.0;
  /// d(log p)/d(log theta_j), ordered by ParameterLayout::of(params).
  Eigen::VectorXd gradient;
};

/// log p(z | X, theta^e) = -1/2 z^T (K+E)^-1 z - 1/2 log|K+E| - N/2 log 2 pi.
LikelihoodValue log_marginal_likelihood(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                        const JitterPolicy& jitter = {});

LikelihoodGradient lml_gradient(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                const JitterPolicy& jitter = {});

/// Likelihood evaluator bound to one dataset and Poisson ratio. Holds the
/// operator table so repeated evaluations (optimizer, sampler) skip rebuilding
/// it. Const member functions are safe to call concurrently.
class MarginalLikelihood {
 public:
  MarginalLikelihood(Dataset data, double poisson, JitterPolicy jitter = {});

  [[nodiscard]] const Dataset& data() const { return data_; }
  [[nodiscard]] double poisson() const { return table_.poisson(); }
  [[nodiscard]] const JitterPolicy& jitter_policy() const { return jitter_; }
  [[nodiscard]] const CovarianceTable& table() const { return table_; }

  [[nodiscard]] Eigen::MatrixXd covariance(const ExtendedHyperparams& params) const;
  [[nodiscard]] LikelihoodValue value(const ExtendedHyperparams& params) const;
  [[nodiscard]] LikelihoodGradient gradient(const ExtendedHyperparams& params) const;

 private:
  Dataset data_;
  CovarianceTable table_;
  JitterPolicy jitter_;
  Eigen::VectorXd values_;
  // Distinct coordinates per axis and each observation's index into them;
  // axis derivatives are evaluated once per coordinate pair.
  std::vector<double> xs_, ys_;
  std::vector<std::size_t> ix_, iy_;
};

/// A^2 D^p for one block.
double block_scale(const ExtendedHyperparams& params, int rigidity_power);

}  // namespace plategp

#endif  // PLATEGP_GP_MODEL_HPP
