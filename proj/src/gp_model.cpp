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

#include "plategp/gp_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <utility>

namespace plategp {

namespace {

constexpr double kDomainTolerance = 1e-12;

bool allowed_noiseless(QuantityKind kind) {
  return kind == QuantityKind::w || kind == QuantityKind::r_x || kind == QuantityKind::r_y;
}

std::string describe(const ExtendedHyperparams& p) {
  std::ostringstream out;
  out.precision(17);
  out << "A=" << p.kernel.amplitude << " l_x=" << p.kernel.length_x << " l_y=" << p.kernel.length_y
      << " D=" << p.rigidity;
  for (const auto& [kind, var] : p.noise_variance) out << " sigma2_" << to_string(kind) << "=" << var;
  return out.str();
}

struct Assembled {
  Eigen::MatrixXd value;
  Eigen::MatrixXd d_length_x;
  Eigen::MatrixXd d_length_y;
  Eigen::MatrixXi rigidity_power;
};

// Axis derivatives for every ordered pair of distinct coordinates on one axis.
std::vector<AxisDerivatives> axis_table(const std::vector<double>& coords, double length) {
  const auto u = coords.size();
  std::vector<AxisDerivatives> out(u * u);
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = 0; b < u; ++b) out[a * u + b] = axis_derivatives(coords[a] - coords[b], length);
  return out;
}

void index_coordinates(const std::vector<double>& values, std::vector<double>& unique,
                       std::vector<std::size_t>& index) {
  unique = values;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  index.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    index[i] = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), values[i]) - unique.begin());
  }
}

}  // namespace

Eigen::VectorXd jitter_scale(const Eigen::MatrixXd& covariance) {
  Eigen::VectorXd s = covariance.diagonal();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) s[i] = 1.0;
  }
  return s;
}

bool PlateDomain::contains(Point p) const {
  const double tx = kDomainTolerance * std::max(1.0, length_x);
  const double ty = kDomainTolerance * std::max(1.0, length_y);
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= -tx && p.x <= length_x + tx && p.y >= -ty &&
         p.y <= length_y + ty;
}

Dataset::Dataset(PlateDomain domain, std::vector<Observation> observations)
    : domain_(domain), observations_(std::move(observations)) {
  if (!(domain_.length_x > 0.0) || !(domain_.length_y > 0.0)) {
    throw std::invalid_argument("plate spans must be positive");
  }
  for (const auto& o : observations_) {
    if (!domain_.contains(o.location)) {
      std::ostringstream msg;
      msg << "observation of " << to_string(o.quantity) << " at (" << o.location.x << ", " << o.location.y
          << ") lies outside the plate";
      throw std::invalid_argument(msg.str());
    }
    if (!std::isfinite(o.value)) throw std::invalid_argument("observation value must be finite");
    if (o.noise == NoiseClass::noiseless_bc && !allowed_noiseless(o.quantity)) {
      throw std::invalid_argument("noiseless boundary observations are limited to w, r_x, r_y");
    }
  }
  std::stable_sort(observations_.begin(), observations_.end(),
                   [](const Observation& a, const Observation& b) { return a.quantity < b.quantity; });
}

Eigen::VectorXd Dataset::values() const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(observations_.size()));
  for (std::size_t i = 0; i < observations_.size(); ++i) z[static_cast<Eigen::Index>(i)] = observations_[i].value;
  return z;
}

std::vector<QuantityKind> Dataset::quantities() const {
  std::vector<QuantityKind> kinds;
  for (const auto& o : observations_) {
    if (kinds.empty() || kinds.back() != o.quantity) kinds.push_back(o.quantity);
  }
  return kinds;
}

std::vector<QuantityKind> Dataset::noisy_quantities() const {
  std::vector<QuantityKind> kinds;
  for (const auto& o : observations_) {
    if (o.noise != NoiseClass::noisy) continue;
    if (kinds.empty() || kinds.back() != o.quantity) kinds.push_back(o.quantity);
  }
  return kinds;
}

std::size_t Dataset::count(QuantityKind kind) const {
  return static_cast<std::size_t>(std::count_if(observations_.begin(), observations_.end(),
                                                [kind](const Observation& o) { return o.quantity == kind; }));
}

bool Dataset::supports_rigidity_learning() const {
  bool free_block = false;
  bool carrying_block = false;
  for (const auto& o : observations_) {
    (carries_rigidity(o.quantity) ? carrying_block : free_block) = true;
  }
  return free_block && carrying_block;
}

Dataset Dataset::with_appended(std::span<const Observation> extra) const {
  auto all = observations_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Dataset(domain_, std::move(all));
}

void ExtendedHyperparams::validate() const {
  kernel.validate();
  if (!std::isfinite(rigidity) || rigidity <= 0.0) throw std::invalid_argument("rigidity must be positive");
  for (const auto& [kind, var] : noise_variance) {
    if (!std::isfinite(var) || var <= 0.0) {
      throw std::invalid_argument("noise variance for " + std::string(to_string(kind)) + " must be positive");
    }
  }
}

ParameterLayout::ParameterLayout(std::vector<QuantityKind> noise_quantities) : noise_(std::move(noise_quantities)) {
  std::sort(noise_.begin(), noise_.end());
  noise_.erase(std::unique(noise_.begin(), noise_.end()), noise_.end());
}

ParameterLayout ParameterLayout::of(const ExtendedHyperparams& params) {
  std::vector<QuantityKind> kinds;
  for (const auto& [kind, var] : params.noise_variance) kinds.push_back(kind);
  return ParameterLayout(std::move(kinds));
}

ParameterLayout ParameterLayout::of(const Dataset& data) { return ParameterLayout(data.noisy_quantities()); }

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> names = {"A", "l_x", "l_y", "D"};
  for (auto kind : noise_) names.push_back("sigma2_" + std::string(to_string(kind)));
  return names;
}

Eigen::VectorXd ParameterLayout::to_natural(const ExtendedHyperparams& params) const {
  Eigen::VectorXd v(size());
  v[kAmplitude] = params.kernel.amplitude;
  v[kLengthX] = params.kernel.length_x;
  v[kLengthY] = params.kernel.length_y;
  v[kRigidity] = params.rigidity;
  for (std::size_t k = 0; k < noise_.size(); ++k) {
    auto it = params.noise_variance.find(noise_[k]);
    if (it == params.noise_variance.end()) {
      throw std::invalid_argument("missing noise variance for " + std::string(to_string(noise_[k])));
    }
    v[kFirstNoise + static_cast<Eigen::Index>(k)] = it->second;
  }
  return v;
}

Eigen::VectorXd ParameterLayout::to_log(const ExtendedHyperparams& params) const {
  return to_natural(params).array().log().matrix();
}

ExtendedHyperparams ParameterLayout::from_natural(const Eigen::VectorXd& values) const {
  if (values.size() != size()) throw std::invalid_argument("parameter vector has the wrong length");
  ExtendedHyperparams p;
  p.kernel = KernelParams{values[kAmplitude], values[kLengthX], values[kLengthY]};
  p.rigidity = values[kRigidity];
  for (std::size_t k = 0; k < noise_.size(); ++k) {
    p.noise_variance[noise_[k]] = values[kFirstNoise + static_cast<Eigen::Index>(k)];
  }
  return p;
}

ExtendedHyperparams ParameterLayout::from_log(const Eigen::VectorXd& log_values) const {
  return from_natural(log_values.array().exp().matrix());
}

FactorizedCovariance::FactorizedCovariance(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& noise_diagonal,
                                           const JitterPolicy& policy) {
  if (!covariance.allFinite() || !noise_diagonal.allFinite()) {
    throw IllConditionedError("covariance contains non-finite entries");
  }
  Eigen::MatrixXd work = covariance;
  work.diagonal() += noise_diagonal;
  const Eigen::VectorXd scale = jitter_scale(covariance);
  const double ceiling = policy.ceiling * (1.0 + 1e-9);
  for (double eps = policy.initial; eps <= ceiling; eps *= policy.factor) {
    Eigen::MatrixXd trial = work;
    trial.diagonal() += eps * scale;
    llt_.compute(trial);
    if (llt_.info() == Eigen::Success) {
      const auto diag = llt_.matrixLLT().diagonal();
      if (diag.allFinite() && (diag.array() > 0.0).all()) {
        jitter_ = eps;
        return;
      }
    }
    if (policy.factor <= 1.0) break;
  }
  std::ostringstream msg;
  msg << "K + E is not positive definite with jitter up to " << policy.ceiling;
  throw IllConditionedError(msg.str());
}

double FactorizedCovariance::log_determinant() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd FactorizedCovariance::inverse() const {
  const auto n = llt_.matrixLLT().rows();
  return llt_.solve(Eigen::MatrixXd::Identity(n, n));
}

double block_scale(const ExtendedHyperparams& params, int rigidity_power) {
  const double a2 = params.kernel.amplitude * params.kernel.amplitude;
  switch (rigidity_power) {
    case 0: return a2;
    case 1: return a2 * params.rigidity;
    default: return a2 * params.rigidity * params.rigidity;
  }
}

Eigen::MatrixXd assemble_covariance(const Dataset& data, const ExtendedHyperparams& params, double poisson) {
  return MarginalLikelihood(data, poisson).covariance(params);
}

Eigen::VectorXd assemble_noise(const Dataset& data, const ExtendedHyperparams& params, double jitter) {
  Eigen::VectorXd diag(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& o = data[i];
    double var = 0.0;
    if (o.noise == NoiseClass::noisy) {
      auto it = params.noise_variance.find(o.quantity);
      if (it == params.noise_variance.end()) {
        throw std::invalid_argument("no noise variance for observed quantity " + std::string(to_string(o.quantity)));
      }
      var = it->second;
    }
    diag[static_cast<Eigen::Index>(i)] = var + jitter;
  }
  return diag;
}

LikelihoodValue log_marginal_likelihood(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                        const JitterPolicy& jitter) {
  return MarginalLikelihood(data, poisson, jitter).value(params);
}

LikelihoodGradient lml_gradient(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                const JitterPolicy& jitter) {
  return MarginalLikelihood(data, poisson, jitter).gradient(params);
}

MarginalLikelihood::MarginalLikelihood(Dataset data, double poisson, JitterPolicy jitter)
    : data_(std::move(data)), table_(poisson), jitter_(jitter), values_(data_.values()) {
  if (data_.empty()) throw std::invalid_argument("dataset is empty");
  PlateConstants{1.0, poisson}.validate();
  std::vector<double> x, y;
  for (const auto& o : data_.observations()) {
    x.push_back(o.location.x);
    y.push_back(o.location.y);
  }
  index_coordinates(x, xs_, ix_);
  index_coordinates(y, ys_, iy_);
}

Eigen::MatrixXd MarginalLikelihood::covariance(const ExtendedHyperparams& params) const {
  params.kernel.validate();
  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::MatrixXd k(n, n);
  const auto& obs = data_.observations();
  const double scales[3] = {block_scale(params, 0), block_scale(params, 1), block_scale(params, 2)};
  const auto tx = axis_table(xs_, params.kernel.length_x);
  const auto ty = axis_table(ys_, params.kernel.length_y);
  const auto ux = xs_.size(), uy = ys_.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& ax = tx[ix_[i] * ux + ix_[j]];
      const auto& ay = ty[iy_[i] * uy + iy_[j]];
      const auto& plan = table_.plan(obs[i].quantity, obs[j].quantity);
      k(i, j) = k(j, i) = CovarianceTable::evaluate(plan, ax, ay, scales[plan.rigidity_power]);
    }
  }
  return k;
}

LikelihoodValue MarginalLikelihood::value(const ExtendedHyperparams& params) const {
  params.validate();
  const auto k = covariance(params);
  const auto e = assemble_noise(data_, params);
  try {
    const FactorizedCovariance factor(k, e, jitter_);
    const Eigen::VectorXd r = factor.solve(values_);
    const double n = static_cast<double>(data_.size());
    const double value = -0.5 * values_.dot(r) - 0.5 * factor.log_determinant() -
                         0.5 * n * std::log(2.0 * std::numbers::pi);
    return {value, factor.jitter()};
  } catch (const IllConditionedError& err) {
    throw IllConditionedError(std::string(err.what()) + " at " + describe(params));
  }
}

LikelihoodGradient MarginalLikelihood::gradient(const ExtendedHyperparams& params) const {
  params.validate();
  const auto layout = ParameterLayout::of(params);
  const auto n = static_cast<Eigen::Index>(data_.size());
  Assembled blocks{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n), Eigen::MatrixXi(n, n)};
  {
    const auto& obs = data_.observations();
    const double scales[3] = {block_scale(params, 0), block_scale(params, 1), block_scale(params, 2)};
    const auto tx = axis_table(xs_, params.kernel.length_x);
    const auto ty = axis_table(ys_, params.kernel.length_y);
    const auto ux = xs_.size(), uy = ys_.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const auto& plan = table_.plan(obs[i].quantity, obs[j].quantity);
        const auto entry = CovarianceTable::evaluate_with_gradient(plan, tx[ix_[i] * ux + ix_[j]],
                                                                   ty[iy_[i] * uy + iy_[j]], scales[plan.rigidity_power]);
        blocks.value(i, j) = blocks.value(j, i) = entry.value;
        blocks.d_length_x(i, j) = blocks.d_length_x(j, i) = entry.d_length_x;
        blocks.d_length_y(i, j) = blocks.d_length_y(j, i) = entry.d_length_y;
        blocks.rigidity_power(i, j) = blocks.rigidity_power(j, i) = plan.rigidity_power;
      }
    }
  }
  const auto e = assemble_noise(data_, params);

  std::optional<FactorizedCovariance> factor;
  try {
    factor.emplace(blocks.value, e, jitter_);
  } catch (const IllConditionedError& err) {
    throw IllConditionedError(std::string(err.what()) + " at " + describe(params));
  }

  const Eigen::VectorXd r = factor->solve(values_);
  LikelihoodGradient out;
  out.jitter = factor->jitter();
  out.value = -0.5 * values_.dot(r) - 0.5 * factor->log_determinant() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // d log p / d theta_j = 1/2 tr((r r^T - (K+E)^-1) dK/dtheta_j)
  Eigen::MatrixXd m = r * r.transpose() - factor->inverse();

  // The jitter scales with diag(K), so it moves with every kernel parameter.
  Eigen::VectorXd diag_factor = Eigen::VectorXd::Ones(blocks.value.rows());
  for (Eigen::Index i = 0; i < diag_factor.size(); ++i) {
    if (blocks.value(i, i) > 0.0) diag_factor[i] += out.jitter;
  }
  blocks.value.diagonal().array() *= diag_factor.array();
  blocks.d_length_x.diagonal().array() *= diag_factor.array();
  blocks.d_length_y.diagonal().array() *= diag_factor.array();

  out.gradient = Eigen::VectorXd::Zero(layout.size());
  // Log-space chain rule: theta_j * d/dtheta_j.  dK/dA = 2K/A, dK/dD = p K/D.
  out.gradient[ParameterLayout::kAmplitude] = m.cwiseProduct(blocks.value).sum();
  out.gradient[ParameterLayout::kLengthX] =
      0.5 * params.kernel.length_x * m.cwiseProduct(blocks.d_length_x).sum();
  out.gradient[ParameterLayout::kLengthY] =
      0.5 * params.kernel.length_y * m.cwiseProduct(blocks.d_length_y).sum();
  out.gradient[ParameterLayout::kRigidity] =
      0.5 * m.cwiseProduct(blocks.value).cwiseProduct(blocks.rigidity_power.cast<double>()).sum();

  const auto noise = layout.noise_quantities();
  for (std::size_t k = 0; k < noise.size(); ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const auto& o = data_[i];
      if (o.noise == NoiseClass::noisy && o.quantity == noise[k]) acc += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    out.gradient[ParameterLayout::kFirstNoise + static_cast<Eigen::Index>(k)] =
        0.5 * acc * params.noise_variance.at(noise[k]);
  }
  return out;
}

}  // namespace plategp
