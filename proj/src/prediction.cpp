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


#include "plategp/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

namespace plategp {

namespace {

Eigen::VectorXd block_scales(const ExtendedHyperparams& params) {
  return Eigen::Vector3d(block_scale(params, 0), block_scale(params, 1), block_scale(params, 2));
}

void check_targets(const Dataset& data, std::span<const Target> targets) {
  for (const auto& t : targets) {
    if (!data.domain().contains(t.location)) {
      std::ostringstream msg;
      msg << "target (" << t.location.x << ", " << t.location.y << ") lies outside the plate";
      throw std::invalid_argument(msg.str());
    }
  }
}

// Axis derivatives for offsets a_i - b_j over the distinct values of a and b.
class AxisPairs {
 public:
  AxisPairs(const std::vector<double>& a, const std::vector<double>& b, double length)
      : ia_(index(a, ua_)), ib_(index(b, ub_)), table_(ua_.size() * ub_.size()) {
    for (std::size_t i = 0; i < ua_.size(); ++i)
      for (std::size_t j = 0; j < ub_.size(); ++j) table_[i * ub_.size() + j] = axis_derivatives(ua_[i] - ub_[j], length);
  }
  [[nodiscard]] const AxisDerivatives& at(std::size_t i, std::size_t j) const {
    return table_[ia_[i] * ub_.size() + ib_[j]];
  }

 private:
  static std::vector<std::size_t> index(const std::vector<double>& v, std::vector<double>& unique) {
    unique = v;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<std::size_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), v[i]) - unique.begin());
    }
    return out;
  }

  std::vector<double> ua_, ub_;
  std::vector<std::size_t> ia_, ib_;
  std::vector<AxisDerivatives> table_;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

std::vector<Target> grid_targets(std::span<const Point> points, std::span<const QuantityKind> quantities) {
  std::vector<Target> out;
  out.reserve(points.size() * quantities.size());
  for (auto q : quantities)
    for (const auto& p : points) out.push_back({p, q});
  return out;
}

Prediction predictive_posterior(const MarginalLikelihood& likelihood, const ExtendedHyperparams& params,
                                std::span<const Target> targets) {
  params.validate();
  const auto& data = likelihood.data();
  check_targets(data, targets);
  const auto& table = likelihood.table();
  const auto scales = block_scales(params);
  const auto& obs = data.observations();
  const auto n = static_cast<Eigen::Index>(obs.size());
  const auto m = static_cast<Eigen::Index>(targets.size());

  const FactorizedCovariance factor(likelihood.covariance(params), assemble_noise(data, params),
                                    likelihood.jitter_policy());

  // Axis derivatives depend only on per-axis coordinate pairs; grids repeat them.
  std::vector<double> ox, oy, tx, ty;
  for (const auto& o : obs) {
    ox.push_back(o.location.x);
    oy.push_back(o.location.y);
  }
  for (const auto& t : targets) {
    tx.push_back(t.location.x);
    ty.push_back(t.location.y);
  }
  const AxisPairs px(ox, tx, params.kernel.length_x);
  const AxisPairs py(oy, ty, params.kernel.length_y);

  Eigen::MatrixXd cross(n, m);
  Eigen::VectorXd prior(m);
  const auto zero_x = axis_derivatives(0.0, params.kernel.length_x);
  const auto zero_y = axis_derivatives(0.0, params.kernel.length_y);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& t = targets[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& plan = table.plan(obs[static_cast<std::size_t>(i)].quantity, t.quantity);
      cross(i, j) = CovarianceTable::evaluate(plan, px.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)),
                                              py.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)),
                                              scales[plan.rigidity_power]);
    }
    const auto& self = table.plan(t.quantity, t.quantity);
    prior[j] = CovarianceTable::evaluate(self, zero_x, zero_y, scales[self.rigidity_power]);
  }

  Prediction out;
  out.jitter = factor.jitter();
  out.mean = cross.transpose() * factor.solve(data.values());
  const Eigen::MatrixXd half = factor.llt().matrixL().solve(cross);
  out.variance = (prior - half.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return out;
}

Prediction predictive_posterior(const Dataset& data, const ExtendedHyperparams& params, double poisson,
                                std::span<const Target> targets) {
  return predictive_posterior(MarginalLikelihood(data, poisson), params, targets);
}

void MixtureOptions::validate() const {
  if (stride < 1) throw std::invalid_argument("thinning stride must be at least 1");
  if (!(lower_probability > 0.0 && lower_probability < upper_probability && upper_probability < 1.0)) {
    throw std::invalid_argument("band probabilities must satisfy 0 < lower < upper < 1");
  }
  if (!(probability_tolerance > 0.0)) throw std::invalid_argument("probability tolerance must be positive");
}

double gaussian_mixture_cdf(std::span<const double> means, std::span<const double> variances, double x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (variances[i] > 0.0) {
      acc += normal_cdf((x - means[i]) / std::sqrt(variances[i]));
    } else {
      acc += x >= means[i] ? 1.0 : 0.0;
    }
  }
  return acc / static_cast<double>(means.size());
}

double gaussian_mixture_quantile(std::span<const double> means, std::span<const double> variances, double p,
                                 double probability_tolerance) {
  if (means.empty() || means.size() != variances.size()) {
    throw std::invalid_argument("mixture needs matching, non-empty means and variances");
  }
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0, 1)");
  double lo = means[0], hi = means[0];
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (!(variances[i] >= 0.0)) throw std::invalid_argument("mixture variances must be non-negative");
    const double s = std::sqrt(variances[i]);
    lo = std::min(lo, means[i] - 40.0 * s);
    hi = std::max(hi, means[i] + 40.0 * s);
  }
  // Invariant: F(lo) < p <= F(hi).
  lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gaussian_mixture_cdf(means, variances, hi) - gaussian_mixture_cdf(means, variances, lo) <
        probability_tolerance) {
      break;
    }
    if (gaussian_mixture_cdf(means, variances, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

PredictiveSummary summarize(const Prediction& prediction, const MixtureOptions& options) {
  options.validate();
  PredictiveSummary out;
  out.mean = prediction.mean;
  out.variance = prediction.variance;
  out.lower.resize(out.mean.size());
  out.upper.resize(out.mean.size());
  for (Eigen::Index j = 0; j < out.mean.size(); ++j) {
    const double m = out.mean[j], v = out.variance[j];
    out.lower[j] = gaussian_mixture_quantile({&m, 1}, {&v, 1}, options.lower_probability, options.probability_tolerance);
    out.upper[j] = gaussian_mixture_quantile({&m, 1}, {&v, 1}, options.upper_probability, options.probability_tolerance);
  }
  out.draws_used = 1;
  return out;
}

PredictiveSummary mc_predictive(const MarginalLikelihood& likelihood, const McmcTrace& trace,
                                std::span<const Target> targets, const MixtureOptions& options) {
  options.validate();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < trace.size(); i += options.stride) rows.push_back(i);
  if (rows.empty()) throw std::invalid_argument("no draws remain after thinning");

  const auto k = rows.size();
  const auto m = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd means(m, static_cast<Eigen::Index>(k));
  Eigen::MatrixXd vars(m, static_cast<Eigen::Index>(k));

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, k));
  const auto work = [&](unsigned worker) {
    for (std::size_t c = worker; c < k; c += threads) {
      const auto pred = predictive_posterior(likelihood, trace.draw(rows[c]), targets);
      means.col(static_cast<Eigen::Index>(c)) = pred.mean;
      vars.col(static_cast<Eigen::Index>(c)) = pred.variance;
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) jobs.push_back(std::async(std::launch::async, work, w));
    for (auto& j : jobs) j.get();
  }

  PredictiveSummary out;
  out.draws_used = k;
  out.mean = means.rowwise().mean();
  const Eigen::VectorXd mean_var = vars.rowwise().mean();
  const Eigen::VectorXd spread = (means.colwise() - out.mean).array().square().rowwise().mean();
  out.variance = mean_var + spread;
  out.lower.resize(m);
  out.upper.resize(m);
  std::vector<double> mu(k), var(k);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) {
      mu[c] = means(j, static_cast<Eigen::Index>(c));
      var[c] = vars(j, static_cast<Eigen::Index>(c));
    }
    out.lower[j] = gaussian_mixture_quantile(mu, var, options.lower_probability, options.probability_tolerance);
    out.upper[j] = gaussian_mixture_quantile(mu, var, options.upper_probability, options.probability_tolerance);
  }
  return out;
}

}  // namespace plategp
