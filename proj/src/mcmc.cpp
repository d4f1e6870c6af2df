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


#include "plategp/mcmc.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace plategp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd proposal_factor(const Eigen::MatrixXd& covariance) {
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    return covariance.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  return llt.matrixL();
}

Eigen::MatrixXd sample_covariance(const std::vector<Eigen::VectorXd>& states) {
  const auto d = states.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : states) mean += s;
  mean /= static_cast<double>(states.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : states) cov += (s - mean) * (s - mean).transpose();
  return cov / static_cast<double>(states.size() - 1);
}

}  // namespace

void SamplerOptions::validate() const {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  if (burn_in < 0) throw std::invalid_argument("burn-in must be non-negative");
  if (proposal_variance.size() > 0 && !(proposal_variance.array() > 0.0).all()) {
    throw std::invalid_argument("proposal variances must be positive");
  }
  if (adaptation_fraction < 0.0 || adaptation_fraction > 1.0) {
    throw std::invalid_argument("adaptation fraction must lie in [0, 1]");
  }
  if (adaptation_batch < 1) throw std::invalid_argument("adaptation batch must be at least 1");
  if (!(target_acceptance_low > 0.0 && target_acceptance_low < target_acceptance_high &&
        target_acceptance_high < 1.0)) {
    throw std::invalid_argument("target acceptance band must satisfy 0 < low < high < 1");
  }
  if (stall_window < 0) throw std::invalid_argument("stall window must be non-negative");
}

double acceptance_rate(const std::vector<std::uint8_t>& accepted) {
  if (accepted.empty()) return 0.0;
  const auto n = std::count(accepted.begin(), accepted.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

ChainResult metropolis_hastings(const LogDensity& log_density, const Eigen::VectorXd& start,
                                const SamplerOptions& options) {
  options.validate();
  const Eigen::Index d = start.size();
  if (options.proposal_variance.size() > 0 && options.proposal_variance.size() != d) {
    throw std::invalid_argument("proposal variance length does not match the state");
  }

  Eigen::VectorXd state = start;
  double current = log_density(state);
  if (!std::isfinite(current)) throw std::invalid_argument("start point has non-finite log density");

  const Eigen::VectorXd base_variance =
      options.proposal_variance.size() > 0 ? options.proposal_variance : Eigen::VectorXd::Constant(d, 0.01);
  Eigen::MatrixXd shape = base_variance.asDiagonal();
  double scale = 1.0;
  Eigen::MatrixXd factor = proposal_factor(shape);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int adapt_end = options.adaptation == ProposalAdaptation::none
                            ? 0
                            : static_cast<int>(std::floor(options.adaptation_fraction * options.burn_in));
  const int total = options.burn_in + options.samples;
  const double dim_scale = 2.38 * 2.38 / static_cast<double>(d);

  ChainResult out;
  out.draws.resize(options.samples, d);
  out.log_density.resize(options.samples);
  out.accepted.reserve(static_cast<std::size_t>(options.samples));

  std::vector<Eigen::VectorXd> history;
  int batch_accepted = 0, batch_size = 0, rejected_run = 0;
  Eigen::VectorXd z(d);

  for (int it = 0; it < total; ++it) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    const Eigen::VectorXd proposal = state + scale * (factor * z);
    const double candidate = log_density(proposal);
    const double u = uniform(rng);
    const bool accept = std::isfinite(candidate) && std::log(u) <= candidate - current;
    if (accept) {
      state = proposal;
      current = candidate;
      rejected_run = 0;
    } else {
      ++rejected_run;
    }

    if (it < adapt_end) {
      batch_accepted += accept ? 1 : 0;
      ++batch_size;
      if (it >= adapt_end / 4) history.push_back(state);
      if (batch_size == options.adaptation_batch) {
        const double rate = static_cast<double>(batch_accepted) / batch_size;
        if (rate < options.target_acceptance_low) {
          scale *= rate == 0.0 ? 0.3 : 0.7;
        } else if (rate > options.target_acceptance_high) {
          scale *= 1.5;
        }
        if (options.adaptation == ProposalAdaptation::empirical_covariance && history.size() >= 500) {
          Eigen::MatrixXd cov = sample_covariance(history);
          cov.diagonal().array() += 1e-10;
          const Eigen::MatrixXd candidate_shape = dim_scale * cov;
          // First switch: restart the scale from the theoretical optimum.
          if (shape.isApprox(Eigen::MatrixXd(base_variance.asDiagonal()))) scale = 1.0;
          shape = candidate_shape;
          factor = proposal_factor(shape);
        }
        batch_accepted = batch_size = 0;
      }
    } else if (options.stall_window > 0 && rejected_run >= options.stall_window) {
      std::ostringstream msg;
      msg << "chain stalled: " << rejected_run << " consecutive rejections after iteration " << it
          << " (proposal scale " << scale << ")";
      throw SamplerStalledError(msg.str());
    }

    if (it >= options.burn_in) {
      const auto row = static_cast<Eigen::Index>(it - options.burn_in);
      out.draws.row(row) = state.transpose();
      out.log_density[row] = current;
      out.accepted.push_back(accept ? 1 : 0);
    }
  }
  out.acceptance_rate = acceptance_rate(out.accepted);
  out.proposal_covariance = scale * scale * shape;
  return out;
}

ExtendedHyperparams McmcTrace::draw(std::size_t i) const {
  return layout.from_natural(draws.row(static_cast<Eigen::Index>(i)).transpose());
}

McmcTrace mh_sample(const MarginalLikelihood& likelihood, const McmcConfig& config) {
  config.initial.validate();
  config.bounds.validate();
  config.sampler.validate();
  const auto layout = ParameterLayout::of(config.initial);
  if (!config.bounds.contains(layout.to_natural(config.initial))) {
    throw std::invalid_argument("initial hyperparameters lie outside the hyperprior bounds");
  }
  const bool learn_rigidity = likelihood.data().supports_rigidity_learning();

  // Sampled coordinates: every log theta except a held D.
  std::vector<Eigen::Index> free;
  for (Eigen::Index j = 0; j < layout.size(); ++j) {
    if (j != ParameterLayout::kRigidity || learn_rigidity) free.push_back(j);
  }
  const Eigen::VectorXd base = layout.to_log(config.initial);
  const auto expand = [&](const Eigen::VectorXd& reduced) {
    Eigen::VectorXd full = base;
    for (std::size_t k = 0; k < free.size(); ++k) full[free[k]] = reduced[static_cast<Eigen::Index>(k)];
    return full;
  };
  const auto to_params = [&](const Eigen::VectorXd& log_theta) {
    auto p = layout.from_log(log_theta);
    if (!learn_rigidity) p.rigidity = config.initial.rigidity;
    return p;
  };

  const double log_lo = std::log(config.bounds.lower);
  const double log_hi = std::log(config.bounds.upper);
  const LogDensity target = [&](const Eigen::VectorXd& reduced) {
    if (!reduced.allFinite() || (reduced.array() < log_lo).any() || (reduced.array() > log_hi).any()) {
      return kNegInf;
    }
    try {
      // Jacobian of theta = exp(phi) for a prior uniform in theta.
      return likelihood.value(to_params(expand(reduced))).value + reduced.sum();
    } catch (const IllConditionedError&) {
      return kNegInf;
    }
  };

  SamplerOptions sampler = config.sampler;
  if (sampler.proposal_variance.size() == layout.size() && free.size() != static_cast<std::size_t>(layout.size())) {
    Eigen::VectorXd reduced(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) reduced[static_cast<Eigen::Index>(k)] = sampler.proposal_variance[free[k]];
    sampler.proposal_variance = reduced;
  }
  Eigen::VectorXd start(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) start[static_cast<Eigen::Index>(k)] = base[free[k]];

  const auto chain = metropolis_hastings(target, start, sampler);

  McmcTrace trace;
  trace.layout = layout;
  trace.draws.resize(chain.draws.rows(), layout.size());
  trace.log_posterior.resize(chain.draws.rows());
  Eigen::VectorXd last_row;
  LikelihoodValue last_value;
  for (Eigen::Index i = 0; i < chain.draws.rows(); ++i) {
    const Eigen::VectorXd reduced = chain.draws.row(i).transpose();
    const auto params = to_params(expand(reduced));
    trace.draws.row(i) = layout.to_natural(params).transpose();
    // Consecutive rejected draws repeat the state; reuse its evaluation.
    if (i == 0 || reduced != last_row) {
      last_value = likelihood.value(params);
      last_row = reduced;
    }
    trace.log_posterior[i] = last_value.value;
    trace.max_jitter = std::max(trace.max_jitter, last_value.jitter);
  }
  trace.accepted = chain.accepted;
  trace.acceptance_rate = chain.acceptance_rate;
  trace.proposal_covariance = chain.proposal_covariance;
  return trace;
}

ExtendedHyperparams mcmc_mean(const McmcTrace& trace) {
  if (trace.empty()) throw std::invalid_argument("trace is empty");
  const Eigen::VectorXd mean = trace.draws.colwise().mean().transpose();
  return trace.layout.from_natural(mean);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples, bool& degenerate) {
  const Eigen::Index d = samples.cols();
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
  degenerate = false;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(cov(i, i) > 0.0)) degenerate = true;
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      corr(i, j) = denom > 0.0 ? std::clamp(cov(i, j) / denom, -1.0, 1.0) : 0.0;
    }
  return corr;
}

ChainDiagnostics chain_diagnostics(const McmcTrace& trace, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  ChainDiagnostics out;
  out.acceptance_rate = trace.acceptance_rate;
  out.names = trace.layout.names();
  if (trace.empty()) return out;
  out.correlation = correlation_matrix(trace.draws, out.degenerate);
  for (Eigen::Index j = 0; j < trace.draws.cols(); ++j) {
    Histogram h;
    h.lower = trace.draws.col(j).minCoeff();
    h.upper = trace.draws.col(j).maxCoeff();
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (h.upper - h.lower) / bins;
    for (Eigen::Index i = 0; i < trace.draws.rows(); ++i) {
      int b = width > 0.0 ? static_cast<int>((trace.draws(i, j) - h.lower) / width) : 0;
      b = std::clamp(b, 0, bins - 1);
      ++h.counts[static_cast<std::size_t>(b)];
    }
    out.histograms.push_back(std::move(h));
  }
  return out;
}

}  // namespace plategp
