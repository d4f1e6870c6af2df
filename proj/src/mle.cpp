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


#include "plategp/mle.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace plategp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Indices of theta^e that the optimizer moves.
std::vector<Eigen::Index> free_indices(const ParameterLayout& layout, bool learn_rigidity) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < layout.size(); ++j) {
    if (j == ParameterLayout::kRigidity && !learn_rigidity) continue;
    idx.push_back(j);
  }
  return idx;
}

struct Problem {
  const MarginalLikelihood& lml;
  ParameterLayout layout;
  std::vector<Eigen::Index> free;
  Eigen::VectorXd base;  // full log vector; free entries overwritten
  HyperpriorBounds bounds;

  [[nodiscard]] Eigen::VectorXd full(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd v = base;
    for (std::size_t k = 0; k < free.size(); ++k) v[free[k]] = reduced[static_cast<Eigen::Index>(k)];
    return v;
  }
  [[nodiscard]] Eigen::VectorXd reduce(const Eigen::VectorXd& full_vec) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) v[static_cast<Eigen::Index>(k)] = full_vec[free[k]];
    return v;
  }

  [[nodiscard]] Eigen::VectorXd clamp(const Eigen::VectorXd& reduced) const {
    return reduced.cwiseMax(std::log(bounds.lower)).cwiseMin(std::log(bounds.upper));
  }

  // Negative log likelihood and its gradient in the reduced log space. Points
  // outside the bounds evaluate at the nearest bound with a zero gradient in
  // the clamped coordinates, which keeps the objective continuous.
  double operator()(const Eigen::VectorXd& reduced, Eigen::VectorXd& grad) const {
    if (!reduced.allFinite()) return kInf;
    const Eigen::VectorXd inside = clamp(reduced);
    try {
      const auto g = lml.gradient(layout.from_log(full(inside)));
      grad.resize(static_cast<Eigen::Index>(free.size()));
      for (std::size_t k = 0; k < free.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        grad[kk] = inside[kk] == reduced[kk] ? -g.gradient[free[k]] : 0.0;
      }
      return -g.value;
    } catch (const IllConditionedError&) {
      return kInf;
    }
  }

  // Gradient with components that push outward at an active bound removed.
  [[nodiscard]] double projected_gradient_norm(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd grad;
    if (!std::isfinite((*this)(reduced, grad))) return kInf;
    const double lo = std::log(bounds.lower), hi = std::log(bounds.upper);
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
      if ((reduced[k] <= lo && grad[k] > 0.0) || (reduced[k] >= hi && grad[k] < 0.0)) grad[k] = 0.0;
    }
    return grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  }
};

bool near_bound(const Eigen::VectorXd& log_theta, const std::vector<Eigen::Index>& free,
                const HyperpriorBounds& bounds) {
  const double lo = std::log(bounds.lower);
  const double hi = std::log(bounds.upper);
  return std::any_of(free.begin(), free.end(),
                     [&](Eigen::Index j) { return log_theta[j] - lo < 0.1 || hi - log_theta[j] < 0.1; });
}

// Negative definite Hessian of the log likelihood, by central differences of the gradient.
bool locally_identifiable(const Problem& p, const Eigen::VectorXd& reduced) {
  const Eigen::Index n = reduced.size();
  Eigen::MatrixXd h(n, n);
  const double step = 1e-4;
  Eigen::VectorXd gp, gm;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd up = reduced, dn = reduced;
    up[j] += step;
    dn[j] -= step;
    if (!std::isfinite(p(up, gp)) || !std::isfinite(p(dn, gm))) return false;
    h.col(j) = (gp - gm) / (2 * step);
  }
  // Objective is the negative log likelihood, so identifiable means positive definite here.
  const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() > 1e-6 * scale;
}

double mean_square(const Dataset& data, QuantityKind kind, bool noisy_only) {
  double acc = 0.0;
  int n = 0;
  for (const auto& o : data.observations()) {
    if (o.quantity != kind || (noisy_only && o.noise != NoiseClass::noisy)) continue;
    acc += o.value * o.value;
    ++n;
  }
  return n > 0 ? acc / n : 0.0;
}

}  // namespace

bool HyperpriorBounds::contains(const Eigen::VectorXd& natural) const {
  return (natural.array() >= lower).all() && (natural.array() <= upper).all();
}

void HyperpriorBounds::validate() const {
  if (!(lower > 0.0) || !(upper > lower) || !std::isfinite(upper)) {
    throw std::invalid_argument("hyperprior bounds must satisfy 0 < lower < upper < inf");
  }
}

namespace {

// A, D and noise matched to the data for fixed length scales.
ExtendedHyperparams moment_matched(const Dataset& data, double poisson, double length_x, double length_y,
                                   double noise_fraction) {
  ExtendedHyperparams p;
  p.kernel = KernelParams{1.0, length_x, length_y};
  p.rigidity = 1.0;

  // Prior variance of each quantity at A = D = 1 is its zero-offset block value.
  const PlateConstants unit{1.0, poisson};
  const Point origin{0.0, 0.0};
  double log_free = 0.0, log_carry = 0.0;
  int n_free = 0, n_carry = 0;
  for (auto kind : data.quantities()) {
    const double ms = mean_square(data, kind, false);
    if (!(ms > 0.0)) continue;
    const double prior = cross_covariance(kind, kind, origin, origin, p.kernel, unit);
    if (carries_rigidity(kind)) {
      log_carry += std::log(ms / prior);
      ++n_carry;
    } else {
      log_free += std::log(ms / prior);
      ++n_free;
    }
  }
  const double log_a2 = n_free > 0 ? log_free / n_free : (n_carry > 0 ? log_carry / n_carry : 0.0);
  p.kernel.amplitude = std::exp(0.5 * log_a2);
  if (n_free > 0 && n_carry > 0) p.rigidity = std::exp(0.5 * (log_carry / n_carry - log_a2));

  for (auto kind : data.noisy_quantities()) {
    const double ms = mean_square(data, kind, true);
    p.noise_variance[kind] = ms > 0.0 ? noise_fraction * ms : 1e-10;
  }
  return p;
}

}  // namespace

ExtendedHyperparams initial_hyperparams(const Dataset& data, double poisson) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  double min_x = data[0].location.x, max_x = min_x, min_y = data[0].location.y, max_y = min_y;
  for (const auto& o : data.observations()) {
    min_x = std::min(min_x, o.location.x);
    max_x = std::max(max_x, o.location.x);
    min_y = std::min(min_y, o.location.y);
    max_y = std::max(max_y, o.location.y);
  }
  const auto extent = [](double lo, double hi, double span) { return hi - lo > 1e-3 * span ? hi - lo : span; };
  const double ex = extent(min_x, max_x, data.domain().length_x);
  const double ey = extent(min_y, max_y, data.domain().length_y);

  // Moment matching alone is unreliable for D because the rigidity-carrying
  // blocks scale like l^-8, so scan isotropic length scales, noise levels and
  // D multipliers around the matched values and keep the most likely.
  const MarginalLikelihood lml(data, poisson);
  ExtendedHyperparams best = moment_matched(data, poisson, 0.3 * ex, 0.3 * ey, 1e-2);
  double best_value = -kInf;
  const bool scan_rigidity = data.supports_rigidity_learning();
  for (double f : {0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 1.0})
    for (double noise : {1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6})
      for (double d_factor : {0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        if (!scan_rigidity && d_factor != 1.0) continue;
        auto candidate = moment_matched(data, poisson, f * ex, f * ey, noise);
        candidate.rigidity *= d_factor;
    try {
      const double v = lml.value(candidate).value;
      if (v > best_value) {
        best_value = v;
        best = candidate;
      }
    } catch (const IllConditionedError&) {
    }
  }
  return best;
}

MleResult mle_optimize(const MarginalLikelihood& likelihood, const ExtendedHyperparams& initial,
                       const MleOptions& options) {
  initial.validate();
  options.bounds.validate();
  const auto layout = ParameterLayout::of(initial);
  Problem problem{likelihood, layout, free_indices(layout, likelihood.data().supports_rigidity_learning()),
                  layout.to_log(initial), options.bounds};
  if (!options.bounds.contains(layout.to_natural(initial))) {
    throw std::invalid_argument("initial hyperparameters lie outside the hyperprior bounds");
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> perturb(0.0, options.restart_spread);
  const Eigen::VectorXd start = problem.reduce(problem.base);

  // The likelihood sums N terms, so its round-off floor and its gradient grow with |log p|.
  const auto tolerance = [&](double value) { return options.cg.gradient_tolerance * std::max(1.0, std::abs(value)); };
  Eigen::VectorXd scratch;
  const double start_value = problem(start, scratch);
  CgOptions cg_options = options.cg;
  if (std::isfinite(start_value)) cg_options.gradient_tolerance = tolerance(start_value);

  MleResult best;
  best.log_likelihood = -kInf;
  bool have_best = false;
  int total_iterations = 0, total_evaluations = 0;

  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    Eigen::VectorXd x0 = start;
    if (attempt > 0) {
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] += perturb(rng);
      Eigen::VectorXd g;
      if (!std::isfinite(problem(x0, g))) continue;
    }
    // A coordinate that left the box has a zero gradient and cannot come back
    // on its own, so clamp and restart the line searches a few times.
    CgResult cg;
    double gnorm = kInf;
    bool started = false;
    for (int pass = 0; pass < 4; ++pass) {
      try {
        cg = minimize_cg(problem, x0, cg_options);
      } catch (const std::invalid_argument&) {
        break;
      }
      started = true;
      total_iterations += cg.iterations;
      total_evaluations += cg.evaluations;
      x0 = problem.clamp(cg.x);
      gnorm = problem.projected_gradient_norm(x0);
      if (gnorm < tolerance(cg.value) || cg.iterations == 0) break;
    }
    if (!started) {
      if (attempt == 0) throw IllConditionedError("likelihood is not finite at the initial hyperparameters");
      continue;
    }

    auto params = layout.from_log(problem.full(x0));
    if (!likelihood.data().supports_rigidity_learning()) params.rigidity = initial.rigidity;
    const bool converged = gnorm < tolerance(cg.value);
    const bool collapsed = options.rigidity_floor > 0.0 && params.rigidity < options.rigidity_floor;
    if (!have_best || -cg.value > best.log_likelihood) {
      have_best = true;
      best.params = params;
      best.log_likelihood = -cg.value;
      best.converged = converged;
      best.rigidity_collapsed = collapsed;
      best.gradient_norm = gnorm;
      best.message = converged ? "gradient tolerance reached" : cg.message;
    }
    best.restarts = attempt;
    if (converged && !collapsed) break;
  }
  if (!have_best) throw IllConditionedError("no optimizer run produced a finite likelihood");

  best.iterations = total_iterations;
  best.evaluations = total_evaluations;
  const Eigen::VectorXd theta = layout.to_log(best.params);
  best.jitter = likelihood.value(best.params).jitter;
  best.identifiable = !near_bound(theta, problem.free, options.bounds) &&
                      locally_identifiable(problem, problem.reduce(theta));
  return best;
}

}  // namespace plategp
