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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "plategp/mle.hpp"
#include "plategp/oracles.hpp"
#include "plategp/prediction.hpp"

using namespace plategp;

namespace {

const PlateGeometry kGeom;
const LoadSpec kLoad{LoadKind::sinusoidal, 1.0};

Dataset navier_grid(int per_side, std::vector<QuantityKind> kinds) {
  std::vector<Observation> obs;
  for (auto k : kinds)
    for (int i = 0; i < per_side; ++i)
      for (int j = 0; j < per_side; ++j) {
        const Point p{0.05 + 0.9 * i / (per_side - 1), 0.05 + 0.9 * j / (per_side - 1)};
        obs.push_back({p, k, navier_field(kGeom, kLoad, k, p)});
      }
  return Dataset(kGeom.domain(), obs);
}

std::vector<Point> unit_grid(int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pts.push_back({i / (n - 1.0), j / (n - 1.0)});
  return pts;
}

ExtendedHyperparams simple_params() {
  ExtendedHyperparams p;
  p.kernel = {1.0, 0.3, 0.4};
  p.rigidity = 1.2;
  p.noise_variance = {{QuantityKind::w, 1e-4}, {QuantityKind::q, 1e-2}};
  return p;
}

Dataset random_dataset(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Observation> obs;
  for (int i = 0; i < n; ++i) {
    const auto k = i % 2 == 0 ? QuantityKind::w : QuantityKind::q;
    obs.push_back({{u(rng), u(rng)}, k, u(rng) - 0.5});
  }
  return Dataset({1.0, 1.0}, obs);
}

}  // namespace

TEST_CASE("noiseless observations are interpolated") {
  std::vector<Observation> obs = {{{0.2, 0.3}, QuantityKind::w, 0.7, NoiseClass::noiseless_bc},
                                  {{0.6, 0.5}, QuantityKind::r_x, -0.4, NoiseClass::noiseless_bc},
                                  {{0.4, 0.8}, QuantityKind::q, 1.3}};
  const Dataset data({1.0, 1.0}, obs);
  const auto params = simple_params();
  const std::vector<Target> targets = {{{0.2, 0.3}, QuantityKind::w}, {{0.6, 0.5}, QuantityKind::r_x}};
  const auto pred = predictive_posterior(data, params, 0.3, targets);
  CHECK(pred.mean[0] == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(pred.mean[1] == doctest::Approx(-0.4).epsilon(1e-3));
  const auto prior = predictive_posterior(Dataset({1.0, 1.0}, {{{0.9, 0.9}, QuantityKind::q, 0.0}}), params, 0.3, targets);
  CHECK(pred.variance[0] <= 1e-6 * prior.variance[0]);
  CHECK(pred.variance[1] <= 1e-6 * prior.variance[1]);
}

TEST_CASE("zero data gives zero mean") {
  std::vector<Observation> obs;
  for (int i = 0; i < 6; ++i) obs.push_back({{0.1 + 0.15 * i, 0.5}, i % 2 ? QuantityKind::q : QuantityKind::w, 0.0});
  const Dataset data({1.0, 1.0}, obs);
  std::vector<Target> targets;
  for (auto k : kAllQuantities) targets.push_back({{0.33, 0.71}, k});
  const auto pred = predictive_posterior(data, simple_params(), 0.3, targets);
  CHECK(pred.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK((pred.variance.array() > 0.0).all());
}

TEST_CASE("dense noiseless Navier training predicts the deflection field") {
  const MarginalLikelihood lml(navier_grid(9, {QuantityKind::w, QuantityKind::q}), 0.3);
  // Noiseless data drives the noise variances to their floor; one pass is enough here.
  MleOptions opt;
  opt.max_restarts = 0;
  const auto fit = mle_optimize(lml, initial_hyperparams(lml.data(), 0.3), opt);
  const auto pts = unit_grid(21);
  const std::vector<QuantityKind> kinds = {QuantityKind::w};
  const auto targets = grid_targets(pts, kinds);
  const auto pred = predictive_posterior(lml, fit.params, targets);

  double err = 0.0, ref = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double truth = navier_field(kGeom, kLoad, QuantityKind::w, pts[i]);
    err += std::pow(pred.mean[static_cast<Eigen::Index>(i)] - truth, 2);
    ref += truth * truth;
    peak = std::max(peak, std::abs(truth));
  }
  const double nrms = std::sqrt(err / static_cast<double>(pts.size())) / peak;
  CAPTURE(nrms);
  CHECK(nrms < 0.01);
}

TEST_CASE("conditioning never increases variance") {
  std::mt19937_64 rng(17);
  const auto params = simple_params();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = random_dataset(rng, 8);
    std::vector<Target> targets;
    for (int t = 0; t < 5; ++t) targets.push_back({{u(rng), u(rng)}, kAllQuantities[static_cast<std::size_t>(trial + t) % 12]});

    const auto base = predictive_posterior(data, params, 0.3, targets);
    const std::vector<Observation> extra = {{{u(rng), u(rng)}, QuantityKind::w, 0.1}};
    const auto more = predictive_posterior(data.with_appended(extra), params, 0.3, targets);

    const CovarianceTable table(0.3);
    for (std::size_t j = 0; j < targets.size(); ++j) {
      const auto& plan = table.plan(targets[j].quantity, targets[j].quantity);
      const double prior = CovarianceTable::evaluate(plan, axis_derivatives(0.0, 0.3), axis_derivatives(0.0, 0.4),
                                                     block_scale(params, plan.rigidity_power));
      const auto jj = static_cast<Eigen::Index>(j);
      CHECK(base.variance[jj] <= prior * (1 + 1e-12));
      CHECK(more.variance[jj] <= base.variance[jj] * (1 + 1e-9) + 1e-14 * prior);
    }
  }
}

TEST_CASE("predicted moment follows the predicted curvatures") {
  const MarginalLikelihood lml(navier_grid(5, {QuantityKind::w, QuantityKind::q}), 0.3);
  const auto params = initial_hyperparams(lml.data(), 0.3);
  const std::vector<Point> pts = {{0.3, 0.4}, {0.5, 0.5}, {0.81, 0.17}};
  const std::vector<QuantityKind> kinds = {QuantityKind::M_x, QuantityKind::kappa_x, QuantityKind::kappa_y};
  const auto pred = predictive_posterior(lml, params, grid_targets(pts, kinds));
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double mx = pred.mean[i];
    const double combo = params.rigidity * (pred.mean[3 + i] + 0.3 * pred.mean[6 + i]);
    CHECK(mx == doctest::Approx(combo).epsilon(1e-6));
  }
}

TEST_CASE("targets outside the plate are rejected") {
  const auto data = navier_grid(3, {QuantityKind::w});
  const std::vector<Target> targets = {{{1.2, 0.5}, QuantityKind::w}};
  ExtendedHyperparams p = simple_params();
  p.noise_variance = {{QuantityKind::w, 1e-6}};
  CHECK_THROWS_AS(predictive_posterior(data, p, 0.3, targets), std::invalid_argument);
}

TEST_CASE("mixture quantiles") {
  const std::vector<double> m1 = {2.0}, v1 = {4.0};
  // 0.995 quantile of N(2, 4) is 2 + 2 * 2.5758293.
  CHECK(gaussian_mixture_quantile(m1, v1, 0.995) == doctest::Approx(2.0 + 2.0 * 2.5758293035489).epsilon(1e-5));
  CHECK(gaussian_mixture_quantile(m1, v1, 0.5) == doctest::Approx(2.0).epsilon(1e-5));

  // Symmetric bimodal mixture: median at the center, quantiles mirrored.
  const std::vector<double> m2 = {-3.0, 3.0}, v2 = {1.0, 1.0};
  CHECK(std::abs(gaussian_mixture_quantile(m2, v2, 0.5)) < 1e-4);
  const double q_hi = gaussian_mixture_quantile(m2, v2, 0.995);
  CHECK(gaussian_mixture_quantile(m2, v2, 0.005) == doctest::Approx(-q_hi).epsilon(1e-5));
  CHECK(gaussian_mixture_cdf(m2, v2, q_hi) == doctest::Approx(0.995).epsilon(1e-6));

  // Point masses.
  const std::vector<double> m3 = {1.0, 5.0}, v3 = {0.0, 0.0};
  CHECK(gaussian_mixture_quantile(m3, v3, 0.25) == doctest::Approx(1.0));
  CHECK(gaussian_mixture_quantile(m3, v3, 0.75) == doctest::Approx(5.0));

  CHECK_THROWS_AS(gaussian_mixture_quantile({}, {}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_mixture_quantile(m1, v1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_mixture_quantile(m1, v2, 0.5), std::invalid_argument);
}

TEST_CASE("Monte Carlo mixture over trace draws") {
  const MarginalLikelihood lml(navier_grid(4, {QuantityKind::w, QuantityKind::q}), 0.3);
  const auto params = initial_hyperparams(lml.data(), 0.3);
  const auto layout = ParameterLayout::of(params);
  const std::vector<Target> targets = {{{0.5, 0.5}, QuantityKind::w}, {{0.2, 0.7}, QuantityKind::M_xy}};
  const auto single = predictive_posterior(lml, params, targets);

  McmcTrace trace;
  trace.layout = layout;
  trace.draws = layout.to_natural(params).transpose();
  MixtureOptions opt;
  opt.threads = 1;

  SUBCASE("one draw equals the fixed-parameter posterior") {
    const auto mix = mc_predictive(lml, trace, targets, opt);
    CHECK(mix.draws_used == 1);
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK(mix.mean[j] == single.mean[j]);
      CHECK(mix.variance[j] == doctest::Approx(single.variance[j]).epsilon(1e-12));
      CHECK(mix.lower[j] <= mix.mean[j]);
      CHECK(mix.upper[j] >= mix.mean[j]);
    }
  }
  SUBCASE("identical draws keep mean and variance") {
    trace.draws = trace.draws.replicate(2, 1).eval();
    opt.stride = 1;
    const auto mix = mc_predictive(lml, trace, targets, opt);
    CHECK(mix.draws_used == 2);
    CHECK(mix.mean[0] == doctest::Approx(single.mean[0]).epsilon(1e-12));
    CHECK(mix.variance[0] == doctest::Approx(single.variance[0]).epsilon(1e-12));
  }
  SUBCASE("spread draws widen the mixture, thinning and threads agree") {
    Eigen::MatrixXd rows(25, layout.size());
    for (int i = 0; i < 25; ++i) {
      auto p = params;
      p.rigidity *= 1.0 + 0.02 * (i - 12);
      p.kernel.length_x *= 1.0 + 0.01 * (i % 5);
      rows.row(i) = layout.to_natural(p).transpose();
    }
    trace.draws = rows;
    opt.stride = 3;
    const auto mix = mc_predictive(lml, trace, targets, opt);
    CHECK(mix.draws_used == 9);

    double mean_var = 0.0;
    for (int i = 0; i < 25; i += 3) mean_var += predictive_posterior(lml, trace.draw(static_cast<std::size_t>(i)), targets).variance[1];
    CHECK(mix.variance[1] >= mean_var / 9.0);

    opt.threads = 4;
    const auto threaded = mc_predictive(lml, trace, targets, opt);
    CHECK(threaded.mean == mix.mean);
    CHECK(threaded.upper == mix.upper);
  }
  SUBCASE("empty thinned set is an error") {
    trace.draws.resize(0, layout.size());
    CHECK_THROWS_AS(mc_predictive(lml, trace, targets, opt), std::invalid_argument);
  }
}
