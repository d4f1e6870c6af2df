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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "plategp/gp_model.hpp"

using namespace plategp;
using K = QuantityKind;

namespace {

const PlateDomain kUnit{1.0, 1.0};

ExtendedHyperparams unit_params() {
  ExtendedHyperparams p;
  p.kernel = KernelParams{};
  p.rigidity = 1.0;
  return p;
}

Dataset random_dataset(std::mt19937_64& rng, std::initializer_list<std::pair<K, int>> blocks,
                       int noiseless_w = 0) {
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::normal_distribution<double> value(0.0, 1.0);
  std::vector<Observation> obs;
  for (auto [kind, count] : blocks)
    for (int i = 0; i < count; ++i) obs.push_back({{coord(rng), coord(rng)}, kind, value(rng), NoiseClass::noisy});
  for (int i = 0; i < noiseless_w; ++i) obs.push_back({{coord(rng), 0.0}, K::w, 0.0, NoiseClass::noiseless_bc});
  return Dataset(kUnit, std::move(obs));
}

// Dense-inverse evaluation with no factorization reuse.
double naive_lml(const Eigen::MatrixXd& k, const Eigen::VectorXd& z) {
  const Eigen::MatrixXd inv = k.inverse();
  const double n = static_cast<double>(z.size());
  return -0.5 * z.dot(inv * z) - 0.5 * std::log(k.determinant()) - 0.5 * n * std::log(2 * std::numbers::pi);
}

}  // namespace

TEST_CASE("dataset validation and block order") {
  CHECK_THROWS_AS(Dataset(kUnit, {{{1.5, 0.2}, K::w, 0.0, NoiseClass::noisy}}), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(kUnit, {{{0.5, 0.2}, K::w, NAN, NoiseClass::noisy}}), std::invalid_argument);
  CHECK_THROWS_AS(Dataset(kUnit, {{{0.5, 0.0}, K::q, 0.0, NoiseClass::noiseless_bc}}), std::invalid_argument);
  CHECK_NOTHROW(Dataset(kUnit, {{{0.0, 1.0}, K::r_y, 0.0, NoiseClass::noiseless_bc}}));

  const Dataset d(kUnit, {{{0.1, 0.1}, K::q, 1.0, NoiseClass::noisy},
                          {{0.2, 0.1}, K::w, 2.0, NoiseClass::noisy},
                          {{0.3, 0.1}, K::q, 3.0, NoiseClass::noisy},
                          {{0.0, 0.0}, K::w, 0.0, NoiseClass::noiseless_bc}});
  CHECK(d.values()[0] == 2.0);
  CHECK(d.values()[1] == 0.0);
  CHECK(d.values()[2] == 1.0);
  CHECK(d.values()[3] == 3.0);
  CHECK(d.quantities() == std::vector<K>{K::w, K::q});
  CHECK(d.count(K::q) == 2);
  CHECK(d.supports_rigidity_learning());
  CHECK_FALSE(Dataset(kUnit, {{{0.1, 0.1}, K::w, 1.0, NoiseClass::noisy}}).supports_rigidity_learning());
}

TEST_CASE("parameter layout round trip") {
  ExtendedHyperparams p = unit_params();
  p.kernel = {2.0, 0.3, 0.4};
  p.rigidity = 5.0;
  p.noise_variance = {{K::q, 0.1}, {K::w, 0.01}};
  const auto layout = ParameterLayout::of(p);
  CHECK(layout.size() == 6);
  CHECK(layout.names() == std::vector<std::string>{"A", "l_x", "l_y", "D", "sigma2_w", "sigma2_q"});
  const auto back = layout.from_log(layout.to_log(p));
  CHECK(back.rigidity == doctest::Approx(5.0));
  CHECK(back.noise_variance.at(K::q) == doctest::Approx(0.1));
  CHECK(back.kernel.length_y == doctest::Approx(0.4));
}

TEST_CASE("covariance assembly examples") {
  ExtendedHyperparams p = unit_params();
  p.kernel.amplitude = 1.7;
  const Dataset one(kUnit, {{{0.4, 0.4}, K::w, 0.0, NoiseClass::noisy}});
  const auto k1 = assemble_covariance(one, p, 0.3);
  REQUIRE(k1.rows() == 1);
  CHECK(k1(0, 0) == doctest::Approx(1.7 * 1.7));

  const Dataset dup(kUnit, {{{0.4, 0.4}, K::w, 0.0, NoiseClass::noiseless_bc},
                            {{0.4, 0.4}, K::w, 0.0, NoiseClass::noiseless_bc}});
  const auto k2 = assemble_covariance(dup, p, 0.3);
  CHECK((k2.array() == 1.7 * 1.7).all());
  // Rank-deficient; the jitter schedule must rescue it.
  const FactorizedCovariance f(k2, assemble_noise(dup, p), JitterPolicy{});
  CHECK(f.jitter() >= 1e-10);
  CHECK(f.jitter() <= 1e-5);

  const Dataset wq(kUnit, {{{0.5, 0.5}, K::w, 0.0, NoiseClass::noisy}, {{0.5, 0.5}, K::q, 0.0, NoiseClass::noisy}});
  const auto k3 = assemble_covariance(wq, unit_params(), 0.3);
  CHECK(k3(0, 1) == doctest::Approx(8.0));
  CHECK(k3(1, 0) == k3(0, 1));
}

TEST_CASE("assembled covariance is exactly symmetric") {
  std::mt19937_64 rng(5);
  const auto d = random_dataset(rng, {{K::w, 6}, {K::kappa_xy, 4}, {K::q, 5}, {K::Q_y, 3}, {K::M_xy, 4}});
  ExtendedHyperparams p = unit_params();
  p.kernel = {1.1, 0.3, 0.45};
  p.rigidity = 2.0;
  const auto k = assemble_covariance(d, p, 0.3);
  CHECK((k.array() == k.transpose().array()).all());
}

TEST_CASE("noise assembly") {
  const Dataset bc(kUnit, {{{0.0, 0.3}, K::w, 0.0, NoiseClass::noiseless_bc},
                           {{0.0, 0.6}, K::r_x, 0.0, NoiseClass::noiseless_bc}});
  CHECK(assemble_noise(bc, unit_params()).isZero());
  const FactorizedCovariance f(assemble_covariance(bc, unit_params(), 0.3), assemble_noise(bc, unit_params()),
                               JitterPolicy{});
  CHECK(f.jitter() == 1e-10);

  const Dataset wq(kUnit, {{{0.2, 0.2}, K::q, 0.0, NoiseClass::noisy},
                           {{0.1, 0.2}, K::w, 0.0, NoiseClass::noisy},
                           {{0.0, 0.2}, K::w, 0.0, NoiseClass::noiseless_bc}});
  auto p = unit_params();
  p.noise_variance = {{K::w, 0.01}, {K::q, 0.5}};
  const auto e = assemble_noise(wq, p, 1e-8);
  CHECK(e[0] == doctest::Approx(0.01 + 1e-8));
  CHECK(e[1] == doctest::Approx(1e-8));
  CHECK(e[2] == doctest::Approx(0.5 + 1e-8));

  p.noise_variance.erase(K::q);
  CHECK_THROWS_AS(assemble_noise(wq, p), std::invalid_argument);

  const FactorizedCovariance zero(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Constant(3, 1e-8), JitterPolicy{});
  CHECK(zero.inverse()(0, 0) == doctest::Approx(1.0 / (1e-8 + 1e-10)));
}

TEST_CASE("factorization failure reports the hyperparameters") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(FactorizedCovariance(bad, Eigen::VectorXd::Zero(2), JitterPolicy{}), IllConditionedError);

  // Overflowing amplitude: the covariance is not finite at any jitter.
  std::vector<Observation> obs;
  for (int i = 0; i < 3; ++i) obs.push_back({{0.5, 0.1 * i}, K::w, 0.1 * i, NoiseClass::noiseless_bc});
  auto p = unit_params();
  p.kernel.amplitude = 1e200;
  const MarginalLikelihood lml(Dataset(kUnit, obs), 0.3);
  try {
    (void)lml.value(p);
    FAIL("expected IllConditionedError");
  } catch (const IllConditionedError& err) {
    INFO(std::string(err.what()));
    CHECK(std::string(err.what()).find("A=9.99") != std::string::npos);
  }
}

TEST_CASE("scalar likelihoods") {
  const Dataset zero(kUnit, {{{0.5, 0.5}, K::w, 0.0, NoiseClass::noisy}});
  auto p = unit_params();
  p.noise_variance = {{K::w, 1e-300}};
  CHECK(log_marginal_likelihood(zero, p, 0.3).value ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-9));

  const Dataset c(kUnit, {{{0.5, 0.5}, K::w, 1.3, NoiseClass::noisy}});
  p.kernel.amplitude = 0.8;
  p.noise_variance = {{K::w, 0.25}};
  const double v = 0.64 * (1 + 1e-10) + 0.25;
  CHECK(log_marginal_likelihood(c, p, 0.3).value ==
        doctest::Approx(-1.69 / (2 * v) - 0.5 * std::log(v) - 0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("likelihood matches a naive dense inverse") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_dataset(rng, {{K::w, 5}});
    auto p = unit_params();
    p.kernel = {1.4, 0.3, 0.5};
    p.noise_variance = {{K::w, 0.05}};
    const auto res = log_marginal_likelihood(d, p, 0.3);
    Eigen::MatrixXd k = assemble_covariance(d, p, 0.3);
    k.diagonal() += assemble_noise(d, p) + res.jitter * jitter_scale(k);
    CHECK(res.value == doctest::Approx(naive_lml(k, d.values())).epsilon(1e-10));
  }
}

TEST_CASE("likelihood is invariant under observation permutation") {
  std::mt19937_64 rng(3);
  const auto d = random_dataset(rng, {{K::w, 7}, {K::q, 6}, {K::M_x, 4}}, 4);
  auto p = unit_params();
  p.kernel = {0.9, 0.35, 0.4};
  p.rigidity = 0.7;
  p.noise_variance = {{K::w, 0.02}, {K::q, 0.3}, {K::M_x, 0.1}};
  auto obs = std::vector<Observation>(d.observations().begin(), d.observations().end());
  const double base = log_marginal_likelihood(d, p, 0.3).value;
  for (int trial = 0; trial < 4; ++trial) {
    std::shuffle(obs.begin(), obs.end(), rng);
    const Dataset shuffled(kUnit, obs);
    CHECK(log_marginal_likelihood(shuffled, p, 0.3).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("likelihood gradient against central differences") {
  std::mt19937_64 rng(17);
  const Dataset sets[] = {
      random_dataset(rng, {{K::w, 8}, {K::q, 8}}, 3),
      random_dataset(rng, {{K::kappa_x, 5}, {K::kappa_y, 5}, {K::kappa_xy, 5}, {K::q, 6}}),
      random_dataset(rng, {{K::w, 5}, {K::r_x, 4}, {K::r_y, 4}, {K::q, 4}, {K::M_x, 3}, {K::M_y, 3}, {K::M_xy, 3}},
                     2),
  };
  for (const auto& d : sets) {
    const auto layout = ParameterLayout::of(d);
    ExtendedHyperparams p = unit_params();
    p.kernel = {1.3, 0.42, 0.37};
    p.rigidity = 0.8;
    for (auto kind : layout.noise_quantities()) p.noise_variance[kind] = 0.05 + 0.01 * static_cast<int>(kind);
    const MarginalLikelihood lml(d, 0.3);
    const auto g = lml.gradient(p);
    CHECK(g.value == doctest::Approx(lml.value(p).value).epsilon(1e-12));
    const Eigen::VectorXd theta = layout.to_log(p);
    for (Eigen::Index j = 0; j < layout.size(); ++j) {
      // Fourth-order stencil keeps round-off in the likelihood below the tolerance.
      const double h = 1e-3;
      auto at = [&](double s) {
        Eigen::VectorXd t = theta;
        t[j] += s * h;
        return lml.value(layout.from_log(t)).value;
      };
      const double fd = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
      INFO("component " << layout.names()[static_cast<std::size_t>(j)]);
      INFO("analytic " << g.gradient[j] << " fd " << fd << " jitter " << g.jitter);
      CHECK(std::abs(g.gradient[j] - fd) / std::max(std::abs(fd), 1e-3) < 1e-5);
    }
  }
}

TEST_CASE("gradient components that must vanish") {
  std::mt19937_64 rng(23);
  const auto d = random_dataset(rng, {{K::w, 6}});
  auto p = unit_params();
  p.kernel = {1.0, 0.4, 0.4};
  p.noise_variance = {{K::w, 0.1}, {K::q, 0.2}};
  const auto g = lml_gradient(d, p, 0.3);
  CHECK(g.gradient[ParameterLayout::kRigidity] == 0.0);
  CHECK(g.gradient[ParameterLayout::kFirstNoise + 1] == 0.0);  // sigma2_q, no q observed
}
