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
#include <limits>

#include "plategp/mle.hpp"
#include "plategp/oracles.hpp"

using namespace plategp;
using K = QuantityKind;

namespace {

Dataset navier_dataset(std::initializer_list<K> kinds) {
  const PlateGeometry g;
  const LoadSpec load;
  std::vector<Observation> obs;
  for (auto k : kinds)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const Point p{0.05 + 0.9 * i / 4, 0.05 + 0.9 * j / 4};
        obs.push_back({p, k, navier_field(g, load, k, p), NoiseClass::noisy});
      }
  return Dataset(g.domain(), obs);
}

}  // namespace

TEST_CASE("conjugate gradient on the Rosenbrock function") {
  const Objective rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    g[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
    g[1] = 200 * (x[1] - x[0] * x[0]);
    return std::pow(1 - x[0], 2) + 100 * std::pow(x[1] - x[0] * x[0], 2);
  };
  CgOptions opt;
  opt.gradient_tolerance = 1e-8;
  opt.max_iterations = 5000;
  opt.max_evaluations = 50000;
  const auto res = minimize_cg(rosen, Eigen::Vector2d(-1.2, 1.0), opt);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("conjugate gradient backs off infeasible regions") {
  // Minimum at x = 2 but x > 3 is infeasible.
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Constant(1, 2 * (x[0] - 2));
    return x[0] > 3 ? std::numeric_limits<double>::infinity() : std::pow(x[0] - 2, 2);
  };
  const auto res = minimize_cg(f, Eigen::VectorXd::Constant(1, -5.0));
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-4));
  CHECK_THROWS_AS(minimize_cg(f, Eigen::VectorXd::Constant(1, 4.0)), std::invalid_argument);
}

TEST_CASE("conjugate gradient stops once relative reductions stall") {
  // Gradient tolerance disabled: only the function-reduction test can stop it.
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x.array() - 1.0).matrix();
    return 1e12 + (x.array() - 1.0).square().sum();
  };
  CgOptions opt;
  opt.gradient_tolerance = 0.0;
  const auto res = minimize_cg(f, Eigen::Vector2d(3.0, -2.0), opt);
  CHECK(res.converged);
  CHECK(res.message == "relative function reduction below tolerance");
  CHECK(res.iterations <= 10);

  opt.stall_iterations = 0;
  opt.max_iterations = 20;
  CHECK_FALSE(minimize_cg(f, Eigen::Vector2d(3.0, -2.0), opt).converged);
}

TEST_CASE("initial hyperparameters") {
  const auto d = navier_dataset({K::w, K::q});
  const auto p = initial_hyperparams(d, 0.3);
  CHECK_NOTHROW(p.validate());
  CHECK(p.noise_variance.size() == 2);
  CHECK(p.kernel.length_x > 0.0);
  // Deflection block variance in the right decade.
  const double ms = 0.2 * std::pow(navier_amplitude(PlateGeometry{}, 1.0), 2);
  CHECK(std::abs(std::log10(p.kernel.amplitude * p.kernel.amplitude / ms)) < 2.0);
}

TEST_CASE("single zero observation is flagged as not identifiable") {
  const Dataset d(PlateDomain{}, {{{0.5, 0.5}, K::w, 0.0, NoiseClass::noisy}});
  ExtendedHyperparams p;
  p.noise_variance[K::w] = 0.1;
  const MarginalLikelihood lml(d, 0.3);
  const auto res = mle_optimize(lml, p);
  CHECK_FALSE(res.identifiable);
  CHECK(res.params.kernel.amplitude < 1e-2);
}

TEST_CASE("noiseless deflection and load data recover the rigidity") {
  const auto d = navier_dataset({K::w, K::q});
  const MarginalLikelihood lml(d, 0.3);
  const auto res = mle_optimize(lml, initial_hyperparams(d, 0.3));
  CHECK(res.converged);
  CHECK(res.params.rigidity == doctest::Approx(1.0).epsilon(0.005));
  CHECK(res.jitter <= 1e-5);
}

TEST_CASE("rigidity floor triggers restarts and the collapse flag") {
  const auto d = navier_dataset({K::w, K::q});
  const MarginalLikelihood lml(d, 0.3);
  MleOptions opt;
  opt.rigidity_floor = 50.0;
  opt.max_restarts = 2;
  const auto res = mle_optimize(lml, initial_hyperparams(d, 0.3), opt);
  CHECK(res.restarts == 2);
  CHECK(res.rigidity_collapsed);
}

TEST_CASE("rigidity is held when the data cannot identify it") {
  const auto d = navier_dataset({K::w});
  auto p0 = initial_hyperparams(d, 0.3);
  p0.rigidity = 7.0;
  const auto res = mle_optimize(MarginalLikelihood(d, 0.3), p0);
  CHECK(res.params.rigidity == 7.0);
}

TEST_CASE("bounds validation") {
  CHECK_THROWS_AS((HyperpriorBounds{1.0, 0.5}.validate()), std::invalid_argument);
  CHECK((HyperpriorBounds{}.contains(Eigen::Vector2d(1e-3, 1e5))));
  CHECK_FALSE((HyperpriorBounds{}.contains(Eigen::Vector2d(1e-13, 1.0))));
}
