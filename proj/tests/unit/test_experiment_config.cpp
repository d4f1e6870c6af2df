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
#include <fstream>
#include <limits>

#include "plategp/experiment_config.hpp"

using namespace plategp;
using nlohmann::json;

TEST_CASE("defaults validate and survive a JSON round trip") {
  ExperimentConfig cfg;
  cfg.validate();
  const auto j = to_json(cfg);
  const auto back = parse_config(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("non-default values round trip") {
  ExperimentConfig cfg;
  cfg.geometry.length_x = 2.0;
  cfg.load.kind = LoadKind::uniform;
  cfg.learning_case = LearningCase::L2;
  cfg.boundary_mode = BoundaryMode::displacement_rotation;
  cfg.snr = std::numeric_limits<double>::infinity();
  cfg.seed = 0xfeedbeefcafeULL;
  cfg.mcmc.adaptation = ProposalAdaptation::diagonal_scale;
  cfg.study.cases = {LearningCase::L3};
  cfg.predict_quantities = {QuantityKind::q, QuantityKind::Q_y};
  const auto back = parse_config(to_json(cfg));
  CHECK(back.geometry.length_x == 2.0);
  CHECK(back.load.kind == LoadKind::uniform);
  CHECK(back.learning_case == LearningCase::L2);
  CHECK(back.boundary_mode == BoundaryMode::displacement_rotation);
  CHECK(std::isinf(back.snr));
  CHECK(back.seed == cfg.seed);
  CHECK(back.mcmc.adaptation == ProposalAdaptation::diagonal_scale);
  CHECK(back.predict_quantities == cfg.predict_quantities);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(back) != config_hash(ExperimentConfig{}));
}

TEST_CASE("partial documents keep defaults") {
  const auto cfg = parse_config(json::parse(R"({"snr": 20, "learning_case": "L1", "training_grid": {"points": 7}})"));
  CHECK(cfg.snr == 20.0);
  CHECK(cfg.learning_case == LearningCase::L1);
  CHECK(cfg.training_grid.points == 7);
  CHECK(cfg.training_grid.inset == doctest::Approx(0.05));
  CHECK(cfg.replications == 100);
  CHECK(std::isinf(parse_config(json::parse(R"({"snr": "inf"})")).snr));
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"snrr": 10})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"mcmc": {"sample": 10}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"snr": -1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"snr": "loud"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"training_grid": {"points": 1}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"training_grid": {"inset": 0.5}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"learning_case": "L4"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"replications": "many"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"([1, 2])")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"predict_quantities": ["w", "zz"]})")), ConfigError);
}

TEST_CASE("load_config reads files and reports parse failures") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "plategp_cfg_good.json";
  const auto bad = dir / "plategp_cfg_bad.json";
  std::ofstream(good) << R"({"seed": 7})";
  std::ofstream(bad) << R"({"seed": )";
  CHECK(load_config(good).seed == 7);
  CHECK_THROWS_AS(load_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "plategp_cfg_missing.json"), ConfigError);
  std::filesystem::remove(good);
  std::filesystem::remove(bad);
}

TEST_CASE("settings map onto sampler and optimizer options") {
  McmcSettings m;
  const auto s = m.sampler(9);
  CHECK(s.samples == 20000);
  CHECK(s.burn_in == 5000);
  CHECK(s.seed == 9);
  MleSettings mle;
  const auto o = mle.options(HyperpriorBounds{}, 3);
  CHECK(o.max_restarts == 5);
}
