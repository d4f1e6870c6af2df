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


#include "plategp/experiment_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>

namespace plategp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!names.contains(item.key())) fail(path + "." + item.key(), "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path, "out of range");
  return static_cast<int>(v);
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

// Reads j[key] into out when present.
template <typename Fn>
void field(const json& j, const char* key, const std::string& path, Fn&& read) {
  if (const auto it = j.find(key); it != j.end()) read(*it, path + "." + key);
}

double parse_snr(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    fail(path, "expected a number or \"inf\"");
  }
  return get_number(j, path);
}

json snr_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

ProposalAdaptation parse_adaptation(const std::string& s, const std::string& path) {
  if (s == "none") return ProposalAdaptation::none;
  if (s == "diagonal_scale") return ProposalAdaptation::diagonal_scale;
  if (s == "empirical_covariance") return ProposalAdaptation::empirical_covariance;
  fail(path, "unknown adaptation '" + s + "'");
}

McmcSettings parse_mcmc(const json& j, const std::string& path, McmcSettings m) {
  check_keys(j, path, {"samples", "burn_in", "proposal_variance", "adaptation", "stall_window", "stride"});
  field(j, "samples", path, [&](const json& v, const std::string& p) { m.samples = get_int(v, p); });
  field(j, "burn_in", path, [&](const json& v, const std::string& p) { m.burn_in = get_int(v, p); });
  field(j, "proposal_variance", path, [&](const json& v, const std::string& p) { m.proposal_variance = get_number(v, p); });
  field(j, "adaptation", path, [&](const json& v, const std::string& p) { m.adaptation = parse_adaptation(get_string(v, p), p); });
  field(j, "stall_window", path, [&](const json& v, const std::string& p) { m.stall_window = get_int(v, p); });
  field(j, "stride", path, [&](const json& v, const std::string& p) { m.stride = get_int(v, p); });
  return m;
}

json mcmc_json(const McmcSettings& m) {
  return {{"samples", m.samples},
          {"burn_in", m.burn_in},
          {"proposal_variance", m.proposal_variance},
          {"adaptation", to_string(m.adaptation)},
          {"stall_window", m.stall_window},
          {"stride", m.stride}};
}

GridSpec parse_grid(const json& j, const std::string& path, GridSpec g) {
  check_keys(j, path, {"points", "inset"});
  field(j, "points", path, [&](const json& v, const std::string& p) { g.points = get_int(v, p); });
  field(j, "inset", path, [&](const json& v, const std::string& p) { g.inset = get_number(v, p); });
  return g;
}

void validate_mcmc(const McmcSettings& m, const std::string& path) {
  if (m.samples < 1) fail(path + ".samples", "must be at least 1");
  if (m.burn_in < 0) fail(path + ".burn_in", "must be non-negative");
  if (!(m.proposal_variance > 0.0) || !std::isfinite(m.proposal_variance)) {
    fail(path + ".proposal_variance", "must be positive");
  }
  if (m.stall_window < 0) fail(path + ".stall_window", "must be non-negative");
  if (m.stride < 1) fail(path + ".stride", "must be at least 1");
}

void validate_grid(const GridSpec& g, const std::string& path) {
  if (g.points < 2) fail(path + ".points", "must be at least 2");
  if (!(g.inset >= 0.0 && g.inset < 0.5)) fail(path + ".inset", "must lie in [0, 0.5)");
}

}  // namespace

std::string_view to_string(LearningCase c) {
  switch (c) {
    case LearningCase::L1: return "L1";
    case LearningCase::L2: return "L2";
    case LearningCase::L3: return "L3";
  }
  return "?";
}

std::string_view to_string(BoundaryMode m) {
  return m == BoundaryMode::none ? "none" : "displacement_rotation";
}

std::string_view to_string(ProposalAdaptation a) {
  switch (a) {
    case ProposalAdaptation::none: return "none";
    case ProposalAdaptation::diagonal_scale: return "diagonal_scale";
    case ProposalAdaptation::empirical_covariance: return "empirical_covariance";
  }
  return "?";
}

LearningCase parse_learning_case(std::string_view name) {
  if (name == "L1") return LearningCase::L1;
  if (name == "L2") return LearningCase::L2;
  if (name == "L3") return LearningCase::L3;
  throw ConfigError("unknown learning case '" + std::string(name) + "'");
}

SamplerOptions McmcSettings::sampler(std::uint64_t seed) const {
  SamplerOptions s;
  s.samples = samples;
  s.burn_in = burn_in;
  s.adaptation = adaptation;
  s.stall_window = stall_window;
  s.seed = seed;
  // proposal_variance is expanded per coordinate by the caller.
  return s;
}

MleOptions MleSettings::options(const HyperpriorBounds& bounds, std::uint64_t seed) const {
  MleOptions o;
  o.max_restarts = max_restarts;
  o.rigidity_floor = rigidity_floor;
  o.cg.gradient_tolerance = gradient_tolerance;
  o.cg.max_iterations = max_iterations;
  o.bounds = bounds;
  o.seed = seed;
  return o;
}

void ExperimentConfig::validate() const {
  try {
    geometry.validate();
  } catch (const std::invalid_argument& e) {
    fail("geometry", e.what());
  }
  if (!std::isfinite(load.amplitude)) fail("load.amplitude", "must be finite");
  validate_grid(training_grid, "training_grid");
  validate_grid(prediction_grid, "prediction_grid");
  if (!(snr > 0.0)) fail("snr", "must be positive");
  if (boundary_points_per_edge < 2) fail("boundary_conditions.points_per_edge", "must be at least 2");
  if (replications < 2) fail("replications", "must be at least 2");
  validate_mcmc(mcmc, "mcmc");
  validate_mcmc(study.mcmc, "study.mcmc");
  if (mle.max_restarts < 0) fail("mle.max_restarts", "must be non-negative");
  if (!(mle.rigidity_floor >= 0.0)) fail("mle.rigidity_floor", "must be non-negative");
  if (!(mle.gradient_tolerance > 0.0)) fail("mle.gradient_tolerance", "must be positive");
  if (mle.max_iterations < 1) fail("mle.max_iterations", "must be at least 1");
  try {
    bounds.validate();
  } catch (const std::invalid_argument& e) {
    fail("bounds", e.what());
  }
  if (study.snr_levels.empty()) fail("study.snr_levels", "must not be empty");
  for (double s : study.snr_levels) {
    if (!(s > 0.0)) fail("study.snr_levels", "entries must be positive");
  }
  if (study.cases.empty()) fail("study.cases", "must not be empty");
  if (!(study.outlier_fraction >= 0.0 && study.outlier_fraction < 1.0)) {
    fail("study.outlier_fraction", "must lie in [0, 1)");
  }
  if (ritz_modes < 1) fail("ritz_modes", "must be at least 1");
  if (predict_quantities.empty()) fail("predict_quantities", "must not be empty");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  const std::string root = "config";
  check_keys(j, root,
             {"geometry", "load", "training_grid", "prediction_grid", "snr", "learning_case", "boundary_conditions",
              "replications", "seed", "mcmc", "mle", "bounds", "study", "ritz_modes", "predict_quantities",
              "output_dir", "threads"});

  field(j, "geometry", root, [&](const json& g, const std::string& p) {
    check_keys(g, p, {"length_x", "length_y", "rigidity", "poisson"});
    field(g, "length_x", p, [&](const json& v, const std::string& q) { c.geometry.length_x = get_number(v, q); });
    field(g, "length_y", p, [&](const json& v, const std::string& q) { c.geometry.length_y = get_number(v, q); });
    field(g, "rigidity", p, [&](const json& v, const std::string& q) { c.geometry.rigidity = get_number(v, q); });
    field(g, "poisson", p, [&](const json& v, const std::string& q) { c.geometry.poisson = get_number(v, q); });
  });
  field(j, "load", root, [&](const json& l, const std::string& p) {
    check_keys(l, p, {"kind", "amplitude"});
    field(l, "kind", p, [&](const json& v, const std::string& q) {
      const auto s = get_string(v, q);
      if (s == "sinusoidal") {
        c.load.kind = LoadKind::sinusoidal;
      } else if (s == "uniform") {
        c.load.kind = LoadKind::uniform;
      } else {
        fail(q, "unknown load kind '" + s + "'");
      }
    });
    field(l, "amplitude", p, [&](const json& v, const std::string& q) { c.load.amplitude = get_number(v, q); });
  });
  field(j, "training_grid", root, [&](const json& v, const std::string& p) { c.training_grid = parse_grid(v, p, c.training_grid); });
  field(j, "prediction_grid", root, [&](const json& v, const std::string& p) { c.prediction_grid = parse_grid(v, p, c.prediction_grid); });
  field(j, "snr", root, [&](const json& v, const std::string& p) { c.snr = parse_snr(v, p); });
  field(j, "learning_case", root, [&](const json& v, const std::string& p) {
    try {
      c.learning_case = parse_learning_case(get_string(v, p));
    } catch (const ConfigError& e) {
      fail(p, e.what());
    }
  });
  field(j, "boundary_conditions", root, [&](const json& b, const std::string& p) {
    check_keys(b, p, {"mode", "points_per_edge"});
    field(b, "mode", p, [&](const json& v, const std::string& q) {
      const auto s = get_string(v, q);
      if (s == "none") {
        c.boundary_mode = BoundaryMode::none;
      } else if (s == "displacement_rotation") {
        c.boundary_mode = BoundaryMode::displacement_rotation;
      } else {
        fail(q, "unknown boundary mode '" + s + "'");
      }
    });
    field(b, "points_per_edge", p, [&](const json& v, const std::string& q) { c.boundary_points_per_edge = get_int(v, q); });
  });
  field(j, "replications", root, [&](const json& v, const std::string& p) { c.replications = get_int(v, p); });
  field(j, "seed", root, [&](const json& v, const std::string& p) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(p, "expected a non-negative integer");
    }
    c.seed = v.get<std::uint64_t>();
  });
  field(j, "mcmc", root, [&](const json& v, const std::string& p) { c.mcmc = parse_mcmc(v, p, c.mcmc); });
  field(j, "mle", root, [&](const json& m, const std::string& p) {
    check_keys(m, p, {"max_restarts", "rigidity_floor", "gradient_tolerance", "max_iterations"});
    field(m, "max_restarts", p, [&](const json& v, const std::string& q) { c.mle.max_restarts = get_int(v, q); });
    field(m, "rigidity_floor", p, [&](const json& v, const std::string& q) { c.mle.rigidity_floor = get_number(v, q); });
    field(m, "gradient_tolerance", p, [&](const json& v, const std::string& q) { c.mle.gradient_tolerance = get_number(v, q); });
    field(m, "max_iterations", p, [&](const json& v, const std::string& q) { c.mle.max_iterations = get_int(v, q); });
  });
  field(j, "bounds", root, [&](const json& b, const std::string& p) {
    check_keys(b, p, {"lower", "upper"});
    field(b, "lower", p, [&](const json& v, const std::string& q) { c.bounds.lower = get_number(v, q); });
    field(b, "upper", p, [&](const json& v, const std::string& q) { c.bounds.upper = get_number(v, q); });
  });
  field(j, "study", root, [&](const json& s, const std::string& p) {
    check_keys(s, p, {"snr_levels", "cases", "outlier_fraction", "run_mcmc", "mcmc"});
    field(s, "snr_levels", p, [&](const json& v, const std::string& q) {
      if (!v.is_array()) fail(q, "expected an array");
      c.study.snr_levels.clear();
      for (std::size_t i = 0; i < v.size(); ++i) c.study.snr_levels.push_back(parse_snr(v[i], q + "[" + std::to_string(i) + "]"));
    });
    field(s, "cases", p, [&](const json& v, const std::string& q) {
      if (!v.is_array()) fail(q, "expected an array");
      c.study.cases.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto item = q + "[" + std::to_string(i) + "]";
        try {
          c.study.cases.push_back(parse_learning_case(get_string(v[i], item)));
        } catch (const ConfigError& e) {
          fail(item, e.what());
        }
      }
    });
    field(s, "outlier_fraction", p, [&](const json& v, const std::string& q) { c.study.outlier_fraction = get_number(v, q); });
    field(s, "run_mcmc", p, [&](const json& v, const std::string& q) { c.study.run_mcmc = get_bool(v, q); });
    field(s, "mcmc", p, [&](const json& v, const std::string& q) { c.study.mcmc = parse_mcmc(v, q, c.study.mcmc); });
  });
  field(j, "ritz_modes", root, [&](const json& v, const std::string& p) { c.ritz_modes = get_int(v, p); });
  field(j, "predict_quantities", root, [&](const json& v, const std::string& p) {
    if (!v.is_array()) fail(p, "expected an array");
    c.predict_quantities.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto item = p + "[" + std::to_string(i) + "]";
      try {
        c.predict_quantities.push_back(parse_quantity(get_string(v[i], item)));
      } catch (const std::invalid_argument& e) {
        fail(item, e.what());
      }
    }
  });
  field(j, "output_dir", root, [&](const json& v, const std::string& p) { c.output_dir = get_string(v, p); });
  field(j, "threads", root, [&](const json& v, const std::string& p) {
    const int t = get_int(v, p);
    if (t < 0) fail(p, "must be non-negative");
    c.threads = static_cast<unsigned>(t);
  });
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json cases = json::array();
  for (auto lc : c.study.cases) cases.push_back(to_string(lc));
  json levels = json::array();
  for (double s : c.study.snr_levels) levels.push_back(snr_json(s));
  json quantities = json::array();
  for (auto q : c.predict_quantities) quantities.push_back(to_string(q));
  return {
      {"geometry",
       {{"length_x", c.geometry.length_x},
        {"length_y", c.geometry.length_y},
        {"rigidity", c.geometry.rigidity},
        {"poisson", c.geometry.poisson}}},
      {"load",
       {{"kind", c.load.kind == LoadKind::sinusoidal ? "sinusoidal" : "uniform"}, {"amplitude", c.load.amplitude}}},
      {"training_grid", {{"points", c.training_grid.points}, {"inset", c.training_grid.inset}}},
      {"prediction_grid", {{"points", c.prediction_grid.points}, {"inset", c.prediction_grid.inset}}},
      {"snr", snr_json(c.snr)},
      {"learning_case", to_string(c.learning_case)},
      {"boundary_conditions", {{"mode", to_string(c.boundary_mode)}, {"points_per_edge", c.boundary_points_per_edge}}},
      {"replications", c.replications},
      {"seed", c.seed},
      {"mcmc", mcmc_json(c.mcmc)},
      {"mle",
       {{"max_restarts", c.mle.max_restarts},
        {"rigidity_floor", c.mle.rigidity_floor},
        {"gradient_tolerance", c.mle.gradient_tolerance},
        {"max_iterations", c.mle.max_iterations}}},
      {"bounds", {{"lower", c.bounds.lower}, {"upper", c.bounds.upper}}},
      {"study",
       {{"snr_levels", levels},
        {"cases", cases},
        {"outlier_fraction", c.study.outlier_fraction},
        {"run_mcmc", c.study.run_mcmc},
        {"mcmc", mcmc_json(c.study.mcmc)}}},
      {"ritz_modes", c.ritz_modes},
      {"predict_quantities", quantities},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
  };
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace plategp
