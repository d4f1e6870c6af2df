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


#include "plategp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <thread>
#include <tuple>

namespace plategp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

ExtendedHyperparams clamp_to(const ExtendedHyperparams& p, const HyperpriorBounds& b) {
  const auto layout = ParameterLayout::of(p);
  const Eigen::VectorXd v = layout.to_natural(p).cwiseMax(b.lower).cwiseMin(b.upper);
  return layout.from_natural(v);
}

double axis_coordinate(int i, int n, double inset) {
  if (i == 0) return inset;
  if (i == n - 1) return 1.0 - inset;
  return static_cast<double>(i) / (n - 1);
}

}  // namespace

SupportKind support_for(LoadKind load) {
  return load == LoadKind::sinusoidal ? SupportKind::simply_supported : SupportKind::clamped;
}

PlateOracle::PlateOracle(const ExperimentConfig& cfg)
    : geometry_(cfg.geometry), load_(cfg.load), support_(support_for(cfg.load.kind)) {
  geometry_.validate();
  if (support_ == SupportKind::clamped) {
    ritz_.emplace(ritz_solve(geometry_, load_.amplitude, cfg.ritz_modes, cfg.ritz_modes));
  }
}

double PlateOracle::operator()(QuantityKind kind, Point x) const {
  if (!ritz_) return navier_field(geometry_, load_, kind, x);
  if (kind == QuantityKind::q) return load_.amplitude;
  return ritz_field(*ritz_, kind, x);
}

std::vector<QuantityKind> case_quantities(LearningCase c) {
  using Q = QuantityKind;
  switch (c) {
    case LearningCase::L1: return {Q::w, Q::q};
    case LearningCase::L2: return {Q::kappa_x, Q::kappa_y, Q::kappa_xy, Q::q};
    case LearningCase::L3: return {Q::w, Q::kappa_x, Q::kappa_y, Q::kappa_xy, Q::q};
  }
  return {};
}

std::vector<Point> grid_points(const GridSpec& grid, const PlateGeometry& geometry) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(grid.points * grid.points));
  for (int j = 0; j < grid.points; ++j)
    for (int i = 0; i < grid.points; ++i) {
      out.push_back({axis_coordinate(i, grid.points, grid.inset) * geometry.length_x,
                     axis_coordinate(j, grid.points, grid.inset) * geometry.length_y});
    }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  std::uint64_t z = master + counter * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double noise_sd(std::span<const double> truth, double snr) {
  if (std::isinf(snr) || truth.empty()) return 0.0;
  const double n = static_cast<double>(truth.size());
  double mean = 0.0, ms = 0.0;
  for (double v : truth) {
    mean += v;
    ms += v * v;
  }
  mean /= n;
  const double rms = std::sqrt(ms / n);
  double ss = 0.0;
  for (double v : truth) ss += (v - mean) * (v - mean);
  const double sd = truth.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return (sd > 1e-12 * rms ? sd : 0.0) / snr;
}

Dataset generate_training_data(const ExperimentConfig& cfg, const PlateOracle& oracle, LearningCase learning_case,
                               double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw std::invalid_argument("SNR must be positive");
  const auto points = grid_points(cfg.training_grid, oracle.geometry());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Observation> obs;
  for (auto kind : case_quantities(learning_case)) {
    std::vector<double> truth;
    truth.reserve(points.size());
    for (const auto& p : points) truth.push_back(oracle(kind, p));
    const double sd = noise_sd(truth, snr);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double e = normal(rng);
      obs.push_back({points[i], kind, truth[i] + sd * e, NoiseClass::noisy});
    }
  }
  return Dataset(oracle.geometry().domain(), std::move(obs));
}

Dataset inject_boundary_conditions(const Dataset& data, const PlateGeometry& geometry, BoundaryMode mode,
                                   SupportKind support, int points_per_edge) {
  if (mode == BoundaryMode::none) return data;
  if (points_per_edge < 2) throw std::invalid_argument("need at least 2 boundary points per edge");
  const double a = geometry.length_x, b = geometry.length_y;
  const auto coord = [&](int k, double span) {
    return k == points_per_edge - 1 ? span : span * k / (points_per_edge - 1);
  };
  std::set<std::tuple<QuantityKind, double, double>> seen;
  std::vector<Observation> extra;
  const auto add = [&](QuantityKind kind, double x, double y) {
    if (seen.emplace(kind, x, y).second) extra.push_back({{x, y}, kind, 0.0, NoiseClass::noiseless_bc});
  };
  for (int k = 0; k < points_per_edge; ++k) {
    add(QuantityKind::w, coord(k, a), 0.0);
    add(QuantityKind::w, coord(k, a), b);
    add(QuantityKind::w, 0.0, coord(k, b));
    add(QuantityKind::w, a, coord(k, b));
  }
  if (support == SupportKind::clamped) {
    for (int k = 0; k < points_per_edge; ++k) {
      add(QuantityKind::r_x, 0.0, coord(k, b));
      add(QuantityKind::r_x, a, coord(k, b));
      add(QuantityKind::r_y, coord(k, a), 0.0);
      add(QuantityKind::r_y, coord(k, a), b);
    }
  }
  return data.with_appended(extra);
}

double LearnOutcome::mle_rigidity_error() const { return (mle.params.rigidity - true_rigidity) / true_rigidity; }

double LearnOutcome::mcmc_rigidity_error() const {
  return posterior_mean ? (posterior_mean->rigidity - true_rigidity) / true_rigidity : kNaN;
}

double LearnOutcome::final_jitter() const { return std::max(mle.jitter, trace ? trace->max_jitter : 0.0); }

Dataset build_dataset(const ExperimentConfig& cfg, const PlateOracle& oracle) {
  const auto data = generate_training_data(cfg, oracle, cfg.learning_case, cfg.snr, derive_seed(cfg.seed, 0));
  return inject_boundary_conditions(data, oracle.geometry(), cfg.boundary_mode, oracle.support(),
                                    cfg.boundary_points_per_edge);
}

LearnOutcome learn_on(const ExperimentConfig& cfg, Dataset data, bool run_mcmc, const McmcSettings& mcmc,
                      std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  LearnOutcome out;
  out.config_hash = config_hash(cfg);
  out.seed = seed;
  out.true_rigidity = cfg.geometry.rigidity;
  const MarginalLikelihood lml(std::move(data), cfg.geometry.poisson);
  out.data = lml.data();
  out.initial = clamp_to(initial_hyperparams(lml.data(), cfg.geometry.poisson), cfg.bounds);
  out.mle = mle_optimize(lml, out.initial, cfg.mle.options(cfg.bounds, derive_seed(seed, 2)));

  if (run_mcmc) {
    McmcConfig mc;
    mc.initial = out.initial;
    mc.bounds = cfg.bounds;
    mc.sampler = mcmc.sampler(derive_seed(seed, 1));
    mc.sampler.proposal_variance =
        Eigen::VectorXd::Constant(ParameterLayout::of(out.initial).size(), mcmc.proposal_variance);
    out.trace = mh_sample(lml, mc);
    out.posterior_mean = mcmc_mean(*out.trace);
    out.diagnostics = chain_diagnostics(*out.trace);
  }
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

LearnOutcome learn_on(const ExperimentConfig& cfg, Dataset data, bool run_mcmc, const McmcSettings& mcmc) {
  return learn_on(cfg, std::move(data), run_mcmc, mcmc, derive_seed(cfg.seed, 0));
}

LearnOutcome run_learning_case(const ExperimentConfig& cfg, const PlateOracle& oracle, bool run_mcmc) {
  return learn_on(cfg, build_dataset(cfg, oracle), run_mcmc, cfg.mcmc);
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("no values to summarize");
  std::sort(values.begin(), values.end());
  SummaryStats s;
  s.count = values.size();
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  s.q25 = sorted_quantile(values, 0.25);
  s.q75 = sorted_quantile(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

const StudyRow* StudyResult::find(double snr, LearningCase c, std::string_view estimator) const {
  for (const auto& r : rows) {
    if (r.snr == snr && r.learning_case == c && r.estimator == estimator) return &r;
  }
  return nullptr;
}

StudyResult monte_carlo_study(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const PlateOracle oracle(cfg);
  const auto& levels = cfg.study.snr_levels;
  const auto& cases = cfg.study.cases;
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);
  const std::size_t per_rep = levels.size() * cases.size();
  const std::size_t total = reps * per_rep;

  StudyResult out;
  out.replications.resize(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  const auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const std::size_t r = t / per_rep;
      const double snr = levels[(t % per_rep) / cases.size()];
      const LearningCase lc = cases[t % cases.size()];
      auto& rec = out.replications[t];
      rec.index = r;
      rec.snr = snr;
      rec.learning_case = lc;
      rec.seed = derive_seed(cfg.seed, r);
      rec.mcmc_rigidity = kNaN;
      try {
        auto data = generate_training_data(cfg, oracle, lc, snr, rec.seed);
        data = inject_boundary_conditions(data, oracle.geometry(), cfg.boundary_mode, oracle.support(),
                                          cfg.boundary_points_per_edge);
        const auto res = learn_on(cfg, std::move(data), cfg.study.run_mcmc, cfg.study.mcmc, rec.seed);
        rec.mle_rigidity = res.mle.params.rigidity;
        rec.mle_converged = res.mle.converged;
        rec.mle_excluded = res.mle.params.rigidity < cfg.study.outlier_fraction * cfg.geometry.rigidity;
        if (res.posterior_mean) {
          rec.mcmc_rigidity = res.posterior_mean->rigidity;
          rec.acceptance_rate = res.trace->acceptance_rate;
        }
      } catch (const std::exception& e) {
        rec.mle_rigidity = kNaN;
        rec.failure = e.what();
      }
      const auto d = ++done;
      if (progress) {
        const std::lock_guard lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  const unsigned n_workers = worker_count(cfg.threads, total);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (double snr : levels) {
    for (auto lc : cases) {
      StudyRow mle_row{snr, lc, "mle", 0, 0, {}};
      StudyRow mcmc_row{snr, lc, "mcmc", 0, 0, {}};
      std::vector<double> mle_values, mcmc_values;
      for (const auto& rec : out.replications) {
        if (rec.snr != snr || rec.learning_case != lc) continue;
        if (!std::isfinite(rec.mle_rigidity)) {
          ++mle_row.failed;
        } else if (rec.mle_excluded) {
          ++mle_row.excluded;
        } else {
          mle_values.push_back(rec.mle_rigidity);
        }
        if (std::isfinite(rec.mcmc_rigidity)) {
          mcmc_values.push_back(rec.mcmc_rigidity);
        } else if (cfg.study.run_mcmc) {
          ++mcmc_row.failed;
        }
      }
      if (!mle_values.empty()) mle_row.stats = summarize_values(mle_values);
      out.rows.push_back(mle_row);
      if (cfg.study.run_mcmc) {
        if (!mcmc_values.empty()) mcmc_row.stats = summarize_values(mcmc_values);
        out.rows.push_back(mcmc_row);
      }
    }
  }
  return out;
}

FieldSet predict_fields(const ExperimentConfig& cfg, const PlateOracle& oracle, const Dataset& data,
                        const McmcTrace* trace, const ExtendedHyperparams& params) {
  const MarginalLikelihood lml(data, cfg.geometry.poisson);
  const auto points = grid_points(cfg.prediction_grid, oracle.geometry());
  const auto targets = grid_targets(points, cfg.predict_quantities);

  MixtureOptions opt;
  opt.stride = static_cast<std::size_t>(cfg.mcmc.stride);
  opt.threads = cfg.threads;
  const auto summary = trace ? mc_predictive(lml, *trace, targets, opt)
                             : summarize(predictive_posterior(lml, params, targets), opt);

  FieldSet out;
  out.predicted.reserve(targets.size());
  out.oracle.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const auto& t = targets[i];
    out.predicted.push_back({t.location, t.quantity, summary.mean[k], summary.variance[k], summary.lower[k],
                             summary.upper[k]});
    const double truth = oracle(t.quantity, t.location);
    out.oracle.push_back({t.location, t.quantity, truth, 0.0, truth, truth});
    auto& norm = out.normalization[t.quantity];
    norm = std::max(norm, std::abs(truth));
  }
  for (auto& [kind, v] : out.normalization) {
    if (!(v > 0.0)) v = 1.0;
  }
  return out;
}

std::vector<FieldRow> normalized(std::span<const FieldRow> rows, const std::map<QuantityKind, double>& scale) {
  std::vector<FieldRow> out(rows.begin(), rows.end());
  for (auto& r : out) {
    const double s = scale.at(r.quantity);
    r.mean /= s;
    r.lower /= s;
    r.upper /= s;
    r.variance /= s * s;
  }
  return out;
}

std::vector<FieldRow> line_extract(std::span<const FieldRow> rows, double y) {
  std::vector<FieldRow> out;
  const double tol = 1e-12 * std::max(1.0, std::abs(y));
  for (const auto& r : rows) {
    if (std::abs(r.location.y - y) <= tol) out.push_back(r);
  }
  return out;
}

}  // namespace plategp
