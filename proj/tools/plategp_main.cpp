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


// plategp: command-line driver for data generation, learning, prediction and
// Monte Carlo studies on the plate problems.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "plategp/experiment.hpp"
#include "plategp/export.hpp"

namespace fs = std::filesystem;
using namespace plategp;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kNotConverged = 3, kNumerical = 4 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment configuration (defaults when omitted)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Override the master seed");
  cmd->add_option("--snr", f.snr, "Override the signal-to-noise ratio (inf for noiseless)");
  cmd->add_option("--out", f.out, "Output directory (overrides output_dir)");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.snr) cfg.snr = *f.snr;
  if (!f.out.empty()) cfg.output_dir = f.out;
  cfg.validate();
  return cfg;
}

void report(const LearnOutcome& o) {
  std::printf("observations %zu\n", o.data.size());
  std::printf("mle D %.6g (error %+.3f%%)%s\n", o.mle.params.rigidity, 100.0 * o.mle_rigidity_error(),
              o.mle.converged ? "" : " [not converged]");
  if (o.posterior_mean) {
    std::printf("mcmc mean D %.6g (error %+.3f%%), acceptance %.3f\n", o.posterior_mean->rigidity,
                100.0 * o.mcmc_rigidity_error(), o.trace->acceptance_rate);
  }
  std::printf("runtime %.1f s\n", o.runtime_seconds);
}

int learn_status(const LearnOutcome& o) {
  if (!o.mle.converged) {
    std::fprintf(stderr, "warning: MLE did not converge: %s\n", o.mle.message.c_str());
    return kNotConverged;
  }
  return kOk;
}

int cmd_generate(const CommonFlags& f) {
  const auto cfg = resolve(f);
  const PlateOracle oracle(cfg);
  const auto data = build_dataset(cfg, oracle);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(cfg));
  write_dataset_csv(dir / "dataset.csv", data);
  std::printf("wrote %zu observations to %s\n", data.size(), (dir / "dataset.csv").c_str());
  return kOk;
}

int cmd_learn(const CommonFlags& f, const std::string& data_path, bool no_mcmc) {
  const auto cfg = resolve(f);
  const PlateOracle oracle(cfg);
  LearnOutcome o;
  if (data_path.empty()) {
    o = run_learning_case(cfg, oracle, !no_mcmc);
  } else {
    o = learn_on(cfg, read_dataset_csv(data_path, oracle.geometry().domain()), !no_mcmc, cfg.mcmc);
  }
  write_learn_outputs(cfg.output_dir, cfg, o);
  report(o);
  return learn_status(o);
}

int cmd_predict(const CommonFlags& f, const std::string& data_path, const std::string& trace_path) {
  const auto cfg = resolve(f);
  const PlateOracle oracle(cfg);
  const Dataset data =
      data_path.empty() ? build_dataset(cfg, oracle) : read_dataset_csv(data_path, oracle.geometry().domain());
  FieldSet fields;
  int status = kOk;
  if (!trace_path.empty()) {
    const auto trace = read_trace_csv(trace_path);
    if (!(trace.layout == ParameterLayout::of(data))) {
      throw ConfigError("trace parameters do not match the dataset's noisy quantities");
    }
    fields = predict_fields(cfg, oracle, data, &trace, mcmc_mean(trace));
  } else {
    const auto o = learn_on(cfg, data, false, cfg.mcmc);
    status = learn_status(o);
    fields = predict_fields(cfg, oracle, data, nullptr, o.mle.params);
  }
  write_field_set(cfg.output_dir, fields, oracle.geometry());
  std::printf("wrote %zu predicted rows to %s\n", fields.predicted.size(), cfg.output_dir.c_str());
  return status;
}

int cmd_experiment(const CommonFlags& f) {
  const auto cfg = resolve(f);
  const auto run = run_experiment(cfg, cfg.output_dir);
  report(run.outcome);
  return learn_status(run.outcome);
}

int cmd_study(const CommonFlags& f, std::optional<int> replications, bool quiet) {
  auto cfg = resolve(f);
  if (replications) cfg.replications = *replications;
  cfg.validate();
  const auto study = monte_carlo_study(cfg, [quiet](std::size_t done, std::size_t total) {
    if (!quiet) std::fprintf(stderr, "\r%zu/%zu", done, total);
  });
  if (!quiet) std::fprintf(stderr, "\n");
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(cfg));
  write_study_csv(dir / "study.csv", study);
  write_replications_csv(dir / "replications.csv", study);
  for (const auto& row : study.rows) {
    std::printf("snr %-5g %s %-4s n=%zu excluded=%zu failed=%zu mean=%.4f iqr=%.4f\n", row.snr,
                std::string(to_string(row.learning_case)).c_str(), row.estimator.c_str(), row.stats.count,
                row.excluded, row.failed, row.stats.mean, row.stats.iqr());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process learning of plate rigidity from noisy field data"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string data_path, trace_path;
  bool no_mcmc = false, quiet = false;
  std::optional<int> replications;

  auto* gen = app.add_subcommand("generate", "Write a noisy training dataset");
  add_common(gen, flags);

  auto* learn = app.add_subcommand("learn", "MLE and MCMC on a dataset");
  add_common(learn, flags);
  learn->add_option("--data", data_path, "Dataset CSV (generated from the config when omitted)")
      ->check(CLI::ExistingFile);
  learn->add_flag("--no-mcmc", no_mcmc, "Skip the sampler");

  auto* predict = app.add_subcommand("predict", "Predictive fields on the prediction grid");
  add_common(predict, flags);
  predict->add_option("--data", data_path, "Dataset CSV")->check(CLI::ExistingFile);
  predict->add_option("--trace", trace_path, "Trace CSV; without it the MLE is used")->check(CLI::ExistingFile);

  auto* exp = app.add_subcommand("experiment", "Generate, learn and predict in one run");
  add_common(exp, flags);

  auto* study = app.add_subcommand("mc-study", "Monte Carlo study over SNR levels and learning cases");
  add_common(study, flags);
  study->add_option("--replications", replications, "Override the replication count")->check(CLI::PositiveNumber);
  study->add_flag("--quiet", quiet, "No progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(flags);
    if (learn->parsed()) return cmd_learn(flags, data_path, no_mcmc);
    if (predict->parsed()) return cmd_predict(flags, data_path, trace_path);
    if (exp->parsed()) return cmd_experiment(flags);
    if (study->parsed()) return cmd_study(flags, replications, quiet);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IllConditionedError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const SamplerStalledError& e) {
    std::fprintf(stderr, "sampler stalled: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
  return kOther;
}
