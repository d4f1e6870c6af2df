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


#ifndef PLATEGP_EXPORT_HPP
#define PLATEGP_EXPORT_HPP

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>

#include "plategp/experiment.hpp"

namespace plategp {

/// %.17g; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// Columns: x,y,quantity,value,noise (noise is "noisy" or "noiseless_bc").
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
/// Throws std::runtime_error on malformed files.
Dataset read_dataset_csv(const std::filesystem::path& path, const PlateDomain& domain);

/// Columns: iteration,accepted,log_posterior, then the layout names.
void write_trace_csv(const std::filesystem::path& path, const McmcTrace& trace);
McmcTrace read_trace_csv(const std::filesystem::path& path);

/// Columns: x,y,quantity,mean,variance,q005,q995.
void write_fields_csv(const std::filesystem::path& path, std::span<const FieldRow> rows);

/// Columns: snr,case,estimator,count,excluded,failed,mean,q25,q75,min,max,iqr.
void write_study_csv(const std::filesystem::path& path, const StudyResult& study);
/// One row per replication task.
void write_replications_csv(const std::filesystem::path& path, const StudyResult& study);

/// Correlation matrix and histograms of the chain.
void write_diagnostics_csv(const std::filesystem::path& dir, const ChainDiagnostics& diagnostics);

nlohmann::json params_json(const ExtendedHyperparams& params);

/// Deterministic summary of one learning run: exact config, hash, seed,
/// estimates and errors. Wall-clock runtime is kept out so repeated runs
/// export identical bytes; see timing_json.
nlohmann::json run_summary_json(const ExperimentConfig& cfg, const LearnOutcome& outcome);
nlohmann::json timing_json(double runtime_seconds);

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Writes the field set: fields.csv, oracle.csv, their normalized versions and
/// centerline (y = b/2) and edge (y = 0) extracts of both.
void write_field_set(const std::filesystem::path& dir, const FieldSet& fields, const PlateGeometry& geometry);

/// Writes config.json, dataset.csv, run_summary.json and timing.json, plus
/// trace.csv, correlation.csv and histograms.csv when the outcome has a trace.
void write_learn_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const LearnOutcome& outcome);

struct ExperimentRun {
  LearnOutcome outcome;
  FieldSet fields;
};

/// Data generation, MLE, MCMC and field prediction for one configured run,
/// with every export written under dir (created if missing).
ExperimentRun run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace plategp

#endif  // PLATEGP_EXPORT_HPP
