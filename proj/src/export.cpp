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


#include "plategp/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace plategp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(split(line));
  }
  return rows;
}

void write_field_rows(std::ostream& out, std::span<const FieldRow> rows) {
  out << "x,y,quantity,mean,variance,q005,q995\n";
  for (const auto& r : rows) {
    out << format_double(r.location.x) << ',' << format_double(r.location.y) << ',' << to_string(r.quantity) << ','
        << format_double(r.mean) << ',' << format_double(r.variance) << ',' << format_double(r.lower) << ','
        << format_double(r.upper) << '\n';
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  out << "x,y,quantity,value,noise\n";
  for (const auto& o : data.observations()) {
    out << format_double(o.location.x) << ',' << format_double(o.location.y) << ',' << to_string(o.quantity) << ','
        << format_double(o.value) << ',' << (o.noise == NoiseClass::noisy ? "noisy" : "noiseless_bc") << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, const PlateDomain& domain) {
  std::vector<Observation> obs;
  std::size_t line = 1;
  for (const auto& row : read_rows(path, "x,y,quantity,value,noise")) {
    ++line;
    if (row.size() != 5) throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": expected 5 columns");
    Observation o;
    o.location = {parse_double(row[0], path, line), parse_double(row[1], path, line)};
    try {
      o.quantity = parse_quantity(row[2]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    o.value = parse_double(row[3], path, line);
    if (row[4] == "noisy") {
      o.noise = NoiseClass::noisy;
    } else if (row[4] == "noiseless_bc") {
      o.noise = NoiseClass::noiseless_bc;
    } else {
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": bad noise class '" + row[4] + "'");
    }
    obs.push_back(o);
  }
  return Dataset(domain, std::move(obs));
}

void write_trace_csv(const std::filesystem::path& path, const McmcTrace& trace) {
  auto out = open_out(path);
  out << "iteration,accepted,log_posterior";
  for (const auto& n : trace.layout.names()) out << ',' << n;
  out << '\n';
  for (Eigen::Index i = 0; i < trace.draws.rows(); ++i) {
    out << i << ',' << static_cast<int>(trace.accepted[static_cast<std::size_t>(i)]) << ','
        << format_double(trace.log_posterior[i]);
    for (Eigen::Index j = 0; j < trace.draws.cols(); ++j) out << ',' << format_double(trace.draws(i, j));
    out << '\n';
  }
}

McmcTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  const auto names = split(header);
  const std::vector<std::string> fixed = {"iteration", "accepted", "log_posterior", "A", "l_x", "l_y", "D"};
  if (names.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), names.begin())) {
    throw std::runtime_error(path.string() + ": not a trace file");
  }
  std::vector<QuantityKind> noise;
  for (std::size_t k = fixed.size(); k < names.size(); ++k) {
    if (names[k].rfind("sigma2_", 0) != 0) throw std::runtime_error(path.string() + ": bad column " + names[k]);
    noise.push_back(parse_quantity(names[k].substr(7)));
  }
  McmcTrace trace;
  trace.layout = ParameterLayout(noise);
  std::vector<std::vector<double>> rows;
  std::vector<double> lp;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != names.size()) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": column count");
    trace.accepted.push_back(cells[1] == "1" ? 1 : 0);
    lp.push_back(parse_double(cells[2], path, line_no));
    std::vector<double> r;
    for (std::size_t k = 3; k < cells.size(); ++k) r.push_back(parse_double(cells[k], path, line_no));
    rows.push_back(std::move(r));
  }
  trace.draws.resize(static_cast<Eigen::Index>(rows.size()), trace.layout.size());
  trace.log_posterior.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) trace.draws(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    trace.log_posterior[static_cast<Eigen::Index>(i)] = lp[i];
  }
  trace.acceptance_rate = acceptance_rate(trace.accepted);
  return trace;
}

void write_fields_csv(const std::filesystem::path& path, std::span<const FieldRow> rows) {
  auto out = open_out(path);
  write_field_rows(out, rows);
}

void write_study_csv(const std::filesystem::path& path, const StudyResult& study) {
  auto out = open_out(path);
  out << "snr,case,estimator,count,excluded,failed,mean,q25,q75,min,max,iqr\n";
  for (const auto& r : study.rows) {
    out << format_double(r.snr) << ',' << to_string(r.learning_case) << ',' << r.estimator << ',' << r.stats.count
        << ',' << r.excluded << ',' << r.failed << ',' << format_double(r.stats.mean) << ','
        << format_double(r.stats.q25) << ',' << format_double(r.stats.q75) << ',' << format_double(r.stats.min)
        << ',' << format_double(r.stats.max) << ',' << format_double(r.stats.iqr()) << '\n';
  }
}

void write_replications_csv(const std::filesystem::path& path, const StudyResult& study) {
  auto out = open_out(path);
  out << "replication,snr,case,seed,mle_D,mle_converged,mle_excluded,mcmc_D,acceptance_rate,failure\n";
  for (const auto& r : study.replications) {
    std::string failure = r.failure;
    for (auto& ch : failure) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << r.index << ',' << format_double(r.snr) << ',' << to_string(r.learning_case) << ',' << r.seed << ','
        << format_double(r.mle_rigidity) << ',' << (r.mle_converged ? 1 : 0) << ',' << (r.mle_excluded ? 1 : 0)
        << ',' << format_double(r.mcmc_rigidity) << ',' << format_double(r.acceptance_rate) << ',' << failure
        << '\n';
  }
}

void write_diagnostics_csv(const std::filesystem::path& dir, const ChainDiagnostics& d) {
  {
    auto out = open_out(dir / "correlation.csv");
    out << "parameter";
    for (const auto& n : d.names) out << ',' << n;
    out << '\n';
    for (Eigen::Index i = 0; i < d.correlation.rows(); ++i) {
      out << d.names[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < d.correlation.cols(); ++j) out << ',' << format_double(d.correlation(i, j));
      out << '\n';
    }
  }
  auto out = open_out(dir / "histograms.csv");
  out << "parameter,bin,lower,upper,count\n";
  for (std::size_t p = 0; p < d.histograms.size(); ++p) {
    const auto& h = d.histograms[p];
    const double width = (h.upper - h.lower) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out << d.names[p] << ',' << b << ',' << format_double(h.lower + width * static_cast<double>(b)) << ','
          << format_double(h.lower + width * static_cast<double>(b + 1)) << ',' << h.counts[b] << '\n';
    }
  }
}

json params_json(const ExtendedHyperparams& p) {
  json noise = json::object();
  for (const auto& [kind, v] : p.noise_variance) noise[std::string(to_string(kind))] = v;
  return {{"A", p.kernel.amplitude},
          {"l_x", p.kernel.length_x},
          {"l_y", p.kernel.length_y},
          {"D", p.rigidity},
          {"noise_variance", noise}};
}

json run_summary_json(const ExperimentConfig& cfg, const LearnOutcome& o) {
  json j;
  j["config"] = to_json(cfg);
  j["config_hash"] = o.config_hash;
  j["seed"] = o.seed;
  j["observations"] = o.data.size();
  j["true_rigidity"] = o.true_rigidity;
  j["initial"] = params_json(o.initial);
  j["mle"] = {{"params", params_json(o.mle.params)},
              {"log_likelihood", o.mle.log_likelihood},
              {"rigidity_error", o.mle_rigidity_error()},
              {"converged", o.mle.converged},
              {"identifiable", o.mle.identifiable},
              {"rigidity_collapsed", o.mle.rigidity_collapsed},
              {"iterations", o.mle.iterations},
              {"evaluations", o.mle.evaluations},
              {"restarts", o.mle.restarts},
              {"gradient_norm", o.mle.gradient_norm},
              {"jitter", o.mle.jitter},
              {"message", o.mle.message}};
  if (o.trace) {
    json mc;
    mc["mean"] = params_json(*o.posterior_mean);
    mc["rigidity_error"] = o.mcmc_rigidity_error();
    mc["acceptance_rate"] = o.trace->acceptance_rate;
    mc["draws"] = o.trace->size();
    mc["max_jitter"] = o.trace->max_jitter;
    if (o.diagnostics) {
      json corr = json::array();
      for (Eigen::Index i = 0; i < o.diagnostics->correlation.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < o.diagnostics->correlation.cols(); ++k) row.push_back(o.diagnostics->correlation(i, k));
        corr.push_back(row);
      }
      mc["parameters"] = o.diagnostics->names;
      mc["correlation"] = corr;
      mc["degenerate"] = o.diagnostics->degenerate;
    }
    j["mcmc"] = mc;
  } else {
    j["mcmc"] = nullptr;
  }
  j["final_jitter"] = number_or_null(o.final_jitter());
  return j;
}

json timing_json(double runtime_seconds) { return {{"runtime_seconds", runtime_seconds}}; }

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_field_set(const std::filesystem::path& dir, const FieldSet& fields, const PlateGeometry& geometry) {
  const auto pred_n = normalized(fields.predicted, fields.normalization);
  const auto oracle_n = normalized(fields.oracle, fields.normalization);
  write_fields_csv(dir / "fields.csv", fields.predicted);
  write_fields_csv(dir / "oracle.csv", fields.oracle);
  write_fields_csv(dir / "fields_normalized.csv", pred_n);
  write_fields_csv(dir / "oracle_normalized.csv", oracle_n);
  const double mid = 0.5 * geometry.length_y;
  write_fields_csv(dir / "centerline.csv", line_extract(pred_n, mid));
  write_fields_csv(dir / "centerline_oracle.csv", line_extract(oracle_n, mid));
  write_fields_csv(dir / "edge.csv", line_extract(pred_n, 0.0));
  write_fields_csv(dir / "edge_oracle.csv", line_extract(oracle_n, 0.0));
}

void write_learn_outputs(const fs::path& dir, const ExperimentConfig& cfg, const LearnOutcome& outcome) {
  fs::create_directories(dir);
  write_json(dir / "config.json", to_json(cfg));
  write_dataset_csv(dir / "dataset.csv", outcome.data);
  write_json(dir / "run_summary.json", run_summary_json(cfg, outcome));
  write_json(dir / "timing.json", timing_json(outcome.runtime_seconds));
  if (outcome.trace) write_trace_csv(dir / "trace.csv", *outcome.trace);
  if (outcome.diagnostics) write_diagnostics_csv(dir, *outcome.diagnostics);
}

ExperimentRun run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const PlateOracle oracle(cfg);
  ExperimentRun run{run_learning_case(cfg, oracle, true), {}};
  const auto& params = run.outcome.posterior_mean ? *run.outcome.posterior_mean : run.outcome.mle.params;
  run.fields = predict_fields(cfg, oracle, run.outcome.data, run.outcome.trace ? &*run.outcome.trace : nullptr, params);
  write_learn_outputs(dir, cfg, run.outcome);
  write_field_set(dir, run.fields, oracle.geometry());
  return run;
}

}  // namespace plategp
