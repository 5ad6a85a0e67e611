// Copyright 2026 The kronprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KRONPREC_HARNESS_HPP
#define KRONPREC_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kronprec/curvature.hpp"
#include "kronprec/data.hpp"
#include "kronprec/models.hpp"
#include "kronprec/optim.hpp"

namespace kronprec::harness {

enum class EstimatorKind { shampoo, shampoo_sq, opt_kron, kfac };
enum class TargetKind { gn, adagrad };
enum class ProbeMethod { exact, hutchinson };

struct SynthSpec {
  Index dim = 8;
  Index classes = 2;
  Index per_class = 20;
  double separation = 2.0;
};

struct IdxSpec {
  std::string images;
  std::string labels;
  data::Normalization normalization = data::Normalization::scale_255;
  std::vector<Index> keep_classes;  // empty = keep everything
  Index image_side = 0;             // required when downsample > 1
  Index downsample = 1;
};

// Exactly one of synth/idx is set.
struct DatasetSpec {
  std::optional<SynthSpec> synth;
  std::optional<IdxSpec> idx;
};

struct ExperimentConfig {
  models::ModelConfig model;
  optim::TrainConfig train;
  DatasetSpec dataset;
  std::vector<EstimatorKind> estimators = {
      EstimatorKind::shampoo, EstimatorKind::shampoo_sq,
      EstimatorKind::opt_kron, EstimatorKind::kfac};
  int opt_kron_steps = 5;
  std::vector<TargetKind> targets = {TargetKind::gn, TargetKind::adagrad};
  std::vector<Index> batch_sweep = {1, 16, 256};
  std::vector<models::LabelModeKind> label_modes = {
      models::LabelModeKind::sampled, models::LabelModeKind::real};
  int trials = 200;
  Index probe_count = 100;
  ProbeMethod method = ProbeMethod::exact;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

// Strict JSON parsing: unknown keys anywhere are a ConfigError. A manifest
// (the object written next to every run's CSVs) is accepted too; its
// "config" sub-object is the configuration.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

data::Dataset build_dataset(const DatasetSpec& spec, std::uint64_t seed);

// One plotted point of the figures.
struct ProbeRecord {
  int step = 0;
  std::string target;
  std::string estimator;
  double cosine = 0.0;
  std::string method;
  std::optional<Index> batch_size;
  std::string label_mode;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // measured; not serialized (CSV stays replayable)
};

inline constexpr const char* kCsvHeader =
    "step,target,estimator,cosine,method,batch_size,label_mode,seed";

std::string format_csv(const std::vector<ProbeRecord>& records);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

struct RunResult {
  std::vector<ProbeRecord> records;
  std::filesystem::path csv_path;
  std::filesystem::path manifest_path;
};

// Trains per the config and probes estimator quality on the schedule.
RunResult run_figure1(const ExperimentConfig& cfg);
// Spectrum/overlap ratios of the exact targets over the schedule.
RunResult run_figure2(const ExperimentConfig& cfg);
// Batch-size / label-mode sweep of estimator quality at the final model.
RunResult run_figure4(const ExperimentConfig& cfg);

// Writes a synthetic dataset as IDX files (images quantized to bytes).
void write_synth_idx(const SynthSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path);

// Hooks exist so tests can verify the self-test catches injected bugs; the
// defaults are the production implementations.
struct SelftestHooks {
  std::function<Matrix(const Matrix&, Index, Index)> rearrange;
  std::function<kronalg::KronFactors(const models::GradientEnsemble&)>
      shampoo_sq;
  SelftestHooks();
};

// Runs every invariant suite, one pass/fail line per suite; returns the
// number of failed suites.
int selftest(std::ostream& out, const SelftestHooks& hooks = SelftestHooks());

struct PlotSpec {
  std::string x_column = "step";  // "step" or "batch_size"
  std::string title;
};

// Renders a probe CSV as an SVG 1.1 document: one polyline per
// (target, estimator) series, linear axes, text legend. Deterministic bytes
// for identical input.
std::string render_plot(const std::string& csv_text, const PlotSpec& spec);
void plot_csv(const std::filesystem::path& csv_path,
              const std::filesystem::path& svg_path, const PlotSpec& spec);

std::string estimator_name(EstimatorKind kind, int opt_kron_steps);
const char* target_name(TargetKind kind);
const char* label_mode_name(models::LabelModeKind mode);

}  // namespace kronprec::harness

#endif  // KRONPREC_HARNESS_HPP
