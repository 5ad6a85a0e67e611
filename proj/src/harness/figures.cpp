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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <tuple>

#include "json.hpp"
#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"
#include "kronprec/kronalg.hpp"
#include "kronprec/metrics.hpp"
#include "kronprec/rng.hpp"

namespace kronprec::harness {
namespace {

namespace ka = kronprec::kronalg;
namespace kc = kronprec::curvature;
namespace km = kronprec::models;
namespace kme = kronprec::metrics;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<int> resolved_schedule(const optim::TrainConfig& train) {
  std::vector<int> schedule = train.probe_schedule.empty()
                                  ? optim::default_probe_schedule(train.steps)
                                  : train.probe_schedule;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  return schedule;
}

// Mean gradient of every weight matrix over one training batch (real
// labels; batch_size 0 means the full dataset).
std::vector<Matrix> batch_gradients(const km::Model& model,
                                    const data::Dataset& ds, Index batch_size,
                                    std::uint64_t seed) {
  if (batch_size <= 0) return km::mean_gradients_real(model, ds);
  Rng rng(seed);
  std::vector<Matrix> sums;
  for (const Matrix& w : model.weights) sums.emplace_back(w.rows(), w.cols());
  const double inv = 1.0 / static_cast<double>(batch_size);
  for (Index b = 0; b < batch_size; ++b) {
    Index idx = static_cast<Index>(
        rng.uniform_below(static_cast<std::uint64_t>(ds.size())));
    std::vector<Matrix> grads = km::all_gradients(
        model, ds.example(idx), ds.y[static_cast<std::size_t>(idx)]);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      Matrix scaled = grads[l];
      scaled *= inv;
      sums[l] += scaled;
    }
  }
  return sums;
}

struct TrainState {
  km::Model model;
  data::Dataset ds;
  std::vector<Matrix> velocity;
  std::vector<kc::ShampooState> shampoo_states;
  kc::AdagradAccumulator adagrad;
  kme::ProbeBank adagrad_bank;
  Index m = 0, n = 0;
};

TrainState init_state(const ExperimentConfig& cfg) {
  TrainState st;
  st.ds = build_dataset(cfg.dataset, derive_seed(cfg.seed, "data"));
  km::ModelConfig mc = cfg.model;
  mc.init_seed = cfg.seed;
  if (mc.num_classes != st.ds.num_classes)
    throw ConfigError("config: model num_classes does not match the dataset");
  st.model = km::make_model(mc);
  std::tie(st.m, st.n) = km::probe_shape(mc);
  st.adagrad = kc::make_adagrad(st.m, st.n, true);
  st.adagrad_bank = kme::make_probe_bank(st.m * st.n, cfg.probe_count,
                                         derive_seed(cfg.seed, "probe"));
  return st;
}

void train_one_step(TrainState& st, const ExperimentConfig& cfg, int step) {
  std::vector<Matrix> grads =
      batch_gradients(st.model, st.ds, cfg.train.batch_size,
                      derive_seed(cfg.seed, "batch", static_cast<std::uint64_t>(step)));
  const Matrix& probe_grad =
      grads[static_cast<std::size_t>(cfg.model.probe_layer)];
  kc::adagrad_update(st.adagrad, probe_grad);
  kme::adagrad_hv(st.adagrad_bank, ka::vec(probe_grad));
  if (cfg.train.optimizer == optim::OptimizerKind::shampoo)
    optim::shampoo_step(st.model, grads, st.shampoo_states, cfg.train);
  else
    optim::sgd_step(st.model, grads, st.velocity, cfg.train);
}

struct TargetData {
  TargetKind kind;
  kc::CurvatureMatrix h;
  const kme::ProbeBank* stream_bank = nullptr;  // adagrad streaming probes
};

std::vector<ka::KronFactors> build_estimators(
    const ExperimentConfig& cfg, const TrainState& st, const TargetData& target,
    std::vector<EstimatorKind>& kinds_out) {
  std::vector<ka::KronFactors> out;
  kinds_out.clear();
  km::GradientEnsemble gn_ensemble;
  bool have_ensemble = false;
  for (EstimatorKind kind : cfg.estimators) {
    if (target.kind == TargetKind::adagrad) {
      if (kind == EstimatorKind::kfac) continue;  // no (a, delta) stream
      switch (kind) {
        case EstimatorKind::shampoo_sq:
          out.push_back({st.adagrad.l_run, st.adagrad.r_run,
                         ka::FactorSource::shampoo_sq, 1});
          break;
        case EstimatorKind::shampoo:
          out.push_back({ka::sym_power(st.adagrad.l_run, 0.5, 0.0),
                         ka::sym_power(st.adagrad.r_run, 0.5, 0.0),
                         ka::FactorSource::shampoo, 0});
          break;
        case EstimatorKind::opt_kron:
          out.push_back(kc::opt_kron_factors(target.h, cfg.opt_kron_steps));
          break;
        case EstimatorKind::kfac:
          break;
      }
      kinds_out.push_back(kind);
    } else {
      if (!have_ensemble && kind != EstimatorKind::kfac &&
          kind != EstimatorKind::opt_kron) {
        gn_ensemble = km::gn_ensemble_exact(st.model, st.ds);
        have_ensemble = true;
      }
      switch (kind) {
        case EstimatorKind::shampoo_sq:
          out.push_back(kc::shampoo_sq_factors(gn_ensemble));
          break;
        case EstimatorKind::shampoo:
          out.push_back(kc::shampoo_factors(gn_ensemble));
          break;
        case EstimatorKind::opt_kron:
          out.push_back(kc::opt_kron_factors(target.h, cfg.opt_kron_steps));
          break;
        case EstimatorKind::kfac:
          out.push_back(kc::kfac_factors(st.model, st.ds,
                                         {km::LabelModeKind::enumerated, 0}));
          break;
      }
      kinds_out.push_back(kind);
    }
  }
  return out;
}

double estimator_cosine(const ExperimentConfig& cfg, const TargetData& target,
                        const ka::KronFactors& est, int step) {
  if (cfg.method == ProbeMethod::exact)
    return kme::cosine_similarity_kron(est, target.h.h);
  if (target.stream_bank)
    return kme::probe_cosine(*target.stream_bank, est);
  const Matrix& h = target.h.h;
  kme::MatVec hv = [&h](std::span<const double> v) { return matvec(h, v); };
  return kme::probe_cosine(hv, h.rows(), cfg.probe_count,
                           derive_seed(cfg.seed, "probe",
                                       static_cast<std::uint64_t>(step)),
                           est);
}

void sort_records(std::vector<ProbeRecord>& records, bool by_batch) {
  std::stable_sort(records.begin(), records.end(),
                   [by_batch](const ProbeRecord& a, const ProbeRecord& b) {
                     Index ab = a.batch_size.value_or(0);
                     Index bb = b.batch_size.value_or(0);
                     if (by_batch)
                       return std::tie(ab, a.label_mode, a.estimator, a.step) <
                              std::tie(bb, b.label_mode, b.estimator, b.step);
                     return std::tie(a.step, a.target, a.estimator) <
                            std::tie(b.step, b.target, b.estimator);
                   });
}

RunResult finalize_run(const ExperimentConfig& cfg, const char* command,
                       const char* csv_name, std::vector<ProbeRecord> records,
                       bool by_batch) {
  sort_records(records, by_batch);
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  RunResult result;
  result.records = std::move(records);
  result.csv_path = dir / csv_name;
  write_file_atomic(result.csv_path, format_csv(result.records));

  nlohmann::json manifest{{"command", command},
                          {"config", nlohmann::json::parse(config_to_json(cfg))},
                          {"outputs", {csv_name}}};
  result.manifest_path = dir / "manifest.json";
  write_file_atomic(result.manifest_path, manifest.dump(2) + "\n");
  return result;
}

const char* method_name(ProbeMethod m) {
  return m == ProbeMethod::exact ? "exact" : "hutchinson";
}

}  // namespace

RunResult run_figure1(const ExperimentConfig& cfg) {
  TrainState st = init_state(cfg);
  std::vector<int> schedule = resolved_schedule(cfg.train);
  std::vector<ProbeRecord> records;

  for (int step = 0; step <= cfg.train.steps; ++step) {
    if (std::binary_search(schedule.begin(), schedule.end(), step)) {
      for (TargetKind tk : cfg.targets) {
        if (tk == TargetKind::adagrad && st.adagrad.step_count == 0) continue;
        TargetData target{tk, {}, nullptr};
        if (tk == TargetKind::gn) {
          target.h = kc::gn_curvature_exact(st.model, st.ds);
        } else {
          target.h = kc::CurvatureMatrix{st.m, st.n, *st.adagrad.h_exact,
                                         kc::CurvatureSource::adagrad, 0,
                                         km::LabelModeKind::real};
          target.stream_bank =
              cfg.method == ProbeMethod::hutchinson ? &st.adagrad_bank : nullptr;
        }
        if (frobenius_norm(target.h.h) == 0.0) continue;
        std::vector<EstimatorKind> kinds;
        std::vector<ka::KronFactors> ests =
            build_estimators(cfg, st, target, kinds);
        for (std::size_t e = 0; e < ests.size(); ++e) {
          auto start = std::chrono::steady_clock::now();
          double cosine = estimator_cosine(cfg, target, ests[e], step);
          records.push_back({step, target_name(tk),
                             estimator_name(kinds[e], cfg.opt_kron_steps),
                             cosine, method_name(cfg.method), std::nullopt, "",
                             cfg.seed, seconds_since(start)});
        }
      }
    }
    if (step < cfg.train.steps) train_one_step(st, cfg, step);
  }
  return finalize_run(cfg, "figure1", "figure1.csv", std::move(records), false);
}

RunResult run_figure2(const ExperimentConfig& cfg) {
  TrainState st = init_state(cfg);
  std::vector<int> schedule = resolved_schedule(cfg.train);
  std::vector<ProbeRecord> records;

  for (int step = 0; step <= cfg.train.steps; ++step) {
    if (std::binary_search(schedule.begin(), schedule.end(), step)) {
      for (TargetKind tk : cfg.targets) {
        if (tk == TargetKind::adagrad && st.adagrad.step_count == 0) continue;
        kc::CurvatureMatrix h =
            tk == TargetKind::gn
                ? kc::gn_curvature_exact(st.model, st.ds)
                : kc::CurvatureMatrix{st.m, st.n, *st.adagrad.h_exact,
                                      kc::CurvatureSource::adagrad, 0,
                                      km::LabelModeKind::real};
        if (frobenius_norm(h.h) == 0.0) continue;
        auto start = std::chrono::steady_clock::now();
        kme::SpectrumReport rep = kme::spectrum_report(h);
        double elapsed = seconds_since(start);
        records.push_back({step, target_name(tk), "ratio_opt", rep.ratio_opt,
                           "exact", std::nullopt, "", cfg.seed, elapsed});
        records.push_back({step, target_name(tk), "ratio_l", rep.ratio_l,
                           "exact", std::nullopt, "", cfg.seed, 0.0});
        records.push_back({step, target_name(tk), "ratio_r", rep.ratio_r,
                           "exact", std::nullopt, "", cfg.seed, 0.0});
      }
    }
    if (step < cfg.train.steps) train_one_step(st, cfg, step);
  }
  return finalize_run(cfg, "figure2", "figure2.csv", std::move(records), false);
}

RunResult run_figure4(const ExperimentConfig& cfg) {
  TrainState st = init_state(cfg);
  for (int step = 0; step < cfg.train.steps; ++step)
    train_one_step(st, cfg, step);

  kc::CurvatureMatrix exact = kc::gn_curvature_exact(st.model, st.ds);
  if (frobenius_norm(exact.h) == 0.0)
    throw DegenerateInputError("figure4: exact curvature vanished");
  TargetData target{TargetKind::gn, exact, nullptr};

  std::vector<ProbeRecord> records;
  std::uint64_t combo = 0;
  for (Index batch : cfg.batch_sweep) {
    for (km::LabelModeKind mode : cfg.label_modes) {
      if (mode == km::LabelModeKind::enumerated)
        throw ConfigError("figure4: label_modes must be sampled or real");
      km::GradientEnsemble ensemble;
      if (mode == km::LabelModeKind::real && batch == 1) {
        // Single-example batches with real labels have no batch randomness
        // in expectation: the target is the empirical Fisher, summed
        // exactly over the dataset.
        auto [m, n] = km::probe_shape(st.model.config);
        ensemble = km::GradientEnsemble{m, n, {}, {}};
        const double w = 1.0 / static_cast<double>(st.ds.size());
        for (Index i = 0; i < st.ds.size(); ++i) {
          ensemble.gradients.push_back(km::per_sample_gradient(
              st.model, st.ds.example(i),
              st.ds.y[static_cast<std::size_t>(i)]));
          ensemble.weights.push_back(w);
        }
      } else {
        km::LabelMode labels{mode, derive_seed(cfg.seed, "labels", combo)};
        ensemble = kc::batch_gradient_ensemble(
            st.model, st.ds, batch, labels, cfg.trials,
            derive_seed(cfg.seed, "figure4", combo));
      }
      kc::CurvatureMatrix hb = kc::assemble(ensemble);
      if (mode == km::LabelModeKind::sampled)
        hb.h *= static_cast<double>(batch);
      hb.m = st.m;
      hb.n = st.n;

      for (EstimatorKind kind : cfg.estimators) {
        if (kind == EstimatorKind::kfac) continue;  // per-sample statistic
        auto start = std::chrono::steady_clock::now();
        ka::KronFactors est;
        switch (kind) {
          case EstimatorKind::shampoo_sq:
            est = kc::shampoo_sq_factors(ensemble);
            break;
          case EstimatorKind::shampoo:
            est = kc::shampoo_factors(ensemble);
            break;
          case EstimatorKind::opt_kron:
            est = kc::opt_kron_factors(hb, cfg.opt_kron_steps);
            break;
          case EstimatorKind::kfac:
            continue;
        }
        double cosine = estimator_cosine(cfg, target, est, cfg.train.steps);
        records.push_back({cfg.train.steps, "gn",
                           estimator_name(kind, cfg.opt_kron_steps), cosine,
                           method_name(cfg.method), batch,
                           label_mode_name(mode), cfg.seed,
                           seconds_since(start)});
      }
      ++combo;
    }
  }
  return finalize_run(cfg, "figure4", "figure4.csv", std::move(records), true);
}

void write_synth_idx(const SynthSpec& spec, std::uint64_t seed,
                     const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path) {
  data::Dataset ds = data::synth_gaussian_classes(
      spec.dim, spec.classes, spec.per_class, spec.separation,
      derive_seed(seed, "data"));
  // Quantize onto the byte grid; loading with scale_255 recovers the
  // quantized values exactly.
  double lo = ds.x(0, 0), hi = ds.x(0, 0);
  for (double v : ds.x.entries()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span = hi > lo ? hi - lo : 1.0;
  for (double& v : ds.x.entries())
    v = std::round((v - lo) / span * 255.0) / 255.0;
  ds.normalization = data::Normalization::scale_255;
  auto [images, labels] = data::to_idx_bytes(ds, 1, ds.dim());
  write_file_atomic(images_path,
                    std::string(images.begin(), images.end()));
  write_file_atomic(labels_path,
                    std::string(labels.begin(), labels.end()));
}

}  // namespace kronprec::harness
