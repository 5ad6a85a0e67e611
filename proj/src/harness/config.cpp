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

#include <fstream>
#include <set>
#include <string>

#include "json.hpp"
#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"

namespace kronprec::harness {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config: " + path + ": " + message);
}

// No silent typo tolerance: every key must be known.
void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key()))
      fail(path, "unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + "." + key, e.what());
  }
}

models::ModelKind parse_model_kind(const std::string& s, const std::string& path) {
  if (s == "binary_logistic") return models::ModelKind::binary_logistic;
  if (s == "multinomial_linear") return models::ModelKind::multinomial_linear;
  if (s == "mlp2") return models::ModelKind::mlp2;
  fail(path, "unknown model kind '" + s + "'");
}

models::ModelConfig parse_model(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"kind", "input_dim", "hidden_dim", "num_classes", "probe_layer",
              "activation"});
  if (!obj.contains("kind")) fail(path, "missing 'kind'");
  models::ModelConfig cfg;
  cfg.kind = parse_model_kind(obj.at("kind").get<std::string>(), path + ".kind");
  cfg.input_dim = get_or<Index>(obj, path, "input_dim", 0);
  cfg.hidden_dim = get_or<Index>(obj, path, "hidden_dim", 0);
  cfg.num_classes = get_or<Index>(obj, path, "num_classes", 2);
  cfg.probe_layer = get_or<int>(obj, path, "probe_layer", 0);
  std::string act = get_or<std::string>(obj, path, "activation", "tanh");
  if (act == "tanh") cfg.activation = models::Activation::tanh;
  else if (act == "relu") cfg.activation = models::Activation::relu;
  else fail(path + ".activation", "expected 'tanh' or 'relu'");
  return cfg;
}

optim::TrainConfig parse_train(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"optimizer", "lr", "momentum", "shampoo_ema", "shampoo_damping",
              "shampoo_exponent", "batch_size", "steps", "probe_schedule"});
  optim::TrainConfig cfg;
  std::string opt = get_or<std::string>(obj, path, "optimizer", "gd");
  if (opt == "gd") cfg.optimizer = optim::OptimizerKind::gd;
  else if (opt == "sgd_momentum") cfg.optimizer = optim::OptimizerKind::sgd_momentum;
  else if (opt == "shampoo") cfg.optimizer = optim::OptimizerKind::shampoo;
  else fail(path + ".optimizer", "expected gd | sgd_momentum | shampoo");
  cfg.lr = get_or<double>(obj, path, "lr", 0.01);
  if (cfg.lr <= 0.0) fail(path + ".lr", "learning rate must be positive");
  cfg.momentum = get_or<double>(obj, path, "momentum", 0.0);
  cfg.shampoo_ema = get_or<double>(obj, path, "shampoo_ema", 0.99);
  if (cfg.shampoo_ema < 0.0 || cfg.shampoo_ema >= 1.0)
    fail(path + ".shampoo_ema", "must be in [0, 1)");
  if (obj.contains("shampoo_damping")) {
    const json& d = obj.at("shampoo_damping");
    if (d.is_string() && d.get<std::string>() == "auto")
      cfg.shampoo_damping = kronalg::kAutoDamping;
    else if (d.is_number())
      cfg.shampoo_damping = d.get<double>();
    else
      fail(path + ".shampoo_damping", "expected a number or 'auto'");
    if (cfg.shampoo_damping < 0.0 && cfg.shampoo_damping != kronalg::kAutoDamping)
      fail(path + ".shampoo_damping", "must be >= 0");
  }
  cfg.shampoo_exponent = get_or<double>(obj, path, "shampoo_exponent", 0.5);
  if (cfg.shampoo_exponent <= 0.0)
    fail(path + ".shampoo_exponent", "must be positive");
  cfg.batch_size = get_or<Index>(obj, path, "batch_size", 0);
  if (cfg.batch_size < 0) fail(path + ".batch_size", "must be >= 0");
  cfg.steps = get_or<int>(obj, path, "steps", 25);
  if (cfg.steps < 0) fail(path + ".steps", "must be >= 0");
  cfg.probe_schedule =
      get_or<std::vector<int>>(obj, path, "probe_schedule", {});
  for (int s : cfg.probe_schedule)
    if (s < 0 || s > cfg.steps)
      fail(path + ".probe_schedule", "entries must lie in [0, steps]");
  return cfg;
}

DatasetSpec parse_dataset(const json& obj, const std::string& path) {
  check_keys(obj, path, {"synth", "idx"});
  DatasetSpec spec;
  if (obj.contains("synth") == obj.contains("idx"))
    fail(path, "exactly one of 'synth' or 'idx' is required");
  if (obj.contains("synth")) {
    const json& s = obj.at("synth");
    check_keys(s, path + ".synth", {"dim", "classes", "per_class", "separation"});
    SynthSpec synth;
    synth.dim = get_or<Index>(s, path + ".synth", "dim", 8);
    synth.classes = get_or<Index>(s, path + ".synth", "classes", 2);
    synth.per_class = get_or<Index>(s, path + ".synth", "per_class", 20);
    synth.separation = get_or<double>(s, path + ".synth", "separation", 2.0);
    if (synth.separation < 0.0)
      fail(path + ".synth.separation", "must be >= 0");
    spec.synth = synth;
  } else {
    const json& s = obj.at("idx");
    check_keys(s, path + ".idx",
               {"images", "labels", "normalization", "keep_classes",
                "image_side", "downsample"});
    IdxSpec idx;
    if (!s.contains("images") || !s.contains("labels"))
      fail(path + ".idx", "both 'images' and 'labels' paths are required");
    idx.images = s.at("images").get<std::string>();
    idx.labels = s.at("labels").get<std::string>();
    std::string norm =
        get_or<std::string>(s, path + ".idx", "normalization", "scale_255");
    if (norm == "none") idx.normalization = data::Normalization::none;
    else if (norm == "scale_255") idx.normalization = data::Normalization::scale_255;
    else if (norm == "standardize") idx.normalization = data::Normalization::standardize;
    else fail(path + ".idx.normalization", "expected none | scale_255 | standardize");
    idx.keep_classes =
        get_or<std::vector<Index>>(s, path + ".idx", "keep_classes", {});
    idx.image_side = get_or<Index>(s, path + ".idx", "image_side", 0);
    idx.downsample = get_or<Index>(s, path + ".idx", "downsample", 1);
    if (idx.downsample > 1 && idx.image_side <= 0)
      fail(path + ".idx", "'image_side' is required when downsampling");
    spec.idx = idx;
  }
  return spec;
}

EstimatorKind parse_estimator(const std::string& s, const std::string& path) {
  if (s == "shampoo") return EstimatorKind::shampoo;
  if (s == "shampoo_sq") return EstimatorKind::shampoo_sq;
  if (s == "opt_kron") return EstimatorKind::opt_kron;
  if (s == "kfac") return EstimatorKind::kfac;
  fail(path, "unknown estimator '" + s + "'");
}

TargetKind parse_target(const std::string& s, const std::string& path) {
  if (s == "gn") return TargetKind::gn;
  if (s == "adagrad") return TargetKind::adagrad;
  fail(path, "unknown curvature target '" + s + "'");
}

models::LabelModeKind parse_label_mode(const std::string& s,
                                       const std::string& path) {
  if (s == "sampled") return models::LabelModeKind::sampled;
  if (s == "real") return models::LabelModeKind::real;
  if (s == "enumerated") return models::LabelModeKind::enumerated;
  fail(path, "unknown label mode '" + s + "'");
}

ExperimentConfig parse_config(const json& root) {
  const json* cfg_obj = &root;
  if (root.is_object() && root.contains("config")) {
    // Manifest form.
    check_keys(root, "$", {"command", "config", "outputs"});
    cfg_obj = &root.at("config");
  }
  const json& c = *cfg_obj;
  check_keys(c, "$",
             {"model", "train", "dataset", "estimators", "opt_kron_steps",
              "targets", "batch_sweep", "label_modes", "trials", "probes",
              "seed", "output_dir"});
  ExperimentConfig cfg;
  if (!c.contains("model")) fail("$", "missing 'model'");
  cfg.model = parse_model(c.at("model"), "$.model");
  cfg.train = c.contains("train") ? parse_train(c.at("train"), "$.train")
                                  : optim::TrainConfig{};
  if (!c.contains("dataset")) fail("$", "missing 'dataset'");
  cfg.dataset = parse_dataset(c.at("dataset"), "$.dataset");

  if (c.contains("estimators")) {
    cfg.estimators.clear();
    for (const auto& e : c.at("estimators"))
      cfg.estimators.push_back(
          parse_estimator(e.get<std::string>(), "$.estimators"));
    if (cfg.estimators.empty())
      fail("$.estimators", "at least one estimator is required");
  }
  cfg.opt_kron_steps = get_or<int>(c, "$", "opt_kron_steps", 5);
  if (cfg.opt_kron_steps < 1) fail("$.opt_kron_steps", "must be >= 1");
  if (c.contains("targets")) {
    cfg.targets.clear();
    for (const auto& t : c.at("targets"))
      cfg.targets.push_back(parse_target(t.get<std::string>(), "$.targets"));
    if (cfg.targets.empty()) fail("$.targets", "at least one target is required");
  }
  cfg.batch_sweep =
      get_or<std::vector<Index>>(c, "$", "batch_sweep", {1, 16, 256});
  for (Index b : cfg.batch_sweep)
    if (b < 1) fail("$.batch_sweep", "batch sizes must be >= 1");
  if (c.contains("label_modes")) {
    cfg.label_modes.clear();
    for (const auto& l : c.at("label_modes"))
      cfg.label_modes.push_back(
          parse_label_mode(l.get<std::string>(), "$.label_modes"));
  }
  cfg.trials = get_or<int>(c, "$", "trials", 200);
  if (cfg.trials < 1) fail("$.trials", "must be >= 1");
  if (c.contains("probes")) {
    const json& p = c.at("probes");
    check_keys(p, "$.probes", {"count", "method"});
    cfg.probe_count = get_or<Index>(p, "$.probes", "count", 100);
    if (cfg.probe_count < 1) fail("$.probes.count", "must be >= 1");
    std::string method = get_or<std::string>(p, "$.probes", "method", "exact");
    if (method == "exact") cfg.method = ProbeMethod::exact;
    else if (method == "hutchinson") cfg.method = ProbeMethod::hutchinson;
    else fail("$.probes.method", "expected 'exact' or 'hutchinson'");
  }
  cfg.seed = get_or<std::uint64_t>(c, "$", "seed", 0);
  cfg.output_dir = get_or<std::string>(c, "$", "output_dir", "out");
  cfg.model.init_seed = cfg.seed;
  return cfg;
}

std::string activation_name(models::Activation a) {
  return a == models::Activation::relu ? "relu" : "tanh";
}

std::string model_kind_name(models::ModelKind k) {
  switch (k) {
    case models::ModelKind::binary_logistic: return "binary_logistic";
    case models::ModelKind::multinomial_linear: return "multinomial_linear";
    case models::ModelKind::mlp2: return "mlp2";
  }
  return "";
}

std::string optimizer_name(optim::OptimizerKind k) {
  switch (k) {
    case optim::OptimizerKind::gd: return "gd";
    case optim::OptimizerKind::sgd_momentum: return "sgd_momentum";
    case optim::OptimizerKind::shampoo: return "shampoo";
  }
  return "";
}

std::string normalization_name(data::Normalization n) {
  switch (n) {
    case data::Normalization::none: return "none";
    case data::Normalization::scale_255: return "scale_255";
    case data::Normalization::standardize: return "standardize";
  }
  return "";
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(root);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json model{{"kind", model_kind_name(cfg.model.kind)},
             {"input_dim", cfg.model.input_dim},
             {"hidden_dim", cfg.model.hidden_dim},
             {"num_classes", cfg.model.num_classes},
             {"probe_layer", cfg.model.probe_layer},
             {"activation", activation_name(cfg.model.activation)}};
  json train{{"optimizer", optimizer_name(cfg.train.optimizer)},
             {"lr", cfg.train.lr},
             {"momentum", cfg.train.momentum},
             {"shampoo_ema", cfg.train.shampoo_ema},
             {"shampoo_exponent", cfg.train.shampoo_exponent},
             {"batch_size", cfg.train.batch_size},
             {"steps", cfg.train.steps},
             {"probe_schedule",
              cfg.train.probe_schedule.empty()
                  ? optim::default_probe_schedule(cfg.train.steps)
                  : cfg.train.probe_schedule}};
  if (cfg.train.shampoo_damping == kronalg::kAutoDamping)
    train["shampoo_damping"] = "auto";
  else
    train["shampoo_damping"] = cfg.train.shampoo_damping;

  json dataset;
  if (cfg.dataset.synth) {
    dataset["synth"] = {{"dim", cfg.dataset.synth->dim},
                        {"classes", cfg.dataset.synth->classes},
                        {"per_class", cfg.dataset.synth->per_class},
                        {"separation", cfg.dataset.synth->separation}};
  } else {
    dataset["idx"] = {{"images", cfg.dataset.idx->images},
                      {"labels", cfg.dataset.idx->labels},
                      {"normalization",
                       normalization_name(cfg.dataset.idx->normalization)},
                      {"keep_classes", cfg.dataset.idx->keep_classes},
                      {"image_side", cfg.dataset.idx->image_side},
                      {"downsample", cfg.dataset.idx->downsample}};
  }

  json estimators = json::array();
  for (EstimatorKind e : cfg.estimators) {
    switch (e) {
      case EstimatorKind::shampoo: estimators.push_back("shampoo"); break;
      case EstimatorKind::shampoo_sq: estimators.push_back("shampoo_sq"); break;
      case EstimatorKind::opt_kron: estimators.push_back("opt_kron"); break;
      case EstimatorKind::kfac: estimators.push_back("kfac"); break;
    }
  }
  json targets = json::array();
  for (TargetKind t : cfg.targets) targets.push_back(target_name(t));
  json label_modes = json::array();
  for (models::LabelModeKind l : cfg.label_modes)
    label_modes.push_back(label_mode_name(l));

  json root{{"model", model},
            {"train", train},
            {"dataset", dataset},
            {"estimators", estimators},
            {"opt_kron_steps", cfg.opt_kron_steps},
            {"targets", targets},
            {"batch_sweep", cfg.batch_sweep},
            {"label_modes", label_modes},
            {"trials", cfg.trials},
            {"probes",
             {{"count", cfg.probe_count},
              {"method",
               cfg.method == ProbeMethod::exact ? "exact" : "hutchinson"}}},
            {"seed", cfg.seed},
            {"output_dir", cfg.output_dir}};
  return root.dump(2);
}

data::Dataset build_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.synth) {
    return data::synth_gaussian_classes(spec.synth->dim, spec.synth->classes,
                                        spec.synth->per_class,
                                        spec.synth->separation, seed);
  }
  if (!spec.idx) throw ConfigError("config: dataset spec is empty");
  const IdxSpec& idx = *spec.idx;
  data::Dataset ds =
      data::load_idx_files(idx.images, idx.labels, idx.normalization);
  if (!idx.keep_classes.empty())
    ds = data::subsample_classes(ds, idx.keep_classes);
  if (idx.downsample > 1)
    ds = data::downsample_images(ds, idx.image_side, idx.downsample);
  return ds;
}

std::string estimator_name(EstimatorKind kind, int opt_kron_steps) {
  switch (kind) {
    case EstimatorKind::shampoo: return "shampoo";
    case EstimatorKind::shampoo_sq: return "shampoo_sq";
    case EstimatorKind::opt_kron:
      return "opt_kron(" + std::to_string(opt_kron_steps) + ")";
    case EstimatorKind::kfac: return "kfac";
  }
  return "";
}

const char* target_name(TargetKind kind) {
  return kind == TargetKind::gn ? "gn" : "adagrad";
}

const char* label_mode_name(models::LabelModeKind mode) {
  switch (mode) {
    case models::LabelModeKind::sampled: return "sampled";
    case models::LabelModeKind::real: return "real";
    case models::LabelModeKind::enumerated: return "enumerated";
  }
  return "";
}

}  // namespace kronprec::harness
