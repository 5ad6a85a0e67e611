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

// Command-line driver. Exit codes: 0 success, 1 validation error,
// 2 self-test failure, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"
#include "kronprec/kernels.hpp"

namespace {

namespace kh = kronprec::harness;

kh::ExperimentConfig load_config(const std::string& path,
                                 const std::optional<std::string>& out_dir,
                                 const std::optional<std::uint64_t>& seed) {
  kh::ExperimentConfig cfg = kh::parse_config_file(path);
  if (out_dir) cfg.output_dir = *out_dir;
  if (seed) {
    cfg.seed = *seed;
    cfg.model.init_seed = *seed;
  }
  return cfg;
}

void report(const kh::RunResult& result) {
  std::cout << "wrote " << result.csv_path.string() << " ("
            << result.records.size() << " rows) and "
            << result.manifest_path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker-factored curvature estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed_override;

  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config or manifest")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed_override, "master seed (overrides config)");
  };

  CLI::App* fig1 = app.add_subcommand(
      "figure1", "cosine similarity of estimators against exact targets");
  add_run_options(fig1);
  CLI::App* fig2 = app.add_subcommand(
      "figure2", "spectrum ratios of the rearranged targets");
  add_run_options(fig2);
  CLI::App* fig4 = app.add_subcommand(
      "figure4", "batch-size and label-mode sweep of estimator quality");
  add_run_options(fig4);

  CLI::App* gen = app.add_subcommand(
      "gen-data", "write the config's synthetic dataset as IDX files");
  add_run_options(gen);

  CLI::App* self = app.add_subcommand("selftest", "run every invariant suite");

  CLI::App* plot = app.add_subcommand("plot", "render a probe CSV as SVG");
  std::string csv_path, svg_path, x_column = "step", title;
  plot->add_option("--csv", csv_path, "input CSV")->required();
  plot->add_option("--out", svg_path, "output SVG path")->required();
  plot->add_option("--x", x_column, "x column: step or batch_size");
  plot->add_option("--title", title, "plot title");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fig1->parsed()) {
      report(kh::run_figure1(load_config(config_path, out_dir, seed_override)));
    } else if (fig2->parsed()) {
      report(kh::run_figure2(load_config(config_path, out_dir, seed_override)));
    } else if (fig4->parsed()) {
      report(kh::run_figure4(load_config(config_path, out_dir, seed_override)));
    } else if (gen->parsed()) {
      kh::ExperimentConfig cfg =
          load_config(config_path, out_dir, seed_override);
      if (!cfg.dataset.synth)
        throw kronprec::ConfigError(
            "gen-data: the config must use a synth dataset spec");
      std::filesystem::path dir(cfg.output_dir);
      std::filesystem::create_directories(dir);
      kh::write_synth_idx(*cfg.dataset.synth, cfg.seed, dir / "images.idx",
                          dir / "labels.idx");
      std::cout << "wrote " << (dir / "images.idx").string() << " and "
                << (dir / "labels.idx").string() << "\n";
    } else if (self->parsed()) {
      std::cout << "kernels: "
                << kronprec::kernels::backend_name(
                       kronprec::kernels::active_backend())
                << "\n";
      if (kh::selftest(std::cout) != 0) return 2;
    } else if (plot->parsed()) {
      kh::PlotSpec spec{x_column, title};
      kh::plot_csv(csv_path, svg_path, spec);
      std::cout << "wrote " << svg_path << "\n";
    }
  } catch (const kronprec::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const kronprec::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
