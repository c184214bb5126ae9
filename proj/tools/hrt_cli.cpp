// Copyright 2026 The HRT Authors. All Rights Reserved.
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

// Command-line front end: gen, train, eval, gradcheck, ablate, report.
//
// Exit codes: 0 success, 1 validation error (bad input, config or files),
// 2 numeric failure (non-finite values, failed gradient check).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hrt/checkpoint.hpp"
#include "hrt/config.hpp"
#include "hrt/dataset_io.hpp"
#include "hrt/errors.hpp"
#include "hrt/experiment.hpp"
#include "hrt/format.hpp"
#include "hrt/metrics.hpp"
#include "hrt/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

hrt::RunConfig resolve_config(const std::string& path) {
  return path.empty() ? hrt::parse_config("{}") : hrt::load_config(path);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw hrt::ConfigError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw hrt::ConfigError("failed writing " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid routing transformer for zero-shot learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string data_dir;
  std::string checkpoint_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string dtype = "f64";
  std::string mode;
  std::string gamma;
  std::string axis = "both";
  std::size_t gc_samples = 1;
  std::size_t report_limit = 8;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset directory");
  gen->add_option("--config", config_path, "JSON config (synthetic section)");
  gen->add_option("--seed", seed, "Dataset seed (overrides synthetic.seed)");
  gen->add_option("--out", out_dir, "Output dataset directory")->required();
  gen->add_option("--dtype", dtype, "Feature dtype: f32 or f64")->check(CLI::IsMember({"f32", "f64"}));

  auto* tr = app.add_subcommand("train", "Train a model on a dataset directory");
  tr->add_option("--data", data_dir, "Dataset directory")->required();
  tr->add_option("--config", config_path, "JSON config");
  tr->add_option("--out", out_dir, "Output directory for checkpoint.bin and history.csv")->required();
  tr->add_option("--seed", seed, "Training seed (overrides training.seed)");
  tr->add_option("--epochs", epochs, "Epoch count (overrides training.epochs)");
  tr->add_flag("--quiet", quiet, "No per-epoch progress");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ev->add_option("--data", data_dir, "Dataset directory")->required();
  ev->add_option("--mode", mode, "zsl, gzsl or both (default from config)")
      ->check(CLI::IsMember({"zsl", "gzsl", "both"}));
  ev->add_option("--gamma-profile", gamma, "cub, sun, awa2 or zero (default from config)");
  ev->add_option("--out", out_dir, "Output directory for metrics.json")->required();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the total loss gradient");
  gc->add_option("--config", config_path, "JSON config (defaults to the small check configuration)");
  gc->add_option("--samples", gc_samples, "Training samples in the checked loss");
  gc->add_option("--out", out_dir, "Optional output directory for gradcheck.csv");

  auto* ab = app.add_subcommand("ablate", "Sweep routing iteration counts");
  ab->add_option("--axis", axis, "k_TD, k_EM or both")->check(CLI::IsMember({"k_TD", "k_EM", "both"}));
  ab->add_option("--data", data_dir, "Dataset directory (default: generate from the synthetic config)");
  ab->add_option("--config", config_path, "JSON config");
  ab->add_option("--out", out_dir, "Output directory for ablation.csv")->required();

  auto* rp = app.add_subcommand("report", "Dump agreement and attention maps as CSV");
  rp->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  rp->add_option("--data", data_dir, "Dataset directory")->required();
  rp->add_option("--limit", report_limit, "Number of test samples to dump (0 = all)");
  rp->add_option("--out", out_dir, "Output directory for agreement.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*gen) {
      auto config = resolve_config(config_path);
      if (seed) config.data_seed = *seed;
      const auto data = hrt::generate_synthetic(config.synthetic, config.data_seed);
      hrt::write_dataset(out_dir, data.dataset, hrt::parse_feature_dtype(dtype));
      hrt::write_resolved_config(out_dir, config);
      std::cout << "wrote " << data.dataset.samples.size() << " samples to " << out_dir << '\n';
    } else if (*tr) {
      auto config = resolve_config(config_path);
      if (seed) config.training.seed = *seed;
      if (epochs) config.training.epochs = *epochs;
      const auto data = hrt::load_features(data_dir);
      fs::create_directories(out_dir);
      hrt::write_resolved_config(out_dir, config);
      const auto result = hrt::run_training(config, data, [&](const hrt::EpochRecord& r) {
        if (!quiet) {
          std::cout << "epoch " << r.epoch << " total " << hrt::format_double(r.total) << " train_acc "
                    << hrt::format_double(r.train_acc) << '\n';
        }
      });
      {
        auto out = open_output(fs::path(out_dir) / "history.csv");
        hrt::write_history_csv(out, result.history);
      }
      hrt::save_checkpoint(fs::path(out_dir) / "checkpoint.bin", result.model, config);
      std::cout << "wrote " << (fs::path(out_dir) / "checkpoint.bin").string() << '\n';
    } else if (*ev) {
      const auto ck = hrt::load_checkpoint(checkpoint_path);
      auto config = ck.config;
      if (!mode.empty()) config.eval.mode = hrt::parse_eval_mode(mode);
      if (!gamma.empty()) {
        hrt::gamma_profile(gamma);
        config.loss.gamma_profile = gamma;
      }
      const auto data = hrt::load_features(data_dir);
      const auto metrics = hrt::run_evaluation(config, ck.model, data);
      fs::create_directories(out_dir);
      hrt::write_resolved_config(out_dir, config);
      const auto text = hrt::metrics_json(metrics, config.eval.mode, hrt::gamma_profile(config.loss.gamma_profile));
      write_text(fs::path(out_dir) / "metrics.json", text);
      std::cout << text;
    } else if (*gc) {
      const auto config = config_path.empty() ? hrt::gradcheck_config() : hrt::load_config(config_path);
      const hrt::GradCheckOptions options;
      const auto run = hrt::run_gradcheck(config, gc_samples, options);
      hrt::write_gradcheck_report(std::cout, run, options);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        hrt::write_resolved_config(out_dir, config);
        auto out = open_output(fs::path(out_dir) / "gradcheck.csv");
        hrt::write_gradcheck_report(out, run, options);
      }
      if (!run.report.passed) return kExitNumeric;
    } else if (*ab) {
      const auto config = resolve_config(config_path);
      const auto data = data_dir.empty() ? hrt::generate_synthetic(config.synthetic, config.data_seed).dataset
                                         : hrt::load_features(data_dir);
      std::vector<hrt::AblationRow> rows;
      for (const char* name : {"k_TD", "k_EM"}) {
        if (axis != "both" && axis != name) continue;
        auto part = hrt::run_ablation(config, data, hrt::parse_ablation_axis(name));
        rows.insert(rows.end(), part.begin(), part.end());
      }
      fs::create_directories(out_dir);
      hrt::write_resolved_config(out_dir, config);
      auto out = open_output(fs::path(out_dir) / "ablation.csv");
      hrt::write_ablation_csv(out, rows);
      hrt::write_ablation_csv(std::cout, rows);
    } else if (*rp) {
      const auto ck = hrt::load_checkpoint(checkpoint_path);
      const auto data = hrt::load_features(data_dir);
      std::vector<std::size_t> picks;
      for (std::size_t i = 0; i < data.samples.size(); ++i) {
        if (data.samples[i].split == hrt::Split::kTrain) continue;
        if (report_limit != 0 && picks.size() >= report_limit) break;
        picks.push_back(i);
      }
      fs::create_directories(out_dir);
      hrt::write_resolved_config(out_dir, ck.config);
      auto out = open_output(fs::path(out_dir) / "agreement.csv");
      hrt::write_agreement_csv(out, ck.model, data, picks);
      std::cout << "wrote maps for " << picks.size() << " samples\n";
    }
  } catch (const hrt::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const hrt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
