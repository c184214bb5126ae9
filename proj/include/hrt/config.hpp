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

#ifndef HRT_CONFIG_HPP
#define HRT_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hrt/loss.hpp"
#include "hrt/metrics.hpp"
#include "hrt/model.hpp"
#include "hrt/optimizer.hpp"
#include "hrt/synthetic.hpp"
#include "hrt/trainer.hpp"

namespace hrt {

struct LossSettings {
  double lambda1 = 0.1;
  double lambda2 = 0.033;
  std::string gamma_profile = "cub";
  bool ce_seen_only = true;

  /// Resolved loss configuration for a dataset's class partition.
  LossConfig resolve(std::size_t num_classes, const std::vector<std::size_t>& seen_classes) const;
};

struct EvalSettings {
  EvalMode mode = EvalMode::kBoth;
};

/// Iteration sweep. While one routing count is swept, the other is held.
struct AblationSettings {
  std::vector<std::size_t> values{1, 2, 3, 4, 5};
  std::size_t held_em_iterations = 1;
  std::size_t held_routing_iterations = 2;
};

/// Everything a CLI run can configure. JSON layout, every key optional:
///
///   {"synthetic": {...SyntheticSpec fields..., "seed"},
///    "model": {capsule_dim, primary_capsules, vote_mode, em_iterations,
///              routing_iterations, em_lambda, sigma_floor, layer_norm_eps,
///              compaction, fa_iterations, fa_noise_floor_ratio, fa_init_seed,
///              init_seed},
///    "loss": {lambda1, lambda2, gamma_profile, ce_seen_only},
///    "optimizer": {learning_rate, momentum, weight_decay, rho, eps},
///    "training": {epochs, batch_size, seed},
///    "eval": {mode},
///    "ablation": {values, held_em_iterations, held_routing_iterations}}
///
/// The encoder's feature width always comes from the dataset.
struct RunConfig {
  SyntheticSpec synthetic;
  std::uint64_t data_seed = 0;
  ModelConfig model;
  LossSettings loss;
  OptimizerConfig optimizer;
  TrainConfig training;
  EvalSettings eval;
  AblationSettings ablation;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Defaults overlaid with `json_text`; unknown keys and wrong types throw ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as pretty JSON (stable key order).
std::string config_to_json(const RunConfig& config);

/// FNV-1a 64 of the compact resolved JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Writes config.json with the resolved configuration into `dir`.
void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config);

std::string to_string(VoteMode mode);
VoteMode parse_vote_mode(const std::string& name);

}  // namespace hrt

#endif  // HRT_CONFIG_HPP
