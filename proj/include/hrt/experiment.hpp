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

#ifndef HRT_EXPERIMENT_HPP
#define HRT_EXPERIMENT_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hrt/config.hpp"
#include "hrt/dataset.hpp"
#include "hrt/grad_check.hpp"
#include "hrt/metrics.hpp"
#include "hrt/model.hpp"
#include "hrt/trainer.hpp"

namespace hrt {

/// Fresh model for `dataset` with the run's model settings; the encoder's
/// feature width is taken from the dataset.
HrtModel build_model(const RunConfig& config, const ZslDataset& dataset);

/// build_model + train with the run's loss, optimizer and training settings.
TrainResult run_training(const RunConfig& config, const ZslDataset& dataset, const EpochCallback& on_epoch = {});

Metrics run_evaluation(const RunConfig& config, const HrtModel& model, const ZslDataset& dataset);

enum class AblationAxis { kRoutingIterations, kEmIterations };

std::string to_string(AblationAxis axis);  // "k_TD" / "k_EM"
AblationAxis parse_ablation_axis(const std::string& name);

struct AblationRow {
  AblationAxis axis = AblationAxis::kRoutingIterations;
  std::size_t value = 0;
  Metrics metrics;  // always GZSL-complete: t1, tr, ts and h
};

/// One train + evaluate run per value in config.ablation.values, sweeping the
/// chosen iteration count and holding the other one fixed.
std::vector<AblationRow> run_ablation(const RunConfig& config, const ZslDataset& dataset, AblationAxis axis);

/// CSV with header axis,value,t1,tr,ts,h.
void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

/// Agreement and attention maps as CSV with header
/// sample_index,patch,attribute,agreement,attention, one row per (sample,
/// patch, attribute).
void write_agreement_csv(std::ostream& out, const HrtModel& model, const ZslDataset& dataset,
                         std::span<const std::size_t> sample_indices);

/// The small configuration used for gradient checks: R=4, D_feat=16, d=8
/// vector-transform capsules, A=6, C_s=5, C_u=2, tau=8, k_EM=2, k_TD=2,
/// lambda1=0.1, lambda2=0.033.
RunConfig gradcheck_config();

struct GradCheckRun {
  GradCheckReport report;
  std::size_t samples = 0;
  double seconds = 0.0;
};

/// Central-difference check of the mean total loss over the first
/// `samples` training samples of the synthetic dataset described by `config`,
/// covering every parameter group.
GradCheckRun run_gradcheck(const RunConfig& config, std::size_t samples = 1, const GradCheckOptions& options = {});

/// Human-readable gradient-check table.
void write_gradcheck_report(std::ostream& out, const GradCheckRun& run, const GradCheckOptions& options);

}  // namespace hrt

#endif  // HRT_EXPERIMENT_HPP
