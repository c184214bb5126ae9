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

#ifndef HRT_TRAINER_HPP
#define HRT_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hrt/dataset.hpp"
#include "hrt/loss.hpp"
#include "hrt/model.hpp"
#include "hrt/optimizer.hpp"

namespace hrt {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

/// Means over the epoch's training samples, measured on the forward pass
/// before each batch update.
struct EpochRecord {
  std::size_t epoch = 0;
  double ce = 0.0;
  double cal = 0.0;
  double reg = 0.0;
  double total = 0.0;
  double train_acc = 0.0;
};

struct TrainResult {
  HrtModel model;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training on the train split (seen classes only) with a seeded
/// shuffle per epoch. Gradients are averaged over each batch in sample order.
TrainResult train(const ZslDataset& dataset, HrtModel model, const LossConfig& loss,
                  const OptimizerConfig& optimizer, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// CSV with header epoch,L_ce,L_cal,L_reg,total,train_acc; doubles use the
/// shortest round-trip representation.
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace hrt

#endif  // HRT_TRAINER_HPP
