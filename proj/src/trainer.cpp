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

#include "hrt/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "hrt/errors.hpp"
#include "hrt/format.hpp"
#include "hrt/rng.hpp"

namespace hrt {

namespace {

std::size_t seen_argmax(const Tensor& scores, const std::vector<std::size_t>& seen) {
  std::size_t best = seen.front();
  for (auto c : seen)
    if (scores[c] > scores[best]) best = c;
  return best;
}

}  // namespace

TrainResult train(const ZslDataset& dataset, HrtModel model, const LossConfig& loss,
                  const OptimizerConfig& optimizer, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  model.check_compatible(dataset);
  loss.validate(model.num_classes());
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  std::vector<std::size_t> order = dataset.indices(Split::kTrain);
  if (order.empty()) throw ConfigError("training split is empty");
  for (auto i : order) {
    if (!dataset.is_seen(dataset.samples[i].label)) {
      throw ConfigError("training sample " + std::to_string(i) + " belongs to an unseen class");
    }
  }

  TrainResult result{std::move(model), {}};
  if (config.epochs == 0) return result;

  RmsProp opt(optimizer);
  SeededRng rng(config.seed);
  const auto& seen = dataset.seen_classes;
  auto& params = result.model.mutable_parameters();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto leaves = make_leaves(params, true);
      for (std::size_t b = start; b < end; ++b) {
        const Sample& s = dataset.samples[order[b]];
        const auto g = total_loss_graph(result.model, leaves, s.patches, s.label, loss, seen);
        ad::backward(g.total);
        rec.ce += g.ce.scalar();
        rec.cal += g.cal.scalar();
        rec.reg += g.reg.scalar();
        rec.total += g.total.scalar();
        const Tensor scores = g.forward.scores.value().reshaped({result.model.num_classes()});
        if (seen_argmax(scores, seen) == s.label) ++correct;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      std::vector<Tensor> grads;
      grads.reserve(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor gi = leaves[i].grad().empty() ? Tensor(params[i].shape()) : leaves[i].grad();
        for (auto& v : gi.data()) v *= inv;
        grads.push_back(std::move(gi));
      }
      opt.step(params, grads);
    }
    const auto n = static_cast<double>(order.size());
    rec.ce /= n;
    rec.cal /= n;
    rec.reg /= n;
    rec.total /= n;
    rec.train_acc = static_cast<double>(correct) / n;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,L_ce,L_cal,L_reg,total,train_acc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.ce) << ',' << format_double(r.cal) << ','
        << format_double(r.reg) << ',' << format_double(r.total) << ','
        << format_double(r.train_acc) << '\n';
  }
}

}  // namespace hrt
