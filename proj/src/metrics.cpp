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

#include "hrt/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "hrt/errors.hpp"
#include "hrt/format.hpp"

namespace hrt {

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kZsl: return "zsl";
    case EvalMode::kGzsl: return "gzsl";
    case EvalMode::kBoth: return "both";
  }
  return "?";
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "zsl") return EvalMode::kZsl;
  if (name == "gzsl") return EvalMode::kGzsl;
  if (name == "both") return EvalMode::kBoth;
  throw ConfigError("unknown evaluation mode '" + name + "' (expected zsl, gzsl or both)");
}

double harmonic_mean(double tr, double ts) {
  if (!(tr >= 0.0 && tr <= 1.0 && ts >= 0.0 && ts <= 1.0)) {
    throw ConfigError("harmonic_mean expects accuracies in [0, 1]");
  }
  if (tr + ts == 0.0) return 0.0;
  return 2.0 * tr * ts / (tr + ts);
}

double per_class_accuracy(std::span<const std::size_t> labels, std::span<const std::size_t> predictions) {
  if (labels.size() != predictions.size()) throw DimensionError("labels and predictions differ in length");
  if (labels.empty()) throw ConfigError("per-class accuracy of an empty set");
  // Ordered map: reduction runs in ascending class index.
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_class;  // hits, total
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& e = per_class[labels[i]];
    e.first += predictions[i] == labels[i] ? 1 : 0;
    e.second += 1;
  }
  double sum = 0.0;
  for (const auto& [cls, e] : per_class) sum += static_cast<double>(e.first) / static_cast<double>(e.second);
  return sum / static_cast<double>(per_class.size());
}

std::size_t predict_among(const Tensor& scores, const Tensor& gamma, std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw ConfigError("no candidate classes");
  if (!gamma.empty() && gamma.size() != scores.size()) throw DimensionError("gamma and scores differ in length");
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());
  std::size_t best = order.front();
  auto value = [&](std::size_t c) {
    if (c >= scores.size()) throw IndexError("candidate class " + std::to_string(c) + " out of range");
    return scores[c] + (gamma.empty() ? 0.0 : gamma[c]);
  };
  double best_value = value(best);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double v = value(order[k]);
    if (v > best_value) {
      best = order[k];
      best_value = v;
    }
  }
  return best;
}

Metrics metrics_from_scores(const ZslDataset& dataset, std::span<const Tensor> scores, EvalMode mode,
                            const GammaProfile& gamma) {
  if (scores.size() != dataset.samples.size()) throw DimensionError("one score vector per sample expected");
  const auto unseen_idx = dataset.indices(Split::kTestUnseen);
  const auto seen_idx = dataset.indices(Split::kTestSeen);
  if (unseen_idx.empty()) throw ConfigError("test_unseen split is empty");
  if (mode != EvalMode::kZsl && seen_idx.empty()) throw ConfigError("test_seen split is empty");

  std::vector<std::size_t> all(dataset.num_classes());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  const Tensor offsets = gamma_vector(gamma, dataset.num_classes(), dataset.seen_classes);

  auto accuracy = [&](const std::vector<std::size_t>& idx, std::span<const std::size_t> candidates,
                      const Tensor& g) {
    std::vector<std::size_t> labels, preds;
    for (auto i : idx) {
      labels.push_back(dataset.samples[i].label);
      preds.push_back(predict_among(scores[i], g, candidates));
    }
    return per_class_accuracy(labels, preds);
  };

  Metrics m;
  if (mode != EvalMode::kGzsl) m.t1 = accuracy(unseen_idx, dataset.unseen_classes, Tensor());
  if (mode != EvalMode::kZsl) {
    m.tr = accuracy(seen_idx, all, offsets);
    m.ts = accuracy(unseen_idx, all, offsets);
    m.h = harmonic_mean(*m.tr, *m.ts);
  }
  return m;
}

Metrics evaluate(const HrtModel& model, const ZslDataset& dataset, EvalMode mode, const GammaProfile& gamma) {
  model.check_compatible(dataset);
  std::vector<Tensor> scores(dataset.samples.size());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (dataset.samples[i].split == Split::kTrain) continue;
    scores[i] = forward(model, dataset.samples[i].patches).scores;
    scores[i].require_finite("class scores of sample " + std::to_string(i));
  }
  // Training samples are never read; give them a placeholder of the right length.
  for (auto& s : scores)
    if (s.empty()) s = Tensor({dataset.num_classes()});
  return metrics_from_scores(dataset, scores, mode, gamma);
}

std::string metrics_json(const Metrics& metrics, EvalMode mode, const GammaProfile& gamma) {
  std::ostringstream out;
  out << "{\n  \"mode\": \"" << to_string(mode) << "\",\n  \"gamma_profile\": {\"name\": \"" << gamma.name
      << "\", \"seen\": " << format_double(gamma.seen) << ", \"unseen\": " << format_double(gamma.unseen) << "}";
  auto field = [&](const char* name, const std::optional<double>& v) {
    if (v) out << ",\n  \"" << name << "\": " << format_double(*v);
  };
  field("t1", metrics.t1);
  field("tr", metrics.tr);
  field("ts", metrics.ts);
  field("h", metrics.h);
  out << "\n}\n";
  return out.str();
}

}  // namespace hrt
