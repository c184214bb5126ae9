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

#ifndef HRT_METRICS_HPP
#define HRT_METRICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrt/dataset.hpp"
#include "hrt/loss.hpp"
#include "hrt/model.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

enum class EvalMode { kZsl, kGzsl, kBoth };

std::string to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& name);

/// Unweighted means of per-class top-1 accuracy. Fields a mode does not
/// compute stay empty.
struct Metrics {
  std::optional<double> t1;  // test_unseen, candidates restricted to unseen classes
  std::optional<double> tr;  // test_seen, all classes with offsets
  std::optional<double> ts;  // test_unseen, all classes with offsets
  std::optional<double> h;   // harmonic mean of tr and ts
};

/// 2 tr ts / (tr + ts), and 0 when both are 0. Inputs must lie in [0, 1].
double harmonic_mean(double tr, double ts);

/// Mean over the classes present in `labels` of each class's hit rate.
double per_class_accuracy(std::span<const std::size_t> labels, std::span<const std::size_t> predictions);

/// argmax over `candidates` of scores[c] + gamma[c] (gamma may be empty);
/// ties go to the lowest class index.
std::size_t predict_among(const Tensor& scores, const Tensor& gamma,
                          std::span<const std::size_t> candidates);

/// Metrics from precomputed class scores; `scores[i]` belongs to sample i and
/// only test samples are read.
Metrics metrics_from_scores(const ZslDataset& dataset, std::span<const Tensor> scores, EvalMode mode,
                            const GammaProfile& gamma);

Metrics evaluate(const HrtModel& model, const ZslDataset& dataset, EvalMode mode,
                 const GammaProfile& gamma);

/// Stable JSON text (fixed key order, shortest round-trip numbers).
std::string metrics_json(const Metrics& metrics, EvalMode mode, const GammaProfile& gamma);

}  // namespace hrt

#endif  // HRT_METRICS_HPP
