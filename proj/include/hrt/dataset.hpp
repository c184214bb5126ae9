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

#ifndef HRT_DATASET_HPP
#define HRT_DATASET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "hrt/semantics.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

enum class Split { kTrain, kTestSeen, kTestUnseen };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct Sample {
  Tensor patches;  // [R x D_feat]
  std::size_t label = 0;
  Split split = Split::kTrain;
};

/// Zero-shot dataset: samples with a seen/unseen class partition.
///
/// Training samples come from seen classes only; test_unseen samples from
/// unseen classes only. Every class of the semantic space is either seen or
/// unseen.
struct ZslDataset {
  std::size_t num_patches = 0;  // R
  std::size_t feature_dim = 0;  // D_feat
  std::vector<Sample> samples;
  SemanticSpace semantics;
  std::vector<std::size_t> seen_classes;    // ascending
  std::vector<std::size_t> unseen_classes;  // ascending

  std::size_t num_classes() const { return semantics.num_classes(); }
  std::vector<std::size_t> indices(Split split) const;
  bool is_seen(std::size_t label) const;

  /// Throws LoadError naming the offending record when an invariant fails.
  void validate() const;
};

}  // namespace hrt

#endif  // HRT_DATASET_HPP
