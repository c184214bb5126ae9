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

#include "hrt/dataset.hpp"

#include <algorithm>

#include "hrt/errors.hpp"

namespace hrt {

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kTestSeen: return "test_seen";
    case Split::kTestUnseen: return "test_unseen";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test_seen") return Split::kTestSeen;
  if (name == "test_unseen") return Split::kTestUnseen;
  throw LoadError("unknown split '" + name + "'");
}

std::vector<std::size_t> ZslDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (samples[i].split == split) out.push_back(i);
  return out;
}

bool ZslDataset::is_seen(std::size_t label) const {
  return std::binary_search(seen_classes.begin(), seen_classes.end(), label);
}

void ZslDataset::validate() const {
  try {
    semantics.validate();
  } catch (const std::exception& e) {
    throw LoadError(std::string("semantic space: ") + e.what());
  }
  const std::size_t c = num_classes();
  if (num_patches == 0 || feature_dim == 0) throw LoadError("dataset needs R >= 1 and D_feat >= 1");
  if (!std::is_sorted(seen_classes.begin(), seen_classes.end()) ||
      !std::is_sorted(unseen_classes.begin(), unseen_classes.end())) {
    throw LoadError("seen/unseen class lists must be sorted");
  }
  std::vector<int> owner(c, 0);
  for (auto k : seen_classes) {
    if (k >= c) throw LoadError("seen class " + std::to_string(k) + " out of range");
    owner[k] |= 1;
  }
  for (auto k : unseen_classes) {
    if (k >= c) throw LoadError("unseen class " + std::to_string(k) + " out of range");
    if (owner[k] & 1) throw LoadError("class " + std::to_string(k) + " is both seen and unseen");
    owner[k] |= 2;
  }
  for (std::size_t k = 0; k < c; ++k) {
    if (owner[k] == 0) throw LoadError("class " + std::to_string(k) + " is neither seen nor unseen");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const std::string where = "sample " + std::to_string(i);
    if (s.patches.shape() != Shape{num_patches, feature_dim}) {
      throw LoadError(where + ": patches " + shape_string(s.patches.shape()) + ", expected " +
                      shape_string({num_patches, feature_dim}));
    }
    if (!s.patches.all_finite()) throw LoadError(where + ": non-finite feature value");
    if (s.label >= c) throw LoadError(where + ": class index " + std::to_string(s.label) + " out of range");
    const bool seen = (owner[s.label] & 1) != 0;
    if (s.split == Split::kTestUnseen && seen) {
      throw LoadError(where + ": test_unseen sample has seen class " + std::to_string(s.label));
    }
    if (s.split != Split::kTestUnseen && !seen) {
      throw LoadError(where + ": " + to_string(s.split) + " sample has unseen class " +
                      std::to_string(s.label));
    }
  }
}

}  // namespace hrt
