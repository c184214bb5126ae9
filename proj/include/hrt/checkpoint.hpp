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

#ifndef HRT_CHECKPOINT_HPP
#define HRT_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include "hrt/config.hpp"
#include "hrt/dataset_io.hpp"
#include "hrt/model.hpp"

namespace hrt {

/// Flat binary checkpoint:
///
///   bytes 0..7    magic "HRTCKPT1"
///   bytes 8..15   header length n, unsigned 64-bit little-endian
///   next n bytes  UTF-8 JSON header
///   rest          payload, little-endian floats
///
/// Header keys: format ("hrt-checkpoint"), version (1), dtype ("f32" | "f64"),
/// endianness ("little"), seed (training seed), config_hash (FNV-1a 64 of the
/// compact config JSON), config (resolved RunConfig), feature_dim,
/// attribute_names, and tensors: [{name, shape, offset}] where offset counts
/// elements from the start of the payload. Tensors appear in declared order:
/// the model parameter groups, then semantics.attr_vectors,
/// semantics.compact_vectors and semantics.class_attr.
struct Checkpoint {
  RunConfig config;
  HrtModel model;
  std::uint64_t seed = 0;
  std::string config_hash;
};

void save_checkpoint(const std::filesystem::path& path, const HrtModel& model, const RunConfig& config,
                     FeatureDtype dtype = FeatureDtype::kF64);

/// Throws LoadError on a bad magic, truncated payload, shape mismatch, hash
/// mismatch or non-finite value.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hrt

#endif  // HRT_CHECKPOINT_HPP
