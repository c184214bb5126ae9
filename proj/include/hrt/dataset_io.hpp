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

#ifndef HRT_DATASET_IO_HPP
#define HRT_DATASET_IO_HPP

#include <filesystem>
#include <string>

#include "hrt/dataset.hpp"

namespace hrt {

enum class FeatureDtype { kF32, kF64 };

std::string to_string(FeatureDtype dtype);
FeatureDtype parse_feature_dtype(const std::string& name);

/// Writes a dataset directory:
///
///   meta.json        {version: 1, R, D_feat, A, tau, C, sample_count,
///                     dtype: "f32" | "f64", endianness: "little"}
///   features.bin     raw little-endian floats, sample-major, then patch, then feature
///   attributes.csv   header of attribute names, then C rows x A columns
///   semantics.csv    header, then A rows x tau columns
///   splits.csv       sample_index,class_index,split (train | test_seen | test_unseen)
///   compact.csv      optional, A rows x d precomputed compact vectors
///
/// Numbers in the CSV files are shortest round-trip decimals, so f64 datasets
/// reload bit for bit.
void write_dataset(const std::filesystem::path& dir, const ZslDataset& dataset,
                   FeatureDtype dtype = FeatureDtype::kF64);

/// Reads and fully validates a dataset directory. Seen classes are the labels
/// of train/test_seen rows, unseen classes the labels of test_unseen rows.
/// Any mismatch throws LoadError naming the file and record.
ZslDataset load_features(const std::filesystem::path& dir);

}  // namespace hrt

#endif  // HRT_DATASET_IO_HPP
