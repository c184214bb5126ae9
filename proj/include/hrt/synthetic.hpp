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

#ifndef HRT_SYNTHETIC_HPP
#define HRT_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>

#include "hrt/dataset.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

struct SyntheticSpec {
  std::size_t seen_classes = 8;
  std::size_t unseen_classes = 4;
  std::size_t attributes = 12;
  std::size_t patches = 9;
  std::size_t feature_dim = 64;
  std::size_t tau = 32;
  std::size_t samples_per_class = 40;
  double noise_std = 0.1;
  std::size_t signal_patches_per_attribute = 2;
  // Active attributes per class; 0 picks max(2, round(A / 3)).
  std::size_t attributes_per_class = 0;
  // Share of each seen class held out as test_seen (at least one sample).
  double test_fraction = 0.2;

  void validate() const;
  std::size_t active_per_class() const;
};

struct SyntheticDataset {
  ZslDataset dataset;
  Tensor basis;  // [A x D_feat], unit visual direction of each attribute
};

/// Deterministic synthetic zero-shot task.
///
/// Recipe, all draws from one SeededRng(seed) in this order:
///  1. attribute directions b_a: Gaussian rows, Gram-Schmidt, unit length;
///  2. class attribute vectors z^c in [0,1]^A with pairwise distinct active
///     sets (active values U(0.6, 1), inactive U(0, 0.3)); seen classes are
///     0..C_s-1 and unseen classes prefer attributes some seen class uses;
///  3. attribute semantic vectors v_a ~ N(0, I_tau);
///  4. per sample, every attribute with z^c_a > 0.5 adds z^c_a b_a to
///     signal_patches_per_attribute distinct random patches, then every patch
///     entry gets N(0, noise_std^2) noise.
/// Seen classes contribute test_seen and train samples, unseen classes only
/// test_unseen samples.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace hrt

#endif  // HRT_SYNTHETIC_HPP
