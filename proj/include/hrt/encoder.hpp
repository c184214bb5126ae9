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

#ifndef HRT_ENCODER_HPP
#define HRT_ENCODER_HPP

#include <cstddef>

#include "hrt/autodiff.hpp"
#include "hrt/capsule.hpp"
#include "hrt/semantics.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

struct EncoderConfig {
  std::size_t feature_dim = 64;
  std::size_t capsule_dim = kCapsuleDim;
  std::size_t primary_capsules = kPrimaryCapsules;
  VoteMode vote_mode = VoteMode::kMatrixProduct;
  std::size_t em_iterations = 5;
  std::size_t routing_iterations = 2;
  double em_lambda = 1.0;
  double sigma_floor = 1e-6;
  double layer_norm_eps = kDefaultLayerNormEps;
};

struct EncoderParams {
  Tensor primary_proj;     // [D_feat x P*d]
  Tensor primary_act;      // [D_feat x P]
  Tensor em_transforms;    // [P x k x k]
  double em_beta = 0.0;
  double em_gamma = 0.0;
  Tensor vote_transforms;  // [A x d x d]
};

/// Encoder output for one image.
struct AlignedFeatures {
  Tensor h;               // [D_feat x A], column a is h_a
  Tensor attention;       // [R x A], softmax of agreement over patches
  Tensor agreement;       // [R x A], Phi
  Tensor patch_capsules;  // [R x d], g^r
};

/// Same parameters as graph leaves; em_transforms is flattened to [P x k*k]
/// and vote_transforms to [A x d*d].
struct EncoderVars {
  ad::Var primary_proj;
  ad::Var primary_act;
  ad::Var em_transforms;
  ad::Var em_beta;
  ad::Var em_gamma;
  ad::Var vote_transforms;
};

struct EncoderGraph {
  ad::Var h;
  ad::Var attention;
  ad::Var agreement;
  ad::Var patch_capsules;
};

/// Throws DimensionError unless every tensor in `params` fits `config` and
/// `num_attributes`.
void check_encoder_params(const EncoderParams& params, const EncoderConfig& config,
                          std::size_t num_attributes);

EncoderVars encoder_constants(const EncoderParams& params);

/// Patch features [R x D_feat] to attribute-aligned features, with the parent
/// capsules of the top-down routing started at `compact_vectors` [A x d].
EncoderGraph encode_graph(const ad::Var& patch_features, const ad::Var& compact_vectors,
                          const EncoderVars& vars, const EncoderConfig& config);

AlignedFeatures encode(const Tensor& patch_features, const SemanticSpace& semantics,
                       const EncoderParams& params, const EncoderConfig& config);

}  // namespace hrt

#endif  // HRT_ENCODER_HPP
