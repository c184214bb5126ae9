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

#include "hrt/encoder.hpp"

#include <vector>

#include "hrt/errors.hpp"

namespace hrt {

namespace {

void expect_shape(const Tensor& t, const Shape& shape, const char* name) {
  if (t.shape() != shape) {
    throw DimensionError(std::string("encoder parameter ") + name + " has shape " +
                         shape_string(t.shape()) + ", expected " + shape_string(shape));
  }
}

}  // namespace

void check_encoder_params(const EncoderParams& params, const EncoderConfig& config,
                          std::size_t num_attributes) {
  const std::size_t dfeat = config.feature_dim, d = config.capsule_dim, p = config.primary_capsules;
  const std::size_t k = transform_side(config.vote_mode, d);
  expect_shape(params.primary_proj, {dfeat, p * d}, "primary_proj");
  expect_shape(params.primary_act, {dfeat, p}, "primary_act");
  expect_shape(params.em_transforms, {p, k, k}, "em_transforms");
  expect_shape(params.vote_transforms, {num_attributes, d, d}, "vote_transforms");
}

EncoderVars encoder_constants(const EncoderParams& params) {
  const auto& et = params.em_transforms;
  const auto& vt = params.vote_transforms;
  return {ad::Var::constant(params.primary_proj),
          ad::Var::constant(params.primary_act),
          ad::Var::constant(et.reshaped({et.dim(0), et.size() / et.dim(0)})),
          ad::Var::constant(Tensor({1, 1}, params.em_beta)),
          ad::Var::constant(Tensor({1, 1}, params.em_gamma)),
          ad::Var::constant(vt.reshaped({vt.dim(0), vt.size() / vt.dim(0)}))};
}

EncoderGraph encode_graph(const ad::Var& patch_features, const ad::Var& compact_vectors,
                          const EncoderVars& vars, const EncoderConfig& config) {
  const std::size_t r = patch_features.rows();
  const std::size_t d = config.capsule_dim, p = config.primary_capsules;
  if (patch_features.cols() != config.feature_dim) {
    throw DimensionError("encode: patch features have width " +
                         std::to_string(patch_features.cols()) + ", model expects " +
                         std::to_string(config.feature_dim));
  }
  if (compact_vectors.cols() != d) {
    throw DimensionError("encode: patch capsules have width " + std::to_string(d) +
                         " but compact attribute vectors have width " +
                         std::to_string(compact_vectors.cols()));
  }

  // Bottom-up: all patches share the 1x1 projection, then each patch's
  // primary capsules are EM-routed into one patch capsule g^r.
  const ad::Var poses = ad::matmul(patch_features, vars.primary_proj);               // [R x P*d]
  const ad::Var acts = ad::sigmoid(ad::matmul(patch_features, vars.primary_act));  // [R x P]
  routing::EmGraphParams em{vars.em_transforms, vars.em_beta,      vars.em_gamma,
                            config.em_lambda,   config.em_iterations, config.sigma_floor,
                            pose_rows_for(config.vote_mode, d)};
  std::vector<ad::Var> capsules;
  capsules.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    const ad::Var patch_poses = ad::reshape(ad::slice_rows(poses, i, 1), p, d);
    const ad::Var patch_acts = ad::reshape(ad::slice_rows(acts, i, 1), p, 1);
    capsules.push_back(routing::em_routing(patch_poses, patch_acts, em).pose);
  }

  EncoderGraph out;
  out.patch_capsules = ad::concat_rows(capsules);
  // Top-down: attribute parents start from the compact semantics.
  const auto td = routing::inverted_routing(out.patch_capsules, compact_vectors,
                                            vars.vote_transforms, config.routing_iterations,
                                            config.layer_norm_eps);
  out.agreement = td.agreement;
  out.attention = ad::softmax(td.agreement, 0);
  // H = V softmax_R(Phi), V = [f^1 ... f^R] as columns.
  out.h = ad::matmul(ad::transpose(patch_features), out.attention);
  return out;
}

AlignedFeatures encode(const Tensor& patch_features, const SemanticSpace& semantics,
                       const EncoderParams& params, const EncoderConfig& config) {
  if (semantics.compact_vectors.empty()) {
    throw ConfigError("encode: semantic space has no compact attribute vectors");
  }
  if (patch_features.rank() != 2) {
    throw DimensionError("encode: patch features must be [R x D_feat], got " +
                         shape_string(patch_features.shape()));
  }
  check_encoder_params(params, config, semantics.num_attributes());
  const auto g = encode_graph(ad::Var::constant(patch_features),
                              ad::Var::constant(semantics.compact_vectors),
                              encoder_constants(params), config);
  return {g.h.value(), g.attention.value(), g.agreement.value(), g.patch_capsules.value()};
}

}  // namespace hrt
