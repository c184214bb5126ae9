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

#ifndef HRT_CAPSULE_HPP
#define HRT_CAPSULE_HPP

#include <cstddef>

#include "hrt/autodiff.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

inline constexpr std::size_t kPrimaryCapsules = 128;
inline constexpr std::size_t kCapsuleDim = 16;

/// A layer of capsules: one pose vector and one activation per capsule.
struct CapsuleSet {
  Tensor poses;        // [N x d]
  Tensor activations;  // [N], each in [0, 1]

  std::size_t count() const { return poses.rows(); }
  std::size_t dim() const { return poses.cols(); }
};

/// How a child pose casts its vote through its transform.
enum class VoteMode {
  // The d-vector is a sqrt(d) x sqrt(d) pose matrix M, vote = M T with T
  // sqrt(d) x sqrt(d). d must be a perfect square.
  kMatrixProduct,
  // The d-vector is a row vector p, vote = p T with T d x d.
  kVectorTransform,
};

/// Rows of the pose matrix for `mode` at capsule width `dim`; throws
/// DimensionError if matrix mode is asked for a non-square width.
std::size_t pose_rows_for(VoteMode mode, std::size_t dim);
/// Side length of each transform for `mode` at capsule width `dim`.
std::size_t transform_side(VoteMode mode, std::size_t dim);

struct EmRoutingParams {
  Tensor transforms;  // [N_child x k x k], k = transform_side(mode, d)
  double beta = 0.0;
  double gamma = 0.0;
  double lambda = 1.0;
  std::size_t iterations = 5;
  double sigma_floor = 1e-6;
  VoteMode mode = VoteMode::kMatrixProduct;
};

struct EmRoutingResult {
  CapsuleSet parent;  // one capsule
  Tensor variance;    // [d], per-coordinate sigma^2 after flooring
  Tensor cost;        // [d]
  Tensor responsibilities;  // [N_child], from the E-step after the last M-step
};

struct InvertedRoutingParams {
  Tensor vote_transforms;  // [A x d x d], one W per parent
  std::size_t iterations = 2;
  double layer_norm_eps = 1e-5;
};

struct InvertedRoutingResult {
  Tensor parents;    // [A x d]
  Tensor agreement;  // [R x A], o_ij from the last iteration
  Tensor routing;    // [R x A], softmax of agreement over parents
};

/// 1x1 projection of one patch feature into primary capsules:
/// poses = reshape(f proj, N, capsule_dim), activations = sigmoid(f act_proj).
CapsuleSet primary_capsules(const Tensor& feature, const Tensor& proj, const Tensor& act_proj,
                            std::size_t capsule_dim = kCapsuleDim);

/// EM routing of all children into a single parent capsule.
EmRoutingResult em_routing(const CapsuleSet& children, const EmRoutingParams& params);

/// Inverted dot-product attention routing from R child capsules to A parents
/// whose state starts at `parent_init`.
InvertedRoutingResult inverted_routing(const Tensor& children, const Tensor& parent_init,
                                       const InvertedRoutingParams& params);

namespace routing {

// Differentiable forms. The value-level functions above evaluate these with
// constant inputs.

struct EmGraphParams {
  ad::Var transforms;  // [N x k*k]
  ad::Var beta;        // [1 x 1]
  ad::Var gamma;       // [1 x 1]
  double lambda = 1.0;
  std::size_t iterations = 5;
  double sigma_floor = 1e-6;
  std::size_t pose_rows = 4;
};

struct EmIteration {
  ad::Var pose;              // [1 x d]
  ad::Var variance;          // [1 x d]
  ad::Var cost;              // [1 x d]
  ad::Var activation;        // [1 x 1]
  ad::Var responsibilities;  // [N x 1], E-step output feeding the next iteration
};

ad::Var em_votes(const ad::Var& poses, const EmGraphParams& params);

/// One M-step on `responsibilities` followed by one E-step.
EmIteration em_iteration(const ad::Var& votes, const ad::Var& activations,
                         const ad::Var& responsibilities, const EmGraphParams& params);

/// `params.iterations` rounds starting from uniform responsibilities.
EmIteration em_routing(const ad::Var& poses, const ad::Var& activations,
                       const EmGraphParams& params);

struct InvertedState {
  ad::Var parents;    // [A x d]
  ad::Var agreement;  // [R x A]
  ad::Var routing;    // [R x A]
};

/// Votes nu_ij = W_j p_i, one [R x d] block per parent.
std::vector<ad::Var> inverted_votes(const ad::Var& children, const ad::Var& vote_transforms);

/// Agreement with the current parents, routing softmax over parents, and the
/// layer-normalized parent update.
InvertedState inverted_iteration(const std::vector<ad::Var>& votes, const ad::Var& parents,
                                 double layer_norm_eps);

InvertedState inverted_routing(const ad::Var& children, const ad::Var& parent_init,
                               const ad::Var& vote_transforms, std::size_t iterations,
                               double layer_norm_eps);

}  // namespace routing

}  // namespace hrt

#endif  // HRT_CAPSULE_HPP
