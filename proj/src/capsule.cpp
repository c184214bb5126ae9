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

#include "hrt/capsule.hpp"

#include <cmath>
#include <numbers>

#include "hrt/errors.hpp"
#include "hrt/ops.hpp"

namespace hrt {

std::size_t pose_rows_for(VoteMode mode, std::size_t dim) {
  if (mode == VoteMode::kVectorTransform) return 1;
  const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
  if (side * side != dim) {
    throw DimensionError("matrix-product votes need a square capsule width, got " +
                         std::to_string(dim));
  }
  return side;
}

std::size_t transform_side(VoteMode mode, std::size_t dim) {
  return mode == VoteMode::kVectorTransform ? dim : pose_rows_for(mode, dim);
}

CapsuleSet primary_capsules(const Tensor& feature, const Tensor& proj, const Tensor& act_proj,
                            std::size_t capsule_dim) {
  const Tensor f = feature.reshaped({1, feature.size()});
  if (proj.rank() != 2 || act_proj.rank() != 2 || proj.rows() != f.cols() ||
      act_proj.rows() != f.cols() || capsule_dim == 0 ||
      proj.cols() != act_proj.cols() * capsule_dim) {
    throw DimensionError("primary_capsules: feature " + shape_string(feature.shape()) + ", proj " +
                         shape_string(proj.shape()) + ", act_proj " +
                         shape_string(act_proj.shape()) + ", capsule_dim " +
                         std::to_string(capsule_dim));
  }
  const std::size_t n = act_proj.cols();
  CapsuleSet out;
  out.poses = matmul(f, proj).reshaped({n, capsule_dim});
  out.activations = sigmoid(matmul(f, act_proj)).reshaped({n});
  return out;
}

namespace {

void check_capsules(const CapsuleSet& c) {
  if (c.poses.rank() != 2 || c.activations.size() != c.poses.rows()) {
    throw DimensionError("capsule set poses " + shape_string(c.poses.shape()) +
                         " do not match activations " + shape_string(c.activations.shape()));
  }
}

}  // namespace

EmRoutingResult em_routing(const CapsuleSet& children, const EmRoutingParams& params) {
  check_capsules(children);
  if (params.iterations < 1) throw ConfigError("em_routing needs at least one iteration");
  if (!(params.sigma_floor > 0.0)) throw ConfigError("em_routing sigma_floor must be positive");
  const std::size_t n = children.count(), d = children.dim();
  const std::size_t k = transform_side(params.mode, d);
  if (params.transforms.size() != n * k * k || params.transforms.dim(0) != n) {
    throw DimensionError("em_routing: transforms " + shape_string(params.transforms.shape()) +
                         " for " + std::to_string(n) + " children of width " + std::to_string(d));
  }
  routing::EmGraphParams g;
  g.transforms = ad::Var::constant(params.transforms.reshaped({n, k * k}));
  g.beta = ad::Var::constant(Tensor({1, 1}, params.beta));
  g.gamma = ad::Var::constant(Tensor({1, 1}, params.gamma));
  g.lambda = params.lambda;
  g.iterations = params.iterations;
  g.sigma_floor = params.sigma_floor;
  g.pose_rows = pose_rows_for(params.mode, d);

  const auto it = routing::em_routing(ad::Var::constant(children.poses),
                                      ad::Var::constant(children.activations.reshaped({n, 1})), g);
  EmRoutingResult out;
  out.parent.poses = it.pose.value();
  out.parent.activations = it.activation.value().reshaped({1});
  out.variance = it.variance.value().reshaped({d});
  out.cost = it.cost.value().reshaped({d});
  out.responsibilities = it.responsibilities.value().reshaped({n});
  return out;
}

InvertedRoutingResult inverted_routing(const Tensor& children, const Tensor& parent_init,
                                       const InvertedRoutingParams& params) {
  if (children.empty() || parent_init.empty()) {
    throw DimensionError("inverted_routing needs at least one child and one parent");
  }
  if (params.iterations < 1) throw ConfigError("inverted_routing needs at least one iteration");
  const std::size_t a = parent_init.rows(), d = parent_init.cols();
  if (children.cols() != d || params.vote_transforms.size() != a * d * d ||
      params.vote_transforms.dim(0) != a) {
    throw DimensionError("inverted_routing: children " + shape_string(children.shape()) +
                         ", parents " + shape_string(parent_init.shape()) + ", transforms " +
                         shape_string(params.vote_transforms.shape()));
  }
  const auto st = routing::inverted_routing(
      ad::Var::constant(children), ad::Var::constant(parent_init),
      ad::Var::constant(params.vote_transforms.reshaped({a, d * d})), params.iterations,
      params.layer_norm_eps);
  return {st.parents.value(), st.agreement.value(), st.routing.value()};
}

namespace routing {

ad::Var em_votes(const ad::Var& poses, const EmGraphParams& params) {
  return ad::capsule_votes(poses, params.transforms, params.pose_rows);
}

EmIteration em_iteration(const ad::Var& votes, const ad::Var& activations,
                         const ad::Var& responsibilities, const EmGraphParams& params) {
  using namespace ad;
  // M-step: activation- and responsibility-weighted Gaussian fit of the votes.
  const Var weights = responsibilities * activations;
  const Var weight_sum = sum_all(weights);
  const Var mean = sum_rows(weights * votes) / weight_sum;
  const Var diff = votes - mean;
  const Var variance =
      clamp_min(sum_rows(weights * square(diff)) / weight_sum, params.sigma_floor);
  // ln P^h_{i|j} = -0.5 ln(2 pi sigma^2) - (O - mu)^2 / (2 sigma^2)
  const Var log_density =
      scale(log(scale(variance, 2.0 * std::numbers::pi)), -0.5) - square(diff) / scale(variance, 2.0);
  const Var cost = neg(sum_rows(responsibilities * log_density));
  cost.value().require_finite("em_routing cost");
  const Var logit =
      scale(params.beta - params.gamma * sum_all(responsibilities) - sum_all(cost), params.lambda);

  // E-step: r_ij proportional to a_j P_{i|j}, normalized over parents.
  const Var assign_logits = log_sigmoid(logit) + sum_cols(log_density);
  EmIteration out;
  out.pose = mean;
  out.variance = variance;
  out.cost = cost;
  out.activation = sigmoid(logit);
  out.responsibilities = softmax(assign_logits, 1);
  return out;
}

EmIteration em_routing(const ad::Var& poses, const ad::Var& activations,
                       const EmGraphParams& params) {
  if (params.iterations < 1) throw ConfigError("em_routing needs at least one iteration");
  const ad::Var votes = em_votes(poses, params);
  // Uniform start: 1 / (number of parents), and there is one parent.
  ad::Var r = ad::Var::constant(Tensor::matrix(poses.rows(), 1, 1.0));
  EmIteration it;
  for (std::size_t t = 0; t < params.iterations; ++t) {
    it = em_iteration(votes, activations, r, params);
    r = it.responsibilities;
  }
  return it;
}

std::vector<ad::Var> inverted_votes(const ad::Var& children, const ad::Var& vote_transforms) {
  const std::size_t a = vote_transforms.rows(), d = children.cols();
  if (vote_transforms.cols() != d * d) {
    throw DimensionError("inverted_votes: transforms " + shape_string(vote_transforms.value().shape()) +
                         " for capsules of width " + std::to_string(d));
  }
  std::vector<ad::Var> votes;
  votes.reserve(a);
  for (std::size_t j = 0; j < a; ++j) {
    const ad::Var w = ad::reshape(ad::slice_rows(vote_transforms, j, 1), d, d);
    // Row i is (W_j p_i)^T = p_i^T W_j^T.
    votes.push_back(ad::matmul(children, ad::transpose(w)));
  }
  return votes;
}

InvertedState inverted_iteration(const std::vector<ad::Var>& votes, const ad::Var& parents,
                                 double layer_norm_eps) {
  const std::size_t a = votes.size();
  if (parents.rows() != a) {
    throw DimensionError("inverted_iteration: " + std::to_string(a) + " vote blocks for " +
                         std::to_string(parents.rows()) + " parents");
  }
  std::vector<ad::Var> columns;
  columns.reserve(a);
  for (std::size_t j = 0; j < a; ++j) {
    columns.push_back(ad::matmul(votes[j], ad::transpose(ad::slice_rows(parents, j, 1))));
  }
  InvertedState st;
  st.agreement = ad::concat_cols(columns);
  st.routing = ad::softmax(st.agreement, 1);
  std::vector<ad::Var> sums;
  sums.reserve(a);
  for (std::size_t j = 0; j < a; ++j) {
    sums.push_back(ad::matmul(ad::transpose(ad::slice_cols(st.routing, j, 1)), votes[j]));
  }
  st.parents = ad::layer_norm_rows(ad::concat_rows(sums), layer_norm_eps);
  return st;
}

InvertedState inverted_routing(const ad::Var& children, const ad::Var& parent_init,
                               const ad::Var& vote_transforms, std::size_t iterations,
                               double layer_norm_eps) {
  if (iterations < 1) throw ConfigError("inverted_routing needs at least one iteration");
  if (children.cols() != parent_init.cols()) {
    throw DimensionError("inverted_routing: child capsules of width " +
                         std::to_string(children.cols()) + " but parents of width " +
                         std::to_string(parent_init.cols()));
  }
  const auto votes = inverted_votes(children, vote_transforms);
  InvertedState st{parent_init, {}, {}};
  for (std::size_t t = 0; t < iterations; ++t) st = inverted_iteration(votes, st.parents, layer_norm_eps);
  return st;
}

}  // namespace routing

}  // namespace hrt
