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

#include "hrt/model.hpp"

#include <algorithm>
#include <cmath>

#include "hrt/errors.hpp"
#include "hrt/ops.hpp"
#include "hrt/rng.hpp"

namespace hrt {

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = {
      "encoder.primary_proj",    "encoder.primary_act", "encoder.em_transforms",
      "encoder.em_beta",         "encoder.em_gamma",    "encoder.vote_transforms",
      "decoder.w_beta",          "decoder.w_d"};
  return names;
}

namespace {

std::vector<Shape> expected_shapes(const ModelConfig& config, const SemanticSpace& semantics) {
  const auto& e = config.encoder;
  const std::size_t k = transform_side(e.vote_mode, e.capsule_dim);
  const std::size_t a = semantics.num_attributes(), tau = semantics.tau();
  return {{e.feature_dim, e.primary_capsules * e.capsule_dim},
          {e.feature_dim, e.primary_capsules},
          {e.primary_capsules, k * k},
          {1, 1},
          {1, 1},
          {a, e.capsule_dim * e.capsule_dim},
          {tau, e.feature_dim},
          {e.feature_dim, tau}};
}

// Fan-in of each group for the uniform initialization.
std::vector<double> fan_ins(const ModelConfig& config, const SemanticSpace& semantics) {
  const auto& e = config.encoder;
  const std::size_t k = transform_side(e.vote_mode, e.capsule_dim);
  return {static_cast<double>(e.feature_dim), static_cast<double>(e.feature_dim),
          static_cast<double>(k),             0.0,
          0.0,                                static_cast<double>(e.capsule_dim),
          static_cast<double>(e.feature_dim), static_cast<double>(semantics.tau())};
}

void check_config(const ModelConfig& config) {
  const auto& e = config.encoder;
  if (e.feature_dim == 0 || e.capsule_dim == 0 || e.primary_capsules == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (e.em_iterations < 1 || e.routing_iterations < 1) {
    throw ConfigError("routing iteration counts must be at least 1");
  }
  if (!(e.sigma_floor > 0.0)) throw ConfigError("sigma_floor must be positive");
  if (!(e.layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
  pose_rows_for(e.vote_mode, e.capsule_dim);
}

}  // namespace

HrtModel HrtModel::create(const ModelConfig& config, const SemanticSpace& semantics) {
  check_config(config);
  semantics.validate();
  HrtModel m;
  m.config_ = config;
  m.semantics_ = semantics;
  const std::optional<Tensor> supplied =
      semantics.compact_vectors.empty() ? std::nullopt : std::optional<Tensor>(semantics.compact_vectors);
  m.semantics_.compact_vectors =
      compact_semantics(semantics.attr_vectors, config.encoder.capsule_dim, config.compaction,
                        supplied, config.factor_analysis);

  SeededRng rng(config.init_seed);
  const auto shapes = expected_shapes(config, semantics);
  const auto fans = fan_ins(config, semantics);
  for (std::size_t g = 0; g < kNumParams; ++g) {
    if (fans[g] == 0.0) {
      m.params_.emplace_back(shapes[g]);
    } else {
      const double bound = 1.0 / std::sqrt(fans[g]);
      m.params_.push_back(rng.uniform_tensor(shapes[g], -bound, bound));
    }
  }
  return m;
}

HrtModel HrtModel::from_parameters(const ModelConfig& config, SemanticSpace semantics,
                                   std::vector<Tensor> params) {
  check_config(config);
  semantics.validate();
  if (semantics.compact_vectors.empty()) {
    throw ConfigError("model semantics must carry compact attribute vectors");
  }
  HrtModel m;
  m.config_ = config;
  m.semantics_ = std::move(semantics);
  m.params_ = std::move(params);
  m.check_parameters();
  return m;
}

void HrtModel::check_parameters() const {
  const auto shapes = expected_shapes(config_, semantics_);
  if (params_.size() != kNumParams) {
    throw DimensionError("model expects " + std::to_string(kNumParams) + " parameter groups, got " +
                         std::to_string(params_.size()));
  }
  for (std::size_t g = 0; g < kNumParams; ++g) {
    if (params_[g].shape() != shapes[g]) {
      throw DimensionError("parameter " + parameter_names()[g] + " has shape " +
                           shape_string(params_[g].shape()) + ", expected " +
                           shape_string(shapes[g]));
    }
    params_[g].require_finite(parameter_names()[g]);
  }
  if (semantics_.compact_vectors.cols() != config_.encoder.capsule_dim) {
    throw DimensionError("compact attribute vectors have width " +
                         std::to_string(semantics_.compact_vectors.cols()) +
                         ", capsule width is " + std::to_string(config_.encoder.capsule_dim));
  }
}

EncoderParams HrtModel::encoder_params() const {
  const auto& e = config_.encoder;
  const std::size_t k = transform_side(e.vote_mode, e.capsule_dim);
  EncoderParams p;
  p.primary_proj = params_[kPrimaryProj];
  p.primary_act = params_[kPrimaryAct];
  p.em_transforms = params_[kEmTransforms].reshaped({e.primary_capsules, k, k});
  p.em_beta = params_[kEmBeta][0];
  p.em_gamma = params_[kEmGamma][0];
  p.vote_transforms =
      params_[kVoteTransforms].reshaped({num_attributes(), e.capsule_dim, e.capsule_dim});
  return p;
}

DecoderParams HrtModel::decoder_params() const { return {params_[kWBeta], params_[kWd]}; }

std::size_t HrtModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void HrtModel::check_compatible(const ZslDataset& dataset) const {
  if (dataset.feature_dim != config_.encoder.feature_dim ||
      dataset.semantics.num_attributes() != num_attributes() ||
      dataset.semantics.tau() != semantics_.tau() || dataset.num_classes() != num_classes()) {
    throw DimensionError(
        "dataset (D_feat=" + std::to_string(dataset.feature_dim) +
        ", A=" + std::to_string(dataset.semantics.num_attributes()) +
        ", tau=" + std::to_string(dataset.semantics.tau()) +
        ", C=" + std::to_string(dataset.num_classes()) + ") does not match model (D_feat=" +
        std::to_string(config_.encoder.feature_dim) + ", A=" + std::to_string(num_attributes()) +
        ", tau=" + std::to_string(semantics_.tau()) + ", C=" + std::to_string(num_classes()) + ")");
  }
}

std::vector<ad::Var> make_leaves(std::span<const Tensor> params, bool track_gradients) {
  std::vector<ad::Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) {
    leaves.push_back(track_gradients ? ad::Var::parameter(p) : ad::Var::constant(p));
  }
  return leaves;
}

ForwardGraph forward_graph(const HrtModel& model, std::span<const ad::Var> leaves,
                           const Tensor& patches) {
  if (leaves.size() != kNumParams) throw DimensionError("forward: wrong number of parameter leaves");
  if (patches.rank() != 2) {
    throw DimensionError("forward: patches must be [R x D_feat], got " + shape_string(patches.shape()));
  }
  const SemanticSpace& sem = model.semantics();
  const EncoderVars enc{leaves[kPrimaryProj], leaves[kPrimaryAct],    leaves[kEmTransforms],
                        leaves[kEmBeta],      leaves[kEmGamma],       leaves[kVoteTransforms]};
  ForwardGraph out;
  out.encoder = encode_graph(ad::Var::constant(patches), ad::Var::constant(sem.compact_vectors), enc,
                             model.config().encoder);
  const ad::Var attr_matrix = ad::Var::constant(transpose(sem.attr_vectors));
  out.gates = decoder::attribute_gates(out.encoder.h, attr_matrix, leaves[kWBeta]);
  out.psi = decoder::content_scores(out.encoder.h, attr_matrix, leaves[kWd]);
  const ad::Var z_tilde =
      decoder::adjusted_class_attributes(out.gates, ad::Var::constant(sem.class_attr));
  out.scores = decoder::class_scores(out.psi, z_tilde);
  return out;
}

ForwardResult forward(const HrtModel& model, const Tensor& patches) {
  const auto leaves = make_leaves(model.parameters(), false);
  const auto g = forward_graph(model, leaves, patches);
  ForwardResult r;
  r.features = {g.encoder.h.value(), g.encoder.attention.value(), g.encoder.agreement.value(),
                g.encoder.patch_capsules.value()};
  r.gates = g.gates.value().reshaped({model.num_attributes()});
  r.psi = g.psi.value().reshaped({model.num_attributes()});
  r.scores = g.scores.value().reshaped({model.num_classes()});
  r.scores.require_finite("class scores");
  return r;
}

LossGraph total_loss_graph(const HrtModel& model, std::span<const ad::Var> leaves,
                           const Tensor& patches, std::size_t label, const LossConfig& config,
                           std::span<const std::size_t> seen_classes) {
  config.validate(model.num_classes());
  if (label >= model.num_classes()) {
    throw IndexError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(model.num_classes()) + " classes");
  }
  LossGraph g;
  g.forward = forward_graph(model, leaves, patches);
  if (config.ce_seen_only) {
    const auto pos = std::lower_bound(seen_classes.begin(), seen_classes.end(), label);
    if (pos == seen_classes.end() || *pos != label) {
      throw IndexError("label " + std::to_string(label) + " is not a seen class");
    }
    g.ce = loss::cross_entropy(ad::gather_cols(g.forward.scores, seen_classes),
                               static_cast<std::size_t>(pos - seen_classes.begin()));
  } else {
    g.ce = loss::cross_entropy(g.forward.scores, label);
  }
  g.cal = loss::calibration(g.forward.scores, label, config.gamma_per_class);
  g.reg = loss::attribute_regression(g.forward.psi, model.semantics().class_attr.row(label));
  g.total = g.ce + ad::scale(g.cal, config.lambda1) + ad::scale(g.reg, config.lambda2);
  if (!std::isfinite(g.total.scalar())) throw EvaluationError("total loss is non-finite");
  return g;
}

namespace {

LossBreakdown breakdown(const LossGraph& g) {
  return {g.ce.scalar(), g.cal.scalar(), g.reg.scalar(), g.total.scalar(),
          g.forward.scores.value().reshaped({g.forward.scores.cols()})};
}

}  // namespace

LossBreakdown total_loss(const HrtModel& model, const Tensor& patches, std::size_t label,
                         const LossConfig& config, std::span<const std::size_t> seen_classes) {
  const auto leaves = make_leaves(model.parameters(), false);
  return breakdown(total_loss_graph(model, leaves, patches, label, config, seen_classes));
}

LossBreakdown total_loss_and_gradient(const HrtModel& model, const Tensor& patches,
                                      std::size_t label, const LossConfig& config,
                                      std::span<const std::size_t> seen_classes,
                                      std::vector<Tensor>& grads) {
  const auto leaves = make_leaves(model.parameters(), true);
  const auto g = total_loss_graph(model, leaves, patches, label, config, seen_classes);
  ad::backward(g.total);
  if (grads.size() != kNumParams) {
    grads.clear();
    for (const auto& p : model.parameters()) grads.emplace_back(p.shape());
  }
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const Tensor& gi = leaves[i].grad();
    if (gi.empty()) continue;
    for (std::size_t j = 0; j < gi.size(); ++j) grads[i][j] += gi[j];
  }
  return breakdown(g);
}

}  // namespace hrt
