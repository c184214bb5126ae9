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

#ifndef HRT_MODEL_HPP
#define HRT_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrt/autodiff.hpp"
#include "hrt/dataset.hpp"
#include "hrt/decoder.hpp"
#include "hrt/encoder.hpp"
#include "hrt/loss.hpp"
#include "hrt/semantics.hpp"

namespace hrt {

struct ModelConfig {
  EncoderConfig encoder;
  CompactionMethod compaction = CompactionMethod::kFactorAnalysis;
  FactorAnalysisOptions factor_analysis;
  std::uint64_t init_seed = 0;
};

/// Parameter groups in their canonical (matrix) storage order.
enum ParamIndex : std::size_t {
  kPrimaryProj = 0,  // [D_feat x P*d]
  kPrimaryAct,       // [D_feat x P]
  kEmTransforms,     // [P x k*k]
  kEmBeta,           // [1 x 1]
  kEmGamma,          // [1 x 1]
  kVoteTransforms,   // [A x d*d]
  kWBeta,            // [tau x D_feat]
  kWd,               // [D_feat x tau]
  kNumParams
};

const std::vector<std::string>& parameter_names();

/// Encoder and decoder parameters plus the cached semantic space.
class HrtModel {
 public:
  HrtModel() = default;

  /// Seeded initialization. Weight matrices are drawn from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)); beta and gamma start at 0. The
  /// compact attribute vectors are computed here once and cached.
  static HrtModel create(const ModelConfig& config, const SemanticSpace& semantics);

  /// Rebuild from stored parameters (checkpoint load).
  static HrtModel from_parameters(const ModelConfig& config, SemanticSpace semantics,
                                  std::vector<Tensor> params);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  const SemanticSpace& semantics() const { return semantics_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::vector<Tensor>& mutable_parameters() { return params_; }

  EncoderParams encoder_params() const;
  DecoderParams decoder_params() const;

  std::size_t num_classes() const { return semantics_.num_classes(); }
  std::size_t num_attributes() const { return semantics_.num_attributes(); }
  std::size_t parameter_count() const;

  /// Throws DimensionError if `dataset` does not fit this model.
  void check_compatible(const ZslDataset& dataset) const;

 private:
  void check_parameters() const;

  ModelConfig config_;
  SemanticSpace semantics_;
  std::vector<Tensor> params_;
};

/// Graph leaves for every parameter group.
std::vector<ad::Var> make_leaves(std::span<const Tensor> params, bool track_gradients);

struct ForwardGraph {
  EncoderGraph encoder;
  ad::Var gates;   // [1 x A]
  ad::Var psi;     // [1 x A]
  ad::Var scores;  // [1 x C]
};

ForwardGraph forward_graph(const HrtModel& model, std::span<const ad::Var> leaves,
                           const Tensor& patches);

struct ForwardResult {
  AlignedFeatures features;
  Tensor gates;   // [A]
  Tensor psi;     // [A]
  Tensor scores;  // [C]
};

ForwardResult forward(const HrtModel& model, const Tensor& patches);

struct LossBreakdown {
  double ce = 0.0;
  double cal = 0.0;
  double reg = 0.0;
  double total = 0.0;
  Tensor scores;  // [C]
};

struct LossGraph {
  ForwardGraph forward;
  ad::Var ce;
  ad::Var cal;
  ad::Var reg;
  ad::Var total;
};

/// L = L_ce + lambda1 L_cal + lambda2 L_reg for one labelled sample.
/// `seen_classes` (ascending) restricts L_ce when config.ce_seen_only.
LossGraph total_loss_graph(const HrtModel& model, std::span<const ad::Var> leaves,
                           const Tensor& patches, std::size_t label, const LossConfig& config,
                           std::span<const std::size_t> seen_classes);

LossBreakdown total_loss(const HrtModel& model, const Tensor& patches, std::size_t label,
                         const LossConfig& config, std::span<const std::size_t> seen_classes);

/// total_loss plus d(total)/d(param) added into `grads` (one tensor per
/// group, same shapes as the parameters).
LossBreakdown total_loss_and_gradient(const HrtModel& model, const Tensor& patches,
                                      std::size_t label, const LossConfig& config,
                                      std::span<const std::size_t> seen_classes,
                                      std::vector<Tensor>& grads);

}  // namespace hrt

#endif  // HRT_MODEL_HPP
