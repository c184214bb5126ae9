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

#ifndef HRT_LOSS_HPP
#define HRT_LOSS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hrt/autodiff.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

/// -log softmax(s)[label], log-sum-exp form.
double cross_entropy(const Tensor& scores, std::size_t label);

/// Cross-entropy of the offset scores s + gamma.
double calibration_loss(const Tensor& scores, std::size_t label, const Tensor& gamma);

/// Squared Euclidean distance between psi and the true class attributes.
double attribute_regression_loss(const Tensor& psi, const Tensor& z_true);

/// argmax_c (s^c + gamma_c); ties go to the lowest class index.
std::size_t predict(const Tensor& scores, const Tensor& gamma);

/// Per-class calibration offsets for seen and unseen classes.
struct GammaProfile {
  std::string name = "cub";
  double seen = -0.5;
  double unseen = 1.0;
};

/// "cub" / "sun": seen -0.5, unseen +1. "awa2": seen -0.8, unseen +1.
/// "zero": no offsets.
GammaProfile gamma_profile(const std::string& name);

/// gamma_c for every class: profile.seen for listed seen classes, profile.unseen otherwise.
Tensor gamma_vector(const GammaProfile& profile, std::size_t num_classes,
                    std::span<const std::size_t> seen_classes);

struct LossConfig {
  double lambda1 = 0.1;    // calibration weight
  double lambda2 = 0.033;  // attribute regression weight
  Tensor gamma_per_class;  // [C]
  // Cross-entropy over seen-class scores only; the calibration term always
  // spans every class.
  bool ce_seen_only = true;

  void validate(std::size_t num_classes) const;
};

namespace loss {

ad::Var cross_entropy(const ad::Var& scores, std::size_t label);
ad::Var calibration(const ad::Var& scores, std::size_t label, const Tensor& gamma);
ad::Var attribute_regression(const ad::Var& psi, const Tensor& z_true);

}  // namespace loss

}  // namespace hrt

#endif  // HRT_LOSS_HPP
