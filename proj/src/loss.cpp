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

#include "hrt/loss.hpp"

#include <algorithm>

#include "hrt/errors.hpp"
#include "hrt/ops.hpp"

namespace hrt {

namespace {

ad::Var row_of(const Tensor& t) { return ad::Var::constant(t.reshaped({1, t.size()})); }

void check_label(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw IndexError("label " + std::to_string(label) + " out of range for " +
                     std::to_string(classes) + " classes");
  }
}

}  // namespace

double cross_entropy(const Tensor& scores, std::size_t label) {
  return loss::cross_entropy(row_of(scores), label).scalar();
}

double calibration_loss(const Tensor& scores, std::size_t label, const Tensor& gamma) {
  return loss::calibration(row_of(scores), label, gamma).scalar();
}

double attribute_regression_loss(const Tensor& psi, const Tensor& z_true) {
  return loss::attribute_regression(row_of(psi), z_true).scalar();
}

std::size_t predict(const Tensor& scores, const Tensor& gamma) {
  if (scores.size() != gamma.size() || scores.empty()) {
    throw DimensionError("predict: scores " + shape_string(scores.shape()) + " vs gamma " +
                         shape_string(gamma.shape()));
  }
  std::size_t best = 0;
  double best_value = scores[0] + gamma[0];
  for (std::size_t c = 1; c < scores.size(); ++c) {
    const double v = scores[c] + gamma[c];
    if (v > best_value) {
      best = c;
      best_value = v;
    }
  }
  return best;
}

GammaProfile gamma_profile(const std::string& name) {
  if (name == "cub" || name == "sun") return {name, -0.5, 1.0};
  if (name == "awa2") return {name, -0.8, 1.0};
  if (name == "zero") return {name, 0.0, 0.0};
  throw ConfigError("unknown gamma profile '" + name + "' (expected cub, sun, awa2 or zero)");
}

Tensor gamma_vector(const GammaProfile& profile, std::size_t num_classes,
                    std::span<const std::size_t> seen_classes) {
  Tensor g({num_classes}, profile.unseen);
  for (auto c : seen_classes) {
    check_label(c, num_classes);
    g[c] = profile.seen;
  }
  return g;
}

void LossConfig::validate(std::size_t num_classes) const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  if (gamma_per_class.size() != num_classes) {
    throw DimensionError("gamma has " + std::to_string(gamma_per_class.size()) + " entries for " +
                         std::to_string(num_classes) + " classes");
  }
  gamma_per_class.require_finite("gamma");
}

namespace loss {

ad::Var cross_entropy(const ad::Var& scores, std::size_t label) {
  check_label(label, scores.cols());
  return ad::neg(ad::pick(ad::log_softmax(scores, 1), 0, label));
}

ad::Var calibration(const ad::Var& scores, std::size_t label, const Tensor& gamma) {
  if (gamma.size() != scores.cols()) {
    throw DimensionError("calibration_loss: " + std::to_string(scores.cols()) + " scores but " +
                         std::to_string(gamma.size()) + " offsets");
  }
  return cross_entropy(scores + row_of(gamma), label);
}

ad::Var attribute_regression(const ad::Var& psi, const Tensor& z_true) {
  if (z_true.size() != psi.value().size()) {
    throw DimensionError("attribute_regression_loss: psi " + shape_string(psi.value().shape()) +
                         " vs target " + shape_string(z_true.shape()));
  }
  return ad::sum_all(ad::square(psi - row_of(z_true)));
}

}  // namespace loss

}  // namespace hrt
