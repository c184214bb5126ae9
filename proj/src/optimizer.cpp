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

#include "hrt/optimizer.hpp"

#include <cmath>

#include "hrt/errors.hpp"

namespace hrt {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

void RmsProp::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) {
    throw DimensionError("optimizer: " + std::to_string(params.size()) + " parameter groups but " +
                         std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t g = 0; g < params.size(); ++g) {
    if (params[g].shape() != grads[g].shape()) {
      throw DimensionError("optimizer: gradient " + std::to_string(g) + " has shape " +
                           shape_string(grads[g].shape()) + ", parameter has " +
                           shape_string(params[g].shape()));
    }
    for (std::size_t i = 0; i < grads[g].size(); ++i) {
      if (!std::isfinite(grads[g][i])) {
        throw EvaluationError("optimizer: non-finite gradient in group " + std::to_string(g) +
                              " at index " + std::to_string(i) + "; step aborted");
      }
    }
  }
  if (square_avg_.empty()) {
    for (const auto& p : params) {
      square_avg_.emplace_back(p.shape());
      momentum_.emplace_back(p.shape());
    }
  }
  const auto& c = config_;
  for (std::size_t g = 0; g < params.size(); ++g) {
    Tensor& w = params[g];
    Tensor& acc = square_avg_[g];
    Tensor& buf = momentum_[g];
    const Tensor& grad = grads[g];
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc[i] = c.rho * acc[i] + (1.0 - c.rho) * grad[i] * grad[i];
      buf[i] = c.momentum * buf[i] + grad[i] / (std::sqrt(acc[i]) + c.eps);
      w[i] -= c.learning_rate * (buf[i] + c.weight_decay * w[i]);
    }
  }
}

}  // namespace hrt
