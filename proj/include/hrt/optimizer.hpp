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

#ifndef HRT_OPTIMIZER_HPP
#define HRT_OPTIMIZER_HPP

#include <vector>

#include "hrt/tensor.hpp"

namespace hrt {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double rho = 0.99;  // smoothing of the squared-gradient average
  double eps = 1e-8;

  void validate() const;
};

/// RMSprop with a separate momentum buffer and decoupled weight decay:
///
///   acc <- rho acc + (1 - rho) g^2
///   buf <- momentum buf + g / (sqrt(acc) + eps)
///   w   <- w - lr (buf + weight_decay w)
class RmsProp {
 public:
  explicit RmsProp(OptimizerConfig config = {}) : config_(config) { config_.validate(); }

  const OptimizerConfig& config() const { return config_; }
  const std::vector<Tensor>& square_averages() const { return square_avg_; }
  const std::vector<Tensor>& momentum_buffers() const { return momentum_; }

  /// Throws EvaluationError (leaving params and state untouched) if any
  /// gradient entry is non-finite.
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

 private:
  OptimizerConfig config_;
  std::vector<Tensor> square_avg_;
  std::vector<Tensor> momentum_;
};

}  // namespace hrt

#endif  // HRT_OPTIMIZER_HPP
