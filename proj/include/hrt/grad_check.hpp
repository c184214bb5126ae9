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

#ifndef HRT_GRAD_CHECK_HPP
#define HRT_GRAD_CHECK_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hrt/autodiff.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, abs_floor),
  // so entries whose true gradient is ~0 are compared on an absolute scale.
  double abs_floor = 1e-6;
};

struct GradGroupReport {
  std::string name;
  std::size_t count = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double max_abs_gradient = 0.0;
};

struct GradCheckReport {
  std::vector<GradGroupReport> groups;
  double max_rel_error = 0.0;
  bool passed = false;
};

using ScalarObjective = std::function<double(const std::vector<Tensor>&)>;
using GradientFn = std::function<std::vector<Tensor>(const std::vector<Tensor>&)>;

/// Compares `gradient(params)` entry by entry against central differences of
/// `objective`. Throws EvaluationError if the objective is non-finite at any
/// probe point.
GradCheckReport grad_check(const ScalarObjective& objective, const GradientFn& gradient,
                           const std::vector<Tensor>& params, const std::vector<std::string>& names,
                           const GradCheckOptions& options = {});

/// Builds the scalar graph from parameter leaves.
using GraphBuilder = std::function<ad::Var(std::span<const ad::Var>)>;

/// grad_check where both the objective and the analytic gradient come from a
/// graph built by `build` (the gradient through reverse-mode accumulation).
GradCheckReport grad_check_graph(const GraphBuilder& build, const std::vector<Tensor>& params,
                                 const std::vector<std::string>& names,
                                 const GradCheckOptions& options = {});

}  // namespace hrt

#endif  // HRT_GRAD_CHECK_HPP
