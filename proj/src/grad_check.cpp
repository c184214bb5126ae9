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

#include "hrt/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "hrt/errors.hpp"

namespace hrt {

namespace {

double probe(const ScalarObjective& objective, const std::vector<Tensor>& params) {
  const double v = objective(params);
  if (!std::isfinite(v)) throw EvaluationError("grad_check: objective is non-finite at a probe point");
  return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarObjective& objective, const GradientFn& gradient,
                           const std::vector<Tensor>& params, const std::vector<std::string>& names,
                           const GradCheckOptions& options) {
  if (names.size() != params.size()) {
    throw DimensionError("grad_check: " + std::to_string(params.size()) + " parameter groups but " +
                         std::to_string(names.size()) + " names");
  }
  probe(objective, params);
  const std::vector<Tensor> analytic = gradient(params);
  if (analytic.size() != params.size()) {
    throw DimensionError("grad_check: gradient returned the wrong number of groups");
  }

  GradCheckReport report;
  std::vector<Tensor> work = params;
  const double h = options.step;
  for (std::size_t g = 0; g < params.size(); ++g) {
    if (analytic[g].shape() != params[g].shape()) {
      throw DimensionError("grad_check: gradient for '" + names[g] + "' has shape " +
                           shape_string(analytic[g].shape()) + ", expected " +
                           shape_string(params[g].shape()));
    }
    GradGroupReport group{names[g], params[g].size()};
    for (std::size_t i = 0; i < params[g].size(); ++i) {
      const double original = work[g][i];
      work[g][i] = original + h;
      const double up = probe(objective, work);
      work[g][i] = original - h;
      const double down = probe(objective, work);
      work[g][i] = original;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[g][i];
      const double abs_err = std::abs(a - numeric);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      group.max_abs_error = std::max(group.max_abs_error, abs_err);
      group.max_rel_error = std::max(group.max_rel_error, abs_err / denom);
      group.max_abs_gradient = std::max(group.max_abs_gradient, std::abs(a));
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(std::move(group));
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

GradCheckReport grad_check_graph(const GraphBuilder& build, const std::vector<Tensor>& params,
                                 const std::vector<std::string>& names,
                                 const GradCheckOptions& options) {
  auto objective = [&](const std::vector<Tensor>& values) {
    std::vector<ad::Var> leaves;
    leaves.reserve(values.size());
    for (const auto& v : values) leaves.push_back(ad::Var::constant(v));
    return build(leaves).scalar();
  };
  auto gradient = [&](const std::vector<Tensor>& values) {
    std::vector<ad::Var> leaves;
    leaves.reserve(values.size());
    for (const auto& v : values) leaves.push_back(ad::Var::parameter(v));
    ad::backward(build(leaves));
    std::vector<Tensor> grads;
    grads.reserve(values.size());
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      // Leaves the loss never touches get an explicit zero gradient.
      grads.push_back(leaves[i].grad().empty() ? Tensor(leaves[i].value().shape())
                                               : leaves[i].grad().reshaped(values[i].shape()));
    }
    return grads;
  };
  return grad_check(objective, gradient, params, names, options);
}

}  // namespace hrt
