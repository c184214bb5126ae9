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

#ifndef HRT_OPS_HPP
#define HRT_OPS_HPP

#include <cstddef>

#include "hrt/tensor.hpp"

namespace hrt {

inline constexpr double kDefaultLayerNormEps = 1e-5;

/// Matrix product with a fixed left-to-right summation over the inner extent.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Numerically stable softmax along `axis` (max-subtracted).
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x, std::size_t axis);

double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
/// log(sigmoid(x)) without underflow for large negative x.
double log_sigmoid(double x);

/// (x - mean) / sqrt(var + eps) over all entries of `x` (population variance,
/// no affine terms).
Tensor layer_norm(const Tensor& x, double eps = kDefaultLayerNormEps);
/// layer_norm applied to every row of a matrix independently.
Tensor layer_norm_rows(const Tensor& x, double eps = kDefaultLayerNormEps);

double log_sum_exp(const Tensor& x);

}  // namespace hrt

#endif  // HRT_OPS_HPP
