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

#ifndef HRT_DECODER_HPP
#define HRT_DECODER_HPP

#include "hrt/autodiff.hpp"
#include "hrt/encoder.hpp"
#include "hrt/semantics.hpp"
#include "hrt/tensor.hpp"

namespace hrt {

struct DecoderParams {
  Tensor w_beta;  // [tau x D_feat]
  Tensor w_d;     // [D_feat x tau]
};

void check_decoder_params(const DecoderParams& params, std::size_t tau, std::size_t feature_dim);

/// z~^c_a = sigmoid(v_a^T W_beta h_a) * z^c_a. Returns [C x A].
Tensor adjust_class_attributes(const AlignedFeatures& features, const SemanticSpace& semantics,
                               const DecoderParams& params);

/// psi_a = h_a^T W_d v_a. Returns [A].
Tensor content_attribute_scores(const AlignedFeatures& features, const SemanticSpace& semantics,
                                const DecoderParams& params);

/// s^c = sum_a psi_a z~^c_a. Returns [C].
Tensor class_scores(const Tensor& psi, const Tensor& z_tilde);

namespace decoder {

// Graph forms. `attr_matrix` is Lambda = [v_1 ... v_A], shape [tau x A].

ad::Var attribute_gates(const ad::Var& h, const ad::Var& attr_matrix, const ad::Var& w_beta);
ad::Var content_scores(const ad::Var& h, const ad::Var& attr_matrix, const ad::Var& w_d);
ad::Var adjusted_class_attributes(const ad::Var& gates, const ad::Var& class_attr);
ad::Var class_scores(const ad::Var& psi, const ad::Var& z_tilde);

}  // namespace decoder

}  // namespace hrt

#endif  // HRT_DECODER_HPP
