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

#include "hrt/decoder.hpp"

#include "hrt/errors.hpp"
#include "hrt/ops.hpp"

namespace hrt {

void check_decoder_params(const DecoderParams& params, std::size_t tau, std::size_t feature_dim) {
  if (params.w_beta.shape() != Shape{tau, feature_dim} ||
      params.w_d.shape() != Shape{feature_dim, tau}) {
    throw DimensionError("decoder parameters W_beta " + shape_string(params.w_beta.shape()) +
                         " and W_d " + shape_string(params.w_d.shape()) + " do not fit tau=" +
                         std::to_string(tau) + ", D_feat=" + std::to_string(feature_dim));
  }
}

namespace {

struct DecoderInputs {
  ad::Var h;
  ad::Var attr_matrix;
};

DecoderInputs decoder_inputs(const AlignedFeatures& features, const SemanticSpace& semantics,
                             const DecoderParams& params) {
  const Tensor& h = features.h;
  if (h.rank() != 2 || h.cols() != semantics.num_attributes()) {
    throw DimensionError("decoder: aligned features " + shape_string(h.shape()) + " for " +
                         std::to_string(semantics.num_attributes()) + " attributes");
  }
  check_decoder_params(params, semantics.tau(), h.rows());
  return {ad::Var::constant(h), ad::Var::constant(transpose(semantics.attr_vectors))};
}

}  // namespace

Tensor adjust_class_attributes(const AlignedFeatures& features, const SemanticSpace& semantics,
                               const DecoderParams& params) {
  const auto in = decoder_inputs(features, semantics, params);
  const auto gates = decoder::attribute_gates(in.h, in.attr_matrix, ad::Var::constant(params.w_beta));
  return decoder::adjusted_class_attributes(gates, ad::Var::constant(semantics.class_attr)).value();
}

Tensor content_attribute_scores(const AlignedFeatures& features, const SemanticSpace& semantics,
                                const DecoderParams& params) {
  const auto in = decoder_inputs(features, semantics, params);
  const auto psi = decoder::content_scores(in.h, in.attr_matrix, ad::Var::constant(params.w_d));
  return psi.value().reshaped({semantics.num_attributes()});
}

Tensor class_scores(const Tensor& psi, const Tensor& z_tilde) {
  if (z_tilde.rank() != 2 || psi.size() != z_tilde.cols()) {
    throw DimensionError("class_scores: psi " + shape_string(psi.shape()) +
                         " does not match adjusted class attributes " +
                         shape_string(z_tilde.shape()));
  }
  const auto s = decoder::class_scores(ad::Var::constant(psi.reshaped({1, psi.size()})),
                                       ad::Var::constant(z_tilde));
  return s.value().reshaped({z_tilde.rows()});
}

namespace decoder {

ad::Var attribute_gates(const ad::Var& h, const ad::Var& attr_matrix, const ad::Var& w_beta) {
  // Diagonal of Lambda^T W_beta H: column a of (W_beta H) dotted with v_a.
  return ad::sigmoid(ad::sum_rows(attr_matrix * ad::matmul(w_beta, h)));
}

ad::Var content_scores(const ad::Var& h, const ad::Var& attr_matrix, const ad::Var& w_d) {
  // Diagonal of H^T W_d Lambda.
  return ad::sum_rows(h * ad::matmul(w_d, attr_matrix));
}

ad::Var adjusted_class_attributes(const ad::Var& gates, const ad::Var& class_attr) {
  if (gates.cols() != class_attr.cols()) {
    throw DimensionError("adjust_class_attributes: " + std::to_string(gates.cols()) +
                         " gates for class attributes of width " + std::to_string(class_attr.cols()));
  }
  return class_attr * gates;
}

ad::Var class_scores(const ad::Var& psi, const ad::Var& z_tilde) {
  return ad::matmul(psi, ad::transpose(z_tilde));
}

}  // namespace decoder

}  // namespace hrt
