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

#ifndef HRT_SEMANTICS_HPP
#define HRT_SEMANTICS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hrt/tensor.hpp"

namespace hrt {

/// Attribute semantics and class descriptions shared by encoder and decoder.
struct SemanticSpace {
  Tensor attr_vectors;     // [A x tau], one semantic vector v_a per attribute
  Tensor compact_vectors;  // [A x d], compacted v_a; empty until compacted
  Tensor class_attr;       // [C x A], row c is the class attribute vector z^c
  std::vector<std::string> attribute_names;

  std::size_t num_attributes() const { return attr_vectors.rows(); }
  std::size_t tau() const { return attr_vectors.cols(); }
  std::size_t num_classes() const { return class_attr.rows(); }

  /// Throws DimensionError / EvaluationError on a malformed space.
  void validate() const;
};

enum class CompactionMethod { kFactorAnalysis, kPca, kPrecomputed };

CompactionMethod parse_compaction_method(const std::string& name);
std::string to_string(CompactionMethod method);

struct FactorAnalysisOptions {
  std::size_t iterations = 50;
  // Noise variances are kept above ratio * mean(diag(S)).
  double noise_floor_ratio = 1e-6;
  std::uint64_t init_seed = 0;
};

struct FactorAnalysisFit {
  Tensor mean;            // [tau]
  Tensor loadings;        // [tau x d]
  Tensor noise_variance;  // [tau]
  Tensor scores;          // [A x d], posterior factor means per row
  // Log-likelihood of the centered rows before each EM update, plus the final
  // value: iterations + 1 entries.
  std::vector<double> log_likelihood;
};

/// Starting point of the factor-analysis EM: noise = diag(S), loadings drawn
/// from SeededRng(init_seed) as N(0, S_ii / d).
void factor_analysis_init(const Tensor& covariance, std::size_t factors, std::uint64_t init_seed,
                          Tensor& loadings, Tensor& noise_variance);

/// d-factor model x = L f + e, f ~ N(0, I), e ~ N(0, diag(psi)), fitted by EM
/// to the centered rows of `rows`.
FactorAnalysisFit fit_factor_analysis(const Tensor& rows, std::size_t factors,
                                      const FactorAnalysisOptions& options = {});

/// Top-d principal component scores of the centered rows. Each component's
/// sign is fixed so that its largest-magnitude loading is positive.
Tensor pca_scores(const Tensor& rows, std::size_t components);

/// Reduce attribute vectors [A x tau] to [A x d].
Tensor compact_semantics(const Tensor& attr_vectors, std::size_t d, CompactionMethod method,
                         const std::optional<Tensor>& precomputed = std::nullopt,
                         const FactorAnalysisOptions& fa_options = {});

}  // namespace hrt

#endif  // HRT_SEMANTICS_HPP
