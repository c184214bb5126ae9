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

#ifndef HRT_TESTS_ORACLES_HPP
#define HRT_TESTS_ORACLES_HPP

// Reference implementations for tests. Everything here is written with plain
// loops over std::vector (long double or 50-digit floats) and shares no code
// with the library beyond the Tensor container used at the boundary.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrt/dataset.hpp"
#include "hrt/tensor.hpp"

namespace oracle {

using hrt::Tensor;

Tensor matmul(const Tensor& a, const Tensor& b);

/// Softmax / cross-entropy / sigmoid in 50-digit binary floating point.
std::vector<double> softmax(const std::vector<double>& x);
double cross_entropy(const std::vector<double>& scores, std::size_t label);
double calibration_loss(const std::vector<double>& scores, std::size_t label, const std::vector<double>& gamma);
double sigmoid(double x);

struct EmResult {
  std::vector<double> pose;      // [d]
  std::vector<double> variance;  // [d]
  std::vector<double> cost;      // [d]
  double activation = 0.0;
  std::vector<double> responsibilities;  // [N]
};

/// EM routing of N children (poses [N x d], activations [N]) into one
/// parent. Votes are pose-matrix products M_i T_i with M_i of pose_rows rows.
EmResult em_routing(const Tensor& poses, const std::vector<double>& activations, const Tensor& transforms,
                    std::size_t pose_rows, double beta, double gamma, double lambda, std::size_t iterations,
                    double sigma_floor);

struct InvertedResult {
  Tensor parents;    // [A x d]
  Tensor agreement;  // [N x A]
  Tensor routing;    // [N x A]
};

/// Inverted dot-product routing; transforms [A x d x d] (any shape holding A*d*d values).
InvertedResult inverted_routing(const Tensor& children, const Tensor& parent_init, const Tensor& transforms,
                                std::size_t iterations, double eps);

struct EncoderWeights {
  Tensor primary_proj, primary_act, em_transforms, vote_transforms;
  double beta = 0.0, gamma = 0.0;
};

struct EncoderOut {
  Tensor h, attention, agreement, capsules;
};

EncoderOut encode(const Tensor& patches, const Tensor& compact, const EncoderWeights& w, std::size_t capsule_dim,
                  std::size_t pose_rows, std::size_t em_iterations, std::size_t routing_iterations, double lambda,
                  double sigma_floor, double eps);

struct DecoderOut {
  std::vector<double> gates, psi, scores;
  Tensor z_tilde;
};

/// h [D x A], attr_vectors [A x tau], class_attr [C x A], w_beta [tau x D], w_d [D x tau].
DecoderOut decode(const Tensor& h, const Tensor& attr_vectors, const Tensor& class_attr, const Tensor& w_beta,
                  const Tensor& w_d);

struct FaResult {
  Tensor loadings;       // [tau x d]
  Tensor noise;          // [tau]
  Tensor scores;         // [A x d]
  std::vector<double> log_likelihood;
};

/// Factor analysis by the textbook EM updates on the full tau x tau
/// covariance (no Woodbury shortcut), from the given starting point.
FaResult factor_analysis(const Tensor& rows, const Tensor& loadings0, const Tensor& noise0,
                         std::size_t iterations, double floor_ratio);

/// Ridge regression from patch-summed features to class attributes on the
/// train split, then nearest class attribute (Euclidean distance) among the
/// candidate classes. Returns per-class mean accuracy over `split`.
double linear_attribute_oracle(const hrt::ZslDataset& data, hrt::Split split,
                               const std::vector<std::size_t>& candidates, double ridge);

/// Deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed * 0x9e3779b97f4a7c15ULL + 1) {}
  std::uint64_t next();
  double uniform(double lo, double hi);
  std::size_t index(std::size_t lo, std::size_t hi);  // inclusive range
  Tensor tensor(hrt::Shape shape, double lo, double hi);

 private:
  std::uint64_t state_;
};

}  // namespace oracle

#endif  // HRT_TESTS_ORACLES_HPP
