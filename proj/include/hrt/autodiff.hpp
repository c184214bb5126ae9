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

#ifndef HRT_AUTODIFF_HPP
#define HRT_AUTODIFF_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hrt/ops.hpp"
#include "hrt/tensor.hpp"

// Minimal reverse-mode differentiation over matrices.
//
// Every Var holds a rank-2 tensor. Graph nodes are created eagerly by the
// operations below; a node keeps its parents and a backward closure only if
// at least one input requires a gradient, so evaluating with constants alone
// builds no graph. Gradients of leaf parameters accumulate across calls to
// backward() until zero_grad().

namespace hrt::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward;

  /// Adds `g` into this node's gradient (allocating it on first use).
  void accumulate(const Tensor& g);
};

class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  static Var parameter(Tensor value);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  double scalar() const;
  void zero_grad();

  const NodePtr& node() const { return node_; }

  /// Result of an operation; attaches `parents` and `backward` only when a
  /// parent requires a gradient.
  static Var from_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

 private:
  explicit Var(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

/// Reverse sweep from a 1x1 root, seeding d(root)/d(root) = 1.
void backward(const Var& root);

// Broadcasting binary ops: extents must match or be 1 (numpy rules, rank 2).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }

Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);
Var neg(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sigmoid(const Var& a);
Var log_sigmoid(const Var& a);
Var square(const Var& a);
Var sqrt(const Var& a);
/// max(a, floor) elementwise; zero gradient where the floor is active.
Var clamp_min(const Var& a, double floor);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, std::size_t rows, std::size_t cols);
Var slice_rows(const Var& a, std::size_t begin, std::size_t count);
Var slice_cols(const Var& a, std::size_t begin, std::size_t count);
Var gather_cols(const Var& a, std::span<const std::size_t> columns);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var pick(const Var& a, std::size_t row, std::size_t col);

Var sum_rows(const Var& a);  // [m x n] -> [1 x n]
Var sum_cols(const Var& a);  // [m x n] -> [m x 1]
Var sum_all(const Var& a);   // -> [1 x 1]

Var softmax(const Var& a, std::size_t axis);
Var log_softmax(const Var& a, std::size_t axis);
Var layer_norm_rows(const Var& a, double eps = kDefaultLayerNormEps);

/// Per-row pose transform used for capsule votes.
///
/// Row i of `poses` is read as a [pose_rows x k] matrix M_i (k = d /
/// pose_rows); row i of `transforms` as a [k x k] matrix T_i. Output row i is
/// vec(M_i T_i). pose_rows = 1 gives the vector-transform reading p_i T_i.
Var capsule_votes(const Var& poses, const Var& transforms, std::size_t pose_rows);

}  // namespace hrt::ad

#endif  // HRT_AUTODIFF_HPP
