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

#include "hrt/autodiff.hpp"

#include <cmath>
#include <unordered_set>

#include "hrt/errors.hpp"

namespace hrt::ad {

void Node::accumulate(const Tensor& g) {
  if (grad.empty()) {
    grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

namespace {

Tensor as_matrix(Tensor t) {
  if (t.rank() == 2) return t;
  if (t.rank() == 1) return t.reshaped({1, t.size()});
  throw DimensionError("autodiff values must be rank 1 or 2, got " + shape_string(t.shape()));
}

}  // namespace

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = as_matrix(std::move(value));
  return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = as_matrix(std::move(value));
  node->requires_grad = true;
  return Var(std::move(node));
}

double Var::scalar() const {
  if (node_->value.size() != 1) {
    throw DimensionError("scalar() on a " + shape_string(node_->value.shape()) + " value");
  }
  return node_->value[0];
}

void Var::zero_grad() { node_->grad = Tensor(); }

Var Var::from_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const auto& p : parents) {
    if (p.requires_grad()) {
      node->requires_grad = true;
      break;
    }
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

void backward(const Var& root) {
  if (!root.requires_grad()) return;
  if (root.value().size() != 1) {
    throw DimensionError("backward() needs a scalar root, got " +
                         shape_string(root.value().shape()));
  }
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->accumulate(Tensor({1, 1}, 1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

namespace {

// --- helpers ---------------------------------------------------------------

void require_matrix_op(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()));
  }
}

std::size_t broadcast_extent(std::size_t x, std::size_t y, bool& ok) {
  if (x == y) return x;
  if (x == 1) return y;
  if (y == 1) return x;
  ok = false;
  return 0;
}

/// Sums `g` down to `shape` along broadcast axes.
Tensor reduce_to(const Tensor& g, const Shape& shape) {
  if (g.shape() == shape) return g;
  Tensor out(shape);
  const std::size_t m = g.rows(), n = g.cols();
  const bool rows_b = shape[0] == 1, cols_b = shape[1] == 1;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(rows_b ? 0 : i, cols_b ? 0 : j) += g(i, j);
  return out;
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

Var binary(const Var& a, const Var& b, BinOp op, const char* name) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  bool ok = true;
  const std::size_t m = broadcast_extent(x.rows(), y.rows(), ok);
  const std::size_t n = broadcast_extent(x.cols(), y.cols(), ok);
  require_matrix_op(ok, name, x, y);
  Tensor out = Tensor::matrix(m, n);
  const bool xr = x.rows() == 1, xc = x.cols() == 1, yr = y.rows() == 1, yc = y.cols() == 1;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = x(xr ? 0 : i, xc ? 0 : j);
      const double v = y(yr ? 0 : i, yc ? 0 : j);
      double r = 0.0;
      switch (op) {
        case BinOp::kAdd: r = u + v; break;
        case BinOp::kSub: r = u - v; break;
        case BinOp::kMul: r = u * v; break;
        case BinOp::kDiv: r = u / v; break;
      }
      out(i, j) = r;
    }
  }
  return Var::from_op(std::move(out), {a, b}, [op, xr, xc, yr, yc](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const Tensor& g = self.grad;
    const std::size_t m = g.rows(), n = g.cols();
    const bool need_b = pb.requires_grad && (op == BinOp::kMul || op == BinOp::kDiv || op == BinOp::kSub ||
                                             pb.value.shape() != g.shape());
    if (pa.requires_grad && pa.value.shape() == g.shape() && (op == BinOp::kAdd || op == BinOp::kSub)) {
      pa.accumulate(g);
    } else if (pa.requires_grad) {
      Tensor ga(g.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g(i, j);
          switch (op) {
            case BinOp::kAdd:
            case BinOp::kSub: ga(i, j) = gij; break;
            case BinOp::kMul: ga(i, j) = gij * pb.value(yr ? 0 : i, yc ? 0 : j); break;
            case BinOp::kDiv: ga(i, j) = gij / pb.value(yr ? 0 : i, yc ? 0 : j); break;
          }
        }
      }
      pa.accumulate(reduce_to(ga, pa.value.shape()));
    }
    if (pb.requires_grad && !need_b) {
      pb.accumulate(g);
    } else if (pb.requires_grad) {
      Tensor gb(g.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double gij = g(i, j);
          switch (op) {
            case BinOp::kAdd: gb(i, j) = gij; break;
            case BinOp::kSub: gb(i, j) = -gij; break;
            case BinOp::kMul: gb(i, j) = gij * pa.value(xr ? 0 : i, xc ? 0 : j); break;
            case BinOp::kDiv: {
              const double v = pb.value(yr ? 0 : i, yc ? 0 : j);
              gb(i, j) = -gij * pa.value(xr ? 0 : i, xc ? 0 : j) / (v * v);
              break;
            }
          }
        }
      }
      pb.accumulate(reduce_to(gb, pb.value.shape()));
    }
  });
}

/// Elementwise map with derivative expressed through input x and output y.
template <typename F, typename D>
Var unary(const Var& a, F f, D dfdx) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return Var::from_op(std::move(out), {a}, [dfdx](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(self.grad.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * dfdx(p.value[i], self.value[i]);
    p.accumulate(g);
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return binary(a, b, BinOp::kAdd, "add"); }
Var sub(const Var& a, const Var& b) { return binary(a, b, BinOp::kSub, "sub"); }
Var mul(const Var& a, const Var& b) { return binary(a, b, BinOp::kMul, "mul"); }
Var div(const Var& a, const Var& b) { return binary(a, b, BinOp::kDiv, "div"); }

Var scale(const Var& a, double k) {
  return unary(a, [k](double x) { return k * x; }, [k](double, double) { return k; });
}

Var add_scalar(const Var& a, double k) {
  return unary(a, [k](double x) { return x + k; }, [](double, double) { return 1.0; });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return hrt::sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Var log_sigmoid(const Var& a) {
  // d/dx log sigmoid(x) = 1 - sigmoid(x) = sigmoid(-x)
  return unary(
      a, [](double x) { return hrt::log_sigmoid(x); },
      [](double x, double) { return hrt::sigmoid(-x); });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sqrt(const Var& a) {
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; });
}

Var clamp_min(const Var& a, double floor) {
  return unary(
      a, [floor](double x) { return x > floor ? x : floor; },
      [floor](double x, double) { return x > floor ? 1.0 : 0.0; });
}

Var matmul(const Var& a, const Var& b) {
  Tensor out = hrt::matmul(a.value(), b.value());
  return Var::from_op(std::move(out), {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(hrt::matmul(self.grad, hrt::transpose(pb.value)));
    if (pb.requires_grad) pb.accumulate(hrt::matmul(hrt::transpose(pa.value), self.grad));
  });
}

Var transpose(const Var& a) {
  return Var::from_op(hrt::transpose(a.value()), {a}, [](Node& self) {
    self.parents[0]->accumulate(hrt::transpose(self.grad));
  });
}

Var reshape(const Var& a, std::size_t rows, std::size_t cols) {
  Tensor out = a.value().reshaped({rows, cols});
  return Var::from_op(std::move(out), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(self.grad.reshaped(p.value.shape()));
  });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
  const Tensor& x = a.value();
  if (count == 0 || begin + count > x.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") out of range for " + shape_string(x.shape()));
  }
  const std::size_t n = x.cols();
  Tensor out({count, n},
             std::vector<double>(x.storage().begin() + static_cast<std::ptrdiff_t>(begin * n),
                                 x.storage().begin() + static_cast<std::ptrdiff_t>((begin + count) * n)));
  return Var::from_op(std::move(out), {a}, [begin](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    std::copy(self.grad.storage().begin(), self.grad.storage().end(),
              g.storage().begin() + static_cast<std::ptrdiff_t>(begin * g.cols()));
    p.accumulate(g);
  });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t count) {
  const Tensor& x = a.value();
  if (count == 0 || begin + count > x.cols()) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") out of range for " + shape_string(x.shape()));
  }
  Tensor out = Tensor::matrix(x.rows(), count);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = x(i, begin + j);
  return Var::from_op(std::move(out), {a}, [begin](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    for (std::size_t i = 0; i < self.grad.rows(); ++i)
      for (std::size_t j = 0; j < self.grad.cols(); ++j) g(i, begin + j) = self.grad(i, j);
    p.accumulate(g);
  });
}

Var gather_cols(const Var& a, std::span<const std::size_t> columns) {
  const Tensor& x = a.value();
  if (columns.empty()) throw DimensionError("gather_cols with no columns");
  for (auto c : columns) {
    if (c >= x.cols()) throw IndexError("gather_cols: column " + std::to_string(c) + " out of range");
  }
  Tensor out = Tensor::matrix(x.rows(), columns.size());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < columns.size(); ++j) out(i, j) = x(i, columns[j]);
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  return Var::from_op(std::move(out), {a}, [cols = std::move(cols)](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    for (std::size_t i = 0; i < self.grad.rows(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) g(i, cols[j]) += self.grad(i, j);
    p.accumulate(g);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  const std::size_t n = parts[0].cols();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts[0].value().shape()) +
                           " vs " + shape_string(p.value().shape()));
    }
    m += p.rows();
  }
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& p : parts) data.insert(data.end(), p.value().storage().begin(), p.value().storage().end());
  return Var::from_op(Tensor({m, n}, std::move(data)), {parts.begin(), parts.end()}, [](Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      const std::size_t len = p->value.size();
      if (p->requires_grad) {
        Tensor g(p->value.shape());
        std::copy_n(self.grad.storage().begin() + static_cast<std::ptrdiff_t>(offset), len,
                    g.storage().begin());
        p->accumulate(g);
      }
      offset += len;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const std::size_t m = parts[0].rows();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts[0].value().shape()) +
                           " vs " + shape_string(p.value().shape()));
    }
    n += p.cols();
  }
  Tensor out = Tensor::matrix(m, n);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) out(i, offset + j) = p.value()(i, j);
    offset += p.cols();
  }
  return Var::from_op(std::move(out), {parts.begin(), parts.end()}, [](Node& self) {
    std::size_t offset = 0;
    for (auto& p : self.parents) {
      const std::size_t w = p->value.cols();
      if (p->requires_grad) {
        Tensor g(p->value.shape());
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < w; ++j) g(i, j) = self.grad(i, offset + j);
        p->accumulate(g);
      }
      offset += w;
    }
  });
}

Var pick(const Var& a, std::size_t row, std::size_t col) {
  const Tensor& x = a.value();
  if (row >= x.rows() || col >= x.cols()) {
    throw IndexError("pick (" + std::to_string(row) + ", " + std::to_string(col) +
                     ") out of range for " + shape_string(x.shape()));
  }
  return Var::from_op(Tensor({1, 1}, x(row, col)), {a}, [row, col](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    g(row, col) = self.grad[0];
    p.accumulate(g);
  });
}

Var sum_rows(const Var& a) {
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(0, j) += x(i, j);
  return Var::from_op(std::move(out), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = self.grad(0, j);
    p.accumulate(g);
  });
}

Var sum_cols(const Var& a) {
  const Tensor& x = a.value();
  Tensor out = Tensor::matrix(x.rows(), 1);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(i, 0) += x(i, j);
  return Var::from_op(std::move(out), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    Tensor g(p.value.shape());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = self.grad(i, 0);
    p.accumulate(g);
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return Var::from_op(Tensor({1, 1}, s), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    p.accumulate(Tensor(p.value.shape(), self.grad[0]));
  });
}

namespace {

// Visits each 1-D lane of a matrix along `axis` as (offset, stride, length).
template <typename F>
void for_each_lane(const Tensor& x, std::size_t axis, F f) {
  const std::size_t m = x.rows(), n = x.cols();
  if (axis == 0) {
    for (std::size_t j = 0; j < n; ++j) f(j, n, m);
  } else {
    for (std::size_t i = 0; i < m; ++i) f(i * n, std::size_t{1}, n);
  }
}

void check_axis(std::size_t axis) {
  if (axis > 1) throw DimensionError("axis must be 0 or 1 for matrix ops");
}

}  // namespace

Var softmax(const Var& a, std::size_t axis) {
  check_axis(axis);
  return Var::from_op(hrt::softmax(a.value(), axis), {a}, [axis](Node& self) {
    Node& p = *self.parents[0];
    const Tensor& y = self.value;
    const Tensor& gy = self.grad;
    Tensor g(y.shape());
    for_each_lane(y, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
      double dot = 0.0;
      for (std::size_t e = 0; e < len; ++e) dot += gy[off + e * stride] * y[off + e * stride];
      for (std::size_t e = 0; e < len; ++e) {
        const std::size_t k = off + e * stride;
        g[k] = y[k] * (gy[k] - dot);
      }
    });
    p.accumulate(g);
  });
}

Var log_softmax(const Var& a, std::size_t axis) {
  check_axis(axis);
  return Var::from_op(hrt::log_softmax(a.value(), axis), {a}, [axis](Node& self) {
    Node& p = *self.parents[0];
    const Tensor& y = self.value;
    const Tensor& gy = self.grad;
    Tensor g(y.shape());
    for_each_lane(y, axis, [&](std::size_t off, std::size_t stride, std::size_t len) {
      double total = 0.0;
      for (std::size_t e = 0; e < len; ++e) total += gy[off + e * stride];
      for (std::size_t e = 0; e < len; ++e) {
        const std::size_t k = off + e * stride;
        g[k] = gy[k] - std::exp(y[k]) * total;
      }
    });
    p.accumulate(g);
  });
}

Var layer_norm_rows(const Var& a, double eps) {
  const Tensor& x = a.value();
  const std::size_t m = x.rows(), n = x.cols();
  Tensor inv_std = Tensor::matrix(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(n);
    inv_std(i, 0) = 1.0 / std::sqrt(var + eps);
  }
  return Var::from_op(hrt::layer_norm_rows(x, eps), {a}, [inv_std](Node& self) {
    Node& p = *self.parents[0];
    const Tensor& y = self.value;
    const Tensor& gy = self.grad;
    const std::size_t m = y.rows(), n = y.cols();
    const auto nd = static_cast<double>(n);
    Tensor g(y.shape());
    for (std::size_t i = 0; i < m; ++i) {
      double mean_g = 0.0, mean_gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        mean_g += gy(i, j);
        mean_gy += gy(i, j) * y(i, j);
      }
      mean_g /= nd;
      mean_gy /= nd;
      for (std::size_t j = 0; j < n; ++j)
        g(i, j) = inv_std(i, 0) * (gy(i, j) - mean_g - y(i, j) * mean_gy);
    }
    p.accumulate(g);
  });
}

Var capsule_votes(const Var& poses, const Var& transforms, std::size_t pose_rows) {
  const Tensor& p = poses.value();
  const Tensor& t = transforms.value();
  const std::size_t count = p.rows(), d = p.cols();
  if (pose_rows == 0 || d % pose_rows != 0) {
    throw DimensionError("capsule_votes: pose width " + std::to_string(d) +
                         " not divisible into " + std::to_string(pose_rows) + " rows");
  }
  const std::size_t k = d / pose_rows;
  if (t.rows() != count || t.cols() != k * k) {
    throw DimensionError("capsule_votes: transforms " + shape_string(t.shape()) +
                         " do not match poses " + shape_string(p.shape()) + " with pose_rows " +
                         std::to_string(pose_rows));
  }
  Tensor out = Tensor::matrix(count, d);
  for (std::size_t c = 0; c < count; ++c) {
    const double* m = p.data().data() + c * d;
    const double* tr = t.data().data() + c * k * k;
    double* o = &out(c, 0);
    for (std::size_t r = 0; r < pose_rows; ++r)
      for (std::size_t q = 0; q < k; ++q) {
        const double mrq = m[r * k + q];
        for (std::size_t s = 0; s < k; ++s) o[r * k + s] += mrq * tr[q * k + s];
      }
  }
  return Var::from_op(std::move(out), {poses, transforms}, [pose_rows, k](Node& self) {
    Node& pp = *self.parents[0];
    Node& pt = *self.parents[1];
    const Tensor& g = self.grad;
    const std::size_t count = g.rows();
    Tensor gp(pp.value.shape()), gt(pt.value.shape());
    for (std::size_t c = 0; c < count; ++c) {
      const double* m = pp.value.data().data() + c * pp.value.cols();
      const double* tr = pt.value.data().data() + c * pt.value.cols();
      const double* go = g.data().data() + c * g.cols();
      double* gm = &gp(c, 0);
      double* gtr = &gt(c, 0);
      for (std::size_t r = 0; r < pose_rows; ++r)
        for (std::size_t q = 0; q < k; ++q)
          for (std::size_t s = 0; s < k; ++s) {
            gm[r * k + q] += go[r * k + s] * tr[q * k + s];
            gtr[q * k + s] += m[r * k + q] * go[r * k + s];
          }
    }
    if (pp.requires_grad) pp.accumulate(gp);
    if (pt.requires_grad) pt.accumulate(gt);
  });
}

}  // namespace hrt::ad
