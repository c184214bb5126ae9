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

#include "hrt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hrt/errors.hpp"

namespace hrt {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::matrix(m, n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  // i-k-j order: each output entry still accumulates over k from left to right.
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = po + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out(j, i) = a(i, j);
  return out;
}

namespace {

struct AxisLayout {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisLayout layout_for(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("softmax axis " + std::to_string(axis) + " invalid for shape " +
                         shape_string(x.shape()));
  }
  AxisLayout l;
  for (std::size_t i = 0; i < axis; ++i) l.outer *= x.shape()[i];
  l.extent = x.shape()[axis];
  for (std::size_t i = axis + 1; i < x.rank(); ++i) l.inner *= x.shape()[i];
  return l;
}

template <bool kLog>
Tensor softmax_impl(const Tensor& x, std::size_t axis) {
  if (x.empty()) throw DimensionError("softmax of an empty tensor");
  const AxisLayout l = layout_for(x, axis);
  Tensor out(x.shape());
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.extent * l.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < l.extent; ++e) mx = std::max(mx, x[base + e * l.inner]);
      double sum = 0.0;
      for (std::size_t e = 0; e < l.extent; ++e) sum += std::exp(x[base + e * l.inner] - mx);
      if constexpr (kLog) {
        const double lse = mx + std::log(sum);
        for (std::size_t e = 0; e < l.extent; ++e)
          out[base + e * l.inner] = x[base + e * l.inner] - lse;
      } else {
        for (std::size_t e = 0; e < l.extent; ++e)
          out[base + e * l.inner] = std::exp(x[base + e * l.inner] - mx) / sum;
      }
    }
  }
  return out;
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) { return softmax_impl<false>(x, axis); }

Tensor log_softmax(const Tensor& x, std::size_t axis) { return softmax_impl<true>(x, axis); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

double log_sigmoid(double x) {
  // log sigmoid(x) = -softplus(-x)
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

namespace {

void layer_norm_span(std::span<const double> in, std::span<double> out, double eps) {
  const auto n = static_cast<double>(in.size());
  double mean = 0.0;
  for (double v : in) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : in) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = (in[i] - mean) * inv;
}

}  // namespace

Tensor layer_norm(const Tensor& x, double eps) {
  if (x.empty()) throw DimensionError("layer_norm of an empty tensor");
  Tensor out(x.shape());
  layer_norm_span(x.data(), out.data(), eps);
  return out;
}

Tensor layer_norm_rows(const Tensor& x, double eps) {
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out(x.shape());
  for (std::size_t r = 0; r < m; ++r) {
    layer_norm_span(x.data().subspan(r * n, n), out.data().subspan(r * n, n), eps);
  }
  return out;
}

double log_sum_exp(const Tensor& x) {
  if (x.empty()) throw DimensionError("log_sum_exp of an empty tensor");
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x.data()) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : x.data()) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

}  // namespace hrt
