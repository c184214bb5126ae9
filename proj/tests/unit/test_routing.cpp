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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hrt/capsule.hpp"
#include "hrt/errors.hpp"
#include "hrt/ops.hpp"
#include "hrt/rng.hpp"
#include "oracles.hpp"

using hrt::Tensor;

namespace {

double max_abs(const std::vector<double>& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Tensor permute_rows(const Tensor& t, const std::vector<std::size_t>& perm) {
  const std::size_t cols = t.size() / t.dim(0);
  Tensor out = t;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) out.storage()[i * cols + c] = t.storage()[perm[i] * cols + c];
  return out;
}

std::vector<std::size_t> random_perm(oracle::Gen& gen, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[gen.index(0, i - 1)]);
  return p;
}

hrt::CapsuleSet random_children(oracle::Gen& gen, std::size_t n, std::size_t d) {
  hrt::CapsuleSet c;
  c.poses = gen.tensor({n, d}, -1, 1);
  c.activations = gen.tensor({n}, 0.05, 0.95);
  return c;
}

}  // namespace

TEST_CASE("primary_capsules examples") {
  const std::size_t dfeat = 16, n = 4, d = 16;
  hrt::SeededRng rng(3);
  Tensor proj = Tensor::matrix(dfeat, n * d);
  for (std::size_t i = 0; i < d; ++i) proj(i, i) = 1.0;
  const Tensor act = Tensor::matrix(dfeat, n);
  const Tensor f = rng.normal_tensor({dfeat});
  const auto copy = hrt::primary_capsules(f, proj, act, d);
  for (std::size_t i = 0; i < d; ++i) CHECK(copy.poses(0, i) == f[i]);

  const auto zero = hrt::primary_capsules(Tensor({dfeat}), rng.normal_tensor({dfeat, n * d}), rng.normal_tensor({dfeat, n}), d);
  for (double v : zero.poses.data()) CHECK(v == 0.0);
  for (double v : zero.activations.data()) CHECK(v == 0.5);

  const Tensor p = rng.normal_tensor({dfeat, n * d}), a = rng.normal_tensor({dfeat, n});
  const auto caps = hrt::primary_capsules(f, p, a, d);
  const Tensor ref = oracle::matmul(f.reshaped({1, dfeat}), p);
  const Tensor ref_a = oracle::matmul(f.reshaped({1, dfeat}), a);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t h = 0; h < d; ++h) CHECK(std::fabs(caps.poses(c, h) - ref[c * d + h]) < 1e-12);
    CHECK(std::fabs(caps.activations[c] - oracle::sigmoid(ref_a[c])) < 1e-12);
  }
  CHECK_THROWS_AS(hrt::primary_capsules(Tensor({8}), p, a, d), hrt::DimensionError);
}

TEST_CASE("em_routing: one child with identity transform returns its pose") {
  oracle::Gen gen(1);
  for (std::size_t iters : {1, 2, 5}) {
    const auto child = random_children(gen, 1, 16);
    hrt::EmRoutingParams params;
    params.transforms = Tensor::identity(4).reshaped({1, 4, 4});
    params.iterations = iters;
    const auto out = hrt::em_routing(child, params);
    CHECK(hrt::max_abs_diff(out.parent.poses.reshaped({16}), child.poses.reshaped({16})) < 1e-12);
  }
}

TEST_CASE("em_routing: identical votes collapse to the floor") {
  hrt::CapsuleSet c;
  c.poses = Tensor::from_rows({{1, 2, 3, 4}, {1, 2, 3, 4}});
  c.activations = Tensor::vector({0.3, 0.9});
  hrt::EmRoutingParams params;
  params.transforms = Tensor({2, 4, 4});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 4; ++k) params.transforms.storage()[i * 16 + k * 4 + k] = 1.0;
  params.mode = hrt::VoteMode::kVectorTransform;
  params.sigma_floor = 1e-6;
  const auto out = hrt::em_routing(c, params);
  for (std::size_t h = 0; h < 4; ++h) {
    CHECK(std::fabs(out.parent.poses(0, h) - (h + 1.0)) < 1e-12);
    CHECK(out.variance[h] == 1e-6);
  }
}

TEST_CASE("em_routing matches the loop-level oracle (seed 11)") {
  oracle::Gen gen(11);
  const auto children = random_children(gen, 4, 4);
  hrt::EmRoutingParams params;
  params.transforms = gen.tensor({4, 2, 2}, -1, 1);
  params.beta = 0.3;
  params.gamma = -0.2;
  params.lambda = 0.7;
  params.iterations = 3;
  const auto out = hrt::em_routing(children, params);
  const std::vector<double> acts(children.activations.data().begin(), children.activations.data().end());
  const auto ref = oracle::em_routing(children.poses, acts, params.transforms, 2, 0.3, -0.2, 0.7, 3, 1e-6);
  CHECK(max_abs(ref.pose, out.parent.poses) < 1e-9);
  CHECK(max_abs(ref.variance, out.variance) < 1e-9);
  CHECK(max_abs(ref.cost, out.cost) < 1e-9);
  CHECK(std::fabs(ref.activation - out.parent.activations[0]) < 1e-9);
}

TEST_CASE("em_routing properties over random instances") {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    const bool matrix = trial % 2 == 0;
    const std::size_t dd = matrix ? 4 : gen.index(2, 5);
    const std::size_t k = matrix ? 2 : dd;
    const std::size_t n = gen.index(2, 7);
    const auto children = random_children(gen, n, dd);
    hrt::EmRoutingParams params;
    params.mode = matrix ? hrt::VoteMode::kMatrixProduct : hrt::VoteMode::kVectorTransform;
    params.transforms = gen.tensor({n, k, k}, -1, 1);
    params.beta = gen.uniform(-1, 1);
    params.gamma = gen.uniform(-1, 1);
    params.iterations = gen.index(1, 4);
    const auto out = hrt::em_routing(children, params);

    // Activation strictly inside (0, 1); single parent takes every child.
    CHECK(out.parent.activations[0] > 0.0);
    CHECK(out.parent.activations[0] < 1.0);
    for (double r : out.responsibilities.data()) CHECK(std::fabs(r - 1.0) < 1e-12);

    // Pose lies within the per-coordinate range of the votes.
    const auto votes = hrt::routing::em_votes(
        hrt::ad::Var::constant(children.poses),
        {hrt::ad::Var::constant(params.transforms.reshaped({n, k * k})), {}, {}, 1.0, 1, 1e-6, hrt::pose_rows_for(params.mode, dd)});
    for (std::size_t h = 0; h < dd; ++h) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, votes.value()(i, h));
        hi = std::max(hi, votes.value()(i, h));
      }
      CHECK(out.parent.poses(0, h) >= lo - 1e-12);
      CHECK(out.parent.poses(0, h) <= hi + 1e-12);
    }

    // Child order does not matter.
    const auto perm = random_perm(gen, n);
    hrt::CapsuleSet shuffled{permute_rows(children.poses, perm), permute_rows(children.activations, perm)};
    auto pparams = params;
    pparams.transforms = permute_rows(params.transforms, perm);
    const auto pout = hrt::em_routing(shuffled, pparams);
    CHECK(hrt::max_abs_diff(out.parent.poses, pout.parent.poses) < 1e-9);
    CHECK(std::fabs(out.parent.activations[0] - pout.parent.activations[0]) < 1e-9);

    // k iterations equal k threaded single iterations.
    hrt::routing::EmGraphParams g;
    g.transforms = hrt::ad::Var::constant(params.transforms.reshaped({n, k * k}));
    g.beta = hrt::ad::Var::constant(Tensor({1, 1}, params.beta));
    g.gamma = hrt::ad::Var::constant(Tensor({1, 1}, params.gamma));
    g.pose_rows = hrt::pose_rows_for(params.mode, dd);
    const auto v = hrt::routing::em_votes(hrt::ad::Var::constant(children.poses), g);
    const auto acts = hrt::ad::Var::constant(children.activations.reshaped({n, 1}));
    auto r = hrt::ad::Var::constant(Tensor::matrix(n, 1, 1.0));
    hrt::routing::EmIteration step;
    for (std::size_t t = 0; t < params.iterations; ++t) {
      step = hrt::routing::em_iteration(v, acts, r, g);
      r = step.responsibilities;
    }
    CHECK(step.pose.value() == out.parent.poses);
    CHECK(step.activation.value()[0] == out.parent.activations[0]);
  }
}

TEST_CASE("em_routing argument errors") {
  hrt::CapsuleSet c{Tensor::matrix(2, 4), Tensor::vector({0.5, 0.5})};
  hrt::EmRoutingParams params;
  params.transforms = Tensor({2, 2, 2});
  params.iterations = 0;
  CHECK_THROWS_AS(hrt::em_routing(c, params), hrt::ConfigError);
  params.iterations = 1;
  params.sigma_floor = 0.0;
  CHECK_THROWS_AS(hrt::em_routing(c, params), hrt::ConfigError);
  params.sigma_floor = 1e-6;
  params.transforms = Tensor({3, 2, 2});
  CHECK_THROWS_AS(hrt::em_routing(c, params), hrt::DimensionError);
  c.poses = Tensor::matrix(2, 5);
  params.transforms = Tensor({2, 2, 2});
  CHECK_THROWS_AS(hrt::em_routing(c, params), hrt::DimensionError);
}

TEST_CASE("inverted_routing: single parent") {
  oracle::Gen gen(2);
  const Tensor children = gen.tensor({5, 4}, -1, 1);
  hrt::InvertedRoutingParams params;
  params.vote_transforms = gen.tensor({1, 4, 4}, -1, 1);
  params.iterations = 3;
  const auto out = hrt::inverted_routing(children, gen.tensor({1, 4}, -1, 1), params);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.routing(i, 0) == 1.0);
  const Tensor votes = oracle::matmul(children, hrt::transpose(params.vote_transforms.reshaped({4, 4})));
  Tensor sum({4});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t h = 0; h < 4; ++h) sum[h] += votes(i, h);
  CHECK(hrt::max_abs_diff(out.parents.reshaped({4}), hrt::layer_norm(sum, params.layer_norm_eps)) < 1e-12);
}

TEST_CASE("inverted_routing: symmetric parents route uniformly") {
  oracle::Gen gen(3);
  const std::size_t a = 3, d = 4;
  const Tensor w = gen.tensor({d * d}, -1, 1);
  const Tensor p0 = gen.tensor({d}, -1, 1);
  Tensor transforms({a, d, d}), init = Tensor::matrix(a, d);
  for (std::size_t j = 0; j < a; ++j) {
    std::copy(w.data().begin(), w.data().end(), transforms.storage().begin() + j * d * d);
    for (std::size_t h = 0; h < d; ++h) init(j, h) = p0[h];
  }
  hrt::InvertedRoutingParams params{transforms, 2, 1e-5};
  const auto out = hrt::inverted_routing(gen.tensor({6, d}, -1, 1), init, params);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < a; ++j) {
      CHECK(out.agreement(i, j) == out.agreement(i, 0));
      CHECK(std::fabs(out.routing(i, j) - 1.0 / 3.0) < 1e-15);
    }
}

TEST_CASE("inverted_routing matches the loop-level oracle (seed 5)") {
  oracle::Gen gen(5);
  const Tensor children = gen.tensor({3, 4}, -1, 1), init = gen.tensor({2, 4}, -1, 1);
  hrt::InvertedRoutingParams params{gen.tensor({2, 4, 4}, -1, 1), 2, 1e-5};
  const auto out = hrt::inverted_routing(children, init, params);
  const auto ref = oracle::inverted_routing(children, init, params.vote_transforms, 2, 1e-5);
  CHECK(hrt::max_abs_diff(out.parents, ref.parents) < 1e-9);
  CHECK(hrt::max_abs_diff(out.agreement, ref.agreement) < 1e-9);
  CHECK(hrt::max_abs_diff(out.routing, ref.routing) < 1e-9);
}

TEST_CASE("inverted_routing properties over random instances") {
  oracle::Gen gen(6);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    const std::size_t r = gen.index(1, 7), a = gen.index(1, 5), d = gen.index(2, 6);
    const Tensor children = gen.tensor({r, d}, -2, 2), init = gen.tensor({a, d}, -2, 2);
    hrt::InvertedRoutingParams params{gen.tensor({a, d, d}, -1, 1), gen.index(1, 4), 1e-5};
    const auto out = hrt::inverted_routing(children, init, params);
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < a; ++j) {
        CHECK(out.routing(i, j) >= 0.0);
        s += out.routing(i, j);
      }
      CHECK(std::fabs(s - 1.0) <= 1e-9);
    }
    const auto perm = random_perm(gen, r);
    const auto pout = hrt::inverted_routing(permute_rows(children, perm), init, params);
    CHECK(hrt::max_abs_diff(out.parents, pout.parents) < 1e-9);
    CHECK(hrt::max_abs_diff(permute_rows(out.agreement, perm), pout.agreement) < 1e-9);
    CHECK(hrt::max_abs_diff(permute_rows(out.routing, perm), pout.routing) < 1e-9);

    // Threading single iterations reproduces the multi-iteration result.
    namespace ad = hrt::ad;
    const auto votes = hrt::routing::inverted_votes(ad::Var::constant(children),
                                                    ad::Var::constant(params.vote_transforms.reshaped({a, d * d})));
    hrt::routing::InvertedState st{ad::Var::constant(init), {}, {}};
    for (std::size_t t = 0; t < params.iterations; ++t) st = hrt::routing::inverted_iteration(votes, st.parents, 1e-5);
    CHECK(st.parents.value() == out.parents);
    CHECK(st.agreement.value() == out.agreement);
  }
}

TEST_CASE("inverted_routing argument errors") {
  hrt::InvertedRoutingParams params{Tensor({2, 4, 4}), 1, 1e-5};
  CHECK_THROWS_AS(hrt::inverted_routing(Tensor(), Tensor::matrix(2, 4), params), hrt::DimensionError);
  CHECK_THROWS_AS(hrt::inverted_routing(Tensor::matrix(3, 4), Tensor(), params), hrt::DimensionError);
  CHECK_THROWS_AS(hrt::inverted_routing(Tensor::matrix(3, 5), Tensor::matrix(2, 4), params), hrt::DimensionError);
  params.iterations = 0;
  CHECK_THROWS_AS(hrt::inverted_routing(Tensor::matrix(3, 4), Tensor::matrix(2, 4), params), hrt::ConfigError);
}
