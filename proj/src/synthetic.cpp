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

#include "hrt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "hrt/errors.hpp"
#include "hrt/rng.hpp"

namespace hrt {

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

std::vector<std::size_t> draw_subset(SeededRng& rng, const std::vector<std::size_t>& pool,
                                     std::size_t k) {
  std::vector<std::size_t> items = pool;
  // Partial Fisher-Yates: the last k slots become the sample.
  for (std::size_t i = items.size(); i > items.size() - k; --i) std::swap(items[i - 1], items[rng.index(i)]);
  std::vector<std::size_t> out(items.end() - static_cast<std::ptrdiff_t>(k), items.end());
  std::sort(out.begin(), out.end());
  return out;
}

Tensor orthonormal_rows(SeededRng& rng, std::size_t rows, std::size_t cols) {
  Tensor b = rng.normal_tensor({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    // Gram-Schmidt against earlier rows while they still span less than R^cols.
    for (std::size_t j = 0; j < std::min(i, cols); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < cols; ++k) dot += b(i, k) * b(j, k);
      for (std::size_t k = 0; k < cols; ++k) b(i, k) -= dot * b(j, k);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < cols; ++k) norm += b(i, k) * b(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw EvaluationError("synthetic basis collapsed during Gram-Schmidt");
    for (std::size_t k = 0; k < cols; ++k) b(i, k) /= norm;
  }
  return b;
}

}  // namespace

std::size_t SyntheticSpec::active_per_class() const {
  if (attributes_per_class != 0) return attributes_per_class;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(attributes / 3.0)));
}

void SyntheticSpec::validate() const {
  if (seen_classes < 2) throw ConfigError("synthetic spec needs at least 2 seen classes");
  if (unseen_classes < 1) throw ConfigError("synthetic spec needs at least 1 unseen class");
  if (attributes < 2) throw ConfigError("synthetic spec needs at least 2 attributes");
  if (samples_per_class < 2) {
    throw ConfigError("samples_per_class must be at least 2 to form train and test splits");
  }
  if (patches < 1 || feature_dim < 1 || tau < 1) throw ConfigError("synthetic dimensions must be positive");
  if (signal_patches_per_attribute < 1 || signal_patches_per_attribute > patches) {
    throw ConfigError("signal_patches_per_attribute must be in [1, R]");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must be in (0, 1)");
  const std::size_t k = active_per_class();
  if (k > attributes) throw ConfigError("attributes_per_class exceeds the attribute count");
  if (binomial(attributes, k) < static_cast<double>(seen_classes + unseen_classes)) {
    throw ConfigError("not enough distinct attribute sets for the requested class count");
  }
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SeededRng rng(seed);
  const std::size_t a = spec.attributes, cs = spec.seen_classes, c = cs + spec.unseen_classes;
  const std::size_t k = spec.active_per_class();

  SyntheticDataset out;
  out.basis = orthonormal_rows(rng, a, spec.feature_dim);

  // Active sets: distinct across classes; unseen classes reuse seen attributes when possible.
  std::vector<std::size_t> all(a);
  for (std::size_t i = 0; i < a; ++i) all[i] = i;
  std::set<std::vector<std::size_t>> used;
  std::set<std::size_t> covered;
  std::vector<std::vector<std::size_t>> active(c);
  constexpr int kMaxTries = 1000;
  for (std::size_t cls = 0; cls < c; ++cls) {
    const bool seen = cls < cs;
    for (int attempt = 0;; ++attempt) {
      auto subset = draw_subset(rng, all, k);
      if (used.count(subset)) {
        if (attempt > 100 * kMaxTries) throw ConfigError("could not draw distinct attribute sets");
        continue;
      }
      const bool transfers = std::all_of(subset.begin(), subset.end(),
                                         [&](std::size_t i) { return covered.count(i) > 0; });
      if (!seen && !transfers && attempt < kMaxTries) continue;
      used.insert(subset);
      if (seen) covered.insert(subset.begin(), subset.end());
      active[cls] = std::move(subset);
      break;
    }
  }
  Tensor class_attr = Tensor::matrix(c, a);
  for (std::size_t cls = 0; cls < c; ++cls) {
    for (std::size_t i = 0; i < a; ++i) {
      const bool on = std::binary_search(active[cls].begin(), active[cls].end(), i);
      class_attr(cls, i) = on ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.3);
    }
  }

  ZslDataset& ds = out.dataset;
  ds.num_patches = spec.patches;
  ds.feature_dim = spec.feature_dim;
  ds.semantics.attr_vectors = rng.normal_tensor({a, spec.tau});
  ds.semantics.class_attr = class_attr;
  for (std::size_t i = 0; i < a; ++i) ds.semantics.attribute_names.push_back("attr_" + std::to_string(i));
  for (std::size_t cls = 0; cls < c; ++cls) (cls < cs ? ds.seen_classes : ds.unseen_classes).push_back(cls);

  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(spec.test_fraction * static_cast<double>(spec.samples_per_class))),
      1, spec.samples_per_class - 1);
  std::vector<std::size_t> patch_ids(spec.patches);
  for (std::size_t i = 0; i < spec.patches; ++i) patch_ids[i] = i;

  for (std::size_t cls = 0; cls < c; ++cls) {
    for (std::size_t n = 0; n < spec.samples_per_class; ++n) {
      Sample s;
      s.label = cls;
      s.split = cls >= cs ? Split::kTestUnseen : (n < n_test ? Split::kTestSeen : Split::kTrain);
      s.patches = Tensor::matrix(spec.patches, spec.feature_dim);
      for (std::size_t attr = 0; attr < a; ++attr) {
        const double z = class_attr(cls, attr);
        if (z <= 0.5) continue;
        for (auto r : draw_subset(rng, patch_ids, spec.signal_patches_per_attribute)) {
          for (std::size_t j = 0; j < spec.feature_dim; ++j) s.patches(r, j) += z * out.basis(attr, j);
        }
      }
      for (auto& v : s.patches.data()) v += spec.noise_std * rng.normal();
      ds.samples.push_back(std::move(s));
    }
  }
  ds.validate();
  return out;
}

}  // namespace hrt
