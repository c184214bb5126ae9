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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrt/checkpoint.hpp"
#include "hrt/config.hpp"
#include "hrt/dataset_io.hpp"
#include "hrt/errors.hpp"
#include "hrt/experiment.hpp"
#include "hrt/metrics.hpp"
#include "hrt/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using hrt::Tensor;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(HRT_TEST_TMPDIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

hrt::SyntheticSpec small_spec() {
  hrt::SyntheticSpec s;
  s.seen_classes = 4;
  s.unseen_classes = 2;
  s.attributes = 6;
  s.patches = 3;
  s.feature_dim = 8;
  s.tau = 5;
  s.samples_per_class = 5;
  return s;
}

bool same_dataset(const hrt::ZslDataset& a, const hrt::ZslDataset& b) {
  if (a.num_patches != b.num_patches || a.feature_dim != b.feature_dim || a.samples.size() != b.samples.size())
    return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const auto &x = a.samples[i], &y = b.samples[i];
    if (!(x.patches == y.patches) || x.label != y.label || x.split != y.split) return false;
  }
  return a.semantics.attr_vectors == b.semantics.attr_vectors && a.semantics.class_attr == b.semantics.class_attr &&
         a.semantics.attribute_names == b.semantics.attribute_names && a.seen_classes == b.seen_classes &&
         a.unseen_classes == b.unseen_classes;
}

}  // namespace

TEST_CASE("synthetic spec errors") {
  auto s = small_spec();
  s.unseen_classes = 0;
  CHECK_THROWS_AS(hrt::generate_synthetic(s, 0), hrt::ConfigError);
  s = small_spec();
  s.samples_per_class = 1;
  CHECK_THROWS_AS(hrt::generate_synthetic(s, 0), hrt::ConfigError);
  s = small_spec();
  s.seen_classes = 1;
  CHECK_THROWS_AS(hrt::generate_synthetic(s, 0), hrt::ConfigError);
  s = small_spec();
  s.signal_patches_per_attribute = 4;
  CHECK_THROWS_AS(hrt::generate_synthetic(s, 0), hrt::ConfigError);
  s = small_spec();
  s.attributes_per_class = 1;  // 6 classes need 6 distinct singletons: fine
  CHECK_NOTHROW(hrt::generate_synthetic(s, 0));
  s.attributes = 5;
  CHECK_THROWS_AS(hrt::generate_synthetic(s, 0), hrt::ConfigError);
}

TEST_CASE("synthetic generation is deterministic and respects the partition") {
  const auto s = small_spec();
  const auto a = hrt::generate_synthetic(s, 9), b = hrt::generate_synthetic(s, 9), c = hrt::generate_synthetic(s, 10);
  CHECK(same_dataset(a.dataset, b.dataset));
  CHECK_FALSE(same_dataset(a.dataset, c.dataset));
  const auto da = scratch("det_a"), db = scratch("det_b");
  hrt::write_dataset(da, a.dataset);
  hrt::write_dataset(db, b.dataset);
  for (const char* f : {"meta.json", "features.bin", "attributes.csv", "semantics.csv", "splits.csv"}) {
    CHECK(slurp(da / f) == slurp(db / f));
  }
  CHECK(a.dataset.seen_classes == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(a.dataset.unseen_classes == std::vector<std::size_t>{4, 5});
  CHECK_NOTHROW(a.dataset.validate());
  for (const auto& smp : a.dataset.samples) {
    if (smp.split == hrt::Split::kTestUnseen) CHECK(smp.label >= 4);
    else CHECK(smp.label < 4);
  }
}

TEST_CASE("noise-free single-attribute classes are separable by attribute projection") {
  auto s = small_spec();
  s.noise_std = 0.0;
  s.attributes_per_class = 1;
  const auto syn = hrt::generate_synthetic(s, 3);
  const auto& ds = syn.dataset;
  const std::size_t a = s.attributes;
  // Project the patch sum on each attribute direction, then pick the unseen
  // class whose attribute vector has the largest inner product.
  std::size_t hits = 0, total = 0;
  for (const auto& smp : ds.samples) {
    if (smp.split != hrt::Split::kTestUnseen) continue;
    std::vector<double> zhat(a, 0.0);
    for (std::size_t k = 0; k < a; ++k)
      for (std::size_t r = 0; r < ds.num_patches; ++r)
        for (std::size_t f = 0; f < ds.feature_dim; ++f) zhat[k] += smp.patches(r, f) * syn.basis(k, f);
    std::size_t best = ds.unseen_classes.front();
    double best_v = -1e300;
    for (auto c : ds.unseen_classes) {
      double v = 0;
      for (std::size_t k = 0; k < a; ++k) v += zhat[k] * ds.semantics.class_attr(c, k);
      if (v > best_v) {
        best_v = v;
        best = c;
      }
    }
    hits += best == smp.label;
    ++total;
  }
  REQUIRE(total > 0);
  CHECK(hits == total);
}

TEST_CASE("dataset write/load roundtrip is bitwise") {
  const auto syn = hrt::generate_synthetic(small_spec(), 4);
  const auto dir = scratch("roundtrip");
  hrt::write_dataset(dir, syn.dataset);
  const auto back = hrt::load_features(dir);
  CHECK(same_dataset(syn.dataset, back));

  const auto dir32 = scratch("roundtrip32");
  hrt::write_dataset(dir32, syn.dataset, hrt::FeatureDtype::kF32);
  const auto back32 = hrt::load_features(dir32);
  CHECK(static_cast<float>(back32.samples[0].patches[0]) == static_cast<float>(syn.dataset.samples[0].patches[0]));
  CHECK(back32.samples[0].patches[0] == static_cast<double>(static_cast<float>(syn.dataset.samples[0].patches[0])));
}

TEST_CASE("truncated features.bin is reported with both lengths") {
  const auto syn = hrt::generate_synthetic(small_spec(), 4);
  const auto dir = scratch("truncated");
  hrt::write_dataset(dir, syn.dataset);
  const auto size = fs::file_size(dir / "features.bin");
  fs::resize_file(dir / "features.bin", size - 1);
  try {
    hrt::load_features(dir);
    FAIL("expected LoadError");
  } catch (const hrt::LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(size)) != std::string::npos);
    CHECK(msg.find(std::to_string(size - 1)) != std::string::npos);
  }
}

TEST_CASE("large fixture with R=49 and D_feat=2048 loads") {
  auto s = small_spec();
  s.patches = 49;
  s.feature_dim = 2048;
  s.samples_per_class = 2;
  const auto syn = hrt::generate_synthetic(s, 5);
  const auto dir = scratch("large_fixture");
  hrt::write_dataset(dir, syn.dataset, hrt::FeatureDtype::kF32);
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  CHECK(meta.at("R") == 49);
  CHECK(meta.at("D_feat") == 2048);
  CHECK(fs::file_size(dir / "features.bin") == meta.at("sample_count").get<std::size_t>() * 49 * 2048 * 4);
  const auto back = hrt::load_features(dir);
  CHECK(back.samples.size() == meta.at("sample_count").get<std::size_t>());
  CHECK(back.num_patches == 49);
  CHECK(back.feature_dim == 2048);
}

TEST_CASE("any corrupted meta.json field is rejected") {
  const auto syn = hrt::generate_synthetic(small_spec(), 6);
  const auto dir = scratch("fuzz");
  hrt::write_dataset(dir, syn.dataset);
  const std::string original = slurp(dir / "meta.json");
  const auto meta = nlohmann::json::parse(original);
  oracle::Gen gen(77);
  int cases = 0;
  for (const auto& [key, value] : meta.items()) {
    std::vector<nlohmann::json> bad;
    if (value.is_number_integer()) {
      const auto v = value.get<long long>();
      bad = {v + 1, v - 1, v * 2, 0, -v, "x", 1.5, nullptr, nlohmann::json::array()};
      bad.push_back(v + 1 + static_cast<long long>(gen.index(1, 1000)));
    } else {
      bad = {"", "f16", "big", 3, nullptr, value.get<std::string>() + "_"};
    }
    for (const auto& b : bad) {
      auto m = meta;
      m[key] = b;
      spit(dir / "meta.json", m.dump());
      CAPTURE(key);
      CAPTURE(b.dump());
      CHECK_THROWS_AS(hrt::load_features(dir), hrt::LoadError);
      ++cases;
    }
  }
  auto extra = meta;
  extra["checksum"] = 1;
  spit(dir / "meta.json", extra.dump());
  CHECK_THROWS_AS(hrt::load_features(dir), hrt::LoadError);
  auto missing = meta;
  missing.erase("tau");
  spit(dir / "meta.json", missing.dump());
  CHECK_THROWS_AS(hrt::load_features(dir), hrt::LoadError);
  spit(dir / "meta.json", original.substr(0, original.size() / 2));
  CHECK_THROWS_AS(hrt::load_features(dir), hrt::LoadError);
  spit(dir / "meta.json", original);
  CHECK_NOTHROW(hrt::load_features(dir));
  CHECK(cases > 50);
}

TEST_CASE("split and payload corruption is rejected") {
  const auto syn = hrt::generate_synthetic(small_spec(), 7);
  const auto dir = scratch("splits");
  hrt::write_dataset(dir, syn.dataset);
  const std::string splits = slurp(dir / "splits.csv");
  // Move an unseen-class sample into train: that class becomes both seen and unseen.
  std::string bad = splits;
  const auto pos = bad.rfind("test_unseen");
  bad.replace(pos, std::string("test_unseen").size(), "train");
  spit(dir / "splits.csv", bad);
  CHECK_THROWS_AS(hrt::load_features(dir), hrt::LoadError);
  spit(dir / "splits.csv", splits);

  std::string payload = slurp(dir / "features.bin");
  const double nan = std::nan("");
  std::memcpy(payload.data() + 8 * 5, &nan, 8);
  spit(dir / "features.bin", payload);
  try {
    hrt::load_features(dir);
    FAIL("expected LoadError");
  } catch (const hrt::LoadError& e) {
    CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
  }
}

namespace {

// Two seen classes {0, 1}, one unseen class {2}.
hrt::ZslDataset metric_dataset(const std::vector<std::pair<std::size_t, hrt::Split>>& rows) {
  hrt::ZslDataset ds;
  ds.num_patches = 1;
  ds.feature_dim = 1;
  ds.semantics.attr_vectors = Tensor::from_rows({{1.0}, {0.0}});
  ds.semantics.class_attr = Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}});
  ds.seen_classes = {0, 1};
  ds.unseen_classes = {2};
  for (const auto& [label, split] : rows) ds.samples.push_back({Tensor::matrix(1, 1), label, split});
  return ds;
}

Tensor one_hot(std::size_t c, std::size_t n, double scale = 10.0) {
  Tensor t({n});
  t[c] = scale;
  return t;
}

}  // namespace

TEST_CASE("metrics: perfect predictor scores 1 everywhere") {
  using S = hrt::Split;
  const auto ds = metric_dataset({{0, S::kTrain}, {0, S::kTestSeen}, {1, S::kTestSeen}, {2, S::kTestUnseen}});
  std::vector<Tensor> scores;
  for (const auto& s : ds.samples) scores.push_back(one_hot(s.label, 3));
  const auto m = hrt::metrics_from_scores(ds, scores, hrt::EvalMode::kBoth, hrt::gamma_profile("cub"));
  CHECK(*m.t1 == 1.0);
  CHECK(*m.tr == 1.0);
  CHECK(*m.ts == 1.0);
  CHECK(*m.h == 1.0);
  const auto z = hrt::metrics_from_scores(ds, scores, hrt::EvalMode::kZsl, hrt::gamma_profile("cub"));
  CHECK(z.t1.has_value());
  CHECK_FALSE(z.h.has_value());
}

TEST_CASE("metrics average per class, not per sample") {
  const std::vector<std::size_t> labels{0, 1, 1, 1}, preds{0, 0, 0, 0};
  CHECK(hrt::per_class_accuracy(labels, preds) == 0.5);
  CHECK_THROWS_AS(hrt::per_class_accuracy({}, {}), hrt::ConfigError);
}

TEST_CASE("harmonic mean anchors and properties") {
  CHECK(std::fabs(hrt::harmonic_mean(0.635, 0.621) - 0.628) <= 0.0005);
  CHECK(std::fabs(hrt::harmonic_mean(0.787, 0.589) - 0.674) <= 0.0005);
  CHECK(hrt::harmonic_mean(0.5, 0.0) == 0.0);
  CHECK(hrt::harmonic_mean(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(hrt::harmonic_mean(1.2, 0.5), hrt::ConfigError);
  oracle::Gen gen(50);
  for (int i = 0; i < 1000; ++i) {
    const double x = gen.uniform(0, 1), y = gen.uniform(0, 1);
    CHECK(hrt::harmonic_mean(x, y) == hrt::harmonic_mean(y, x));
    CHECK(hrt::harmonic_mean(x, y) <= (x + y) / 2 + 1e-15);
    CHECK(std::fabs(hrt::harmonic_mean(x, x) - x) <= 1e-15);
  }
}

TEST_CASE("metrics are invariant to sample order and ts never exceeds t1 without offsets") {
  oracle::Gen gen(51);
  for (int trial = 0; trial < 50; ++trial) {
    using S = hrt::Split;
    std::vector<std::pair<std::size_t, S>> rows;
    for (int i = 0; i < 12; ++i) {
      const std::size_t label = gen.index(0, 2);
      rows.emplace_back(label, label == 2 ? S::kTestUnseen : (i % 2 ? S::kTestSeen : S::kTrain));
    }
    rows.emplace_back(0, S::kTestSeen);
    rows.emplace_back(2, S::kTestUnseen);
    const auto ds = metric_dataset(rows);
    std::vector<Tensor> scores;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) scores.push_back(gen.tensor({3}, -1, 1));
    const auto zero = hrt::gamma_profile("zero");
    const auto m = hrt::metrics_from_scores(ds, scores, hrt::EvalMode::kBoth, zero);
    CHECK(*m.ts <= *m.t1);

    std::vector<std::size_t> perm(ds.samples.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[gen.index(0, i - 1)]);
    auto shuffled = ds;
    std::vector<Tensor> sscores;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.samples[i] = ds.samples[perm[i]];
      sscores.push_back(scores[perm[i]]);
    }
    const auto cub = hrt::gamma_profile("cub");
    const auto a = hrt::metrics_from_scores(ds, scores, hrt::EvalMode::kBoth, cub);
    const auto b = hrt::metrics_from_scores(shuffled, sscores, hrt::EvalMode::kBoth, cub);
    CHECK(*a.t1 == *b.t1);
    CHECK(*a.tr == *b.tr);
    CHECK(*a.ts == *b.ts);
    CHECK(*a.h == *b.h);
  }
}

TEST_CASE("metrics on an empty test split are a configuration error") {
  using S = hrt::Split;
  const auto ds = metric_dataset({{0, S::kTrain}, {1, S::kTestSeen}});
  std::vector<Tensor> scores(2, Tensor({3}));
  CHECK_THROWS_AS(hrt::metrics_from_scores(ds, scores, hrt::EvalMode::kZsl, hrt::gamma_profile("cub")),
                  hrt::ConfigError);
}

TEST_CASE("predict_among ties and offsets") {
  const Tensor s = Tensor::vector({1, 3, 3});
  const std::vector<std::size_t> all{0, 1, 2}, some{0, 2};
  CHECK(hrt::predict_among(s, Tensor(), all) == 1);
  CHECK(hrt::predict_among(s, Tensor(), some) == 2);
  CHECK(hrt::predict_among(s, Tensor::vector({0, 0, 0.5}), all) == 2);
}

TEST_CASE("config parsing") {
  const auto def = hrt::parse_config("{}");
  CHECK(def.model.encoder.em_iterations == 5);
  CHECK(def.model.encoder.routing_iterations == 2);
  CHECK(def.loss.lambda1 == 0.1);
  CHECK(def.optimizer.learning_rate == 1e-3);
  CHECK(def.training.epochs == 200);

  const auto cfg = hrt::parse_config(
      R"({"model": {"vote_mode": "vector-transform", "capsule_dim": 8}, "training": {"epochs": 3},
          "loss": {"gamma_profile": "awa2"}, "synthetic": {"seed": 5, "noise_std": 0.2}})");
  CHECK(cfg.model.encoder.vote_mode == hrt::VoteMode::kVectorTransform);
  CHECK(cfg.model.encoder.capsule_dim == 8);
  CHECK(cfg.training.epochs == 3);
  CHECK(cfg.data_seed == 5);
  CHECK(cfg.synthetic.noise_std == 0.2);

  // The resolved dump parses back to the same configuration.
  const auto again = hrt::parse_config(hrt::config_to_json(cfg));
  CHECK(hrt::config_hash(again) == hrt::config_hash(cfg));
  CHECK(hrt::config_hash(cfg) != hrt::config_hash(def));

  CHECK_THROWS_AS(hrt::parse_config("{"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"modle": {}})"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"model": {"capsule_dim": "8"}})"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"training": {"epochs": -1}})"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"model": {"vote_mode": "diagonal"}})"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"model": {"capsule_dim": 8}})"), hrt::ValidationError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"loss": {"lambda1": -1}})"), hrt::ConfigError);
  CHECK_THROWS_AS(hrt::parse_config(R"({"ablation": {"values": [0]}})"), hrt::ConfigError);
}

TEST_CASE("checkpoint roundtrip and corruption") {
  auto cfg = hrt::gradcheck_config();
  cfg.model.encoder.primary_capsules = 4;
  cfg.training.epochs = 1;
  const auto data = hrt::generate_synthetic(cfg.synthetic, cfg.data_seed).dataset;
  const auto trained = hrt::run_training(cfg, data).model;
  const auto dir = scratch("checkpoint");
  hrt::save_checkpoint(dir / "a.bin", trained, cfg);
  const auto ck = hrt::load_checkpoint(dir / "a.bin");
  CHECK(ck.model.parameters() == trained.parameters());
  CHECK(ck.model.semantics().compact_vectors == trained.semantics().compact_vectors);
  CHECK(ck.model.semantics().class_attr == trained.semantics().class_attr);
  CHECK(ck.config_hash == hrt::config_hash(cfg));
  CHECK(ck.seed == cfg.training.seed);
  const auto m1 = hrt::run_evaluation(cfg, trained, data);
  const auto m2 = hrt::run_evaluation(ck.config, ck.model, data);
  CHECK(hrt::metrics_json(m1, hrt::EvalMode::kBoth, hrt::gamma_profile("cub")) ==
        hrt::metrics_json(m2, hrt::EvalMode::kBoth, hrt::gamma_profile("cub")));

  const std::string bytes = slurp(dir / "a.bin");
  spit(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(hrt::load_checkpoint(dir / "short.bin"), hrt::LoadError);
  std::string magic = bytes;
  magic[0] = 'X';
  spit(dir / "magic.bin", magic);
  CHECK_THROWS_AS(hrt::load_checkpoint(dir / "magic.bin"), hrt::LoadError);
  std::string hash = bytes;
  const auto at = hash.find("\"config_hash\":\"") + 15;
  hash[at] = hash[at] == '0' ? '1' : '0';
  spit(dir / "hash.bin", hash);
  CHECK_THROWS_AS(hrt::load_checkpoint(dir / "hash.bin"), hrt::LoadError);
  CHECK_THROWS_AS(hrt::load_checkpoint(dir / "missing.bin"), hrt::LoadError);

  hrt::save_checkpoint(dir / "f32.bin", trained, cfg, hrt::FeatureDtype::kF32);
  const auto ck32 = hrt::load_checkpoint(dir / "f32.bin");
  CHECK(ck32.model.parameters()[hrt::kWd][0] == static_cast<double>(static_cast<float>(trained.parameters()[hrt::kWd][0])));
}

TEST_CASE("ablation with no training reports the untrained baseline deterministically") {
  auto cfg = hrt::gradcheck_config();
  cfg.model.encoder.primary_capsules = 4;
  cfg.training.epochs = 0;
  const auto data = hrt::generate_synthetic(cfg.synthetic, cfg.data_seed).dataset;
  const auto rows = hrt::run_ablation(cfg, data, hrt::AblationAxis::kRoutingIterations);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(rows[i].value == i + 1);
    auto run = cfg;
    run.model.encoder.routing_iterations = i + 1;
    run.model.encoder.em_iterations = cfg.ablation.held_em_iterations;
    const auto base = hrt::run_evaluation(run, hrt::build_model(run, data), data);
    CHECK(*rows[i].metrics.h == *base.h);
    CHECK(*rows[i].metrics.t1 == *base.t1);
  }
  std::ostringstream a, b;
  hrt::write_ablation_csv(a, rows);
  hrt::write_ablation_csv(b, hrt::run_ablation(cfg, data, hrt::AblationAxis::kRoutingIterations));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("axis,value,t1,tr,ts,h\n", 0) == 0);
  CHECK(hrt::parse_ablation_axis("k_EM") == hrt::AblationAxis::kEmIterations);
  CHECK_THROWS_AS(hrt::parse_ablation_axis("k_XX"), hrt::ConfigError);
}
