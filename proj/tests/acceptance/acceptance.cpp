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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: hrt_acceptance <work_dir> <hrt_cli_binary>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hrt/capsule.hpp"
#include "hrt/config.hpp"
#include "hrt/encoder.hpp"
#include "hrt/experiment.hpp"
#include "hrt/format.hpp"
#include "hrt/loss.hpp"
#include "hrt/metrics.hpp"
#include "hrt/synthetic.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using hrt::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) { return hrt::format_double(v); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& cmd) {
  std::cerr << "+ " << cmd << "\n";
  const int rc = std::system((cmd + " >/dev/null").c_str());
  return rc;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

Outcome gradient_suite() {
  const auto cfg = hrt::gradcheck_config();
  const hrt::GradCheckOptions opts;  // h = 1e-5, relative tolerance 1e-4
  const auto run = hrt::run_gradcheck(cfg, 1, opts);
  std::ostringstream d;
  d << "max_rel_err=" << num(run.report.max_rel_error) << " groups=" << run.report.groups.size()
    << " seconds=" << num(std::round(run.seconds * 10) / 10);
  const bool pass = run.report.passed && run.report.max_rel_error < 1e-4 &&
                    run.report.groups.size() == hrt::kNumParams && run.seconds < 60.0;
  return {pass, d.str()};
}

Outcome routing_oracles() {
  oracle::Gen gen(1001);
  double worst = 0;
  int instances = 0;
  for (int t = 0; t < 100; ++t) {
    const bool matrix = t % 2 == 0;
    const std::size_t d = matrix ? (t % 4 == 0 ? 4 : 16) : gen.index(2, 6);
    const std::size_t k = matrix ? static_cast<std::size_t>(std::lround(std::sqrt(double(d)))) : d;
    const std::size_t n = gen.index(1, 8);
    hrt::CapsuleSet c{gen.tensor({n, d}, -1, 1), gen.tensor({n}, 0.05, 0.95)};
    hrt::EmRoutingParams p;
    p.mode = matrix ? hrt::VoteMode::kMatrixProduct : hrt::VoteMode::kVectorTransform;
    p.transforms = gen.tensor({n, k, k}, -1, 1);
    p.beta = gen.uniform(-1, 1);
    p.gamma = gen.uniform(-1, 1);
    p.lambda = gen.uniform(0.1, 2);
    p.iterations = gen.index(1, 5);
    const auto out = hrt::em_routing(c, p);
    const std::vector<double> acts(c.activations.data().begin(), c.activations.data().end());
    const auto ref = oracle::em_routing(c.poses, acts, p.transforms, matrix ? k : 1, p.beta, p.gamma, p.lambda,
                                        p.iterations, p.sigma_floor);
    for (std::size_t h = 0; h < d; ++h) {
      worst = std::max(worst, std::fabs(out.parent.poses(0, h) - ref.pose[h]));
      worst = std::max(worst, std::fabs(out.variance[h] - ref.variance[h]));
    }
    worst = std::max(worst, std::fabs(out.parent.activations[0] - ref.activation));
    ++instances;
  }
  for (int t = 0; t < 100; ++t) {
    const std::size_t r = gen.index(1, 9), a = gen.index(1, 6), d = gen.index(2, 8);
    const Tensor ch = gen.tensor({r, d}, -1, 1), init = gen.tensor({a, d}, -1, 1);
    hrt::InvertedRoutingParams p{gen.tensor({a, d, d}, -1, 1), gen.index(1, 5), 1e-5};
    const auto out = hrt::inverted_routing(ch, init, p);
    const auto ref = oracle::inverted_routing(ch, init, p.vote_transforms, p.iterations, p.layer_norm_eps);
    worst = std::max({worst, hrt::max_abs_diff(out.parents, ref.parents), hrt::max_abs_diff(out.agreement, ref.agreement),
                      hrt::max_abs_diff(out.routing, ref.routing)});
    ++instances;
  }
  return {worst <= 1e-9, "instances=" + std::to_string(instances) + " max_abs_err=" + num(worst)};
}

Outcome simplex_invariants() {
  oracle::Gen gen(2002);
  double worst_sum = 0, worst_h = 0;
  bool nonneg = true;
  int evals = 0;
  for (int t = 0; t < 1000; ++t) {
    hrt::EncoderConfig cfg;
    const bool matrix = t % 2 == 0;
    cfg.vote_mode = matrix ? hrt::VoteMode::kMatrixProduct : hrt::VoteMode::kVectorTransform;
    cfg.capsule_dim = matrix ? 4 : gen.index(2, 5);
    cfg.primary_capsules = gen.index(1, 6);
    cfg.feature_dim = gen.index(1, 10);
    cfg.em_iterations = gen.index(1, 3);
    cfg.routing_iterations = gen.index(1, 3);
    const std::size_t r = gen.index(1, 9), a = gen.index(1, 6), d = cfg.capsule_dim, p = cfg.primary_capsules;
    const std::size_t k = hrt::transform_side(cfg.vote_mode, d);
    const double scale = gen.uniform(0.1, 5);
    hrt::EncoderParams w;
    w.primary_proj = gen.tensor({cfg.feature_dim, p * d}, -scale, scale);
    w.primary_act = gen.tensor({cfg.feature_dim, p}, -scale, scale);
    w.em_transforms = gen.tensor({p, k, k}, -1, 1);
    w.vote_transforms = gen.tensor({a, d, d}, -scale, scale);
    hrt::SemanticSpace sem;
    sem.attr_vectors = gen.tensor({a, 3}, -1, 1);
    sem.compact_vectors = gen.tensor({a, d}, -1, 1);
    sem.class_attr = gen.tensor({2, a}, 0, 1);
    const Tensor v = gen.tensor({r, cfg.feature_dim}, -3, 3);
    const auto out = hrt::encode(v, sem, w, cfg);
    for (std::size_t j = 0; j < a; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < r; ++i) {
        nonneg = nonneg && out.attention(i, j) >= 0.0;
        s += out.attention(i, j);
      }
      worst_sum = std::max(worst_sum, std::fabs(s - 1.0));
    }
    worst_h = std::max(worst_h, hrt::max_abs_diff(oracle::matmul(hrt::transpose(v), out.attention), out.h));
    ++evals;
  }
  const bool pass = nonneg && worst_sum <= 1e-9 && worst_h <= 1e-9 && evals >= 1000;
  return {pass, "evaluations=" + std::to_string(evals) + " max_col_sum_err=" + num(worst_sum) +
                    " max_h_err=" + num(worst_h) + " nonnegative=" + (nonneg ? "yes" : "no")};
}

Outcome loss_identities() {
  oracle::Gen gen(3003);
  double worst_cal = 0;
  bool predict_ok = true;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = gen.index(2, 12);
    const Tensor s = gen.tensor({c}, -20, 20), g = gen.tensor({c}, -1, 1);
    const std::size_t label = gen.index(0, c - 1);
    worst_cal = std::max(worst_cal, std::fabs(hrt::calibration_loss(s, label, Tensor({c})) - hrt::cross_entropy(s, label)));
    Tensor shifted = s;
    const double k = gen.uniform(-100, 100);
    for (auto& v : shifted.data()) v += k;
    predict_ok = predict_ok && hrt::predict(s, g) == hrt::predict(shifted, g);
  }

  auto cfg = hrt::gradcheck_config();
  const auto data = hrt::generate_synthetic(cfg.synthetic, cfg.data_seed).dataset;
  const auto model = hrt::build_model(cfg, data);
  const auto loss = cfg.loss.resolve(data.num_classes(), data.seen_classes);
  double worst_add = 0;
  for (auto i : data.indices(hrt::Split::kTrain)) {
    const auto& s = data.samples[i];
    const auto parts = hrt::total_loss(model, s.patches, s.label, loss, data.seen_classes);
    worst_add = std::max(worst_add, std::fabs(parts.total - (parts.ce + loss.lambda1 * parts.cal + loss.lambda2 * parts.reg)));
  }
  const bool pass = worst_cal <= 1e-10 && worst_add <= 1e-10 && predict_ok;
  return {pass, "cal_vs_ce=" + num(worst_cal) + " additivity=" + num(worst_add) +
                    " predict_shift_invariant=" + (predict_ok ? "yes" : "no")};
}

Outcome metric_anchors() {
  const double a = hrt::harmonic_mean(0.635, 0.621), b = hrt::harmonic_mean(0.787, 0.589);
  const bool pass = std::fabs(a - 0.628) <= 0.0005 && std::fabs(b - 0.674) <= 0.0005;
  return {pass, "h(0.635,0.621)=" + num(a) + " h(0.787,0.589)=" + num(b)};
}

Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = hrt::parse_config("{}");  // defaults: seed 0, 200 epochs
  const auto data = hrt::generate_synthetic(cfg.synthetic, cfg.data_seed).dataset;

  // The linear oracle shows the thresholds are reachable on this data.
  std::vector<std::size_t> all(data.num_classes());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  const double o_t1 = oracle::linear_attribute_oracle(data, hrt::Split::kTestUnseen, data.unseen_classes, 1e-3);
  const double o_tr = oracle::linear_attribute_oracle(data, hrt::Split::kTestSeen, all, 1e-3);
  const double o_ts = oracle::linear_attribute_oracle(data, hrt::Split::kTestUnseen, all, 1e-3);
  const double o_h = hrt::harmonic_mean(o_tr, o_ts);
  const bool oracle_ok = o_t1 >= 0.60;

  const auto trained = hrt::run_training(cfg, data);
  const auto m = hrt::run_evaluation(cfg, trained.model, data);
  const double secs = seconds_since(t0);
  const bool pass = oracle_ok && *m.t1 >= 0.60 && *m.h >= 0.50 && secs < 600.0;
  std::ostringstream d;
  d << "epochs=" << cfg.training.epochs << " t1=" << num(*m.t1) << " tr=" << num(*m.tr) << " ts=" << num(*m.ts)
    << " h=" << num(*m.h) << " oracle_t1=" << num(o_t1) << " oracle_h=" << num(o_h)
    << " seconds=" << num(std::round(secs));
  return {pass, d.str()};
}

Outcome determinism(const fs::path& work, const std::string& cli) {
  const fs::path cfg = work / "det_config.json";
  write_file(cfg, R"({"training": {"epochs": 3}})");
  std::vector<std::string> metrics, history;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path root = work / ("det_" + std::to_string(rep));
    fs::remove_all(root);
    const std::string q = "\"";
    const std::string data = q + (root / "data").string() + q, run_dir = q + (root / "run").string() + q,
                      eval_dir = q + (root / "eval").string() + q;
    if (run(q + cli + q + " gen --config " + q + cfg.string() + q + " --out " + data) != 0 ||
        run(q + cli + q + " train --quiet --data " + data + " --config " + q + cfg.string() + q + " --out " + run_dir) != 0 ||
        run(q + cli + q + " eval --checkpoint " + q + (root / "run" / "checkpoint.bin").string() + q + " --data " + data +
            " --out " + eval_dir) != 0) {
      return {false, "CLI run " + std::to_string(rep) + " failed"};
    }
    metrics.push_back(slurp(root / "eval" / "metrics.json"));
    history.push_back(slurp(root / "run" / "history.csv"));
  }
  const bool pass = metrics[0] == metrics[1] && history[0] == history[1] && !history[0].empty();
  return {pass, std::string("metrics.json ") + (metrics[0] == metrics[1] ? "identical" : "DIFFERENT") +
                    ", history.csv " + (history[0] == history[1] ? "identical" : "DIFFERENT") + " (3 epochs)"};
}

Outcome ablation(const fs::path& work, const std::string& cli) {
  const fs::path cfg = work / "ablate_config.json";
  write_file(cfg, R"({"training": {"epochs": 2}})");
  const fs::path out = work / "ablate";
  fs::remove_all(out);
  const std::string q = "\"";
  if (run(q + cli + q + " ablate --axis both --config " + q + cfg.string() + q + " --out " + q + out.string() + q) != 0) {
    return {false, "ablate exited nonzero"};
  }
  std::istringstream in(slurp(out / "ablation.csv"));
  std::string line;
  std::getline(in, line);
  int rows = 0, finite = 0, td = 0, em = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) continue;
    td += cells[0] == "k_TD";
    em += cells[0] == "k_EM";
    bool ok = true;
    for (std::size_t i = 2; i < 6; ++i) ok = ok && std::isfinite(hrt::parse_double(cells[i]));
    finite += ok;
  }
  const bool pass = rows == 10 && finite == 10 && td == 5 && em == 5;
  return {pass, "runs=" + std::to_string(rows) + " finite=" + std::to_string(finite) + " (k_TD " + std::to_string(td) +
                    ", k_EM " + std::to_string(em) + "; 2 epochs each)"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: hrt_acceptance <work_dir> <hrt_cli>\n";
    return 1;
  }
  const fs::path work = argv[1];
  const std::string cli = argv[2];
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"routing oracle equivalence", routing_oracles},
      {"simplex and convexity invariants", simplex_invariants},
      {"loss identities", loss_identities},
      {"metric formula anchors", metric_anchors},
      {"end-to-end synthetic learning", end_to_end},
      {"determinism of gen+train+eval", [&] { return determinism(work, cli); }},
      {"ablation harness", [&] { return ablation(work, cli); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
