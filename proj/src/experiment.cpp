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

#include "hrt/experiment.hpp"

#include <chrono>
#include <ostream>

#include "hrt/errors.hpp"
#include "hrt/format.hpp"
#include "hrt/synthetic.hpp"

namespace hrt {

HrtModel build_model(const RunConfig& config, const ZslDataset& dataset) {
  ModelConfig mc = config.model;
  mc.encoder.feature_dim = dataset.feature_dim;
  return HrtModel::create(mc, dataset.semantics);
}

TrainResult run_training(const RunConfig& config, const ZslDataset& dataset, const EpochCallback& on_epoch) {
  HrtModel model = build_model(config, dataset);
  const LossConfig loss = config.loss.resolve(dataset.num_classes(), dataset.seen_classes);
  return train(dataset, std::move(model), loss, config.optimizer, config.training, on_epoch);
}

Metrics run_evaluation(const RunConfig& config, const HrtModel& model, const ZslDataset& dataset) {
  return evaluate(model, dataset, config.eval.mode, gamma_profile(config.loss.gamma_profile));
}

std::string to_string(AblationAxis axis) {
  return axis == AblationAxis::kRoutingIterations ? "k_TD" : "k_EM";
}

AblationAxis parse_ablation_axis(const std::string& name) {
  if (name == "k_TD" || name == "routing") return AblationAxis::kRoutingIterations;
  if (name == "k_EM" || name == "em") return AblationAxis::kEmIterations;
  throw ConfigError("unknown ablation axis '" + name + "' (expected k_TD or k_EM)");
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const ZslDataset& dataset, AblationAxis axis) {
  config.validate();
  std::vector<AblationRow> rows;
  for (auto value : config.ablation.values) {
    RunConfig run = config;
    auto& enc = run.model.encoder;
    if (axis == AblationAxis::kRoutingIterations) {
      enc.routing_iterations = value;
      enc.em_iterations = config.ablation.held_em_iterations;
    } else {
      enc.em_iterations = value;
      enc.routing_iterations = config.ablation.held_routing_iterations;
    }
    run.eval.mode = EvalMode::kBoth;
    const auto trained = run_training(run, dataset);
    rows.push_back({axis, value, run_evaluation(run, trained.model, dataset)});
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
  out << "axis,value,t1,tr,ts,h\n";
  for (const auto& r : rows) {
    out << to_string(r.axis) << ',' << r.value << ',' << format_double(r.metrics.t1.value_or(0.0)) << ','
        << format_double(r.metrics.tr.value_or(0.0)) << ',' << format_double(r.metrics.ts.value_or(0.0)) << ','
        << format_double(r.metrics.h.value_or(0.0)) << '\n';
  }
}

void write_agreement_csv(std::ostream& out, const HrtModel& model, const ZslDataset& dataset,
                         std::span<const std::size_t> sample_indices) {
  model.check_compatible(dataset);
  out << "sample_index,patch,attribute,agreement,attention\n";
  for (auto i : sample_indices) {
    if (i >= dataset.samples.size()) throw IndexError("sample index " + std::to_string(i) + " out of range");
    const auto f = encode(dataset.samples[i].patches, model.semantics(), model.encoder_params(),
                          model.config().encoder);
    for (std::size_t r = 0; r < f.agreement.rows(); ++r) {
      for (std::size_t a = 0; a < f.agreement.cols(); ++a) {
        out << i << ',' << r << ',' << a << ',' << format_double(f.agreement(r, a)) << ','
            << format_double(f.attention(r, a)) << '\n';
      }
    }
  }
}

RunConfig gradcheck_config() {
  RunConfig c;
  c.synthetic.seen_classes = 5;
  c.synthetic.unseen_classes = 2;
  c.synthetic.attributes = 6;
  c.synthetic.patches = 4;
  c.synthetic.feature_dim = 16;
  c.synthetic.tau = 8;
  c.synthetic.samples_per_class = 4;
  c.model.encoder.capsule_dim = 8;
  c.model.encoder.vote_mode = VoteMode::kVectorTransform;
  c.model.encoder.em_iterations = 2;
  c.model.encoder.routing_iterations = 2;
  c.loss.lambda1 = 0.1;
  c.loss.lambda2 = 0.033;
  return c;
}

GradCheckRun run_gradcheck(const RunConfig& config, std::size_t samples, const GradCheckOptions& options) {
  config.validate();
  if (samples == 0) throw ConfigError("gradcheck needs at least one sample");
  const auto start = std::chrono::steady_clock::now();
  const auto data = generate_synthetic(config.synthetic, config.data_seed).dataset;
  const HrtModel model = build_model(config, data);
  const LossConfig loss = config.loss.resolve(data.num_classes(), data.seen_classes);
  auto train_idx = data.indices(Split::kTrain);
  if (train_idx.size() > samples) train_idx.resize(samples);

  const GraphBuilder build = [&](std::span<const ad::Var> leaves) {
    ad::Var total;
    for (auto i : train_idx) {
      const auto& s = data.samples[i];
      const auto g = total_loss_graph(model, leaves, s.patches, s.label, loss, data.seen_classes);
      total = total.defined() ? ad::add(total, g.total) : g.total;
    }
    return ad::scale(total, 1.0 / static_cast<double>(train_idx.size()));
  };
  GradCheckRun run;
  run.report = grad_check_graph(build, model.parameters(), parameter_names(), options);
  run.samples = train_idx.size();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

void write_gradcheck_report(std::ostream& out, const GradCheckRun& run, const GradCheckOptions& options) {
  out << "group,count,max_rel_error,max_abs_error,max_abs_gradient\n";
  for (const auto& g : run.report.groups) {
    out << g.name << ',' << g.count << ',' << format_double(g.max_rel_error) << ','
        << format_double(g.max_abs_error) << ',' << format_double(g.max_abs_gradient) << '\n';
  }
  out << "# samples=" << run.samples << " step=" << format_double(options.step)
      << " tolerance=" << format_double(options.tolerance) << " max_rel_error="
      << format_double(run.report.max_rel_error) << " seconds=" << format_double(run.seconds)
      << " result=" << (run.report.passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace hrt
