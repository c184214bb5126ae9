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

#include "hrt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hrt/errors.hpp"
#include "hrt/format.hpp"

namespace hrt {

using nlohmann::ordered_json;

namespace {

// Reads section keys into fields, rejecting anything it does not recognise.
class SectionReader {
 public:
  SectionReader(const ordered_json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    section_ = &root.at(name_);
    if (!section_->is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  SectionReader& read(const char* key, T& field) {
    seen_.emplace_back(key);
    if (!section_ || !section_->contains(key)) return *this;
    const auto& v = section_->at(key);
    const std::string where = "config: " + name_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
      field = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + " must be a nonnegative integer");
      field = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + " must be a number");
      field = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + " must be a string");
      field = v.get<std::string>();
    } else {
      if (!v.is_array()) throw ConfigError(where + " must be an array of integers");
      field.clear();
      for (const auto& e : v) {
        if (!e.is_number_unsigned()) throw ConfigError(where + " must be an array of integers");
        field.push_back(e.get<typename T::value_type>());
      }
    }
    return *this;
  }

  void finish() const {
    if (!section_) return;
    for (const auto& item : section_->items()) {
      bool known = false;
      for (const auto& k : seen_) known = known || k == item.key();
      if (!known) throw ConfigError("config: unknown key '" + name_ + "." + item.key() + "'");
    }
  }

 private:
  std::string name_;
  const ordered_json* section_ = nullptr;
  std::vector<std::string> seen_;
};

ordered_json to_json_value(const RunConfig& c) {
  const auto& s = c.synthetic;
  const auto& e = c.model.encoder;
  ordered_json j;
  j["synthetic"] = {{"seen_classes", s.seen_classes},
                    {"unseen_classes", s.unseen_classes},
                    {"attributes", s.attributes},
                    {"patches", s.patches},
                    {"feature_dim", s.feature_dim},
                    {"tau", s.tau},
                    {"samples_per_class", s.samples_per_class},
                    {"noise_std", s.noise_std},
                    {"signal_patches_per_attribute", s.signal_patches_per_attribute},
                    {"attributes_per_class", s.attributes_per_class},
                    {"test_fraction", s.test_fraction},
                    {"seed", c.data_seed}};
  j["model"] = {{"capsule_dim", e.capsule_dim},
                {"primary_capsules", e.primary_capsules},
                {"vote_mode", to_string(e.vote_mode)},
                {"em_iterations", e.em_iterations},
                {"routing_iterations", e.routing_iterations},
                {"em_lambda", e.em_lambda},
                {"sigma_floor", e.sigma_floor},
                {"layer_norm_eps", e.layer_norm_eps},
                {"compaction", to_string(c.model.compaction)},
                {"fa_iterations", c.model.factor_analysis.iterations},
                {"fa_noise_floor_ratio", c.model.factor_analysis.noise_floor_ratio},
                {"fa_init_seed", c.model.factor_analysis.init_seed},
                {"init_seed", c.model.init_seed}};
  j["loss"] = {{"lambda1", c.loss.lambda1},
               {"lambda2", c.loss.lambda2},
               {"gamma_profile", c.loss.gamma_profile},
               {"ce_seen_only", c.loss.ce_seen_only}};
  j["optimizer"] = {{"learning_rate", c.optimizer.learning_rate},
                    {"momentum", c.optimizer.momentum},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"rho", c.optimizer.rho},
                    {"eps", c.optimizer.eps}};
  j["training"] = {{"epochs", c.training.epochs}, {"batch_size", c.training.batch_size}, {"seed", c.training.seed}};
  j["eval"] = {{"mode", to_string(c.eval.mode)}};
  j["ablation"] = {{"values", c.ablation.values},
                   {"held_em_iterations", c.ablation.held_em_iterations},
                   {"held_routing_iterations", c.ablation.held_routing_iterations}};
  return j;
}

}  // namespace

std::string to_string(VoteMode mode) {
  return mode == VoteMode::kMatrixProduct ? "matrix-product" : "vector-transform";
}

VoteMode parse_vote_mode(const std::string& name) {
  if (name == "matrix-product") return VoteMode::kMatrixProduct;
  if (name == "vector-transform") return VoteMode::kVectorTransform;
  throw ConfigError("unknown vote_mode '" + name + "' (expected matrix-product or vector-transform)");
}

LossConfig LossSettings::resolve(std::size_t num_classes, const std::vector<std::size_t>& seen_classes) const {
  LossConfig cfg;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.ce_seen_only = ce_seen_only;
  cfg.gamma_per_class = gamma_vector(hrt::gamma_profile(gamma_profile), num_classes, seen_classes);
  cfg.validate(num_classes);
  return cfg;
}

void RunConfig::validate() const {
  synthetic.validate();
  const auto& e = model.encoder;
  if (e.capsule_dim == 0 || e.primary_capsules == 0) throw ConfigError("capsule_dim and primary_capsules must be positive");
  pose_rows_for(e.vote_mode, e.capsule_dim);
  if (e.em_iterations == 0 || e.routing_iterations == 0) throw ConfigError("routing iteration counts must be positive");
  if (!(e.sigma_floor > 0.0) || !(e.layer_norm_eps > 0.0)) throw ConfigError("sigma_floor and layer_norm_eps must be positive");
  if (!(loss.lambda1 >= 0.0) || !(loss.lambda2 >= 0.0)) throw ConfigError("loss weights must be nonnegative");
  gamma_profile(loss.gamma_profile);
  optimizer.validate();
  if (training.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (ablation.values.empty()) throw ConfigError("ablation.values must not be empty");
  for (auto v : ablation.values)
    if (v == 0) throw ConfigError("ablation iteration values must be positive");
  if (ablation.held_em_iterations == 0 || ablation.held_routing_iterations == 0) {
    throw ConfigError("held ablation iteration counts must be positive");
  }
}

RunConfig parse_config(std::string_view json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  static const char* kSections[] = {"synthetic", "model", "loss", "optimizer", "training", "eval", "ablation"};
  for (const auto& item : root.items()) {
    bool known = false;
    for (const char* s : kSections) known = known || item.key() == s;
    if (!known) throw ConfigError("config: unknown section '" + item.key() + "'");
  }

  RunConfig c;
  auto& s = c.synthetic;
  SectionReader(root, "synthetic")
      .read("seen_classes", s.seen_classes)
      .read("unseen_classes", s.unseen_classes)
      .read("attributes", s.attributes)
      .read("patches", s.patches)
      .read("feature_dim", s.feature_dim)
      .read("tau", s.tau)
      .read("samples_per_class", s.samples_per_class)
      .read("noise_std", s.noise_std)
      .read("signal_patches_per_attribute", s.signal_patches_per_attribute)
      .read("attributes_per_class", s.attributes_per_class)
      .read("test_fraction", s.test_fraction)
      .read("seed", c.data_seed)
      .finish();

  auto& e = c.model.encoder;
  std::string vote_mode = to_string(e.vote_mode), compaction = to_string(c.model.compaction);
  SectionReader(root, "model")
      .read("capsule_dim", e.capsule_dim)
      .read("primary_capsules", e.primary_capsules)
      .read("vote_mode", vote_mode)
      .read("em_iterations", e.em_iterations)
      .read("routing_iterations", e.routing_iterations)
      .read("em_lambda", e.em_lambda)
      .read("sigma_floor", e.sigma_floor)
      .read("layer_norm_eps", e.layer_norm_eps)
      .read("compaction", compaction)
      .read("fa_iterations", c.model.factor_analysis.iterations)
      .read("fa_noise_floor_ratio", c.model.factor_analysis.noise_floor_ratio)
      .read("fa_init_seed", c.model.factor_analysis.init_seed)
      .read("init_seed", c.model.init_seed)
      .finish();
  e.vote_mode = parse_vote_mode(vote_mode);
  try {
    c.model.compaction = parse_compaction_method(compaction);
  } catch (const ValidationError& err) {
    throw ConfigError(std::string("config: model.compaction: ") + err.what());
  }

  SectionReader(root, "loss")
      .read("lambda1", c.loss.lambda1)
      .read("lambda2", c.loss.lambda2)
      .read("gamma_profile", c.loss.gamma_profile)
      .read("ce_seen_only", c.loss.ce_seen_only)
      .finish();
  SectionReader(root, "optimizer")
      .read("learning_rate", c.optimizer.learning_rate)
      .read("momentum", c.optimizer.momentum)
      .read("weight_decay", c.optimizer.weight_decay)
      .read("rho", c.optimizer.rho)
      .read("eps", c.optimizer.eps)
      .finish();
  SectionReader(root, "training")
      .read("epochs", c.training.epochs)
      .read("batch_size", c.training.batch_size)
      .read("seed", c.training.seed)
      .finish();
  std::string mode = to_string(c.eval.mode);
  SectionReader(root, "eval").read("mode", mode).finish();
  c.eval.mode = parse_eval_mode(mode);
  SectionReader(root, "ablation")
      .read("values", c.ablation.values)
      .read("held_em_iterations", c.ablation.held_em_iterations)
      .read("held_routing_iterations", c.ablation.held_routing_iterations)
      .finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& config) { return to_json_value(config).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) { return hex64(fnv1a64(to_json_value(config).dump())); }

void write_resolved_config(const std::filesystem::path& dir, const RunConfig& config) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.json");
  out << config_to_json(config);
  if (!out) throw ConfigError("cannot write " + (dir / "config.json").string());
}

}  // namespace hrt
