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

#include "hrt/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

#include "hrt/errors.hpp"

namespace hrt {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'H', 'R', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr int kVersion = 1;

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::vector<std::pair<std::string, const Tensor*>> declared_tensors(const HrtModel& model) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  const auto& names = parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(names[i], &model.parameters()[i]);
  out.emplace_back("semantics.attr_vectors", &model.semantics().attr_vectors);
  out.emplace_back("semantics.compact_vectors", &model.semantics().compact_vectors);
  out.emplace_back("semantics.class_attr", &model.semantics().class_attr);
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const HrtModel& model, const RunConfig& config,
                     FeatureDtype dtype) {
  ordered_json header;
  header["format"] = "hrt-checkpoint";
  header["version"] = kVersion;
  header["dtype"] = to_string(dtype);
  header["endianness"] = "little";
  header["seed"] = config.training.seed;
  header["config_hash"] = config_hash(config);
  header["config"] = ordered_json::parse(config_to_json(config));
  header["feature_dim"] = model.config().encoder.feature_dim;
  header["attribute_names"] = model.semantics().attribute_names;

  std::string payload;
  std::size_t offset = 0;
  ordered_json tensors = ordered_json::array();
  for (const auto& [name, t] : declared_tensors(model)) {
    tensors.push_back({{"name", name}, {"shape", t->shape()}, {"offset", offset}});
    offset += t->size();
    for (double v : t->data()) {
      if (dtype == FeatureDtype::kF32) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int i = 0; i < 4; ++i) payload.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
      } else {
        put_u64(payload, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  header["tensors"] = tensors;

  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out += text;
  out += payload;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw ConfigError("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw LoadError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || !std::equal(kMagic, kMagic + 8, bytes.begin(),
                                       [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw LoadError("checkpoint: bad magic (not an HRT checkpoint)");
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) {
    throw LoadError("checkpoint: header length " + std::to_string(header_len) + " exceeds file size " +
                    std::to_string(bytes.size()));
  }
  ordered_json header;
  try {
    header = ordered_json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const ordered_json::exception& e) {
    throw LoadError(std::string("checkpoint header: ") + e.what());
  }

  Checkpoint ck;
  std::size_t feature_dim = 0;
  FeatureDtype dtype;
  std::vector<std::string> attribute_names;
  try {
    if (header.at("format") != "hrt-checkpoint") throw LoadError("checkpoint: unknown format");
    if (header.at("version") != kVersion) throw LoadError("checkpoint: unsupported version");
    if (header.at("endianness") != "little") throw LoadError("checkpoint: endianness must be little");
    dtype = parse_feature_dtype(header.at("dtype").get<std::string>());
    ck.seed = header.at("seed").get<std::uint64_t>();
    ck.config_hash = header.at("config_hash").get<std::string>();
    feature_dim = header.at("feature_dim").get<std::size_t>();
    attribute_names = header.at("attribute_names").get<std::vector<std::string>>();
    ck.config = parse_config(header.at("config").dump());
  } catch (const ordered_json::exception& e) {
    throw LoadError(std::string("checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(std::string("checkpoint config: ") + e.what());
  }
  if (config_hash(ck.config) != ck.config_hash) {
    throw LoadError("checkpoint: config_hash " + ck.config_hash + " does not match stored config (" +
                    config_hash(ck.config) + ")");
  }

  const std::size_t width = dtype == FeatureDtype::kF32 ? 4 : 8;
  const unsigned char* payload = bytes.data() + 16 + header_len;
  const std::size_t payload_elems = (bytes.size() - 16 - header_len) / width;
  if ((bytes.size() - 16 - header_len) % width != 0) throw LoadError("checkpoint: payload is not whole floats");

  std::vector<Tensor> tensors;
  std::vector<std::string> names;
  std::size_t expected_offset = 0;
  try {
    for (const auto& t : header.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<Shape>();
      const auto offset = t.at("offset").get<std::size_t>();
      if (offset != expected_offset) throw LoadError("checkpoint: tensor '" + name + "' has a non-contiguous offset");
      for (auto e : shape)
        if (e == 0) throw LoadError("checkpoint: tensor '" + name + "' has a zero extent");
      const std::size_t n = shape_size(shape);
      if (offset + n > payload_elems) {
        throw LoadError("checkpoint: tensor '" + name + "' needs " + std::to_string(offset + n) +
                        " payload values, found " + std::to_string(payload_elems));
      }
      std::vector<double> data(n);
      for (std::size_t k = 0; k < n; ++k) {
        const unsigned char* p = payload + (offset + k) * width;
        if (dtype == FeatureDtype::kF32) {
          std::uint32_t bits = 0;
          for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
          data[k] = std::bit_cast<float>(bits);
        } else {
          data[k] = std::bit_cast<double>(get_u64(p));
        }
        if (!std::isfinite(data[k])) throw LoadError("checkpoint: tensor '" + name + "' has a non-finite value");
      }
      tensors.emplace_back(shape, std::move(data));
      names.push_back(name);
      expected_offset += n;
    }
  } catch (const ordered_json::exception& e) {
    throw LoadError(std::string("checkpoint tensors: ") + e.what());
  }
  if (expected_offset != payload_elems) {
    throw LoadError("checkpoint: payload has " + std::to_string(payload_elems) + " values, tensors declare " +
                    std::to_string(expected_offset));
  }
  const auto& pnames = parameter_names();
  if (names.size() != pnames.size() + 3) throw LoadError("checkpoint: unexpected tensor count");
  for (std::size_t i = 0; i < pnames.size(); ++i) {
    if (names[i] != pnames[i]) throw LoadError("checkpoint: expected tensor '" + pnames[i] + "', found '" + names[i] + "'");
  }

  SemanticSpace sem;
  sem.attr_vectors = tensors[pnames.size()];
  sem.compact_vectors = tensors[pnames.size() + 1];
  sem.class_attr = tensors[pnames.size() + 2];
  sem.attribute_names = std::move(attribute_names);
  tensors.resize(pnames.size());
  ModelConfig mc = ck.config.model;
  mc.encoder.feature_dim = feature_dim;
  try {
    ck.model = HrtModel::from_parameters(mc, std::move(sem), std::move(tensors));
  } catch (const ValidationError& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace hrt
