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

#include "hrt/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "hrt/errors.hpp"
#include "hrt/format.hpp"

namespace hrt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.filename().string() + ": cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (const auto& l : lines) {
    if (first) {
      t.header = split_line(l);
      first = false;
    } else {
      t.rows.push_back(split_line(l));
    }
  }
  if (first) throw LoadError(path.filename().string() + ": missing header row");
  return t;
}

Tensor read_matrix_csv(const fs::path& path, std::size_t rows, std::size_t cols,
                       std::vector<std::string>* header = nullptr) {
  const std::string name = path.filename().string();
  CsvTable t = read_csv(path);
  if (t.header.size() != cols) {
    throw LoadError(name + ": header has " + std::to_string(t.header.size()) + " columns, expected " +
                    std::to_string(cols));
  }
  if (t.rows.size() != rows) {
    throw LoadError(name + ": " + std::to_string(t.rows.size()) + " data rows, expected " +
                    std::to_string(rows));
  }
  Tensor m = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (t.rows[r].size() != cols) {
      throw LoadError(name + ": row " + std::to_string(r) + " has " + std::to_string(t.rows[r].size()) +
                      " columns, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        m(r, c) = parse_double(t.rows[r][c]);
      } catch (const LoadError& e) {
        throw LoadError(name + ": row " + std::to_string(r) + ", column " + std::to_string(c) + ": " +
                        e.what());
      }
      if (!std::isfinite(m(r, c))) {
        throw LoadError(name + ": row " + std::to_string(r) + ", column " + std::to_string(c) +
                        ": non-finite value");
      }
    }
  }
  if (header) *header = t.header;
  return m;
}

void write_matrix_csv(const fs::path& path, const Tensor& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing " + path.string());
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

template <typename U>
void put_le(std::string& buf, U bits) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const unsigned char* p) {
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return bits;
}

std::size_t meta_size(const json& meta, const char* key) {
  if (!meta.contains(key)) throw LoadError(std::string("meta.json: missing key '") + key + "'");
  const auto& v = meta.at(key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
    throw LoadError(std::string("meta.json: '") + key + "' must be a positive integer, found " + v.dump());
  }
  return v.get<std::size_t>();
}

std::string meta_string(const json& meta, const char* key) {
  if (!meta.contains(key)) throw LoadError(std::string("meta.json: missing key '") + key + "'");
  const auto& v = meta.at(key);
  if (!v.is_string()) throw LoadError(std::string("meta.json: '") + key + "' must be a string, found " + v.dump());
  return v.get<std::string>();
}

}  // namespace

std::string to_string(FeatureDtype dtype) { return dtype == FeatureDtype::kF32 ? "f32" : "f64"; }

FeatureDtype parse_feature_dtype(const std::string& name) {
  if (name == "f32") return FeatureDtype::kF32;
  if (name == "f64") return FeatureDtype::kF64;
  throw LoadError("unknown dtype '" + name + "' (expected f32 or f64)");
}

void write_dataset(const fs::path& dir, const ZslDataset& dataset, FeatureDtype dtype) {
  dataset.validate();
  fs::create_directories(dir);
  const auto& sem = dataset.semantics;
  const std::size_t a = sem.num_attributes();

  json meta = {{"version", kFormatVersion},
               {"R", dataset.num_patches},
               {"D_feat", dataset.feature_dim},
               {"A", a},
               {"tau", sem.tau()},
               {"C", dataset.num_classes()},
               {"sample_count", dataset.samples.size()},
               {"dtype", to_string(dtype)},
               {"endianness", "little"}};
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw ConfigError("cannot write " + (dir / "meta.json").string());
  }

  std::string buf;
  const std::size_t width = dtype == FeatureDtype::kF32 ? 4 : 8;
  buf.reserve(dataset.samples.size() * dataset.num_patches * dataset.feature_dim * width);
  for (const auto& s : dataset.samples) {
    for (double v : s.patches.data()) {
      if (dtype == FeatureDtype::kF32) {
        put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        put_le(buf, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  {
    std::ofstream out(dir / "features.bin", std::ios::binary);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ConfigError("cannot write " + (dir / "features.bin").string());
  }

  const auto names = sem.attribute_names.size() == a ? sem.attribute_names : numbered("attr_", a);
  write_matrix_csv(dir / "attributes.csv", sem.class_attr, names);
  write_matrix_csv(dir / "semantics.csv", sem.attr_vectors, numbered("dim_", sem.tau()));
  if (!sem.compact_vectors.empty()) {
    write_matrix_csv(dir / "compact.csv", sem.compact_vectors, numbered("dim_", sem.compact_vectors.cols()));
  }

  std::ofstream out(dir / "splits.csv");
  out << "sample_index,class_index,split\n";
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    out << i << ',' << dataset.samples[i].label << ',' << to_string(dataset.samples[i].split) << '\n';
  }
  if (!out) throw ConfigError("cannot write " + (dir / "splits.csv").string());
}

ZslDataset load_features(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError("dataset directory not found: " + dir.string());
  json meta;
  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw LoadError("meta.json: cannot open " + (dir / "meta.json").string());
    try {
      meta = json::parse(in);
    } catch (const json::exception& e) {
      throw LoadError(std::string("meta.json: ") + e.what());
    }
  }
  if (!meta.is_object()) throw LoadError("meta.json: top level must be an object");
  static const char* kKeys[] = {"version", "R", "D_feat", "A", "tau", "C", "sample_count", "dtype", "endianness"};
  for (const auto& item : meta.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) throw LoadError("meta.json: unknown key '" + item.key() + "'");
  }
  const std::size_t version = meta_size(meta, "version");
  if (version != kFormatVersion) {
    throw LoadError("meta.json: unsupported version " + std::to_string(version));
  }
  const std::size_t r = meta_size(meta, "R"), dfeat = meta_size(meta, "D_feat");
  const std::size_t a = meta_size(meta, "A"), tau = meta_size(meta, "tau");
  const std::size_t c = meta_size(meta, "C"), n = meta_size(meta, "sample_count");
  FeatureDtype dtype;
  try {
    dtype = parse_feature_dtype(meta_string(meta, "dtype"));
  } catch (const LoadError& e) {
    throw LoadError(std::string("meta.json: ") + e.what());
  }
  const std::string endian = meta_string(meta, "endianness");
  if (endian != "little") throw LoadError("meta.json: endianness must be \"little\", found \"" + endian + "\"");

  ZslDataset ds;
  ds.num_patches = r;
  ds.feature_dim = dfeat;

  // features.bin
  const std::size_t width = dtype == FeatureDtype::kF32 ? 4 : 8;
  const std::size_t per_sample = r * dfeat;
  const std::uint64_t expected = static_cast<std::uint64_t>(n) * per_sample * width;
  const fs::path fpath = dir / "features.bin";
  if (!fs::exists(fpath)) throw LoadError("features.bin: missing");
  const std::uint64_t actual = fs::file_size(fpath);
  if (actual != expected) {
    throw LoadError("features.bin: expected " + std::to_string(expected) + " bytes (" + std::to_string(n) +
                    " samples x " + std::to_string(r) + " x " + std::to_string(dfeat) + " x " +
                    std::to_string(width) + "), found " + std::to_string(actual));
  }
  std::vector<unsigned char> raw(expected);
  {
    std::ifstream in(fpath, std::ios::binary);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw LoadError("features.bin: short read");
  }
  ds.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor p = Tensor::matrix(r, dfeat);
    auto out = p.data();
    const unsigned char* base = raw.data() + i * per_sample * width;
    for (std::size_t k = 0; k < per_sample; ++k) {
      const double v = dtype == FeatureDtype::kF32
                           ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(base + 4 * k)))
                           : std::bit_cast<double>(get_le<std::uint64_t>(base + 8 * k));
      if (!std::isfinite(v)) {
        throw LoadError("features.bin: sample " + std::to_string(i) + ", patch " + std::to_string(k / dfeat) +
                        ", feature " + std::to_string(k % dfeat) + ": non-finite value");
      }
      out[k] = v;
    }
    ds.samples[i].patches = std::move(p);
  }

  // Semantics.
  ds.semantics.class_attr = read_matrix_csv(dir / "attributes.csv", c, a, &ds.semantics.attribute_names);
  ds.semantics.attr_vectors = read_matrix_csv(dir / "semantics.csv", a, tau);
  if (fs::exists(dir / "compact.csv")) {
    const CsvTable probe = read_csv(dir / "compact.csv");
    ds.semantics.compact_vectors = read_matrix_csv(dir / "compact.csv", a, probe.header.size());
  }

  // splits.csv
  const CsvTable splits = read_csv(dir / "splits.csv");
  if (splits.header != std::vector<std::string>{"sample_index", "class_index", "split"}) {
    throw LoadError("splits.csv: header must be sample_index,class_index,split");
  }
  if (splits.rows.size() != n) {
    throw LoadError("splits.csv: " + std::to_string(splits.rows.size()) + " rows, expected sample_count " +
                    std::to_string(n));
  }
  std::vector<int> role(c, 0);  // bit 0 seen, bit 1 unseen
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = splits.rows[i];
    const std::string where = "splits.csv: row " + std::to_string(i);
    if (row.size() != 3) throw LoadError(where + ": expected 3 columns");
    auto parse_index = [&](const std::string& text, const char* what) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(text, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != text.size() || text.front() == '-') {
        throw LoadError(where + ": bad " + what + " '" + text + "'");
      }
      return static_cast<std::size_t>(v);
    };
    if (parse_index(row[0], "sample_index") != i) {
      throw LoadError(where + ": sample_index " + row[0] + " out of order (expected " + std::to_string(i) + ")");
    }
    const std::size_t label = parse_index(row[1], "class_index");
    if (label >= c) throw LoadError(where + ": class_index " + row[1] + " >= C=" + std::to_string(c));
    Split split;
    try {
      split = parse_split(row[2]);
    } catch (const LoadError& e) {
      throw LoadError(where + ": " + e.what());
    }
    ds.samples[i].label = label;
    ds.samples[i].split = split;
    role[label] |= split == Split::kTestUnseen ? 2 : 1;
    if (role[label] == 3) {
      throw LoadError(where + ": class " + std::to_string(label) + " appears in both seen and unseen splits");
    }
  }
  for (std::size_t k = 0; k < c; ++k) {
    if (role[k] == 0) throw LoadError("splits.csv: class " + std::to_string(k) + " has no samples");
    (role[k] == 1 ? ds.seen_classes : ds.unseen_classes).push_back(k);
  }
  ds.validate();
  return ds;
}

}  // namespace hrt
