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

// Python bindings: dataset generation and I/O, training, evaluation and
// gradient checks. Validation failures raise ValueError subclasses, numeric
// failures ArithmeticError subclasses.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>

#include "hrt/checkpoint.hpp"
#include "hrt/config.hpp"
#include "hrt/dataset_io.hpp"
#include "hrt/errors.hpp"
#include "hrt/experiment.hpp"
#include "hrt/metrics.hpp"
#include "hrt/synthetic.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_numpy(const hrt::Tensor& t) {
  py::array_t<double> out(t.shape());
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict metrics_dict(const hrt::Metrics& m) {
  py::dict d;
  auto put = [&](const char* k, const std::optional<double>& v) {
    d[k] = v ? py::cast(*v) : py::none();
  };
  put("t1", m.t1);
  put("tr", m.tr);
  put("ts", m.ts);
  put("h", m.h);
  return d;
}

py::list history_list(const std::vector<hrt::EpochRecord>& history) {
  py::list out;
  for (const auto& r : history) {
    py::dict d;
    d["epoch"] = r.epoch;
    d["L_ce"] = r.ce;
    d["L_cal"] = r.cal;
    d["L_reg"] = r.reg;
    d["total"] = r.total;
    d["train_acc"] = r.train_acc;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(pyhrt, m) {
  m.doc() = "Hybrid routing transformer for zero-shot learning";

  py::register_exception<hrt::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<hrt::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<hrt::SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("seen_classes", &hrt::SyntheticSpec::seen_classes)
      .def_readwrite("unseen_classes", &hrt::SyntheticSpec::unseen_classes)
      .def_readwrite("attributes", &hrt::SyntheticSpec::attributes)
      .def_readwrite("patches", &hrt::SyntheticSpec::patches)
      .def_readwrite("feature_dim", &hrt::SyntheticSpec::feature_dim)
      .def_readwrite("tau", &hrt::SyntheticSpec::tau)
      .def_readwrite("samples_per_class", &hrt::SyntheticSpec::samples_per_class)
      .def_readwrite("noise_std", &hrt::SyntheticSpec::noise_std)
      .def_readwrite("signal_patches_per_attribute", &hrt::SyntheticSpec::signal_patches_per_attribute)
      .def_readwrite("attributes_per_class", &hrt::SyntheticSpec::attributes_per_class)
      .def_readwrite("test_fraction", &hrt::SyntheticSpec::test_fraction);

  py::class_<hrt::ZslDataset>(m, "Dataset")
      .def_readonly("num_patches", &hrt::ZslDataset::num_patches)
      .def_readonly("feature_dim", &hrt::ZslDataset::feature_dim)
      .def_readonly("seen_classes", &hrt::ZslDataset::seen_classes)
      .def_readonly("unseen_classes", &hrt::ZslDataset::unseen_classes)
      .def_property_readonly("num_samples", [](const hrt::ZslDataset& d) { return d.samples.size(); })
      .def_property_readonly("num_classes", &hrt::ZslDataset::num_classes)
      .def_property_readonly("class_attributes",
                             [](const hrt::ZslDataset& d) { return to_numpy(d.semantics.class_attr); })
      .def("patches", [](const hrt::ZslDataset& d, std::size_t i) { return to_numpy(d.samples.at(i).patches); })
      .def("label", [](const hrt::ZslDataset& d, std::size_t i) { return d.samples.at(i).label; })
      .def("split", [](const hrt::ZslDataset& d, std::size_t i) { return hrt::to_string(d.samples.at(i).split); })
      .def(
          "write",
          [](const hrt::ZslDataset& d, const std::filesystem::path& dir, const std::string& dtype) {
            hrt::write_dataset(dir, d, hrt::parse_feature_dtype(dtype));
          },
          py::arg("dir"), py::arg("dtype") = "f64");

  py::class_<hrt::RunConfig>(m, "RunConfig")
      .def("to_json", [](const hrt::RunConfig& c) { return hrt::config_to_json(c); })
      .def("hash", [](const hrt::RunConfig& c) { return hrt::config_hash(c); })
      .def_property_readonly("synthetic", [](const hrt::RunConfig& c) { return c.synthetic; })
      .def_property_readonly("data_seed", [](const hrt::RunConfig& c) { return c.data_seed; });

  py::class_<hrt::HrtModel>(m, "Model")
      .def_property_readonly("parameter_count", &hrt::HrtModel::parameter_count)
      .def_property_readonly("num_classes", &hrt::HrtModel::num_classes)
      .def_property_readonly("num_attributes", &hrt::HrtModel::num_attributes)
      .def("scores", [](const hrt::HrtModel& model, const hrt::ZslDataset& d, std::size_t i) {
        return to_numpy(hrt::forward(model, d.samples.at(i).patches).scores);
      });

  m.def("parse_config", &hrt::parse_config, py::arg("json_text") = "{}",
        "Defaults overlaid with a JSON document; unknown keys raise ValidationError.");
  m.def("generate_synthetic",
        [](const hrt::SyntheticSpec& spec, std::uint64_t seed) { return hrt::generate_synthetic(spec, seed).dataset; },
        py::arg("spec"), py::arg("seed"));
  m.def("load_features", &hrt::load_features, py::arg("dir"));
  m.def("harmonic_mean", &hrt::harmonic_mean, py::arg("tr"), py::arg("ts"));

  m.def(
      "train",
      [](const hrt::RunConfig& cfg, const hrt::ZslDataset& data) {
        auto result = [&] {
          py::gil_scoped_release release;
          return hrt::run_training(cfg, data);
        }();
        return py::make_tuple(result.model, history_list(result.history));
      },
      py::arg("config"), py::arg("dataset"), "Returns (model, history).");
  m.def(
      "evaluate",
      [](const hrt::RunConfig& cfg, const hrt::HrtModel& model, const hrt::ZslDataset& data) {
        return metrics_dict(hrt::run_evaluation(cfg, model, data));
      },
      py::arg("config"), py::arg("model"), py::arg("dataset"));
  m.def(
      "gradcheck",
      [](std::size_t samples) {
        const auto run = hrt::run_gradcheck(hrt::gradcheck_config(), samples);
        py::dict d;
        d["passed"] = run.report.passed;
        d["max_rel_error"] = run.report.max_rel_error;
        d["seconds"] = run.seconds;
        py::dict groups;
        for (const auto& g : run.report.groups) groups[py::str(g.name)] = g.max_rel_error;
        d["groups"] = groups;
        return d;
      },
      py::arg("samples") = 1);
  m.def("save_checkpoint",
        [](const std::filesystem::path& path, const hrt::HrtModel& model, const hrt::RunConfig& cfg) {
          hrt::save_checkpoint(path, model, cfg);
        },
        py::arg("path"), py::arg("model"), py::arg("config"));
  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        auto ck = hrt::load_checkpoint(path);
        return py::make_tuple(ck.model, ck.config);
      },
      py::arg("path"), "Returns (model, config).");
}
