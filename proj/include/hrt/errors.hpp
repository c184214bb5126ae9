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

#ifndef HRT_ERRORS_HPP
#define HRT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hrt {

// Validation failures (exit code 1 at the CLI) derive from ValidationError,
// numeric failures (exit code 2) from NumericError.

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents that do not fit the operation.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A dataset or checkpoint on disk violates its declared format.
class LoadError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Input without the spread a statistical fit needs (e.g. zero variance).
class DegenerateInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// NaN/Inf produced by an evaluation.
class EvaluationError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace hrt

#endif  // HRT_ERRORS_HPP
