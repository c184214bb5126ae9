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

#include "hrt/semantics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "hrt/errors.hpp"
#include "hrt/rng.hpp"

namespace hrt {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

Matrix to_eigen(const Tensor& t) {
  Matrix m(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m(i, j) = t(i, j);
  return m;
}

Tensor from_eigen(const Matrix& m) {
  Tensor t = Tensor::matrix(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t(i, j) = m(i, j);
  return t;
}

Tensor from_vector(const Vector& v) {
  Tensor t({static_cast<std::size_t>(v.size())});
  for (Eigen::Index i = 0; i < v.size(); ++i) t[i] = v(i);
  return t;
}

struct Centered {
  Matrix x;
  Vector mean;
};

Centered center_rows(const Tensor& rows, std::size_t d, const char* what) {
  if (rows.rank() != 2) throw DimensionError(std::string(what) + ": expected an [A x tau] matrix");
  if (d < 1 || rows.cols() < d) {
    throw DimensionError(std::string(what) + ": target dimension " + std::to_string(d) +
                         " must be in [1, tau=" + std::to_string(rows.cols()) + "]");
  }
  if (rows.rows() < 2) {
    throw DegenerateInputError(std::string(what) + ": needs at least two rows");
  }
  rows.require_finite(what);
  Centered c;
  c.x = to_eigen(rows);
  c.mean = c.x.colwise().mean().transpose();
  c.x.rowwise() -= c.mean.transpose();
  if (c.x.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateInputError(std::string(what) + ": input rows have zero variance");
  }
  return c;
}

double log_likelihood(const Matrix& s, const Matrix& loadings, const Vector& psi, double n) {
  const Eigen::Index tau = s.rows();
  Matrix sigma = loadings * loadings.transpose();
  sigma.diagonal() += psi;
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw EvaluationError("factor analysis: covariance not positive definite");
  const Matrix l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double trace = llt.solve(s).trace();
  return -0.5 * n * (static_cast<double>(tau) * std::log(2.0 * std::numbers::pi) + logdet + trace);
}

// B = Lambda^T Sigma^{-1} through the d x d Woodbury form.
Matrix posterior_map(const Matrix& loadings, const Vector& psi) {
  const Eigen::Index d = loadings.cols();
  const Matrix scaled = psi.cwiseInverse().asDiagonal() * loadings;  // Psi^{-1} L
  Matrix m = Matrix::Identity(d, d) + loadings.transpose() * scaled;
  return m.ldlt().solve(scaled.transpose());
}

}  // namespace

void SemanticSpace::validate() const {
  if (attr_vectors.rank() != 2 || class_attr.rank() != 2) {
    throw DimensionError("semantic space needs attribute vectors [A x tau] and class attributes [C x A]");
  }
  if (class_attr.cols() != attr_vectors.rows()) {
    throw DimensionError("class attributes " + shape_string(class_attr.shape()) + " do not match " +
                         std::to_string(attr_vectors.rows()) + " attribute vectors");
  }
  if (class_attr.rows() < 2) throw DimensionError("semantic space needs at least two classes");
  attr_vectors.require_finite("attribute vectors");
  class_attr.require_finite("class attribute matrix");
  if (!compact_vectors.empty()) {
    if (compact_vectors.rank() != 2 || compact_vectors.rows() != attr_vectors.rows()) {
      throw DimensionError("compact vectors " + shape_string(compact_vectors.shape()) +
                           " do not match " + std::to_string(attr_vectors.rows()) + " attributes");
    }
    compact_vectors.require_finite("compact attribute vectors");
  }
  if (!attribute_names.empty() && attribute_names.size() != attr_vectors.rows()) {
    throw DimensionError("attribute name count does not match attribute vectors");
  }
}

CompactionMethod parse_compaction_method(const std::string& name) {
  if (name == "factor-analysis") return CompactionMethod::kFactorAnalysis;
  if (name == "pca") return CompactionMethod::kPca;
  if (name == "precomputed") return CompactionMethod::kPrecomputed;
  throw ConfigError("unknown compaction method '" + name + "'");
}

std::string to_string(CompactionMethod method) {
  switch (method) {
    case CompactionMethod::kFactorAnalysis: return "factor-analysis";
    case CompactionMethod::kPca: return "pca";
    case CompactionMethod::kPrecomputed: return "precomputed";
  }
  return "?";
}

void factor_analysis_init(const Tensor& covariance, std::size_t factors, std::uint64_t init_seed,
                          Tensor& loadings, Tensor& noise_variance) {
  const std::size_t tau = covariance.rows();
  SeededRng rng(init_seed);
  loadings = Tensor::matrix(tau, factors);
  noise_variance = Tensor({tau});
  for (std::size_t i = 0; i < tau; ++i) {
    const double spread = std::sqrt(covariance(i, i) / static_cast<double>(factors));
    for (std::size_t k = 0; k < factors; ++k) loadings(i, k) = spread * rng.normal();
    noise_variance[i] = covariance(i, i);
  }
}

FactorAnalysisFit fit_factor_analysis(const Tensor& rows, std::size_t factors,
                                      const FactorAnalysisOptions& options) {
  const Centered c = center_rows(rows, factors, "factor analysis");
  const auto n = static_cast<double>(rows.rows());
  const Matrix s = (c.x.transpose() * c.x) / n;
  const double floor = std::max(options.noise_floor_ratio * s.diagonal().mean(), 1e-300);

  Tensor l0, psi0;
  factor_analysis_init(from_eigen(s), factors, options.init_seed, l0, psi0);
  Matrix loadings = to_eigen(l0);
  Vector psi(psi0.size());
  for (std::size_t i = 0; i < psi0.size(); ++i) psi(i) = std::max(psi0[i], floor);

  FactorAnalysisFit fit;
  const Eigen::Index d = static_cast<Eigen::Index>(factors);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    fit.log_likelihood.push_back(log_likelihood(s, loadings, psi, n));
    const Matrix b = posterior_map(loadings, psi);  // [d x tau]
    const Matrix bs = b * s;
    const Matrix ezz = Matrix::Identity(d, d) - b * loadings + bs * b.transpose();
    loadings = ezz.ldlt().solve(bs).transpose();  // S B^T Ezz^{-1}
    const Matrix residual = s - loadings * bs;
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = std::max(residual(i, i), floor);
  }
  fit.log_likelihood.push_back(log_likelihood(s, loadings, psi, n));

  const Matrix scores = c.x * posterior_map(loadings, psi).transpose();
  fit.mean = from_vector(c.mean);
  fit.loadings = from_eigen(loadings);
  fit.noise_variance = from_vector(psi);
  fit.scores = from_eigen(scores);
  fit.scores.require_finite("factor analysis scores");
  return fit;
}

Tensor pca_scores(const Tensor& rows, std::size_t components) {
  const Centered c = center_rows(rows, components, "pca");
  const Matrix s = (c.x.transpose() * c.x) / static_cast<double>(rows.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) throw EvaluationError("pca: eigendecomposition failed");
  const Eigen::Index tau = s.rows();
  Matrix basis(tau, static_cast<Eigen::Index>(components));
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    Vector v = solver.eigenvectors().col(tau - 1 - k);  // eigenvalues ascend
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.col(k) = v;
  }
  return from_eigen(c.x * basis);
}

Tensor compact_semantics(const Tensor& attr_vectors, std::size_t d, CompactionMethod method,
                         const std::optional<Tensor>& precomputed,
                         const FactorAnalysisOptions& fa_options) {
  switch (method) {
    case CompactionMethod::kPrecomputed: {
      if (!precomputed || precomputed->empty()) {
        throw ConfigError("precomputed compaction requested but no compact vectors were supplied");
      }
      if (precomputed->rank() != 2 || precomputed->rows() != attr_vectors.rows() ||
          precomputed->cols() != d) {
        throw DimensionError("precomputed compact vectors " + shape_string(precomputed->shape()) +
                             " expected [" + std::to_string(attr_vectors.rows()) + "x" +
                             std::to_string(d) + "]");
      }
      return *precomputed;
    }
    case CompactionMethod::kPca:
      return pca_scores(attr_vectors, d);
    case CompactionMethod::kFactorAnalysis:
      return fit_factor_analysis(attr_vectors, d, fa_options).scores;
  }
  throw ConfigError("unknown compaction method");
}

}  // namespace hrt
