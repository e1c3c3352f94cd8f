// Copyright 2026 The NH-Rep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nhrep/boolean_tree.hpp"
#include "nhrep/geometry.hpp"

namespace nhrep {

/// ln(1 + e^t) without overflow.
double SoftPlus(double t);
/// Logistic sigmoid, the derivative of SoftPlus.
double SoftPlusDerivative(double t);

using Matrix = Eigen::MatrixXd;
using Matrix3X = Eigen::Matrix3Xd;
using JacobianRows = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Values, input gradients and cached activations of a batch of points.
struct FieldBatch {
  Matrix values;                  // outputs x points
  std::array<Matrix, 3> grads;    // d values / d x_k
  // Per hidden layer: pre-activations, activations and their tangents.
  std::vector<Matrix> z, a;
  std::vector<std::array<Matrix, 3>> zt, at;
  Matrix3X inputs;
};

/// MLP 3 -> hidden... -> n with SoftPlus hidden activations (sharpness
/// `beta`: ln(1 + e^{beta t}) / beta) and an identity output layer. All
/// parameters live in one flat vector, layer by layer, each as a
/// column-major weight matrix followed by its bias.
class NeuralField {
 public:
  NeuralField() = default;
  NeuralField(std::vector<int> sizes, double beta = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int outputs() const { return sizes_.back(); }
  int layers() const { return static_cast<int>(sizes_.size()) - 1; }
  double beta() const { return beta_; }

  Eigen::VectorXd& parameters() { return theta_; }
  const Eigen::VectorXd& parameters() const { return theta_; }

  Eigen::Map<Matrix> Weight(int layer);
  Eigen::Map<const Matrix> Weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> Bias(int layer);
  Eigen::Map<const Eigen::VectorXd> Bias(int layer) const;

  Eigen::VectorXd Forward(const Vec3& x) const;
  /// Row i is the gradient of output i.
  JacobianRows InputGradient(const Vec3& x) const;

  /// Values only.
  Matrix ForwardValues(const Matrix3X& x) const;
  /// Values and input gradients; `keep_cache` stores what Backward needs.
  void ForwardBatch(const Matrix3X& x, FieldBatch& out, bool keep_cache = true) const;
  /// Accumulates into `grad` the parameter gradient of a scalar whose
  /// partials with respect to the batch values and input gradients are
  /// `d_values` and `d_grads`.
  void Backward(const FieldBatch& batch, const Matrix& d_values,
                const std::array<Matrix, 3>& d_grads, Eigen::VectorXd& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<size_t> offset_;   // start of each layer's weights
  double beta_ = 1.0;
  Eigen::VectorXd theta_;
};

/// Hidden weights ~ N(0, sqrt(2 / fan_in)) with zero biases; the output layer
/// is a constant row whose magnitude and bias are fitted by least squares so
/// every output approximates
/// |x| - radius on [-1,1]^3.
NeuralField GeometricInit(const std::vector<int>& sizes, double radius, std::uint64_t seed,
                          double beta = 1.0);

struct HValue {
  double h = 0.0;
  Vec3 grad = Vec3::Zero();
  int active_leaf = -1;
  int active_slot = -1;
};

/// Composite value through the tree and the gradient of the active leaf.
HValue EvaluateH(const NeuralField& field, const BooleanTree& tree, const Vec3& x);

struct FieldCheckpoint {
  NeuralField field;
  std::string tree;          // serialized expression
  Similarity transform;      // model units -> normalized frame
  std::string config;        // key=value echo of the training config
};

/// Binary layout (little endian):
///   "NHCK", uint32 version (1), uint32 layer count L, L+1 x uint32 sizes,
///   f64 beta, uint64 parameter count P, P x f64 parameters,
///   string tree, f64 scale, 3 x f64 translation, string config,
/// where a string is a uint32 byte length followed by the bytes.
std::string SerializeCheckpoint(const FieldCheckpoint& checkpoint);
FieldCheckpoint DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const FieldCheckpoint& checkpoint, const std::filesystem::path& path);
FieldCheckpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace nhrep
