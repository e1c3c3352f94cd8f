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

#include <cstddef>
#include <functional>
#include <span>

#include "nhrep/boolean_tree.hpp"
#include "nhrep/geometry.hpp"
#include "nhrep/neural_field.hpp"

namespace nhrep {

/// Worker count: NHREP_THREADS when set to a positive integer, else the
/// hardware concurrency.
int ThreadCount();

/// Runs body(begin, end) over [0, n) in chunks of `grain`, spread over
/// ThreadCount() threads. Chunks are disjoint, so bodies writing only to
/// their own range give results independent of the thread count.
void ParallelFor(size_t n, size_t grain, const std::function<void(size_t, size_t)>& body);

/// A scalar field with gradient, evaluated in batches. Implementations must
/// be safe to call from several threads at once.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  /// values[i] = f(points[i]); when `grads` is non-empty it receives the
  /// gradients (a subgradient on creases).
  virtual void Evaluate(std::span<const Vec3> points, std::span<double> values,
                        std::span<Vec3> grads) const = 0;

  double Value(const Vec3& p) const;
  Vec3 Gradient(const Vec3& p) const;
  /// Splits the batch over worker threads.
  void EvaluateParallel(std::span<const Vec3> points, std::span<double> values,
                        std::span<Vec3> grads = {}) const;
};

/// Field from plain callables. Without a gradient callable, central
/// differences with step 1e-6 are used.
class FunctionField : public ScalarField {
 public:
  using ValueFn = std::function<double(const Vec3&)>;
  using GradFn = std::function<Vec3(const Vec3&)>;
  explicit FunctionField(ValueFn value, GradFn grad = nullptr)
      : value_(std::move(value)), grad_(std::move(grad)) {}
  void Evaluate(std::span<const Vec3> points, std::span<double> values,
                std::span<Vec3> grads) const override;

 private:
  ValueFn value_;
  GradFn grad_;
};

/// h(x) - offset.
class ShiftedField : public ScalarField {
 public:
  ShiftedField(const ScalarField& base, double offset) : base_(base), offset_(offset) {}
  void Evaluate(std::span<const Vec3> points, std::span<double> values,
                std::span<Vec3> grads) const override;

 private:
  const ScalarField& base_;
  double offset_;
};

/// The composite h of a trained checkpoint. In the normalized frame points
/// are fed to the network as given; in model units they are first mapped by
/// the checkpoint transform and values are scaled back to model lengths.
class NeuralScalarField : public ScalarField {
 public:
  explicit NeuralScalarField(FieldCheckpoint checkpoint, bool model_units = false);
  void Evaluate(std::span<const Vec3> points, std::span<double> values,
                std::span<Vec3> grads) const override;

  const FieldCheckpoint& checkpoint() const { return checkpoint_; }
  const BooleanTree& tree() const { return tree_; }
  bool model_units() const { return model_units_; }

 private:
  FieldCheckpoint checkpoint_;
  BooleanTree tree_;
  bool model_units_;
};

}  // namespace nhrep
