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

#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "nhrep/boolean_tree.hpp"
#include "nhrep/isosurface.hpp"
#include "nhrep/scalar_field.hpp"
#include "nhrep/trainer.hpp"

namespace nhrep {

// ---- conversion -----------------------------------------------------------

struct ConvertOptions {
  TrainConfig train;
  size_t samples = 50000;
  bool group = true;   // share outputs between non-adjacent patches
  SampleNoise noise;   // applied to the samples in the normalized frame
  TreeOptions tree;
};

struct ConvertResult {
  Similarity transform;
  TreeConstruction construction;
  std::vector<int> slot_of_patch;
  SampleSet samples;
  TrainResult training;
};

/// Mesh to checkpoint: normalize, merge smooth patches, build the patch graph
/// and Boolean tree, group patches into output slots, sample and train.
ConvertResult Convert(const BRepMesh& mesh, const ConvertOptions& options,
                      std::ostream* log = nullptr);

// ---- Boolean operations ---------------------------------------------------

enum class BooleanOp { kUnion, kIntersection, kDifference };

/// "union", "intersection" or "a_minus_b" (also "difference").
BooleanOp ParseBooleanOp(std::string_view name);

/// union = min(a, b), intersection = max(a, b), difference = max(a, -b).
/// Ties take the first operand.
class BooleanField : public ScalarField {
 public:
  BooleanField(std::shared_ptr<const ScalarField> a, std::shared_ptr<const ScalarField> b,
               BooleanOp op)
      : a_(std::move(a)), b_(std::move(b)), op_(op) {}
  void Evaluate(std::span<const Vec3> points, std::span<double> values,
                std::span<Vec3> grads) const override;

 private:
  std::shared_ptr<const ScalarField> a_, b_;
  BooleanOp op_;
};

/// True when both checkpoints use the same normalization transform.
bool SameFrame(const FieldCheckpoint& a, const FieldCheckpoint& b);

// ---- blending -------------------------------------------------------------

struct BlendConfig {
  double rho = 0.05;
};

/// B(f, g) = f + g + s sqrt(f^2 + g^2 + s_rho (s_rho - |s_rho|) / (8 rho^2)),
/// s_rho = f^2 + g^2 - rho^2, with s = +1 standing for max and -1 for min.
double Blend(double f, double g, double s, double rho);
/// Partial derivatives (dB/df, dB/dg).
std::pair<double, double> BlendPartials(double f, double g, double s, double rho);

struct BlendValue {
  double value = 0;
  Vec3 grad = Vec3::Zero();
  /// Smallest min(|f|, |g|) over all binary blends applied at this point.
  double min_operand = std::numeric_limits<double>::infinity();
};

/// Evaluates the tree with every k-ary node folded left to right in child
/// order into binary blends.
BlendValue EvaluateBlendedTree(const BooleanTree& tree, std::span<const double> values,
                               std::span<const Vec3> grads, const BlendConfig& config);

/// Blended composite of a checkpoint, in its normalized frame.
class BlendedField : public ScalarField {
 public:
  BlendedField(FieldCheckpoint checkpoint, BlendConfig config);
  void Evaluate(std::span<const Vec3> points, std::span<double> values,
                std::span<Vec3> grads) const override;
  /// Per point min_operand, for locating the blended neighbourhood.
  std::vector<double> MinOperands(std::span<const Vec3> points) const;

 private:
  void Run(std::span<const Vec3> points, std::span<double> values, std::span<Vec3> grads,
           std::span<double> min_operands) const;

  FieldCheckpoint checkpoint_;
  BooleanTree tree_;
  BlendConfig config_;
};

// ---- offsets and queries --------------------------------------------------

/// Extraction of the level set h = t.
ExtractResult OffsetSurface(const ScalarField& field, double t, GridSpec spec,
                            const ExtractOptions& options = {});

struct QueryResult {
  std::vector<double> values;
  std::vector<char> inside;   // value < 0
};

QueryResult Query(const ScalarField& field, std::span<const Vec3> points);

}  // namespace nhrep
