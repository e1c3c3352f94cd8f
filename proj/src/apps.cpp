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


#include "nhrep/apps.hpp"

#include <cmath>

#include "nhrep/error.hpp"
#include "nhrep/patch_graph.hpp"

namespace nhrep {

ConvertResult Convert(const BRepMesh& mesh, const ConvertOptions& options, std::ostream* log) {
  options.train.Validate();
  ConvertResult r;
  auto [normalized, transform] = Normalize(mesh);
  r.transform = transform;
  auto [graph, merged] = MergeSmoothPatches(BuildPatchGraph(normalized), normalized);
  r.construction = ConstructTree(graph, merged, options.tree);
  const int count = static_cast<int>(r.construction.patches.size());
  if (options.group) {
    r.slot_of_patch = GroupPatches(r.construction.graph);
  } else {
    r.slot_of_patch.resize(count);
    for (int p = 0; p < count; ++p) r.slot_of_patch[p] = p;
  }
  AssignSlots(r.construction.tree, r.slot_of_patch);
  r.samples = SampleSurface(r.construction.patches.mesh, options.samples, options.train.seed);
  if (options.noise.active()) PerturbSamples(r.samples, options.noise, options.train.seed);
  r.training = Train(r.samples, r.construction.tree, options.train, transform, log);
  return r;
}

BooleanOp ParseBooleanOp(std::string_view name) {
  if (name == "union") return BooleanOp::kUnion;
  if (name == "intersection") return BooleanOp::kIntersection;
  if (name == "a_minus_b" || name == "difference") return BooleanOp::kDifference;
  throw Error(ErrorKind::kParse, "unknown Boolean operation '" + std::string(name) +
                                     "' (expected union, intersection or a_minus_b)");
}

void BooleanField::Evaluate(std::span<const Vec3> points, std::span<double> values,
                            std::span<Vec3> grads) const {
  const size_t n = points.size();
  std::vector<double> vb(n);
  std::vector<Vec3> gb(grads.empty() ? 0 : n);
  a_->Evaluate(points, values, grads);
  b_->Evaluate(points, vb, gb);
  for (size_t i = 0; i < n; ++i) {
    double b = vb[i];
    Vec3 g = grads.empty() ? Vec3::Zero() : gb[i];
    if (op_ == BooleanOp::kDifference) {
      b = -b;
      g = -g;
    }
    const bool take_b = op_ == BooleanOp::kUnion ? b < values[i] : b > values[i];
    if (take_b) {
      values[i] = b;
      if (!grads.empty()) grads[i] = g;
    }
  }
}

bool SameFrame(const FieldCheckpoint& a, const FieldCheckpoint& b) {
  return a.transform == b.transform;
}

double Blend(double f, double g, double s, double rho) {
  const double sr = f * f + g * g - rho * rho;
  return f + g + s * std::sqrt(f * f + g * g + sr * (sr - std::abs(sr)) / (8 * rho * rho));
}

std::pair<double, double> BlendPartials(double f, double g, double s, double rho) {
  const double sr = f * f + g * g - rho * rho;
  const double q = f * f + g * g + sr * (sr - std::abs(sr)) / (8 * rho * rho);
  // d/dx of s_rho (s_rho - |s_rho|) / (8 rho^2) is s_rho x / rho^2 below zero.
  const double extra = sr < 0 ? sr / (rho * rho) : 0.0;
  const double root = std::sqrt(q);
  return {1 + s * (2 * f + extra * f) / (2 * root), 1 + s * (2 * g + extra * g) / (2 * root)};
}

namespace {

BlendValue BlendNode(const BooleanTree& tree, int id, std::span<const double> values,
                     std::span<const Vec3> grads, double rho) {
  const auto& node = tree.nodes[id];
  if (node.op == TreeOp::kLeaf) {
    BlendValue v;
    v.value = values[node.slot];
    v.grad = grads.empty() ? Vec3::Zero() : grads[node.slot];
    return v;
  }
  const double s = node.op == TreeOp::kMax ? 1.0 : -1.0;
  BlendValue acc = BlendNode(tree, node.children[0], values, grads, rho);
  for (size_t k = 1; k < node.children.size(); ++k) {
    BlendValue next = BlendNode(tree, node.children[k], values, grads, rho);
    auto [df, dg] = BlendPartials(acc.value, next.value, s, rho);
    BlendValue out;
    out.value = Blend(acc.value, next.value, s, rho);
    out.grad = df * acc.grad + dg * next.grad;
    out.min_operand = std::min({acc.min_operand, next.min_operand,
                                std::min(std::abs(acc.value), std::abs(next.value))});
    acc = out;
  }
  return acc;
}

}  // namespace

BlendValue EvaluateBlendedTree(const BooleanTree& tree, std::span<const double> values,
                               std::span<const Vec3> grads, const BlendConfig& config) {
  if (!(config.rho > 0)) throw Error(ErrorKind::kPrecondition, "blend radius must be positive");
  if (static_cast<int>(values.size()) != tree.SlotCount()) {
    throw Error(ErrorKind::kArityMismatch, "tree reads " + std::to_string(tree.SlotCount()) +
                                               " slots, got " + std::to_string(values.size()));
  }
  return BlendNode(tree, tree.root, values, grads, config.rho);
}

BlendedField::BlendedField(FieldCheckpoint checkpoint, BlendConfig config)
    : checkpoint_(std::move(checkpoint)), tree_(ParseTree(checkpoint_.tree)), config_(config) {
  if (!(config.rho > 0)) throw Error(ErrorKind::kPrecondition, "blend radius must be positive");
  if (tree_.SlotCount() != checkpoint_.field.outputs()) {
    throw Error(ErrorKind::kArityMismatch, "checkpoint tree and network disagree on slot count");
  }
}

void BlendedField::Run(std::span<const Vec3> points, std::span<double> values,
                       std::span<Vec3> grads, std::span<double> min_operands) const {
  const NeuralField& field = checkpoint_.field;
  const int n = field.outputs();
  FieldBatch batch;
  Matrix3X x(3, static_cast<Eigen::Index>(points.size()));
  for (size_t i = 0; i < points.size(); ++i) x.col(i) = points[i];
  field.ForwardBatch(x, batch, false);
  std::vector<double> v(n);
  std::vector<Vec3> g(n);
  for (size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < n; ++k) {
      v[k] = batch.values(k, i);
      g[k] = Vec3(batch.grads[0](k, i), batch.grads[1](k, i), batch.grads[2](k, i));
    }
    BlendValue b = EvaluateBlendedTree(tree_, v, g, config_);
    values[i] = b.value;
    if (!grads.empty()) grads[i] = b.grad;
    if (!min_operands.empty()) min_operands[i] = b.min_operand;
  }
}

void BlendedField::Evaluate(std::span<const Vec3> points, std::span<double> values,
                            std::span<Vec3> grads) const {
  Run(points, values, grads, {});
}

std::vector<double> BlendedField::MinOperands(std::span<const Vec3> points) const {
  std::vector<double> values(points.size()), out(points.size());
  Run(points, values, {}, out);
  return out;
}

ExtractResult OffsetSurface(const ScalarField& field, double t, GridSpec spec,
                            const ExtractOptions& options) {
  spec.isovalue = t;
  return Extract(field, spec, options);
}

QueryResult Query(const ScalarField& field, std::span<const Vec3> points) {
  QueryResult r;
  r.values.resize(points.size());
  field.EvaluateParallel(points, r.values);
  r.inside.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) r.inside[i] = r.values[i] < 0;
  return r;
}

}  // namespace nhrep
