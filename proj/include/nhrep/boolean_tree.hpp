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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nhrep/brep_mesh.hpp"
#include "nhrep/min_cut.hpp"
#include "nhrep/patch_graph.hpp"

namespace nhrep {

enum class TreeOp { kMax, kMin, kLeaf };

/// Alternating max/min tree. Leaves carry the (sub)patch they were built for
/// and the function slot they read.
struct BooleanTree {
  struct Node {
    TreeOp op = TreeOp::kLeaf;
    std::vector<int> children;
    int patch = -1;
    int slot = -1;
  };
  std::vector<Node> nodes;
  int root = -1;
  /// The root is a placeholder MIN with one child; it is skipped on output.
  bool virtual_root = false;

  int AddNode(TreeOp op, int parent);
  int AddLeaf(int patch, int parent);
  /// Leaf node ids in pre-order; the position in this list is the leaf index.
  std::vector<int> Leaves() const;
  /// One more than the largest slot id.
  int SlotCount() const;
};

struct TreeValue {
  double value = 0.0;
  int active_leaf = -1;   // index into Leaves()
  int active_slot = -1;
};

/// Composes leaf slot values with max/min. Ties go to the earlier child.
/// Throws ArityMismatch when the value count differs from SlotCount().
TreeValue EvaluateTree(const BooleanTree& tree, std::span<const double> values);

/// Prefix form "max(f0,min(f1,f2))". Single-child internal nodes are elided.
std::string SerializeTree(const BooleanTree& tree);
/// Inverse of SerializeTree; leaf k gets slot k and patch k.
BooleanTree ParseTree(std::string_view text);

/// True when no internal node shares its op with an internal child in the
/// serialized form.
bool OpsAlternate(const BooleanTree& tree);

/// Triangle sets of the (sub)patches on the refined mesh.
struct DecomposedPatchSet {
  /// Faces relabelled with subpatch ids; triangles split during decomposition
  /// appear here.
  BRepMesh mesh;
  std::vector<std::vector<int>> subpatches;
  std::vector<int> parent_patch;

  size_t size() const { return subpatches.size(); }
};

struct TreeOptions {
  /// Seeds the fallback order when the preferred patch cannot be decomposed.
  std::uint64_t seed = 0;
  /// Safety cap on decomposition steps.
  int max_decompositions = 10000;
};

struct TreeConstruction {
  BooleanTree tree;
  DecomposedPatchSet patches;
  /// Patch graph over the decomposed set; edges between siblings are smooth.
  PatchGraph graph;
  int decompositions = 0;
  /// All-concave (or all-convex) components merged into a non-root parent.
  int flipped_nonroot = 0;
};

/// Builds the tree for a mesh; blocked components trigger min-cut patch
/// decomposition. Leaves get slot = subpatch id.
TreeConstruction ConstructTree(const PatchGraph& graph, const BRepMesh& mesh,
                               const TreeOptions& options = {});

/// Same recursion on a bare graph. A blocked vertex is split into a convex
/// half and a concave half joined by a smooth edge.
TreeConstruction ConstructTree(const PatchGraph& graph, const TreeOptions& options = {});

/// Dual-graph labelling problem of one patch: faces touching convex boundary
/// curves are anchored to 0, concave to 1, and neighbouring faces pay the
/// inverse distance between their centroids when separated.
struct PatchCut {
  std::vector<int> faces;   // mesh face ids, node i is faces[i]
  CutProblem problem;
};
PatchCut BuildPatchCut(const BRepMesh& mesh, const PatchGraph& graph, int patch);

struct PatchDecomposition {
  BRepMesh mesh;   // refined; first subpatch keeps the patch id
  std::vector<int> subpatch_ids;
  double cut_value = 0.0;
};

/// Splits triangles that touch both convex and concave boundary curves, then
/// separates the patch by a minimum cut. Throws Precondition when the patch
/// boundary is homogeneous and DecompositionFailure when no valid split exists.
PatchDecomposition DecomposePatch(const BRepMesh& mesh, const PatchGraph& graph, int patch);

/// Greedy colouring in vertex order: adjacent vertices never share a slot and
/// no slot holds more than `max_group` vertices.
std::vector<int> GroupPatches(const PatchGraph& graph, int max_group = 6);

/// Rewrites leaf slots through `slot_of_patch`.
void AssignSlots(BooleanTree& tree, const std::vector<int>& slot_of_patch);

}  // namespace nhrep
