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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nhrep/brep_mesh.hpp"

namespace nhrep {

enum class CurveType { kConvex, kConcave, kSmooth, kHybrid };

std::string_view CurveTypeName(CurveType type);

/// Half-width of the band around 180 degrees treated as smooth.
constexpr double kSmoothToleranceDegrees = 5.0;

/// Interior dihedral angle (degrees, in (0, 360)) at a mesh edge, measured
/// inside the solid. 90 at a cube edge, 270 at a re-entrant edge.
double DihedralAngle(const BRepMesh& mesh, const MeshTopology& topo, int edge);
double DihedralAngle(const BRepMesh& mesh, int v0, int v1);

/// Classification of one edge angle against the smooth band.
CurveType ClassifyAngle(double degrees,
                        double tolerance = kSmoothToleranceDegrees);

/// A maximal homogeneous run of patch-boundary edges shared by two patches.
struct FeatureCurve {
  int patch_a = -1;   // patch_a < patch_b
  int patch_b = -1;
  std::vector<int> edges;         // ordered along the chain
  std::vector<int> vertices;      // edges.size() + 1 entries, or edges.size() if closed
  std::vector<double> angles;     // per edge, degrees
  CurveType type = CurveType::kSmooth;
  bool closed = false;
  /// Index of the chain this curve was split from (equal for all pieces of
  /// one hybrid chain).
  int chain = -1;
};

/// Extracts feature chains between patches, splits them at feature corners
/// (vertices touching three or more patches) and splits hybrid chains into
/// alternating homogeneous pieces. Every returned curve is convex, concave or
/// smooth.
std::vector<FeatureCurve> ExtractFeatureCurves(const BRepMesh& mesh);

/// Convexity classification of a whole chain from its edge angles.
CurveType ClassifyChain(const std::vector<double>& angles,
                        double tolerance = kSmoothToleranceDegrees);

/// Undirected multigraph on patches; one labelled edge per feature curve.
struct PatchGraph {
  struct Edge {
    int a = -1;
    int b = -1;
    CurveType label = CurveType::kSmooth;
    int curve = -1;   // index into `curves`, or -1 for synthetic graphs
  };
  int vertex_count = 0;
  std::vector<Edge> edges;
  std::vector<FeatureCurve> curves;
  /// Number of chains that were hybrid before splitting.
  int hybrid_chains = 0;

  void AddEdge(int a, int b, CurveType label, int curve = -1);
  /// Adjacency lists of (neighbour, edge index).
  std::vector<std::vector<std::pair<int, int>>> Adjacency() const;
  /// Maximal connected subgraphs as sorted vertex lists.
  std::vector<std::vector<int>> Components() const;
  bool HasMixedVertex() const;
  /// Vertices incident to both convex and concave edges.
  int MixedVertexCount() const;
};

PatchGraph BuildPatchGraph(const BRepMesh& mesh);

/// Keeps the listed vertices (renumbered in the given order) and the edges
/// between them. Curve references are dropped.
PatchGraph InducedSubgraph(const PatchGraph& graph, const std::vector<int>& keep);

/// Text dump: "patch-graph v1", "vertices N", "edges E", then per edge
/// "a b label curve".
std::string FormatPatchGraph(const PatchGraph& graph);
PatchGraph ParsePatchGraph(std::string_view text);

/// Unions patch pairs whose shared curves are all smooth, repeatedly, until no
/// such pair remains. Returns the rebuilt graph and the relabelled mesh.
std::pair<PatchGraph, BRepMesh> MergeSmoothPatches(const PatchGraph& graph,
                                                   const BRepMesh& mesh);

}  // namespace nhrep
