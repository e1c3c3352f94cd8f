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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nhrep/geometry.hpp"

namespace nhrep {

using Triangle = std::array<int, 3>;

/// Parametric coordinate of one vertex with respect to one patch. Carried
/// through I/O untouched; nothing evaluates the underlying surface.
struct UvRecord {
  int vertex = 0;
  int patch = 0;
  double u = 0.0;
  double v = 0.0;
};

/// Indexed triangle mesh of a closed solid. Each triangle belongs to one
/// surface patch; triangles are oriented so that normals point outward.
struct BRepMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<int> face_patch;
  /// Per triangle. Planar faces get flat normals when sampled, curved faces
  /// get interpolated vertex normals.
  std::vector<bool> planar;
  std::vector<UvRecord> uv;

  int patch_count() const;
  Vec3 FaceNormal(int face) const;   // unit outward normal
  double FaceArea(int face) const;
  Box3 Bounds() const;
};

/// Undirected edge adjacency of a closed triangle mesh. Edge `e` joins
/// vertices (v0, v1) with v0 < v1; `faces[0]` traverses it as v0 -> v1 and
/// `faces[1]` as v1 -> v0.
struct MeshTopology {
  struct Edge {
    int v0 = -1;
    int v1 = -1;
    std::array<int, 2> faces{-1, -1};
  };
  std::vector<Edge> edges;
  /// face_edges[f][k] is the edge from corner k to corner (k+1)%3 of face f.
  std::vector<std::array<int, 3>> face_edges;

  /// Throws TopologyError when the mesh is open, non-manifold or
  /// inconsistently oriented; the message names the offending edge.
  static MeshTopology Build(const BRepMesh& mesh);

  int FindEdge(int a, int b) const;

 private:
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;
};

/// Parses the "brep-mesh v1" text format and validates the result.
BRepMesh ParseBRep(std::string_view text);
BRepMesh LoadBRep(const std::filesystem::path& path);

/// Canonical serialization. Doubles are written in shortest round-trip form so
/// FormatBRep(ParseBRep(FormatBRep(m))) is byte-identical to FormatBRep(m).
std::string FormatBRep(const BRepMesh& mesh);
void SaveBRep(const BRepMesh& mesh, const std::filesystem::path& path);

/// Checks closedness, 2-manifoldness, orientation and patch labels.
void ValidateBRep(const BRepMesh& mesh);

/// Centers the bounding box at the origin and scales the largest half-extent
/// to 0.9. Returns the normalized mesh and the applied transform.
std::pair<BRepMesh, Similarity> Normalize(const BRepMesh& mesh);

/// Applies a transform to vertex positions (scale > 0 keeps orientation).
BRepMesh Transformed(const BRepMesh& mesh, const Similarity& transform);

/// Appends `other` to `mesh`, offsetting vertex indices and patch ids.
void AppendBRep(BRepMesh& mesh, const BRepMesh& other);

}  // namespace nhrep
