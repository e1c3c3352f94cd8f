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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nhrep/brep_mesh.hpp"
#include "nhrep/scalar_field.hpp"

namespace nhrep {

struct GridSpec {
  int resolution = 256;   // cells per axis
  Box3 bounds{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  double isovalue = 0.0;

  /// Resolution must be a power of two >= 8 and the bounds non-empty.
  void Validate() const;
  Vec3 CellSize() const { return bounds.Size() / resolution; }
  Vec3 Node(int i, int j, int k) const;
};

struct IsoMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;   // per vertex
};

/// Root of the field on one sign-changing grid edge. `node` is the lower end
/// and `inside_low` whether the field is negative there.
struct EdgeIntersection {
  int axis = 0;
  std::array<int, 3> node{};
  bool inside_low = false;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
};

/// Every sign-changing edge of the dense grid for f - isovalue. Roots come
/// from bisection to 1e-10 of the cell size; normals are the normalized field
/// gradient at the root. Sorted by (axis, k, j, i).
std::vector<EdgeIntersection> EdgeIntersections(const ScalarField& field, const GridSpec& spec);

/// One vertex per active cell minimizing the intersection-plane quadric,
/// regularized toward the mass point and clamped to the cell; a quad per
/// interior intersection edge, split along its shorter diagonal.
IsoMesh DualContour(std::span<const EdgeIntersection> intersections, const GridSpec& spec);

struct ExtractOptions {
  bool octree = true;
  /// Rerun at `escalation_resolution` when an output edge exceeds this many
  /// cell diagonals.
  double long_edge_factor = 4.0;
  int escalation_resolution = 512;
  std::function<void(std::string_view)> log;
};

struct ExtractResult {
  IsoMesh mesh;
  int resolution = 0;
  bool escalated = false;
  size_t evaluated_nodes = 0;
  double longest_edge = 0;   // in cell diagonals
};

/// Octree-pruned dual contouring of the level set f = isovalue. Blocks whose
/// samples share one sign with a margin larger than a Lipschitz estimate
/// times the sample spacing plus one cell are skipped. Throws EmptyLevelSet
/// when no grid edge changes sign.
ExtractResult Extract(const ScalarField& field, const GridSpec& spec,
                      const ExtractOptions& options = {});

/// Wavefront OBJ with "v", "vn" and "f a//a b//b c//c" lines.
std::string FormatObj(const IsoMesh& mesh);
void SaveObj(const IsoMesh& mesh, const std::filesystem::path& path);

/// Maps vertices from a normalized frame back to model units.
IsoMesh ToModelFrame(IsoMesh mesh, const Similarity& transform);
/// Reads "v" and "f" records (polygons are fanned); other records are
/// ignored. Normals are recomputed from the faces.
IsoMesh ParseObj(std::string_view text);
IsoMesh LoadObj(const std::filesystem::path& path);

/// Area-weighted vertex normals.
std::vector<Vec3> VertexNormals(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

}  // namespace nhrep
