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

#include <functional>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "nhrep/brep_mesh.hpp"

namespace nhrep {

using Vec2 = Eigen::Vector2d;

/// Accumulates labelled triangles, welding vertices that coincide to 1e-9.
class MeshBuilder {
 public:
  int AddVertex(const Vec3& p);
  /// Skips triangles whose corners weld together.
  void AddTriangle(int a, int b, int c, int patch, bool planar);
  /// Quad grid over integer indices (0..nu, 0..nv); `flip` reverses winding.
  void AddGrid(int nu, int nv, const std::function<Vec3(int, int)>& point, int patch,
               bool planar, bool flip);
  BRepMesh Build() const;

 private:
  std::map<std::tuple<long long, long long, long long>, int> index_;
  BRepMesh mesh_;
};

/// Axis-aligned box; patches in the order -x, +x, -y, +y, -z, +z.
BRepMesh MakeBox(const Vec3& min, const Vec3& max, int subdivisions = 1);

/// Box whose faces are each split into k x k patches along smooth seams.
BRepMesh MakeSubdividedBox(const Vec3& min, const Vec3& max, int k);

/// Extrusion of a counter-clockwise simple polygon between z0 and z1. Side
/// patch i runs from polygon[i] to polygon[i+1]; the bottom cap is patch n and
/// the top cap is patch n+1.
BRepMesh MakePrism(std::span<const Vec2> polygon, double z0, double z1);

/// Patches: side 0, bottom 1, top 2.
BRepMesh MakeCylinder(double radius, double z0, double z1, int segments = 64);

/// Latitude/longitude sphere. With `hemispheres` the two halves are separate
/// patches joined along the equator.
BRepMesh MakeSphere(double radius, int segments = 128, int rings = 64,
                    bool hemispheres = false);

/// Cube [-h,h]^3 with a vertical cylindrical through-hole. Patches: -x, +x,
/// -y, +y, bottom, top, hole wall.
BRepMesh MakeThroughHoleCube(double half, double hole_radius, int segments = 64);

/// Cube [-h,h]^3 with a cylindrical boss standing on the top face. Patches:
/// -x, +x, -y, +y, bottom, top ring, boss wall, boss top.
BRepMesh MakeBossBox(double half, double boss_radius, double boss_height,
                     int segments = 64, int rings = 4);

/// L-shaped extrusion: the square [0,2]^2 minus [1,2]^2, height 1.
BRepMesh MakeLBracket();

/// Star-shaped prism with `tips` outer points; 2*tips side patches.
BRepMesh MakeStarPrism(int tips = 5, double outer = 1.0, double inner = 0.45,
                       double height = 0.5);

/// Box whose top face is creased along y = 0 with a crease that alternates
/// between ridge and valley along x. The two top halves are patches 5 and 6.
BRepMesh MakeWaveCrease(int waves = 2, double amplitude = 0.3, int resolution = 32);

/// Octagonal prism whose eight side patches reproduce the two-dimensional
/// example with six convex and two concave corners.
BRepMesh MakeOctagonExample();

/// Fixture by name ("cube", "cylinder", "sphere", "hole_cube", "boss_box",
/// "lbracket", "star", "wave", "octagon"). Throws Precondition for unknown names.
BRepMesh MakeShape(const std::string& name);
std::vector<std::string> ShapeNames();

/// Signed enclosed volume (positive for outward orientation).
double SignedVolume(const BRepMesh& mesh);

}  // namespace nhrep
