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


#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "nhrep/error.hpp"
#include "nhrep/isosurface.hpp"

namespace nhrep {
namespace {

FunctionField Plane() {
  return FunctionField([](const Vec3& p) { return p.x(); }, [](const Vec3&) { return Vec3(1, 0, 0); });
}

FunctionField Sphere(double r) {
  return FunctionField([r](const Vec3& p) { return p.norm() - r; },
                       [](const Vec3& p) { return Vec3(p.normalized()); });
}

double CubeValue(const Vec3& p) { return p.cwiseAbs().maxCoeff() - 0.5; }

FunctionField Cube() {
  return FunctionField(CubeValue, [](const Vec3& p) {
    int a;
    p.cwiseAbs().maxCoeff(&a);
    Vec3 g = Vec3::Zero();
    g[a] = p[a] < 0 ? -1 : 1;
    return g;
  });
}

GridSpec Grid(int res, double iso = 0) {
  GridSpec s;
  s.resolution = res;
  s.isovalue = iso;
  return s;
}

// Dihedral of every interior mesh edge, in degrees (180 = flat).
std::vector<double> MeshDihedrals(const IsoMesh& m) {
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (size_t f = 0; f < m.triangles.size(); ++f) {
    const auto& t = m.triangles[f];
    for (int k = 0; k < 3; ++k) {
      edge_faces[{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])}].push_back(int(f));
    }
  }
  auto normal = [&](int f) {
    const auto& t = m.triangles[f];
    return Vec3((m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).normalized());
  };
  std::vector<double> out;
  for (const auto& [e, faces] : edge_faces) {
    if (faces.size() != 2) continue;
    double c = std::clamp(normal(faces[0]).dot(normal(faces[1])), -1.0, 1.0);
    out.push_back(180.0 - std::acos(c) * 180.0 / kPi);
  }
  return out;
}

TEST(EdgeIntersections, PlaneRootsAndNormals) {
  auto xs = EdgeIntersections(Plane(), Grid(16));
  ASSERT_EQ(xs.size(), 17u * 17u);
  for (const auto& x : xs) {
    EXPECT_EQ(x.axis, 0);
    EXPECT_LE(std::abs(x.point.x()), 1e-10);
    EXPECT_EQ(x.normal, Vec3(1, 0, 0));
    EXPECT_TRUE(x.inside_low);
  }
}

TEST(EdgeIntersections, SphereRootsLieOnSphere) {
  auto xs = EdgeIntersections(Sphere(0.5), Grid(32));
  ASSERT_FALSE(xs.empty());
  for (const auto& x : xs) {
    EXPECT_NEAR(x.point.norm(), 0.5, 1e-9);
    EXPECT_NEAR(x.normal.dot(x.point.normalized()), 1.0, 1e-12);
  }
}

TEST(EdgeIntersections, ConstantFieldHasNone) {
  FunctionField one([](const Vec3&) { return 1.0; });
  EXPECT_TRUE(EdgeIntersections(one, Grid(8)).empty());
}

TEST(DualContour, PlaneVerticesStayOnPlane) {
  FunctionField tilted([](const Vec3& p) { return 0.3 * p.x() + 0.5 * p.y() - 0.2 * p.z() - 0.05; },
                       [](const Vec3&) { return Vec3(0.3, 0.5, -0.2); });
  GridSpec g = Grid(16);
  IsoMesh m = DualContour(EdgeIntersections(tilted, g), g);
  ASSERT_FALSE(m.triangles.empty());
  const Vec3 n = Vec3(0.3, 0.5, -0.2);
  for (const Vec3& v : m.vertices) EXPECT_LE(std::abs(n.dot(v) - 0.05) / n.norm(), 1e-6);
}

TEST(DualContour, SphereDeviationBelowHalfCell) {
  GridSpec g = Grid(64);
  IsoMesh m = DualContour(EdgeIntersections(Sphere(0.5), g), g);
  const double half = 0.5 * g.CellSize().x();
  for (const Vec3& v : m.vertices) EXPECT_LT(std::abs(v.norm() - 0.5), half);
}

TEST(DualContour, CubeCreasesAreRightAngles) {
  for (int res : {32, 64}) {
    GridSpec g = Grid(res);
    IsoMesh m = DualContour(EdgeIntersections(Cube(), g), g);
    int sharp = 0;
    for (double d : MeshDihedrals(m)) {
      if (std::abs(180.0 - d) < 30.0) continue;
      ++sharp;
      EXPECT_NEAR(d, 90.0, 2.0);
    }
    EXPECT_GT(sharp, 12 * res / 4);
    // The regularizer biases vertices toward the mass point by ~lambda cells.
    for (const Vec3& v : m.vertices) EXPECT_LT(std::abs(CubeValue(v)), 1e-3 * g.CellSize().x());
  }
}

TEST(Extract, OctreeMatchesDenseGrid) {
  for (auto field : {Cube(), Sphere(0.37)}) {
    ExtractOptions dense;
    dense.octree = false;
    auto a = Extract(field, Grid(64), dense);
    auto b = Extract(field, Grid(64));
    EXPECT_LT(b.evaluated_nodes, a.evaluated_nodes);
    ASSERT_EQ(a.mesh.vertices.size(), b.mesh.vertices.size());
    for (size_t i = 0; i < a.mesh.vertices.size(); ++i) {
      EXPECT_LE((a.mesh.vertices[i] - b.mesh.vertices[i]).norm(), 1e-9);
    }
    EXPECT_EQ(a.mesh.triangles, b.mesh.triangles);
  }
}

TEST(Extract, OrientationAndConsistency) {
  FunctionField sphere = Sphere(0.6);
  auto r = Extract(sphere, Grid(32));
  const double cell = r.mesh.vertices.empty() ? 0 : Grid(32).CellSize().norm();
  for (const auto& t : r.mesh.triangles) {
    Vec3 c = (r.mesh.vertices[t[0]] + r.mesh.vertices[t[1]] + r.mesh.vertices[t[2]]) / 3.0;
    Vec3 n = (r.mesh.vertices[t[1]] - r.mesh.vertices[t[0]]).cross(r.mesh.vertices[t[2]] - r.mesh.vertices[t[0]]);
    EXPECT_GT(n.dot(sphere.Gradient(c)), 0.0);
    EXPECT_GT(n.norm() * 0.5, 1e-12);
  }
  for (const Vec3& v : r.mesh.vertices) EXPECT_LT(std::abs(sphere.Value(v)), cell);
}

TEST(Extract, IsovalueShiftIsExact) {
  auto a = Extract(Sphere(0.5), Grid(32, 0.1));
  FunctionField shifted([](const Vec3& p) { return (p.norm() - 0.5) - 0.1; },
                        [](const Vec3& p) { return Vec3(p.normalized()); });
  auto b = Extract(shifted, Grid(32));
  EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
  EXPECT_EQ(a.mesh.triangles, b.mesh.triangles);
}

TEST(Extract, EmptyLevelSetIsAnError) {
  FunctionField positive([](const Vec3& p) { return 1.0 + p.squaredNorm(); });
  try {
    Extract(positive, Grid(16));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyLevelSet);
  }
}

TEST(Extract, LongEdgesEscalateResolution) {
  std::vector<std::string> log;
  ExtractOptions opt;
  opt.long_edge_factor = 0.5;   // clamped vertices never reach 4 diagonals
  opt.escalation_resolution = 32;
  opt.log = [&](std::string_view s) { log.emplace_back(s); };
  auto r = Extract(Sphere(0.5), Grid(16), opt);
  EXPECT_TRUE(r.escalated);
  EXPECT_EQ(r.resolution, 32);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_NE(log[0].find("escalating to 32"), std::string::npos);
  auto plain = Extract(Sphere(0.5), Grid(16));
  EXPECT_FALSE(plain.escalated);
  EXPECT_LT(plain.longest_edge, 4.0);
}

TEST(Extract, RejectsBadResolution) {
  EXPECT_THROW(Extract(Plane(), Grid(12)), Error);
  EXPECT_THROW(Extract(Plane(), Grid(4)), Error);
}

TEST(Obj, RoundTrip) {
  auto r = Extract(Cube(), Grid(16));
  IsoMesh back = ParseObj(FormatObj(r.mesh));
  EXPECT_EQ(back.vertices, r.mesh.vertices);
  EXPECT_EQ(back.triangles, r.mesh.triangles);
  EXPECT_THROW(ParseObj("v 0 0 0\nf 1 2 3\n"), Error);
}

}  // namespace
}  // namespace nhrep
