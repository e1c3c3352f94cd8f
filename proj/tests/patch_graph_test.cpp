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

#include <map>
#include <random>

#include "nhrep/error.hpp"
#include "nhrep/patch_graph.hpp"
#include "nhrep/shapes.hpp"

namespace nhrep {
namespace {

std::map<std::pair<int, int>, std::vector<CurveType>> LabelsByPair(const PatchGraph& g) {
  std::map<std::pair<int, int>, std::vector<CurveType>> out;
  for (const auto& e : g.edges) out[{e.a, e.b}].push_back(e.label);
  for (auto& [_, v] : out) std::sort(v.begin(), v.end());
  return out;
}

TEST(Dihedral, CubeEdgesAreRightAngles) {
  BRepMesh cube = MakeBox(Vec3::Zero(), Vec3::Ones());
  MeshTopology topo = MeshTopology::Build(cube);
  int sharp = 0, flat = 0;
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    double a = DihedralAngle(cube, topo, static_cast<int>(e));
    const auto& edge = topo.edges[e];
    if (cube.face_patch[edge.faces[0]] != cube.face_patch[edge.faces[1]]) {
      EXPECT_NEAR(a, 90.0, 1e-9);
      ++sharp;
    } else {
      EXPECT_NEAR(a, 180.0, 1e-9);
      ++flat;
    }
  }
  EXPECT_EQ(sharp, 12);
  EXPECT_EQ(flat, 6);
}

TEST(Dihedral, LBracketReentrantEdge) {
  BRepMesh l = MakeLBracket();
  // The vertical edge through (1,1).
  int a = -1, b = -1;
  for (size_t v = 0; v < l.vertices.size(); ++v) {
    if ((l.vertices[v] - Vec3(1, 1, 0)).norm() < 1e-12) a = static_cast<int>(v);
    if ((l.vertices[v] - Vec3(1, 1, 1)).norm() < 1e-12) b = static_cast<int>(v);
  }
  ASSERT_GE(a, 0);
  ASSERT_GE(b, 0);
  EXPECT_NEAR(DihedralAngle(l, a, b), 270.0, 1e-9);
  EXPECT_NEAR(DihedralAngle(l, b, a), 270.0, 1e-9);
}

TEST(Dihedral, MissingEdgeIsBoundaryError) {
  BRepMesh cube = MakeBox(Vec3::Zero(), Vec3::Ones());
  try {
    DihedralAngle(cube, 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBoundaryEdge);
  }
}

TEST(Classify, Band) {
  EXPECT_EQ(ClassifyAngle(90), CurveType::kConvex);
  EXPECT_EQ(ClassifyAngle(176), CurveType::kSmooth);
  EXPECT_EQ(ClassifyAngle(184.9), CurveType::kSmooth);
  EXPECT_EQ(ClassifyAngle(270), CurveType::kConcave);
  EXPECT_EQ(ClassifyChain({90, 180, 170}), CurveType::kConvex);
  EXPECT_EQ(ClassifyChain({200, 180}), CurveType::kConcave);
  EXPECT_EQ(ClassifyChain({180, 181}), CurveType::kSmooth);
  EXPECT_EQ(ClassifyChain({90, 270}), CurveType::kHybrid);
}

TEST(FeatureCurves, CubeHasTwelveConvex) {
  auto curves = ExtractFeatureCurves(MakeBox(Vec3::Zero(), Vec3::Ones()));
  ASSERT_EQ(curves.size(), 12u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.type, CurveType::kConvex);
    EXPECT_FALSE(c.closed);
    EXPECT_EQ(c.vertices.size(), c.edges.size() + 1);
  }
}

TEST(FeatureCurves, CylinderHasTwoClosedConvexCircles) {
  auto curves = ExtractFeatureCurves(MakeCylinder(0.5, 0, 1, 48));
  ASSERT_EQ(curves.size(), 2u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.type, CurveType::kConvex);
    EXPECT_TRUE(c.closed);
    EXPECT_EQ(c.edges.size(), 48u);
    EXPECT_EQ(c.vertices.size(), 48u);
  }
}

TEST(FeatureCurves, EveryPatchBoundaryEdgeInExactlyOneCurve) {
  for (const std::string name : {"hole_cube", "boss_box", "wave", "star"}) {
    BRepMesh mesh = MakeShape(name);
    MeshTopology topo = MeshTopology::Build(mesh);
    std::vector<int> hits(topo.edges.size(), 0);
    for (const auto& c : ExtractFeatureCurves(mesh)) {
      EXPECT_NE(c.type, CurveType::kHybrid);
      for (int e : c.edges) ++hits[e];
    }
    for (size_t e = 0; e < topo.edges.size(); ++e) {
      const auto& edge = topo.edges[e];
      bool boundary = mesh.face_patch[edge.faces[0]] != mesh.face_patch[edge.faces[1]];
      EXPECT_EQ(hits[e], boundary ? 1 : 0) << name << " edge " << e;
    }
  }
}

TEST(FeatureCurves, WaveCreaseSplitsIntoAlternatingPieces) {
  for (int resolution : {32, 64, 96}) {
    PatchGraph g = BuildPatchGraph(MakeWaveCrease(2, 0.3, resolution));
    EXPECT_EQ(g.hybrid_chains, 1);
    std::vector<const FeatureCurve*> crease;
    for (const auto& c : g.curves) {
      if (c.patch_a == 5 && c.patch_b == 6) crease.push_back(&c);
    }
    ASSERT_GE(crease.size(), 2u);
    // Order the pieces along x and check neighbours differ.
    std::sort(crease.begin(), crease.end(), [&](auto* a, auto* b) {
      return a->vertices.front() < b->vertices.front();
    });
    int convex = 0, concave = 0;
    for (size_t i = 0; i < crease.size(); ++i) {
      convex += crease[i]->type == CurveType::kConvex;
      concave += crease[i]->type == CurveType::kConcave;
      for (size_t j = 0; j < crease.size(); ++j) {
        if (i == j) continue;
        bool touching = crease[i]->vertices.back() == crease[j]->vertices.front();
        if (touching) EXPECT_NE(crease[i]->type, crease[j]->type);
      }
    }
    EXPECT_GE(convex, 1);
    EXPECT_GE(concave, 1);
  }
}

TEST(PatchGraph, CubeGraph) {
  PatchGraph g = BuildPatchGraph(MakeBox(Vec3::Zero(), Vec3::Ones()));
  EXPECT_EQ(g.vertex_count, 6);
  EXPECT_EQ(g.edges.size(), 12u);
  std::vector<int> degree(6, 0);
  for (const auto& e : g.edges) {
    EXPECT_EQ(e.label, CurveType::kConvex);
    ++degree[e.a];
    ++degree[e.b];
  }
  for (int d : degree) EXPECT_EQ(d, 4);
  EXPECT_EQ(g.Components().size(), 1u);
}

TEST(PatchGraph, OctagonSideLabels) {
  PatchGraph g = InducedSubgraph(BuildPatchGraph(MakeOctagonExample()),
                                 {0, 1, 2, 3, 4, 5, 6, 7});
  auto labels = LabelsByPair(g);
  using C = CurveType;
  std::map<std::pair<int, int>, std::vector<CurveType>> expected = {
      {{0, 1}, {C::kConvex}}, {{1, 2}, {C::kConvex}}, {{2, 3}, {C::kConvex}},
      {{3, 4}, {C::kConvex}}, {{4, 5}, {C::kConcave}}, {{5, 6}, {C::kConvex}},
      {{6, 7}, {C::kConcave}}, {{0, 7}, {C::kConvex}}};
  EXPECT_EQ(labels, expected);
}

TEST(PatchGraph, TwoDisjointCubesGiveTwoComponents) {
  BRepMesh mesh = MakeBox(Vec3::Zero(), Vec3::Ones());
  AppendBRep(mesh, MakeBox(Vec3::Constant(3), Vec3::Constant(4)));
  PatchGraph g = BuildPatchGraph(mesh);
  auto comps = g.Components();
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0], (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(comps[1], (std::vector<int>{6, 7, 8, 9, 10, 11}));
}

TEST(PatchGraph, LabelsIndependentOfVertexOrder) {
  std::mt19937_64 rng(4);
  for (const std::string name : {"boss_box", "wave", "lbracket"}) {
    BRepMesh mesh = MakeShape(name);
    // Rotate corners of each triangle and shuffle vertex indices.
    std::vector<int> perm(mesh.vertices.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    BRepMesh other = mesh;
    for (size_t v = 0; v < perm.size(); ++v) other.vertices[perm[v]] = mesh.vertices[v];
    for (size_t f = 0; f < mesh.triangles.size(); ++f) {
      const Triangle& t = mesh.triangles[f];
      int r = static_cast<int>(f % 3);
      other.triangles[f] = {perm[t[r]], perm[t[(r + 1) % 3]], perm[t[(r + 2) % 3]]};
    }
    EXPECT_EQ(LabelsByPair(BuildPatchGraph(mesh)), LabelsByPair(BuildPatchGraph(other)))
        << name;
  }
}

TEST(PatchGraph, DumpRoundTrip) {
  PatchGraph g = BuildPatchGraph(MakeShape("boss_box"));
  std::string text = FormatPatchGraph(g);
  PatchGraph back = ParsePatchGraph(text);
  EXPECT_EQ(FormatPatchGraph(back), text);
  EXPECT_THROW(ParsePatchGraph("patch-graph v1\nvertices 2\nedges 1\n0 5 convex 0\nend\n"),
               Error);
}

TEST(MergeSmooth, CubeUnchanged) {
  BRepMesh cube = MakeBox(Vec3::Zero(), Vec3::Ones());
  auto [g, m] = MergeSmoothPatches(BuildPatchGraph(cube), cube);
  EXPECT_EQ(m.face_patch, cube.face_patch);
  EXPECT_EQ(g.vertex_count, 6);
}

TEST(MergeSmooth, HemispheresBecomeOnePatch) {
  BRepMesh sphere = MakeSphere(0.5, 128, 64, true);
  PatchGraph g = BuildPatchGraph(sphere);
  ASSERT_EQ(g.vertex_count, 2);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].label, CurveType::kSmooth);
  auto [merged, mesh] = MergeSmoothPatches(g, sphere);
  EXPECT_EQ(merged.vertex_count, 1);
  EXPECT_EQ(mesh.patch_count(), 1);
}

TEST(MergeSmooth, SubdividedBoxReducesAndIsIdempotent) {
  BRepMesh box = MakeSubdividedBox(Vec3::Zero(), Vec3::Ones(), 3);
  PatchGraph g = BuildPatchGraph(box);
  ASSERT_EQ(g.vertex_count, 54);
  auto [once_g, once_m] = MergeSmoothPatches(g, box);
  EXPECT_EQ(once_g.vertex_count, 6);
  for (const auto& e : once_g.edges) EXPECT_EQ(e.label, CurveType::kConvex);
  auto [twice_g, twice_m] = MergeSmoothPatches(once_g, once_m);
  EXPECT_EQ(twice_m.face_patch, once_m.face_patch);
  EXPECT_EQ(FormatPatchGraph(twice_g), FormatPatchGraph(once_g));
}

}  // namespace
}  // namespace nhrep
