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
#include <filesystem>

#include "nhrep/brep_mesh.hpp"
#include "nhrep/error.hpp"
#include "nhrep/sampling.hpp"
#include "nhrep/shapes.hpp"

namespace nhrep {
namespace {

BRepMesh UnitCube() { return MakeBox(Vec3::Zero(), Vec3::Ones()); }

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kFormat;
}

TEST(BRepIo, CubeParses) {
  BRepMesh mesh = ParseBRep(FormatBRep(UnitCube()));
  EXPECT_EQ(mesh.triangles.size(), 12u);
  EXPECT_EQ(mesh.patch_count(), 6);
}

TEST(BRepIo, FormatRoundTripIsByteIdentical) {
  BRepMesh mesh = MakeShape("hole_cube");
  mesh.uv.push_back({3, 6, 0.125, 1.0 / 3.0});
  std::string once = FormatBRep(mesh);
  EXPECT_EQ(FormatBRep(ParseBRep(once)), once);
}

TEST(BRepIo, SaveLoadRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "nhrep_roundtrip.brep";
  BRepMesh mesh = MakeShape("cylinder");
  SaveBRep(mesh, path);
  EXPECT_EQ(FormatBRep(LoadBRep(path)), FormatBRep(mesh));
  std::filesystem::remove(path);
}

TEST(BRepIo, MissingTriangleIsBoundaryEdge) {
  BRepMesh mesh = UnitCube();
  mesh.triangles.pop_back();
  mesh.face_patch.pop_back();
  mesh.planar.pop_back();
  try {
    ValidateBRep(mesh);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTopology);
    EXPECT_NE(std::string(e.what()).find("boundary edge"), std::string::npos);
  }
}

TEST(BRepIo, InvertedTriangleIsOrientationError) {
  BRepMesh mesh = UnitCube();
  std::swap(mesh.triangles[0][1], mesh.triangles[0][2]);
  try {
    ValidateBRep(mesh);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTopology);
    EXPECT_NE(std::string(e.what()).find("orientation"), std::string::npos);
  }
}

TEST(BRepIo, MissingPatchIdIsLabelError) {
  BRepMesh mesh = UnitCube();
  for (int& p : mesh.face_patch) {
    if (p == 2) p = 7;
  }
  EXPECT_EQ(KindOf([&] { ValidateBRep(mesh); }), ErrorKind::kLabel);
}

TEST(BRepIo, MalformedTextIsParseError) {
  EXPECT_EQ(KindOf([] { ParseBRep("brep-mesh v1\nvertices 1\n0 0\n"); }), ErrorKind::kParse);
  EXPECT_EQ(KindOf([] { ParseBRep("brep-mesh v2\n"); }), ErrorKind::kParse);
}

TEST(Normalize, CubeFromZeroToTwo) {
  auto [mesh, t] = Normalize(MakeBox(Vec3::Zero(), Vec3::Constant(2.0)));
  EXPECT_DOUBLE_EQ(t.scale, 0.9);
  EXPECT_TRUE(t.translation.isApprox(Vec3::Constant(-0.9)));
  Box3 box = mesh.Bounds();
  EXPECT_NEAR((box.min - Vec3::Constant(-0.9)).norm(), 0, 1e-15);
  EXPECT_NEAR((box.max - Vec3::Constant(0.9)).norm(), 0, 1e-15);
  EXPECT_TRUE(t.ApplyInverse(t.Apply(Vec3(0.3, 1.7, 2.0))).isApprox(Vec3(0.3, 1.7, 2.0)));
}

TEST(Normalize, NormalizedMeshGetsIdentity) {
  auto [mesh, t] = Normalize(MakeBox(Vec3::Constant(-0.9), Vec3::Constant(0.9)));
  EXPECT_EQ(t.scale, 1.0);
  EXPECT_EQ(t.translation, Vec3::Zero());
}

TEST(Normalize, DegenerateBoxThrows) {
  BRepMesh mesh;
  mesh.vertices = {Vec3(1, 1, 1)};
  EXPECT_EQ(KindOf([&] { Normalize(mesh); }), ErrorKind::kDegenerateGeometry);
}

TEST(Sampling, CubeQuotaAndAxisNormals) {
  auto [mesh, t] = Normalize(UnitCube());
  SampleSet s = SampleSurface(mesh, 50000, 3);
  ASSERT_EQ(s.size(), 6u * 8334u);
  std::vector<int> count(6, 0);
  for (size_t i = 0; i < s.size(); ++i) {
    ++count[s.patch_of[i]];
    EXPECT_NEAR(s.normals[i].norm(), 1.0, 1e-6);
    EXPECT_NEAR(s.normals[i].cwiseAbs().maxCoeff(), 1.0, 1e-12);
    EXPECT_LE(s.points[i].cwiseAbs().maxCoeff(), 0.9 + 1e-12);
  }
  for (int c : count) EXPECT_EQ(c, 8334);
}

TEST(Sampling, SphereNormalsAreRadial) {
  BRepMesh sphere = MakeSphere(0.5);
  SampleSet s = SampleSurface(sphere, 5000, 11);
  for (size_t i = 0; i < s.size(); ++i) {
    EXPECT_LT((s.normals[i] - s.points[i].normalized()).norm(), 1e-3);
  }
}

TEST(Sampling, QuotaErrorBelowFiftyPerPatch) {
  EXPECT_EQ(KindOf([] { SampleSurface(UnitCube(), 100, 0); }), ErrorKind::kQuota);
}

TEST(Sampling, AreaFairAcrossEqualHalves) {
  // One patch made of two equal-area halves of a box face.
  BRepMesh mesh = MakeBox(Vec3::Zero(), Vec3::Ones(), 2);
  SampleSet s = SampleSurface(mesh, 6 * 10000, 5);
  int left = 0, right = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.patch_of[i] != 5) continue;
    (s.points[i].x() < 0.5 ? left : right)++;
  }
  EXPECT_LT(std::abs(left - right), 0.05 * std::max(left, right));
}

TEST(Sampling, SigmaPositiveAndBruteForceExact) {
  SampleSet s = SampleSurface(MakeShape("lbracket"), 2000, 9);
  for (size_t i = 0; i < s.size(); ++i) {
    EXPECT_GT(s.sigma[i], 0.0);
    double best = INFINITY;
    for (size_t j = 0; j < s.size(); ++j) {
      if (j != i) best = std::min(best, (s.points[i] - s.points[j]).norm());
    }
    EXPECT_EQ(s.sigma[i], best);
  }
}

TEST(Sampling, DeterministicPerSeed) {
  BRepMesh mesh = MakeShape("cylinder");
  SampleSet a = SampleSurface(mesh, 1000, 42), b = SampleSurface(mesh, 1000, 42);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.normals, b.normals);
}

TEST(Sampling, BinaryRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "nhrep_samples.bin";
  SampleSet s = SampleSurface(MakeShape("cube"), 600, 2);
  SaveSampleSet(s, path);
  SampleSet r = LoadSampleSet(path);
  EXPECT_EQ(r.points, s.points);
  EXPECT_EQ(r.normals, s.normals);
  EXPECT_EQ(r.patch_of, s.patch_of);
  EXPECT_EQ(r.sigma, s.sigma);
  EXPECT_EQ(r.seed, 2u);
  EXPECT_EQ(std::filesystem::file_size(path), 16 + 12 + s.size() * 60);
  std::filesystem::remove(path);
}

TEST(Sampling, NoiseStaysWithinItsBounds) {
  SampleSet clean = SampleSurface(MakeShape("cube"), 600, 4);
  SampleSet noisy = clean;
  PerturbSamples(noisy, SampleNoise{0.018, 3.0}, 4);
  double max_offset = 0, max_angle = 0;
  for (size_t i = 0; i < clean.size(); ++i) {
    const Vec3 d = noisy.points[i] - clean.points[i];
    // Displacement is purely along the clean normal.
    EXPECT_NEAR(d.cross(clean.normals[i]).norm(), 0.0, 1e-15);
    max_offset = std::max(max_offset, d.norm());
    EXPECT_NEAR(noisy.normals[i].norm(), 1.0, 1e-12);
    const double c = std::clamp(noisy.normals[i].dot(clean.normals[i]), -1.0, 1.0);
    max_angle = std::max(max_angle, std::acos(c) * 180.0 / M_PI);
  }
  EXPECT_LE(max_offset, 0.018);
  EXPECT_GT(max_offset, 0.017);
  EXPECT_LE(max_angle, 3.0 + 1e-9);
  EXPECT_GT(max_angle, 2.9);

  SampleSet again = clean;
  PerturbSamples(again, SampleNoise{0.018, 3.0}, 4);
  EXPECT_EQ(again.points, noisy.points);
  EXPECT_THROW(PerturbSamples(again, SampleNoise{-1.0, 0.0}, 4), Error);
}

}  // namespace
}  // namespace nhrep
