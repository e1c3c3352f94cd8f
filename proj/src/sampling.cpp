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

#include "nhrep/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "nhrep/binary_io.hpp"
#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

namespace {

constexpr char kSampleMagic[4] = {'N', 'H', 'S', 'S'};
constexpr std::uint32_t kSampleVersion = 1;

Vec3 UniformInTriangle(const Vec3& a, const Vec3& b, const Vec3& c, double r1,
                       double r2, Vec3* bary) {
  double s = std::sqrt(r1);
  Vec3 w(1.0 - s, s * (1.0 - r2), s * r2);
  if (bary) *bary = w;
  return w[0] * a + w[1] * b + w[2] * c;
}

// Picks a face with probability proportional to area.
int PickFace(const std::vector<double>& cumulative, double r) {
  double target = r * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

}  // namespace

std::vector<std::array<Vec3, 3>> CornerNormals(const BRepMesh& mesh) {
  std::unordered_map<std::uint64_t, Vec3> accum;
  auto key = [](int v, int p) {
    return (static_cast<std::uint64_t>(v) << 32) | static_cast<std::uint32_t>(p);
  };
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    const Triangle& t = mesh.triangles[f];
    Vec3 n = mesh.FaceNormal(static_cast<int>(f));
    for (int k = 0; k < 3; ++k) {
      // Weight by the corner angle.
      Vec3 e1 = mesh.vertices[t[(k + 1) % 3]] - mesh.vertices[t[k]];
      Vec3 e2 = mesh.vertices[t[(k + 2) % 3]] - mesh.vertices[t[k]];
      double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2));
      auto [it, _] = accum.try_emplace(key(t[k], mesh.face_patch[f]), Vec3::Zero());
      it->second += angle * n;
    }
  }
  std::vector<std::array<Vec3, 3>> result(mesh.triangles.size());
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      Vec3 n = accum.at(key(mesh.triangles[f][k], mesh.face_patch[f]));
      double len = n.norm();
      result[f][k] = len > 0 ? Vec3(n / len) : mesh.FaceNormal(static_cast<int>(f));
    }
  }
  return result;
}

SampleSet SampleSurface(const BRepMesh& mesh, size_t total, std::uint64_t seed) {
  const int patches = mesh.patch_count();
  if (patches == 0) throw Error(ErrorKind::kQuota, "mesh has no patches");
  if (total < kMinSamplesPerPatch * static_cast<size_t>(patches)) {
    throw Error(ErrorKind::kQuota,
                "sample budget " + std::to_string(total) + " is below 50 x " +
                    std::to_string(patches) + " patches");
  }
  const size_t quota = std::max<size_t>(
      (total + patches - 1) / patches, kMinSamplesPerPatch);

  std::vector<std::vector<int>> faces_of(patches);
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    faces_of[mesh.face_patch[f]].push_back(static_cast<int>(f));
  }
  const auto corner_normals = CornerNormals(mesh);

  SampleSet out;
  out.patch_count = patches;
  out.seed = seed;
  out.points.reserve(quota * patches);
  Rng rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int p = 0; p < patches; ++p) {
    const auto& faces = faces_of[p];
    std::vector<double> cumulative(faces.size());
    double acc = 0;
    for (size_t i = 0; i < faces.size(); ++i) {
      acc += mesh.FaceArea(faces[i]);
      cumulative[i] = acc;
    }
    if (!(acc > 0)) {
      throw Error(ErrorKind::kDegenerateGeometry,
                  "patch " + std::to_string(p) + " has zero area");
    }
    for (size_t s = 0; s < quota; ++s) {
      int f = faces[PickFace(cumulative, u01(rng))];
      const Triangle& t = mesh.triangles[f];
      double r1 = u01(rng), r2 = u01(rng);
      Vec3 bary;
      Vec3 x = UniformInTriangle(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                 mesh.vertices[t[2]], r1, r2, &bary);
      Vec3 n;
      if (mesh.planar[f]) {
        n = mesh.FaceNormal(f);
      } else {
        const auto& cn = corner_normals[f];
        n = (bary[0] * cn[0] + bary[1] * cn[1] + bary[2] * cn[2]).normalized();
      }
      out.points.push_back(x);
      out.normals.push_back(n);
      out.patch_of.push_back(p);
    }
  }
  out.sigma = NearestNeighborDistances(out.points);
  return out;
}

std::vector<double> NearestNeighborDistances(std::span<const Vec3> points) {
  std::vector<double> d(points.size(), 0.0);
  if (points.size() < 2) return d;
  KdTree tree(points);
  for (size_t i = 0; i < points.size(); ++i) {
    d[i] = std::sqrt(tree.Nearest(points[i], static_cast<int>(i)).distance_squared);
  }
  return d;
}

OrientedPoints SampleTriangles(std::span<const Vec3> vertices,
                               std::span<const Triangle> triangles,
                               size_t count, Rng& rng) {
  if (triangles.empty()) throw Error(ErrorKind::kEmptySet, "no triangles to sample");
  std::vector<double> cumulative(triangles.size());
  double acc = 0;
  for (size_t i = 0; i < triangles.size(); ++i) {
    const Triangle& t = triangles[i];
    acc += 0.5 * (vertices[t[1]] - vertices[t[0]])
                     .cross(vertices[t[2]] - vertices[t[0]])
                     .norm();
    cumulative[i] = acc;
  }
  if (!(acc > 0)) throw Error(ErrorKind::kEmptySet, "surface has zero area");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  OrientedPoints out;
  out.points.reserve(count);
  out.normals.reserve(count);
  for (size_t s = 0; s < count; ++s) {
    const Triangle& t = triangles[PickFace(cumulative, u01(rng))];
    double r1 = u01(rng), r2 = u01(rng);
    out.points.push_back(UniformInTriangle(vertices[t[0]], vertices[t[1]],
                                           vertices[t[2]], r1, r2, nullptr));
    out.normals.push_back((vertices[t[1]] - vertices[t[0]])
                              .cross(vertices[t[2]] - vertices[t[0]])
                              .normalized());
  }
  return out;
}

void SaveSampleSet(const SampleSet& samples, const std::filesystem::path& path) {
  BinaryWriter w;
  w.PutBytes(std::string_view(kSampleMagic, 4));
  w.Put<std::uint32_t>(kSampleVersion);
  w.Put<std::uint64_t>(samples.size());
  w.Put<std::uint64_t>(samples.seed);
  w.Put<std::int32_t>(samples.patch_count);
  for (size_t i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < 3; ++k) w.Put<double>(samples.points[i][k]);
    for (int k = 0; k < 3; ++k) w.Put<double>(samples.normals[i][k]);
    w.Put<std::int32_t>(samples.patch_of[i]);
    w.Put<double>(samples.sigma[i]);
  }
  WriteTextFile(path, w.bytes());
}

SampleSet LoadSampleSet(const std::filesystem::path& path) {
  std::string bytes = ReadTextFile(path);
  BinaryReader r(bytes);
  if (r.GetBytes(4) != std::string_view(kSampleMagic, 4)) {
    throw Error(ErrorKind::kFormat, "not a sample set file");
  }
  if (r.Get<std::uint32_t>() != kSampleVersion) {
    throw Error(ErrorKind::kFormat, "unsupported sample set version");
  }
  auto count = r.Get<std::uint64_t>();
  SampleSet s;
  s.seed = r.Get<std::uint64_t>();
  s.patch_count = r.Get<std::int32_t>();
  constexpr size_t kRecord = 7 * sizeof(double) + sizeof(std::int32_t);
  if (r.remaining() != count * kRecord) {
    throw Error(ErrorKind::kFormat, "sample set size does not match header");
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    Vec3 p, n;
    for (int k = 0; k < 3; ++k) p[k] = r.Get<double>();
    for (int k = 0; k < 3; ++k) n[k] = r.Get<double>();
    s.points.push_back(p);
    s.normals.push_back(n);
    s.patch_of.push_back(r.Get<std::int32_t>());
    s.sigma.push_back(r.Get<double>());
  }
  return s;
}

void PerturbSamples(SampleSet& samples, const SampleNoise& noise, std::uint64_t seed) {
  if (noise.position < 0 || noise.normal_degrees < 0) {
    throw Error(ErrorKind::kPrecondition, "noise amplitudes must be non-negative");
  }
  Rng rng(seed ^ 0x6e6f697365ULL);
  std::uniform_real_distribution<double> offset(-noise.position, noise.position);
  const double max_angle = noise.normal_degrees * M_PI / 180.0;
  std::uniform_real_distribution<double> angle(-max_angle, max_angle);
  std::uniform_real_distribution<double> turn(0.0, 2.0 * M_PI);
  for (size_t i = 0; i < samples.size(); ++i) {
    const Vec3 n = samples.normals[i];
    samples.points[i] += offset(rng) * n;
    // Orthonormal frame around n, then tilt toward a random direction in it.
    const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 u = n.cross(helper).normalized();
    const Vec3 v = n.cross(u);
    const double phi = turn(rng), a = angle(rng);
    const Vec3 axis_dir = std::cos(phi) * u + std::sin(phi) * v;
    samples.normals[i] = (std::cos(a) * n + std::sin(a) * axis_dir).normalized();
  }
}

}  // namespace nhrep
