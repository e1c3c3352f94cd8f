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
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "nhrep/brep_mesh.hpp"

namespace nhrep {

using Rng = std::mt19937_64;

/// Oriented surface samples grouped by patch.
struct SampleSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;   // unit length
  std::vector<int> patch_of;
  /// Distance from each point to its nearest other sample.
  std::vector<double> sigma;
  int patch_count = 0;
  std::uint64_t seed = 0;

  size_t size() const { return points.size(); }
};

constexpr size_t kMinSamplesPerPatch = 50;

/// Area-uniform sampling of every patch with quota max(ceil(total/L), 50).
/// Planar faces use the face normal; curved faces interpolate per-patch vertex
/// normals. Throws QuotaError when total < 50 * L.
SampleSet SampleSurface(const BRepMesh& mesh, size_t total, std::uint64_t seed);

/// Per-point distance to the nearest other point (0 for exact duplicates).
std::vector<double> NearestNeighborDistances(std::span<const Vec3> points);

/// Angle-weighted vertex normals restricted to the face's own patch, indexed
/// as result[face][corner].
std::vector<std::array<Vec3, 3>> CornerNormals(const BRepMesh& mesh);

struct OrientedPoints {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

/// Area-uniform samples over a whole triangle soup with flat face normals.
OrientedPoints SampleTriangles(std::span<const Vec3> vertices,
                               std::span<const Triangle> triangles,
                               size_t count, Rng& rng);

/// Synthetic scan noise: positions move along their normal by U[-position,
/// position] and normals tilt by an angle in U[-normal_degrees, normal_degrees]
/// about a random perpendicular axis.
struct SampleNoise {
  double position = 0.0;
  double normal_degrees = 0.0;

  bool active() const { return position > 0 || normal_degrees > 0; }
};

void PerturbSamples(SampleSet& samples, const SampleNoise& noise, std::uint64_t seed);

/// Binary layout (little endian):
///   bytes 0..3   magic "NHSS"
///   bytes 4..7   uint32 version (1)
///   bytes 8..15  uint64 point count
///   then uint64 seed, int32 patch count, and per point:
///   3 x f64 position, 3 x f64 normal, int32 patch, f64 sigma.
void SaveSampleSet(const SampleSet& samples, const std::filesystem::path& path);
SampleSet LoadSampleSet(const std::filesystem::path& path);

}  // namespace nhrep
