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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhrep/brep_mesh.hpp"
#include "nhrep/isosurface.hpp"
#include "nhrep/sampling.hpp"
#include "nhrep/scalar_field.hpp"

namespace nhrep {

/// Bounding-volume hierarchy over a triangle mesh for closest-point and
/// axis-ray queries. Copies the geometry.
class TriangleBvh {
 public:
  TriangleBvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

  struct Closest {
    double distance = 0;
    Vec3 point = Vec3::Zero();
    int face = -1;
  };
  Closest ClosestPoint(const Vec3& p) const;
  /// Triangles crossed by the ray from `origin` along +axis.
  int AxisRayCrossings(const Vec3& origin, int axis) const;
  /// Majority vote of the ray parities along +x, +y and +z.
  bool Inside(const Vec3& p) const;
  /// Distance to the surface, negative inside.
  double SignedDistance(const Vec3& p) const;

 private:
  struct Node {
    Box3 box;
    int left = -1, right = -1;
    int begin = 0, end = 0;   // leaf range into order_
  };
  int Build(int begin, int end);
  void Closest_(int node, const Vec3& p, Closest& best) const;
  int Crossings(int node, const Vec3& o, int axis) const;

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

/// Closest point on triangle abc to p.
Vec3 ClosestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Throws OpenGroundTruth unless every edge borders exactly two triangles.
void RequireClosed(std::span<const Triangle> triangles);

struct ChamferResult {
  double cd = 0;   // mean of the two one-sided mean distances
  double hd = 0;   // larger of the two one-sided maxima
};

/// Throws EmptySet when either set is empty.
ChamferResult ChamferHausdorff(std::span<const Vec3> pe, std::span<const Vec3> pg);

/// Mean over both directions of the angle (degrees) between each normal and
/// the normal of its nearest point in the other set.
double NormalAngleError(const OrientedPoints& pe, const OrientedPoints& pg);

constexpr double kSharpAngleDegrees = 30.0;
constexpr double kFeatureSpacing = 0.004;

struct FeatureSampleSet {
  std::vector<Vec3> points;
  std::vector<double> angles;   // interior dihedral, degrees
};

/// Interior dihedral (degrees, 180 = flat, < 180 convex) of every edge shared
/// by exactly two triangles, keyed by (min vertex, max vertex).
std::vector<std::pair<std::pair<int, int>, double>> EdgeDihedrals(std::span<const Vec3> vertices,
                                                                  std::span<const Triangle> triangles);

/// Samples chains of sharp edges (|180 - angle| >= threshold) every
/// `spacing` of arc length, starting at each chain end.
FeatureSampleSet SampleFeatures(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
                                double threshold = kSharpAngleDegrees,
                                double spacing = kFeatureSpacing);

struct FeatureResult {
  double fcd = 0;
  double fae = 0;
};

/// Two-sided Chamfer distance and mean absolute dihedral difference between
/// nearest feature samples. Throws NoFeatures when either set is empty.
FeatureResult FeatureMetrics(const FeatureSampleSet& fe, const FeatureSampleSet& fg);

/// Mean |F_g - f| / (|F_g| + delta) over the given probes, with F_g the signed
/// distance to the closed mesh `truth`.
double DistanceError(const ScalarField& field, const TriangleBvh& truth,
                     std::span<const Vec3> probes, double delta = 1e-9);

/// 2^17 uniform probes in [-1,1]^3 from a fixed seed.
std::vector<Vec3> UniformProbes(size_t count = size_t(1) << 17, std::uint64_t seed = 0);

/// |inside(field) & inside(truth)| / |union| over the probes (1 when both
/// are empty).
double OccupancyIoU(const ScalarField& field, const TriangleBvh& truth,
                    std::span<const Vec3> probes);

struct MetricsReport {
  double cd = 0, hd = 0, nae = 0;
  std::optional<double> fcd, fae;   // absent when a side has no sharp edges
  double de = 0, iou = 0;
};

struct MetricsOptions {
  size_t surface_samples = 50000;
  size_t volume_probes = size_t(1) << 17;
  std::uint64_t seed = 0;
};

/// Full report of an extracted mesh and its field against a closed ground
/// truth mesh, all in the same frame.
MetricsReport Evaluate(const IsoMesh& extracted, const ScalarField& field, const BRepMesh& truth,
                       const MetricsOptions& options = {});

std::string MetricsCsvHeader();
std::string MetricsCsvRow(const std::string& model, const MetricsReport& report);

}  // namespace nhrep
