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

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace nhrep {

using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

inline double Degrees(double radians) { return radians * 180.0 / kPi; }
inline double Radians(double degrees) { return degrees * kPi / 180.0; }

/// x -> scale * x + translation. Maps model units into the normalized frame.
struct Similarity {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 Apply(const Vec3& x) const { return scale * x + translation; }
  Vec3 ApplyInverse(const Vec3& y) const { return (y - translation) / scale; }
  Similarity Inverse() const {
    return {1.0 / scale, -translation / scale};
  }
  bool operator==(const Similarity& o) const {
    return scale == o.scale && translation == o.translation;
  }
};

struct Box3 {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void Extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool Empty() const { return (max.array() < min.array()).any(); }
  Vec3 Center() const { return 0.5 * (min + max); }
  Vec3 Size() const { return max - min; }
  bool Contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Static 3D kd-tree over a point set for exact nearest-neighbour queries.
/// The point storage is copied, so the tree stays valid independently of the
/// caller's vector.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points)
      : points_(points.begin(), points.end()), index_(points.size()) {
    for (size_t i = 0; i < index_.size(); ++i) index_[i] = static_cast<int>(i);
    split_.assign(index_.size(), 0);
    Build(0, index_.size());
  }

  size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

  struct Hit {
    int index = -1;
    double distance_squared = std::numeric_limits<double>::infinity();
  };

  /// Nearest point to `query`, skipping the point with index `exclude`.
  Hit Nearest(const Vec3& query, int exclude = -1) const {
    Hit best;
    if (!points_.empty()) Search(0, index_.size(), query, exclude, best);
    return best;
  }

 private:
  void Build(size_t lo, size_t hi) {
    if (hi - lo <= 1) return;
    Box3 box;
    for (size_t i = lo; i < hi; ++i) box.Extend(points_[index_[i]]);
    int axis;
    box.Size().maxCoeff(&axis);
    size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid,
                     index_.begin() + hi, [&](int a, int b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    split_[mid] = static_cast<std::uint8_t>(axis);
    Build(lo, mid);
    Build(mid + 1, hi);
  }

  void Search(size_t lo, size_t hi, const Vec3& q, int exclude,
              Hit& best) const {
    if (lo >= hi) return;
    size_t mid = (lo + hi) / 2;
    int id = index_[mid];
    if (id != exclude) {
      double d2 = (points_[id] - q).squaredNorm();
      if (d2 < best.distance_squared ||
          (d2 == best.distance_squared && id < best.index)) {
        best.distance_squared = d2;
        best.index = id;
      }
    }
    if (hi - lo == 1) return;
    int axis = split_[mid];
    double delta = q[axis] - points_[id][axis];
    if (delta < 0) {
      Search(lo, mid, q, exclude, best);
      if (delta * delta <= best.distance_squared)
        Search(mid + 1, hi, q, exclude, best);
    } else {
      Search(mid + 1, hi, q, exclude, best);
      if (delta * delta <= best.distance_squared) Search(lo, mid, q, exclude, best);
    }
  }

  std::vector<Vec3> points_;
  std::vector<int> index_;
  std::vector<std::uint8_t> split_;
};

}  // namespace nhrep
