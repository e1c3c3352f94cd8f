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

#include "nhrep/shapes.hpp"

#include <cmath>

#include "nhrep/error.hpp"

namespace nhrep {

namespace {

constexpr double kWeld = 1e-9;

double Cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool InTriangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  return Cross2(b - a, p - a) >= 0 && Cross2(c - b, p - b) >= 0 && Cross2(a - c, p - c) >= 0;
}

// Ear clipping of a counter-clockwise simple polygon.
std::vector<Triangle> EarClip(std::span<const Vec2> poly) {
  std::vector<int> idx(poly.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<Triangle> out;
  while (idx.size() > 3) {
    const size_t n = idx.size();
    bool clipped = false;
    for (size_t i = 0; i < n; ++i) {
      int a = idx[(i + n - 1) % n], b = idx[i], c = idx[(i + 1) % n];
      if (Cross2(poly[b] - poly[a], poly[c] - poly[b]) <= 0) continue;
      bool blocked = false;
      for (int v : idx) {
        if (v == a || v == b || v == c) continue;
        if (InTriangle(poly[v], poly[a], poly[b], poly[c])) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      out.push_back({a, b, c});
      idx.erase(idx.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw Error(ErrorKind::kDegenerateGeometry, "polygon is not simple");
  }
  out.push_back({idx[0], idx[1], idx[2]});
  return out;
}

double Lerp(double a, double b, double t) { return a + (b - a) * t; }

// Point on the square of half-width h in direction theta.
Vec2 SquarePoint(double h, double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  double k = h / std::max(std::abs(c), std::abs(s));
  return {k * c, k * s};
}

// The four box sides of [-h,h]^2 x [z0,z1], meshed to match SquarePoint
// samples at multiples of 2*pi/segments.
void AddSquareSides(MeshBuilder& b, double h, double z0, double z1, int segments, int rows) {
  const int q = segments / 4;
  // Faces -x, +x, -y, +y; each spans a quarter turn centred on its normal.
  const int start[4] = {3 * q / 2, -q / 2, 5 * q / 2, q / 2};
  for (int f = 0; f < 4; ++f) {
    b.AddGrid(q, rows, [&, f](int u, int v) {
      Vec2 p = SquarePoint(h, 2 * kPi * (start[f] + u) / segments);
      return Vec3(p.x(), p.y(), Lerp(z0, z1, double(v) / rows));
    }, f, true, false);
  }
}

// Ring between a circle of radius r and the square of half-width h.
void AddSquareAnnulus(MeshBuilder& b, double h, double r, double z, int segments, int rows,
                      int patch, bool up) {
  b.AddGrid(segments, rows, [&](int u, int v) {
    double t = 2 * kPi * u / segments;
    Vec2 c(r * std::cos(t), r * std::sin(t));
    Vec2 p = c + (SquarePoint(h, t) - c) * (double(v) / rows);
    return Vec3(p.x(), p.y(), z);
  }, patch, true, up);
}

void AddDisk(MeshBuilder& b, double r, double z, int segments, int rows, int patch, bool up) {
  b.AddGrid(segments, rows, [&](int u, int v) {
    double t = 2 * kPi * u / segments;
    double k = r * v / rows;
    return Vec3(k * std::cos(t), k * std::sin(t), z);
  }, patch, true, up);
}

// Side wall of a vertical cylinder; `inward` for holes.
void AddWall(MeshBuilder& b, double r, double z0, double z1, int segments, int patch,
             bool inward) {
  b.AddGrid(segments, 1, [&](int u, int v) {
    double t = 2 * kPi * u / segments;
    return Vec3(r * std::cos(t), r * std::sin(t), v ? z1 : z0);
  }, patch, false, inward);
}

}  // namespace

int MeshBuilder::AddVertex(const Vec3& p) {
  auto cell = [](double x) { return static_cast<long long>(std::floor(x / kWeld)); };
  long long cx = cell(p.x()), cy = cell(p.y()), cz = cell(p.z());
  for (long long dx = -1; dx <= 1; ++dx) {
    for (long long dy = -1; dy <= 1; ++dy) {
      for (long long dz = -1; dz <= 1; ++dz) {
        auto it = index_.find({cx + dx, cy + dy, cz + dz});
        if (it != index_.end() && (mesh_.vertices[it->second] - p).norm() <= kWeld) {
          return it->second;
        }
      }
    }
  }
  int id = static_cast<int>(mesh_.vertices.size());
  mesh_.vertices.push_back(p);
  index_.emplace(std::make_tuple(cx, cy, cz), id);
  return id;
}

void MeshBuilder::AddTriangle(int a, int b, int c, int patch, bool planar) {
  if (a == b || b == c || a == c) return;
  mesh_.triangles.push_back({a, b, c});
  mesh_.face_patch.push_back(patch);
  mesh_.planar.push_back(planar);
}

void MeshBuilder::AddGrid(int nu, int nv, const std::function<Vec3(int, int)>& point,
                          int patch, bool planar, bool flip) {
  std::vector<int> id((nu + 1) * (nv + 1));
  for (int v = 0; v <= nv; ++v) {
    for (int u = 0; u <= nu; ++u) id[v * (nu + 1) + u] = AddVertex(point(u, v));
  }
  for (int v = 0; v < nv; ++v) {
    for (int u = 0; u < nu; ++u) {
      int p00 = id[v * (nu + 1) + u], p10 = id[v * (nu + 1) + u + 1];
      int p01 = id[(v + 1) * (nu + 1) + u], p11 = id[(v + 1) * (nu + 1) + u + 1];
      if (flip) {
        AddTriangle(p00, p11, p10, patch, planar);
        AddTriangle(p00, p01, p11, patch, planar);
      } else {
        AddTriangle(p00, p10, p11, patch, planar);
        AddTriangle(p00, p11, p01, patch, planar);
      }
    }
  }
}

BRepMesh MeshBuilder::Build() const { return mesh_; }

BRepMesh MakeBox(const Vec3& min, const Vec3& max, int subdivisions) {
  MeshBuilder b;
  const int n = subdivisions;
  auto at = [&](int axis, int i) { return Lerp(min[axis], max[axis], double(i) / n); };
  for (int axis = 0; axis < 3; ++axis) {
    int ua = (axis + 1) % 3, va = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      b.AddGrid(n, n, [&](int u, int v) {
        Vec3 p;
        p[axis] = side ? max[axis] : min[axis];
        p[ua] = at(ua, u);
        p[va] = at(va, v);
        return p;
      }, 2 * axis + side, true, side == 0);
    }
  }
  return b.Build();
}

BRepMesh MakeSubdividedBox(const Vec3& min, const Vec3& max, int k) {
  MeshBuilder b;
  const int m = 2;   // grid cells per patch along each direction
  const int n = k * m;
  auto at = [&](int axis, int i) { return Lerp(min[axis], max[axis], double(i) / n); };
  for (int axis = 0; axis < 3; ++axis) {
    int ua = (axis + 1) % 3, va = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int bu = 0; bu < k; ++bu) {
        for (int bv = 0; bv < k; ++bv) {
          int patch = (2 * axis + side) * k * k + bu * k + bv;
          b.AddGrid(m, m, [&](int u, int v) {
            Vec3 p;
            p[axis] = side ? max[axis] : min[axis];
            p[ua] = at(ua, bu * m + u);
            p[va] = at(va, bv * m + v);
            return p;
          }, patch, true, side == 0);
        }
      }
    }
  }
  return b.Build();
}

BRepMesh MakePrism(std::span<const Vec2> polygon, double z0, double z1) {
  MeshBuilder b;
  const int n = static_cast<int>(polygon.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& p = polygon[i];
    const Vec2& q = polygon[(i + 1) % n];
    b.AddGrid(1, 1, [&](int u, int v) {
      const Vec2& s = u ? q : p;
      return Vec3(s.x(), s.y(), v ? z1 : z0);
    }, i, true, false);
  }
  std::vector<int> bottom(n), top(n);
  for (int i = 0; i < n; ++i) {
    bottom[i] = b.AddVertex(Vec3(polygon[i].x(), polygon[i].y(), z0));
    top[i] = b.AddVertex(Vec3(polygon[i].x(), polygon[i].y(), z1));
  }
  for (const Triangle& t : EarClip(polygon)) {
    b.AddTriangle(bottom[t[0]], bottom[t[2]], bottom[t[1]], n, true);
    b.AddTriangle(top[t[0]], top[t[1]], top[t[2]], n + 1, true);
  }
  return b.Build();
}

BRepMesh MakeCylinder(double radius, double z0, double z1, int segments) {
  MeshBuilder b;
  AddWall(b, radius, z0, z1, segments, 0, false);
  AddDisk(b, radius, z0, segments, 4, 1, false);
  AddDisk(b, radius, z1, segments, 4, 2, true);
  return b.Build();
}

BRepMesh MakeSphere(double radius, int segments, int rings, bool hemispheres) {
  MeshBuilder b;
  auto point = [&](int u, int v) {
    double t = 2 * kPi * u / segments;
    double phi = -kPi / 2 + kPi * v / rings;
    return Vec3(radius * std::cos(phi) * std::cos(t), radius * std::cos(phi) * std::sin(t),
                radius * std::sin(phi));
  };
  if (!hemispheres) {
    b.AddGrid(segments, rings, point, 0, false, false);
  } else {
    int half = rings / 2;
    b.AddGrid(segments, half, point, 0, false, false);
    b.AddGrid(segments, rings - half, [&](int u, int v) { return point(u, v + half); }, 1,
              false, false);
  }
  return b.Build();
}

BRepMesh MakeThroughHoleCube(double half, double hole_radius, int segments) {
  MeshBuilder b;
  AddSquareSides(b, half, -half, half, segments, 4);
  AddSquareAnnulus(b, half, hole_radius, -half, segments, 4, 4, false);
  AddSquareAnnulus(b, half, hole_radius, half, segments, 4, 5, true);
  AddWall(b, hole_radius, -half, half, segments, 6, true);
  return b.Build();
}

BRepMesh MakeBossBox(double half, double boss_radius, double boss_height, int segments,
                     int rings) {
  MeshBuilder b;
  const int q = segments / 4;
  AddSquareSides(b, half, -half, half, segments, 4);
  // Bottom: product grid over the side faces' tangent-spaced coordinates.
  std::vector<double> xs;
  for (int i = -q / 2; i <= q / 2; ++i) xs.push_back(half * std::tan(2 * kPi * i / segments));
  b.AddGrid(q, q, [&](int u, int v) { return Vec3(xs[u], xs[v], -half); }, 4, true, true);
  AddSquareAnnulus(b, half, boss_radius, half, segments, rings, 5, true);
  AddWall(b, boss_radius, half, half + boss_height, segments, 6, false);
  AddDisk(b, boss_radius, half + boss_height, segments, 4, 7, true);
  return b.Build();
}

BRepMesh MakeLBracket() {
  const Vec2 poly[] = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  return MakePrism(poly, 0.0, 1.0);
}

BRepMesh MakeStarPrism(int tips, double outer, double inner, double height) {
  std::vector<Vec2> poly;
  for (int i = 0; i < 2 * tips; ++i) {
    double t = kPi / 2 + kPi * i / tips;
    double r = i % 2 ? inner : outer;
    poly.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return MakePrism(poly, 0.0, height);
}

BRepMesh MakeWaveCrease(int waves, double amplitude, int resolution) {
  MeshBuilder b;
  const int n = resolution, h = resolution / 2;
  auto crease = [&](double x) { return amplitude * std::sin(waves * kPi * x); };
  auto top = [&](double x, double y) { return 1.0 + crease(x) * std::abs(y); };
  auto coord = [&](int i) { return -1.0 + 2.0 * i / n; };
  for (int side = 0; side < 2; ++side) {
    double x = side ? 1.0 : -1.0;
    b.AddGrid(n, n, [&](int u, int v) {
      double y = coord(u);
      return Vec3(x, y, top(x, y) * v / n);
    }, side, true, side == 0);
    double y = side ? 1.0 : -1.0;
    b.AddGrid(n, n, [&](int u, int v) {
      double xx = coord(u);
      return Vec3(xx, y, top(xx, y) * v / n);
    }, 2 + side, true, side == 1);
  }
  b.AddGrid(n, n, [&](int u, int v) { return Vec3(coord(u), coord(v), 0.0); }, 4, true, true);
  b.AddGrid(n, h, [&](int u, int v) {
    double x = coord(u), y = coord(v);
    return Vec3(x, y, top(x, y));
  }, 5, false, false);
  b.AddGrid(n, h, [&](int u, int v) {
    double x = coord(u), y = coord(v + h);
    return Vec3(x, y, top(x, y));
  }, 6, false, false);
  return b.Build();
}

BRepMesh MakeOctagonExample() {
  const Vec2 poly[] = {{-2, 1.5}, {6, 0},     {6, 4},  {5, 5},
                       {0.5, 5},  {0.5, 3.5}, {-1, 3.5}, {-1, 1.5}};
  return MakePrism(poly, 0.0, 1.0);
}

BRepMesh MakeShape(const std::string& name) {
  if (name == "cube") return MakeBox(Vec3::Constant(-0.5), Vec3::Constant(0.5));
  if (name == "cylinder") return MakeCylinder(0.5, -0.5, 0.5);
  if (name == "sphere") return MakeSphere(0.5);
  if (name == "hole_cube") return MakeThroughHoleCube(0.5, 0.25);
  if (name == "boss_box") return MakeBossBox(0.5, 0.2, 0.25);
  if (name == "lbracket") return MakeLBracket();
  if (name == "star") return MakeStarPrism();
  if (name == "wave") return MakeWaveCrease();
  if (name == "octagon") return MakeOctagonExample();
  throw Error(ErrorKind::kPrecondition, "unknown shape '" + name + "'");
}

std::vector<std::string> ShapeNames() {
  return {"cube", "cylinder", "sphere", "hole_cube", "boss_box",
          "lbracket", "star", "wave", "octagon"};
}

double SignedVolume(const BRepMesh& mesh) {
  double v = 0;
  for (const Triangle& t : mesh.triangles) {
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  }
  return v / 6.0;
}

}  // namespace nhrep
