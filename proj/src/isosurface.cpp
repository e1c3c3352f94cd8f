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


#include "nhrep/isosurface.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

void GridSpec::Validate() const {
  if (resolution < 8 || (resolution & (resolution - 1)) != 0) {
    throw Error(ErrorKind::kPrecondition,
                "grid resolution must be a power of two >= 8, got " + std::to_string(resolution));
  }
  if (!((bounds.max.array() > bounds.min.array()).all())) {
    throw Error(ErrorKind::kPrecondition, "grid bounds are empty");
  }
}

Vec3 GridSpec::Node(int i, int j, int k) const {
  const Vec3 size = bounds.Size();
  return {bounds.min.x() + size.x() * i / resolution, bounds.min.y() + size.y() * j / resolution,
          bounds.min.z() + size.z() * k / resolution};
}

namespace {

constexpr int kBlock = 8;
constexpr int kBisections = 34;   // 2^-34 < 1e-10
constexpr double kQefLambda = 1e-3;

using Key = std::uint64_t;

struct Lattice {
  explicit Lattice(const GridSpec& s) : spec(s), r(s.resolution), n1(Key(s.resolution) + 1) {}
  Key NodeKey(int i, int j, int k) const { return Key(i) + n1 * (Key(j) + n1 * Key(k)); }
  Key NodeKey(const std::array<int, 3>& n) const { return NodeKey(n[0], n[1], n[2]); }
  std::array<int, 3> NodeOf(Key key) const {
    return {int(key % n1), int((key / n1) % n1), int(key / (n1 * n1))};
  }
  Key CellKey(const std::array<int, 3>& c) const {
    return Key(c[0]) + Key(r) * (Key(c[1]) + Key(r) * Key(c[2]));
  }
  std::array<int, 3> CellOf(Key key) const {
    return {int(key % r), int((key / r) % r), int(key / (Key(r) * r))};
  }
  Vec3 Point(const std::array<int, 3>& n) const { return spec.Node(n[0], n[1], n[2]); }

  const GridSpec& spec;
  int r;
  Key n1;
};

struct Block {
  int i, j, k, size;
};

// Field values on a subset of the lattice nodes, sorted by key.
struct NodeTable {
  std::vector<Key> keys;
  std::vector<double> values;

  // Index of `key`, or -1. The dense table is addressed directly.
  long Find(Key key, bool dense) const {
    if (dense) return key < keys.size() ? long(key) : -1;
    auto it = std::lower_bound(keys.begin(), keys.end(), key);
    return it != keys.end() && *it == key ? long(it - keys.begin()) : -1;
  }
};

std::vector<Block> OctreeBlocks(const ScalarField& field, const Lattice& lat, size_t* evaluated) {
  std::vector<Block> level{{0, 0, 0, lat.r}}, leaves;
  const Vec3 cell = lat.spec.CellSize();
  double lipschitz = 0;
  while (!level.empty()) {
    const std::vector<Block>& pending = level;
    // 3x3x3 samples per block at half-block spacing (always lattice nodes).
    std::vector<Vec3> pts;
    pts.reserve(pending.size() * 27);
    for (const Block& b : pending) {
      const int h = b.size / 2;
      for (int c = 0; c < 3; ++c)
        for (int bb = 0; bb < 3; ++bb)
          for (int a = 0; a < 3; ++a) pts.push_back(lat.Point({b.i + a * h, b.j + bb * h, b.k + c * h}));
    }
    std::vector<double> vals(pts.size());
    std::vector<Vec3> grads(pts.size());
    field.EvaluateParallel(pts, vals, grads);
    *evaluated += pts.size();
    for (const Vec3& g : grads) lipschitz = std::max(lipschitz, g.norm());
    const double l_est = 1.5 * lipschitz;
    std::vector<Block> next;
    for (size_t n = 0; n < pending.size(); ++n) {
      const Block& b = pending[n];
      bool neg = false, pos = false;
      double nearest = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 27; ++s) {
        double v = vals[n * 27 + s];
        (v < 0 ? neg : pos) = true;
        nearest = std::min(nearest, std::abs(v));
      }
      const Vec3 spacing = cell * (b.size / 2);
      const double margin = l_est * (0.5 * spacing.norm() + cell.norm());
      if (neg != pos && nearest > margin) continue;   // one sign with room to spare
      if (b.size <= kBlock) {
        leaves.push_back(b);
        continue;
      }
      const int h = b.size / 2;
      for (int c = 0; c < 8; ++c) {
        next.push_back({b.i + (c & 1 ? h : 0), b.j + (c & 2 ? h : 0), b.k + (c & 4 ? h : 0), h});
      }
    }
    level = std::move(next);
  }
  return leaves;
}

NodeTable EvaluateNodes(const ScalarField& field, const Lattice& lat, const std::vector<Block>* blocks) {
  NodeTable t;
  if (!blocks) {
    const Key count = lat.n1 * lat.n1 * lat.n1;
    t.keys.resize(count);
    for (Key k = 0; k < count; ++k) t.keys[k] = k;
  } else {
    for (const Block& b : *blocks) {
      for (int k = b.k; k <= b.k + b.size; ++k)
        for (int j = b.j; j <= b.j + b.size; ++j)
          for (int i = b.i; i <= b.i + b.size; ++i) t.keys.push_back(lat.NodeKey(i, j, k));
    }
    std::sort(t.keys.begin(), t.keys.end());
    t.keys.erase(std::unique(t.keys.begin(), t.keys.end()), t.keys.end());
  }
  t.values.resize(t.keys.size());
  ParallelFor(t.keys.size(), 1 << 14, [&](size_t b, size_t e) {
    std::vector<Vec3> pts(e - b);
    for (size_t n = b; n < e; ++n) pts[n - b] = lat.Point(lat.NodeOf(t.keys[n]));
    field.Evaluate(pts, std::span<double>(t.values).subspan(b, e - b), {});
  });
  return t;
}

std::vector<EdgeIntersection> Intersect(const ScalarField& field, const Lattice& lat,
                                        const NodeTable& nodes, bool dense) {
  struct Pending {
    Key order;
    EdgeIntersection e;
    Vec3 lo, hi;
    double v0, v1;
  };
  std::vector<Pending> found;
  for (size_t n = 0; n < nodes.keys.size(); ++n) {
    const std::array<int, 3> p = lat.NodeOf(nodes.keys[n]);
    const double v0 = nodes.values[n];
    for (int a = 0; a < 3; ++a) {
      if (p[a] == lat.r) continue;
      std::array<int, 3> q = p;
      ++q[a];
      long m = nodes.Find(lat.NodeKey(q), dense);
      if (m < 0) continue;
      const double v1 = nodes.values[m];
      if ((v0 < 0) == (v1 < 0)) continue;
      Pending f;
      f.order = Key(a) * lat.n1 * lat.n1 * lat.n1 + nodes.keys[n];
      f.e.axis = a;
      f.e.node = p;
      f.e.inside_low = v0 < 0;
      f.lo = lat.Point(p);
      f.hi = lat.Point(q);
      f.v0 = v0;
      f.v1 = v1;
      found.push_back(f);
    }
  }
  std::sort(found.begin(), found.end(),
            [](const Pending& x, const Pending& y) { return x.order < y.order; });

  // Vectorized bisection; exact zeros at an end are taken as the root.
  ParallelFor(found.size(), 512, [&](size_t b, size_t e) {
    std::vector<Vec3> mids;
    std::vector<double> vals;
    std::vector<size_t> live;
    for (size_t i = b; i < e; ++i) {
      Pending& f = found[i];
      if (f.v0 == 0) f.hi = f.lo;
      else if (f.v1 == 0) f.lo = f.hi;
      else live.push_back(i);
    }
    for (int it = 0; it < kBisections && !live.empty(); ++it) {
      mids.resize(live.size());
      vals.resize(live.size());
      for (size_t n = 0; n < live.size(); ++n) {
        mids[n] = 0.5 * (found[live[n]].lo + found[live[n]].hi);
      }
      field.Evaluate(mids, vals, {});
      for (size_t n = 0; n < live.size(); ++n) {
        Pending& f = found[live[n]];
        if ((vals[n] < 0) == (f.v0 < 0)) f.lo = mids[n];
        else f.hi = mids[n];
      }
    }
    std::vector<Vec3> roots(e - b), grads(e - b);
    std::vector<double> rv(e - b);
    for (size_t i = b; i < e; ++i) roots[i - b] = 0.5 * (found[i].lo + found[i].hi);
    field.Evaluate(roots, rv, grads);
    for (size_t i = b; i < e; ++i) {
      EdgeIntersection& x = found[i].e;
      x.point = roots[i - b];
      double len = grads[i - b].norm();
      if (len > 0 && std::isfinite(len)) {
        x.normal = grads[i - b] / len;
      } else {
        x.normal = Vec3::Zero();
        x.normal[x.axis] = x.inside_low ? 1.0 : -1.0;
      }
    }
  });
  std::vector<EdgeIntersection> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(f.e);
  return out;
}

double TriangleArea(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

std::vector<EdgeIntersection> EdgeIntersections(const ScalarField& field, const GridSpec& spec) {
  spec.Validate();
  ShiftedField shifted(field, spec.isovalue);
  Lattice lat(spec);
  NodeTable nodes = EvaluateNodes(shifted, lat, nullptr);
  return Intersect(shifted, lat, nodes, true);
}

IsoMesh DualContour(std::span<const EdgeIntersection> xs, const GridSpec& spec) {
  spec.Validate();
  Lattice lat(spec);
  const Vec3 cell = spec.CellSize();

  std::vector<std::pair<Key, int>> incidence;
  incidence.reserve(xs.size() * 4);
  for (size_t n = 0; n < xs.size(); ++n) {
    const auto& x = xs[n];
    const int b = (x.axis + 1) % 3, c = (x.axis + 2) % 3;
    for (int db = 0; db < 2; ++db) {
      for (int dc = 0; dc < 2; ++dc) {
        std::array<int, 3> q = x.node;
        q[b] -= db;
        q[c] -= dc;
        if (q[b] < 0 || q[c] < 0 || q[b] >= lat.r || q[c] >= lat.r) continue;
        incidence.emplace_back(lat.CellKey(q), int(n));
      }
    }
  }
  std::sort(incidence.begin(), incidence.end());

  IsoMesh mesh;
  std::vector<Key> cells;
  for (size_t s = 0; s < incidence.size();) {
    size_t e = s;
    while (e < incidence.size() && incidence[e].first == incidence[s].first) ++e;
    const Key key = incidence[s].first;
    const auto c = lat.CellOf(key);
    const Vec3 origin = lat.Point(c);
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero(), mass = Eigen::Vector3d::Zero();
    Vec3 normal_sum = Vec3::Zero();
    for (size_t n = s; n < e; ++n) {
      const EdgeIntersection& x = xs[incidence[n].second];
      Eigen::Vector3d u = (x.point - origin).cwiseQuotient(cell);
      Eigen::Vector3d nl = x.normal.cwiseProduct(cell);
      double len = nl.norm();
      if (len > 0) nl /= len;
      ata += nl * nl.transpose();
      atb += nl * nl.dot(u);
      mass += u;
      normal_sum += x.normal;
    }
    mass /= double(e - s);
    ata.diagonal().array() += kQefLambda;
    atb += kQefLambda * mass;
    Eigen::Vector3d u = ata.ldlt().solve(atb);
    u = u.cwiseMax(0.0).cwiseMin(1.0);
    mesh.vertices.push_back(origin + u.cwiseProduct(cell));
    double nlen = normal_sum.norm();
    mesh.normals.push_back(nlen > 0 ? Vec3(normal_sum / nlen) : Vec3::UnitZ());
    cells.push_back(key);
    s = e;
  }

  auto vertex_of = [&](const std::array<int, 3>& c) {
    auto it = std::lower_bound(cells.begin(), cells.end(), lat.CellKey(c));
    return int(it - cells.begin());
  };
  auto emit = [&](int a, int b, int c) {
    if (a == b || b == c || a == c) return;
    if (TriangleArea(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) <= 1e-12) return;
    mesh.triangles.push_back({a, b, c});
  };
  for (const auto& x : xs) {
    const int b = (x.axis + 1) % 3, c = (x.axis + 2) % 3;
    if (x.node[b] == 0 || x.node[c] == 0 || x.node[b] == lat.r || x.node[c] == lat.r) continue;
    std::array<int, 4> q;
    const int order[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (int n = 0; n < 4; ++n) {
      std::array<int, 3> cc = x.node;
      cc[b] -= order[n][0];
      cc[c] -= order[n][1];
      q[n] = vertex_of(cc);
    }
    if (!x.inside_low) std::swap(q[1], q[3]);
    const auto& v = mesh.vertices;
    if ((v[q[0]] - v[q[2]]).squaredNorm() <= (v[q[1]] - v[q[3]]).squaredNorm()) {
      emit(q[0], q[1], q[2]);
      emit(q[0], q[2], q[3]);
    } else {
      emit(q[1], q[2], q[3]);
      emit(q[1], q[3], q[0]);
    }
  }
  return mesh;
}

ExtractResult Extract(const ScalarField& field, const GridSpec& spec_in,
                      const ExtractOptions& options) {
  spec_in.Validate();
  ShiftedField shifted(field, spec_in.isovalue);
  auto run = [&](int resolution) {
    GridSpec spec = spec_in;
    spec.resolution = resolution;
    Lattice lat(spec);
    ExtractResult r;
    r.resolution = resolution;
    std::vector<Block> blocks;
    if (options.octree) blocks = OctreeBlocks(shifted, lat, &r.evaluated_nodes);
    NodeTable nodes = EvaluateNodes(shifted, lat, options.octree ? &blocks : nullptr);
    r.evaluated_nodes += nodes.keys.size();
    auto xs = Intersect(shifted, lat, nodes, !options.octree);
    if (xs.empty()) {
      throw Error(ErrorKind::kEmptyLevelSet,
                  "no sign change of the field at isovalue " + FormatDouble(spec.isovalue) +
                      " on a " + std::to_string(resolution) + "^3 grid");
    }
    r.mesh = DualContour(xs, spec);
    const double diag = spec.CellSize().norm();
    for (const Triangle& t : r.mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        double len = (r.mesh.vertices[t[k]] - r.mesh.vertices[t[(k + 1) % 3]]).norm();
        r.longest_edge = std::max(r.longest_edge, len / diag);
      }
    }
    return r;
  };
  ExtractResult result = run(spec_in.resolution);
  if (result.longest_edge > options.long_edge_factor &&
      spec_in.resolution < options.escalation_resolution) {
    if (options.log) {
      std::ostringstream msg;
      msg << "longest edge " << result.longest_edge << " cell diagonals at resolution "
          << spec_in.resolution << "; escalating to " << options.escalation_resolution;
      options.log(msg.str());
    }
    result = run(options.escalation_resolution);
    result.escalated = true;
  }
  return result;
}

std::vector<Vec3> VertexNormals(std::span<const Vec3> vertices, std::span<const Triangle> triangles) {
  std::vector<Vec3> n(vertices.size(), Vec3::Zero());
  for (const Triangle& t : triangles) {
    Vec3 w = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
    for (int v : t) n[v] += w;
  }
  for (Vec3& v : n) {
    double len = v.norm();
    if (len > 0) v /= len;
  }
  return n;
}

std::string FormatObj(const IsoMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 80 + mesh.triangles.size() * 40);
  auto put = [&](const char* tag, const Vec3& v) {
    out += tag;
    for (int k = 0; k < 3; ++k) {
      out += ' ';
      AppendDouble(out, v[k]);
    }
    out += '\n';
  };
  for (const Vec3& v : mesh.vertices) put("v", v);
  const bool normals = mesh.normals.size() == mesh.vertices.size();
  if (normals) {
    for (const Vec3& n : mesh.normals) put("vn", n);
  }
  for (const Triangle& t : mesh.triangles) {
    out += 'f';
    for (int v : t) {
      out += ' ';
      out += std::to_string(v + 1);
      if (normals) out += "//" + std::to_string(v + 1);
    }
    out += '\n';
  }
  return out;
}

IsoMesh ToModelFrame(IsoMesh mesh, const Similarity& transform) {
  for (Vec3& v : mesh.vertices) v = transform.ApplyInverse(v);
  return mesh;
}

void SaveObj(const IsoMesh& mesh, const std::filesystem::path& path) {
  WriteTextFile(path, FormatObj(mesh));
}

IsoMesh ParseObj(std::string_view text) {
  IsoMesh mesh;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::kParse, "obj line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) fail("bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        int v = 0;
        auto slash = tok.find('/');
        std::string_view head(tok.data(), slash == std::string::npos ? tok.size() : slash);
        auto r = std::from_chars(head.data(), head.data() + head.size(), v);
        if (r.ec != std::errc() || r.ptr != head.data() + head.size()) fail("bad face index");
        v = v < 0 ? int(mesh.vertices.size()) + v : v - 1;
        if (v < 0 || v >= int(mesh.vertices.size())) fail("face index out of range");
        idx.push_back(v);
      }
      if (idx.size() < 3) fail("face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  mesh.normals = VertexNormals(mesh.vertices, mesh.triangles);
  return mesh;
}

IsoMesh LoadObj(const std::filesystem::path& path) { return ParseObj(ReadTextFile(path)); }

}  // namespace nhrep
