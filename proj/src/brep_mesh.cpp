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

#include "nhrep/brep_mesh.hpp"

#include <cstdint>
#include <unordered_map>

#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

int BRepMesh::patch_count() const {
  int count = 0;
  for (int p : face_patch) count = std::max(count, p + 1);
  return count;
}

Vec3 BRepMesh::FaceNormal(int face) const {
  const Triangle& t = triangles[face];
  Vec3 n = (vertices[t[1]] - vertices[t[0]])
               .cross(vertices[t[2]] - vertices[t[0]]);
  double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

double BRepMesh::FaceArea(int face) const {
  const Triangle& t = triangles[face];
  return 0.5 * (vertices[t[1]] - vertices[t[0]])
                   .cross(vertices[t[2]] - vertices[t[0]])
                   .norm();
}

Box3 BRepMesh::Bounds() const {
  Box3 box;
  for (const Vec3& v : vertices) box.Extend(v);
  return box;
}

namespace {

std::uint64_t EdgeKey(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string EdgeName(int a, int b) {
  return "(" + std::to_string(std::min(a, b)) + "," +
         std::to_string(std::max(a, b)) + ")";
}

}  // namespace

MeshTopology MeshTopology::Build(const BRepMesh& mesh) {
  MeshTopology topo;
  topo.face_edges.resize(mesh.triangles.size());
  topo.vertex_edges_.resize(mesh.vertices.size());
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(mesh.triangles.size() * 2);
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    const Triangle& t = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a == b) {
        throw Error(ErrorKind::kTopology,
                    "degenerate triangle " + std::to_string(f) +
                        " repeats vertex " + std::to_string(a));
      }
      auto [it, inserted] =
          lookup.try_emplace(EdgeKey(a, b), static_cast<int>(topo.edges.size()));
      if (inserted) {
        Edge e;
        e.v0 = std::min(a, b);
        e.v1 = std::max(a, b);
        topo.edges.push_back(e);
        topo.vertex_edges_[e.v0].push_back({e.v1, it->second});
        topo.vertex_edges_[e.v1].push_back({e.v0, it->second});
      }
      Edge& e = topo.edges[it->second];
      int slot = a < b ? 0 : 1;
      if (e.faces[slot] >= 0) {
        bool other_filled = e.faces[1 - slot] >= 0;
        throw Error(ErrorKind::kTopology,
                    std::string(other_filled ? "non-manifold edge "
                                             : "inconsistent orientation at "
                                               "edge ") +
                        EdgeName(a, b));
      }
      e.faces[slot] = static_cast<int>(f);
      topo.face_edges[f][k] = it->second;
    }
  }
  for (const Edge& e : topo.edges) {
    if (e.faces[0] < 0 || e.faces[1] < 0) {
      throw Error(ErrorKind::kTopology,
                  "open mesh: boundary edge " + EdgeName(e.v0, e.v1));
    }
  }
  return topo;
}

int MeshTopology::FindEdge(int a, int b) const {
  if (a < 0 || a >= static_cast<int>(vertex_edges_.size())) return -1;
  for (auto [other, edge] : vertex_edges_[a]) {
    if (other == b) return edge;
  }
  return -1;
}

void ValidateBRep(const BRepMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorKind::kParse, "mesh has no triangles");
  if (mesh.face_patch.size() != mesh.triangles.size() ||
      mesh.planar.size() != mesh.triangles.size()) {
    throw Error(ErrorKind::kParse, "per-face attribute count mismatch");
  }
  const int nv = static_cast<int>(mesh.vertices.size());
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    for (int v : mesh.triangles[f]) {
      if (v < 0 || v >= nv) {
        throw Error(ErrorKind::kParse, "triangle " + std::to_string(f) +
                                           " references missing vertex " +
                                           std::to_string(v));
      }
    }
  }
  const int count = mesh.patch_count();
  std::vector<int> used(count, 0);
  for (int p : mesh.face_patch) {
    if (p < 0) throw Error(ErrorKind::kLabel, "negative patch id " + std::to_string(p));
    used[p] = 1;
  }
  for (int p = 0; p < count; ++p) {
    if (!used[p]) {
      throw Error(ErrorKind::kLabel, "patch id " + std::to_string(p) +
                                         " is missing from range 0.." +
                                         std::to_string(count - 1));
    }
  }
  std::vector<std::pair<int, int>> seen;
  for (const UvRecord& r : mesh.uv) {
    if (r.vertex < 0 || r.vertex >= nv || r.patch < 0 || r.patch >= count) {
      throw Error(ErrorKind::kLabel, "uv record references unknown vertex/patch");
    }
    seen.emplace_back(r.vertex, r.patch);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw Error(ErrorKind::kLabel, "duplicated uv record for a (vertex, patch) pair");
  }
  MeshTopology::Build(mesh);
}

BRepMesh ParseBRep(std::string_view text) {
  LineReader in(text);
  BRepMesh mesh;
  in.ExpectHeader("brep-mesh", "v1");
  size_t nv = in.ExpectCount("vertices");
  mesh.vertices.reserve(nv);
  for (size_t i = 0; i < nv; ++i) {
    auto tok = in.Tokens(3, 3);
    mesh.vertices.emplace_back(in.Double(tok[0]), in.Double(tok[1]), in.Double(tok[2]));
  }
  size_t nt = in.ExpectCount("triangles");
  for (size_t i = 0; i < nt; ++i) {
    auto tok = in.Tokens(4, 5);
    mesh.triangles.push_back({in.Int(tok[0]), in.Int(tok[1]), in.Int(tok[2])});
    mesh.face_patch.push_back(in.Int(tok[3]));
    bool planar = true;
    if (tok.size() == 5) {
      int flag = in.Int(tok[4]);
      if (flag != 0 && flag != 1) in.Fail("planar flag must be 0 or 1");
      planar = flag == 1;
    }
    mesh.planar.push_back(planar);
  }
  auto tok = in.Tokens(1, 2);
  if (tok[0] == "uv" && tok.size() == 2) {
    size_t nu = in.Size(tok[1]);
    for (size_t i = 0; i < nu; ++i) {
      auto rec = in.Tokens(4, 4);
      mesh.uv.push_back({in.Int(rec[0]), in.Int(rec[1]), in.Double(rec[2]),
                         in.Double(rec[3])});
    }
    tok = in.Tokens(1, 1);
  }
  if (tok[0] != "end") in.Fail("expected 'end'");
  in.ExpectEof();
  ValidateBRep(mesh);
  return mesh;
}

BRepMesh LoadBRep(const std::filesystem::path& path) {
  return ParseBRep(ReadTextFile(path));
}

std::string FormatBRep(const BRepMesh& mesh) {
  std::string out;
  out.reserve(64 * (mesh.vertices.size() + mesh.triangles.size()) + 64);
  out += "brep-mesh v1\n";
  out += "vertices " + std::to_string(mesh.vertices.size()) + "\n";
  for (const Vec3& v : mesh.vertices) {
    AppendDouble(out, v.x());
    out += ' ';
    AppendDouble(out, v.y());
    out += ' ';
    AppendDouble(out, v.z());
    out += '\n';
  }
  out += "triangles " + std::to_string(mesh.triangles.size()) + "\n";
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    const Triangle& t = mesh.triangles[f];
    out += std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
           std::to_string(t[2]) + ' ' + std::to_string(mesh.face_patch[f]) +
           ' ' + (mesh.planar[f] ? '1' : '0') + '\n';
  }
  if (!mesh.uv.empty()) {
    out += "uv " + std::to_string(mesh.uv.size()) + "\n";
    for (const UvRecord& r : mesh.uv) {
      out += std::to_string(r.vertex) + ' ' + std::to_string(r.patch) + ' ';
      AppendDouble(out, r.u);
      out += ' ';
      AppendDouble(out, r.v);
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

void SaveBRep(const BRepMesh& mesh, const std::filesystem::path& path) {
  WriteTextFile(path, FormatBRep(mesh));
}

std::pair<BRepMesh, Similarity> Normalize(const BRepMesh& mesh) {
  if (mesh.vertices.empty()) {
    throw Error(ErrorKind::kDegenerateGeometry, "mesh has no vertices");
  }
  Box3 box = mesh.Bounds();
  double half = 0.5 * box.Size().maxCoeff();
  if (!(half > 0.0)) {
    throw Error(ErrorKind::kDegenerateGeometry, "bounding box has zero extent");
  }
  Similarity t;
  t.scale = 0.9 / half;
  t.translation = -t.scale * box.Center();
  return {Transformed(mesh, t), t};
}

BRepMesh Transformed(const BRepMesh& mesh, const Similarity& transform) {
  BRepMesh out = mesh;
  for (Vec3& v : out.vertices) v = transform.Apply(v);
  return out;
}

void AppendBRep(BRepMesh& mesh, const BRepMesh& other) {
  const int vo = static_cast<int>(mesh.vertices.size());
  const int po = mesh.patch_count();
  mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(),
                       other.vertices.end());
  for (size_t f = 0; f < other.triangles.size(); ++f) {
    const Triangle& t = other.triangles[f];
    mesh.triangles.push_back({t[0] + vo, t[1] + vo, t[2] + vo});
    mesh.face_patch.push_back(other.face_patch[f] + po);
    mesh.planar.push_back(other.planar[f]);
  }
  for (UvRecord r : other.uv) {
    r.vertex += vo;
    r.patch += po;
    mesh.uv.push_back(r);
  }
}

}  // namespace nhrep
