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

#include "nhrep/patch_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

std::string_view CurveTypeName(CurveType type) {
  switch (type) {
    case CurveType::kConvex: return "convex";
    case CurveType::kConcave: return "concave";
    case CurveType::kSmooth: return "smooth";
    case CurveType::kHybrid: return "hybrid";
  }
  return "?";
}

namespace {

int ApexVertex(const Triangle& t, int v0, int v1) {
  for (int v : t) {
    if (v != v0 && v != v1) return v;
  }
  return t[0];
}

double DihedralFromFaces(const BRepMesh& mesh, int f0, int f1, int v0, int v1) {
  Vec3 n0 = mesh.FaceNormal(f0);
  Vec3 n1 = mesh.FaceNormal(f1);
  double theta = Degrees(std::atan2(n0.cross(n1).norm(), n0.dot(n1)));
  const Vec3& apex = mesh.vertices[ApexVertex(mesh.triangles[f1], v0, v1)];
  double side = n0.dot(apex - mesh.vertices[v0]);
  // Apex of the second face below the first face's plane: the solid wedge is
  // narrower than a half-space.
  return side <= 0 ? 180.0 - theta : 180.0 + theta;
}

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int Find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void Unite(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> parent;
};

struct Run {
  CurveType label;
  size_t begin;   // edge range in chain order
  size_t end;
};

// Splits the per-edge classes of a hybrid chain into maximal runs; smooth runs
// flanked by the same sharp label are absorbed so adjacent runs always differ.
std::vector<Run> SplitRuns(const std::vector<CurveType>& cls, bool closed) {
  std::vector<Run> runs;
  for (size_t i = 0; i < cls.size(); ++i) {
    if (runs.empty() || runs.back().label != cls[i]) {
      runs.push_back({cls[i], i, i + 1});
    } else {
      runs.back().end = i + 1;
    }
  }
  const size_t n = runs.size();
  for (size_t i = 0; i < n; ++i) {
    if (runs[i].label != CurveType::kSmooth) continue;
    bool has_prev = closed || i > 0;
    bool has_next = closed || i + 1 < n;
    CurveType prev = has_prev ? runs[(i + n - 1) % n].label : CurveType::kSmooth;
    CurveType next = has_next ? runs[(i + 1) % n].label : CurveType::kSmooth;
    if (has_prev && has_next) {
      if (prev == next && prev != CurveType::kSmooth) runs[i].label = prev;
    } else if (has_prev) {
      runs[i].label = prev;
    } else if (has_next) {
      runs[i].label = next;
    }
  }
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && merged.back().label == r.label) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

}  // namespace

double DihedralAngle(const BRepMesh& mesh, const MeshTopology& topo, int edge) {
  if (edge < 0 || edge >= static_cast<int>(topo.edges.size())) {
    throw Error(ErrorKind::kBoundaryEdge, "edge " + std::to_string(edge) + " does not exist");
  }
  const auto& e = topo.edges[edge];
  if (e.faces[0] < 0 || e.faces[1] < 0) {
    throw Error(ErrorKind::kBoundaryEdge, "edge " + std::to_string(edge) + " is a boundary edge");
  }
  return DihedralFromFaces(mesh, e.faces[0], e.faces[1], e.v0, e.v1);
}

double DihedralAngle(const BRepMesh& mesh, int v0, int v1) {
  int faces[2] = {-1, -1};
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    const Triangle& t = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a == v0 && b == v1) faces[0] = static_cast<int>(f);
      if (a == v1 && b == v0) faces[1] = static_cast<int>(f);
    }
  }
  if (faces[0] < 0 || faces[1] < 0) {
    throw Error(ErrorKind::kBoundaryEdge,
                "edge (" + std::to_string(v0) + "," + std::to_string(v1) +
                    ") does not have two incident triangles");
  }
  return DihedralFromFaces(mesh, faces[0], faces[1], v0, v1);
}

CurveType ClassifyAngle(double degrees, double tolerance) {
  if (degrees < 180.0 - tolerance) return CurveType::kConvex;
  if (degrees > 180.0 + tolerance) return CurveType::kConcave;
  return CurveType::kSmooth;
}

CurveType ClassifyChain(const std::vector<double>& angles, double tolerance) {
  bool any_convex = false, any_concave = false;
  for (double a : angles) {
    CurveType c = ClassifyAngle(a, tolerance);
    any_convex |= c == CurveType::kConvex;
    any_concave |= c == CurveType::kConcave;
  }
  if (!any_convex && !any_concave) return CurveType::kSmooth;
  if (!any_concave) return CurveType::kConvex;
  if (!any_convex) return CurveType::kConcave;
  return CurveType::kHybrid;
}

std::vector<FeatureCurve> ExtractFeatureCurves(const BRepMesh& mesh) {
  MeshTopology topo = MeshTopology::Build(mesh);
  const int nv = static_cast<int>(mesh.vertices.size());

  std::vector<std::vector<int>> vertex_patches(nv);
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    for (int v : mesh.triangles[f]) vertex_patches[v].push_back(mesh.face_patch[f]);
  }
  std::vector<bool> corner(nv, false);
  for (int v = 0; v < nv; ++v) {
    auto& ps = vertex_patches[v];
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    corner[v] = ps.size() >= 3;
  }

  std::map<std::pair<int, int>, std::vector<int>> by_pair;
  for (size_t e = 0; e < topo.edges.size(); ++e) {
    const auto& edge = topo.edges[e];
    int pa = mesh.face_patch[edge.faces[0]];
    int pb = mesh.face_patch[edge.faces[1]];
    if (pa == pb) continue;
    by_pair[{std::min(pa, pb), std::max(pa, pb)}].push_back(static_cast<int>(e));
  }

  std::vector<FeatureCurve> curves;
  int chain_id = 0;
  for (const auto& [pair, edges] : by_pair) {
    std::map<int, std::vector<int>> incident;
    for (int e : edges) {
      incident[topo.edges[e].v0].push_back(e);
      incident[topo.edges[e].v1].push_back(e);
    }
    auto is_stop = [&](int v) { return corner[v] || incident[v].size() != 2; };
    std::set<int> unvisited(edges.begin(), edges.end());

    auto walk = [&](int start_vertex, int first_edge) {
      FeatureCurve c;
      c.patch_a = pair.first;
      c.patch_b = pair.second;
      int v = start_vertex, e = first_edge;
      c.vertices.push_back(v);
      while (true) {
        unvisited.erase(e);
        c.edges.push_back(e);
        v = topo.edges[e].v0 == v ? topo.edges[e].v1 : topo.edges[e].v0;
        if (v == start_vertex && !is_stop(v)) {
          c.closed = true;
          break;
        }
        c.vertices.push_back(v);
        if (is_stop(v)) break;
        int next = -1;
        for (int cand : incident[v]) {
          if (unvisited.count(cand)) {
            next = cand;
            break;
          }
        }
        if (next < 0) break;
        e = next;
      }
      return c;
    };

    std::vector<FeatureCurve> chains;
    for (const auto& [v, inc] : incident) {
      if (!is_stop(v)) continue;
      for (int e : inc) {
        if (unvisited.count(e)) chains.push_back(walk(v, e));
      }
    }
    while (!unvisited.empty()) {
      int e = *unvisited.begin();
      chains.push_back(walk(topo.edges[e].v0, e));
    }

    for (FeatureCurve& chain : chains) {
      for (int e : chain.edges) chain.angles.push_back(DihedralAngle(mesh, topo, e));
      chain.type = ClassifyChain(chain.angles);
      chain.chain = chain_id++;
      if (chain.type != CurveType::kHybrid) {
        curves.push_back(std::move(chain));
        continue;
      }
      std::vector<CurveType> cls;
      for (double a : chain.angles) cls.push_back(ClassifyAngle(a));
      size_t rotate = 0;
      if (chain.closed) {
        // Start at a class boundary so no run wraps around.
        while (cls.front() == cls.back()) {
          std::rotate(cls.begin(), cls.begin() + 1, cls.end());
          ++rotate;
        }
      }
      auto runs = SplitRuns(cls, chain.closed);
      if (chain.closed && runs.size() > 1 && runs.front().label == runs.back().label) {
        runs.front().begin = runs.back().begin;
        runs.pop_back();
      }
      const size_t m = chain.edges.size();
      for (const Run& r : runs) {
        FeatureCurve piece;
        piece.patch_a = chain.patch_a;
        piece.patch_b = chain.patch_b;
        piece.type = r.label;
        piece.chain = chain.chain;
        size_t len = r.end > r.begin ? r.end - r.begin : r.end + m - r.begin;
        for (size_t k = 0; k < len; ++k) {
          size_t idx = (r.begin + k + rotate) % m;
          piece.edges.push_back(chain.edges[idx]);
          piece.angles.push_back(chain.angles[idx]);
          piece.vertices.push_back(chain.vertices[idx]);
        }
        size_t last = r.begin + len + rotate;
        piece.vertices.push_back(chain.vertices[chain.closed ? last % m : last]);
        curves.push_back(std::move(piece));
      }
    }
  }
  return curves;
}

void PatchGraph::AddEdge(int a, int b, CurveType label, int curve) {
  edges.push_back({std::min(a, b), std::max(a, b), label, curve});
}

std::vector<std::vector<std::pair<int, int>>> PatchGraph::Adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(vertex_count);
  for (size_t i = 0; i < edges.size(); ++i) {
    adj[edges[i].a].push_back({edges[i].b, static_cast<int>(i)});
    if (edges[i].a != edges[i].b) adj[edges[i].b].push_back({edges[i].a, static_cast<int>(i)});
  }
  return adj;
}

std::vector<std::vector<int>> PatchGraph::Components() const {
  UnionFind uf(vertex_count);
  for (const Edge& e : edges) uf.Unite(e.a, e.b);
  std::map<int, std::vector<int>> groups;
  for (int v = 0; v < vertex_count; ++v) groups[uf.Find(v)].push_back(v);
  std::vector<std::vector<int>> out;
  for (auto& [_, g] : groups) out.push_back(std::move(g));
  return out;
}

int PatchGraph::MixedVertexCount() const {
  std::vector<int> flags(vertex_count, 0);
  for (const Edge& e : edges) {
    int bit = e.label == CurveType::kConvex ? 1 : e.label == CurveType::kConcave ? 2 : 0;
    flags[e.a] |= bit;
    flags[e.b] |= bit;
  }
  return static_cast<int>(std::count(flags.begin(), flags.end(), 3));
}

bool PatchGraph::HasMixedVertex() const { return MixedVertexCount() > 0; }

PatchGraph BuildPatchGraph(const BRepMesh& mesh) {
  PatchGraph g;
  g.vertex_count = mesh.patch_count();
  g.curves = ExtractFeatureCurves(mesh);
  std::set<int> hybrid;
  std::map<int, int> pieces;
  for (const FeatureCurve& c : g.curves) ++pieces[c.chain];
  for (size_t i = 0; i < g.curves.size(); ++i) {
    const FeatureCurve& c = g.curves[i];
    if (pieces[c.chain] > 1) hybrid.insert(c.chain);
    g.AddEdge(c.patch_a, c.patch_b, c.type, static_cast<int>(i));
  }
  g.hybrid_chains = static_cast<int>(hybrid.size());
  return g;
}

PatchGraph InducedSubgraph(const PatchGraph& graph, const std::vector<int>& keep) {
  std::vector<int> index(graph.vertex_count, -1);
  for (size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<int>(i);
  PatchGraph out;
  out.vertex_count = static_cast<int>(keep.size());
  for (const auto& e : graph.edges) {
    if (index[e.a] >= 0 && index[e.b] >= 0) out.AddEdge(index[e.a], index[e.b], e.label);
  }
  return out;
}

std::string FormatPatchGraph(const PatchGraph& graph) {
  std::string out = "patch-graph v1\n";
  out += "vertices " + std::to_string(graph.vertex_count) + "\n";
  out += "edges " + std::to_string(graph.edges.size()) + "\n";
  for (const auto& e : graph.edges) {
    out += std::to_string(e.a) + ' ' + std::to_string(e.b) + ' ' +
           std::string(CurveTypeName(e.label)) + ' ' + std::to_string(e.curve) + '\n';
  }
  out += "end\n";
  return out;
}

PatchGraph ParsePatchGraph(std::string_view text) {
  LineReader in(text);
  in.ExpectHeader("patch-graph", "v1");
  PatchGraph g;
  g.vertex_count = static_cast<int>(in.ExpectCount("vertices"));
  size_t ne = in.ExpectCount("edges");
  for (size_t i = 0; i < ne; ++i) {
    auto tok = in.Tokens(3, 4);
    int a = in.Int(tok[0]), b = in.Int(tok[1]);
    if (a < 0 || b < 0 || a >= g.vertex_count || b >= g.vertex_count) {
      in.Fail("edge endpoint out of range");
    }
    CurveType label;
    if (tok[2] == "convex") label = CurveType::kConvex;
    else if (tok[2] == "concave") label = CurveType::kConcave;
    else if (tok[2] == "smooth") label = CurveType::kSmooth;
    else in.Fail("unknown edge label '" + std::string(tok[2]) + "'");
    g.AddEdge(a, b, label, tok.size() == 4 ? in.Int(tok[3]) : -1);
  }
  auto tok = in.Tokens(1, 1);
  if (tok[0] != "end") in.Fail("expected 'end'");
  in.ExpectEof();
  return g;
}

std::pair<PatchGraph, BRepMesh> MergeSmoothPatches(const PatchGraph& graph,
                                                   const BRepMesh& mesh) {
  UnionFind uf(graph.vertex_count);
  auto all_smooth_between = [&](int ga, int gb) {
    bool any = false;
    for (const auto& e : graph.edges) {
      int ra = uf.Find(e.a), rb = uf.Find(e.b);
      if (!((ra == ga && rb == gb) || (ra == gb && rb == ga))) continue;
      any = true;
      if (e.label != CurveType::kSmooth) return false;
    }
    return any;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : graph.edges) {
      if (e.label != CurveType::kSmooth) continue;
      int ra = uf.Find(e.a), rb = uf.Find(e.b);
      if (ra == rb) continue;
      if (all_smooth_between(ra, rb)) {
        uf.Unite(ra, rb);
        changed = true;
      }
    }
  }

  std::vector<int> relabel(graph.vertex_count, -1);
  int next = 0;
  for (int p = 0; p < graph.vertex_count; ++p) {
    int root = uf.Find(p);
    if (relabel[root] < 0) relabel[root] = next++;
    relabel[p] = relabel[root];
  }
  BRepMesh out = mesh;
  for (int& p : out.face_patch) p = relabel[p];
  std::set<std::pair<int, int>> seen;
  std::vector<UvRecord> uv;
  for (UvRecord r : out.uv) {
    r.patch = relabel[r.patch];
    if (seen.insert({r.vertex, r.patch}).second) uv.push_back(r);
  }
  out.uv = std::move(uv);
  PatchGraph merged = BuildPatchGraph(out);
  return {std::move(merged), std::move(out)};
}

}  // namespace nhrep
