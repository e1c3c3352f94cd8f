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

#include "nhrep/boolean_tree.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "nhrep/error.hpp"

namespace nhrep {

int BooleanTree::AddNode(TreeOp op, int parent) {
  nodes.push_back({op, {}, -1, -1});
  int id = static_cast<int>(nodes.size()) - 1;
  if (parent >= 0) nodes[parent].children.push_back(id);
  return id;
}

int BooleanTree::AddLeaf(int patch, int parent) {
  int id = AddNode(TreeOp::kLeaf, parent);
  nodes[id].patch = patch;
  nodes[id].slot = patch;
  return id;
}

std::vector<int> BooleanTree::Leaves() const {
  std::vector<int> out;
  if (root < 0) return out;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (nodes[n].op == TreeOp::kLeaf) {
      out.push_back(n);
      continue;
    }
    for (auto it = nodes[n].children.rbegin(); it != nodes[n].children.rend(); ++it) {
      stack.push_back(*it);
    }
  }
  return out;
}

int BooleanTree::SlotCount() const {
  int m = -1;
  for (const Node& n : nodes) {
    if (n.op == TreeOp::kLeaf) m = std::max(m, n.slot);
  }
  return m + 1;
}

namespace {

struct Eval {
  double value;
  int leaf;
  int slot;
};

Eval EvaluateNode(const BooleanTree& tree, int id, std::span<const double> values,
                  int& leaf_counter) {
  const auto& node = tree.nodes[id];
  if (node.op == TreeOp::kLeaf) {
    return {values[node.slot], leaf_counter++, node.slot};
  }
  Eval best{0, -1, -1};
  bool first = true;
  for (int c : node.children) {
    Eval e = EvaluateNode(tree, c, values, leaf_counter);
    if (first || (node.op == TreeOp::kMax ? e.value > best.value : e.value < best.value)) {
      best = e;
      first = false;
    }
  }
  return best;
}

// Follows single-child chains down to the node that is actually emitted.
int Effective(const BooleanTree& tree, int id) {
  while (tree.nodes[id].op != TreeOp::kLeaf && tree.nodes[id].children.size() == 1) {
    id = tree.nodes[id].children[0];
  }
  return id;
}

void Emit(const BooleanTree& tree, int id, std::string& out) {
  id = Effective(tree, id);
  const auto& node = tree.nodes[id];
  if (node.op == TreeOp::kLeaf) {
    out += 'f';
    out += std::to_string(node.slot);
    return;
  }
  out += node.op == TreeOp::kMax ? "max(" : "min(";
  for (size_t i = 0; i < node.children.size(); ++i) {
    if (i) out += ',';
    Emit(tree, node.children[i], out);
  }
  out += ')';
}

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  BooleanTree Parse() {
    BooleanTree tree;
    tree.root = ParseNode(tree, -1);
    SkipSpace();
    if (pos_ != text_.size()) Fail("trailing characters");
    return tree;
  }

 private:
  int ParseNode(BooleanTree& tree, int parent) {
    SkipSpace();
    if (Consume("max(") || Consume("min(")) {
      TreeOp op = text_.substr(pos_ - 4, 3) == "max" ? TreeOp::kMax : TreeOp::kMin;
      int id = tree.AddNode(op, parent);
      while (true) {
        ParseNode(tree, id);
        SkipSpace();
        if (Consume(",")) continue;
        if (Consume(")")) break;
        Fail("expected ',' or ')'");
      }
      return id;
    }
    if (Consume("f")) {
      size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == start) Fail("expected slot number after 'f'");
      int k = std::stoi(std::string(text_.substr(start, pos_ - start)));
      return tree.AddLeaf(k, parent);
    }
    Fail("expected 'max(', 'min(' or 'f<k>'");
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool Consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  [[noreturn]] void Fail(const std::string& what) {
    throw Error(ErrorKind::kParse,
                "tree expression at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  size_t pos_ = 0;
};

bool AlternatesFrom(const BooleanTree& tree, int id) {
  id = Effective(tree, id);
  const auto& node = tree.nodes[id];
  for (int c : node.children) {
    int e = Effective(tree, c);
    if (tree.nodes[e].op != TreeOp::kLeaf && tree.nodes[e].op == node.op) return false;
    if (!AlternatesFrom(tree, e)) return false;
  }
  return true;
}

using EdgeLabels = std::map<std::pair<int, int>, CurveType>;

std::pair<int, int> Key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Convex/concave labels of the mesh edges on the boundary of `patch`, keyed
// by vertex pair so they survive re-triangulation of the patch interior.
EdgeLabels BoundaryLabels(const BRepMesh& mesh, const PatchGraph& graph, int patch) {
  MeshTopology topo = MeshTopology::Build(mesh);
  EdgeLabels labels;
  for (const auto& e : graph.edges) {
    if (e.a == e.b || (e.a != patch && e.b != patch) || e.curve < 0) continue;
    if (e.label != CurveType::kConvex && e.label != CurveType::kConcave) continue;
    for (int me : graph.curves[e.curve].edges) {
      labels[Key(topo.edges[me].v0, topo.edges[me].v1)] = e.label;
    }
  }
  return labels;
}

PatchCut BuildCut(const BRepMesh& mesh, const MeshTopology& topo, const EdgeLabels& labels,
                  int patch) {
  PatchCut cut;
  std::vector<int> node_of(mesh.triangles.size(), -1);
  for (size_t f = 0; f < mesh.triangles.size(); ++f) {
    if (mesh.face_patch[f] != patch) continue;
    node_of[f] = static_cast<int>(cut.faces.size());
    cut.faces.push_back(static_cast<int>(f));
  }
  auto& prob = cut.problem;
  prob.node_count = static_cast<int>(cut.faces.size());
  prob.anchor.assign(prob.node_count, -1);
  for (int i = 0; i < prob.node_count; ++i) {
    const Triangle& t = mesh.triangles[cut.faces[i]];
    for (int k = 0; k < 3; ++k) {
      auto it = labels.find(Key(t[k], t[(k + 1) % 3]));
      if (it == labels.end()) continue;
      int want = it->second == CurveType::kConvex ? 0 : 1;
      if (prob.anchor[i] >= 0 && prob.anchor[i] != want) {
        throw Error(ErrorKind::kDecompositionFailure,
                    "triangle " + std::to_string(cut.faces[i]) +
                        " touches both convex and concave curves");
      }
      prob.anchor[i] = want;
    }
  }
  auto centroid = [&](int f) {
    const Triangle& t = mesh.triangles[f];
    return Vec3((mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0);
  };
  for (const auto& e : topo.edges) {
    int a = node_of[e.faces[0]], b = node_of[e.faces[1]];
    if (a < 0 || b < 0) continue;
    double d = (centroid(e.faces[0]) - centroid(e.faces[1])).norm();
    prob.pairs.push_back({a, b, 1.0 / std::max(d, 1e-12)});
  }
  return cut;
}

class TreeBuilder {
 public:
  TreeBuilder(const PatchGraph& graph, const BRepMesh* mesh, const TreeOptions& options)
      : graph_(graph), options_(options), rng_(options.seed) {
    if (mesh) mesh_ = *mesh;
    parent_.resize(graph.vertex_count);
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  TreeConstruction Run() {
    auto comps = graph_.Components();
    tree_.root = tree_.AddNode(TreeOp::kMin, -1);
    tree_.virtual_root = comps.size() == 1;
    for (auto& comp : comps) Create(comp, tree_.root);

    TreeConstruction out;
    out.tree = std::move(tree_);
    out.graph = std::move(graph_);
    out.decompositions = decompositions_;
    out.flipped_nonroot = flipped_nonroot_;
    auto& ps = out.patches;
    ps.parent_patch = parent_;
    ps.subpatches.resize(out.graph.vertex_count);
    if (mesh_) {
      ps.mesh = std::move(*mesh_);
      for (size_t f = 0; f < ps.mesh.triangles.size(); ++f) {
        ps.subpatches[ps.mesh.face_patch[f]].push_back(static_cast<int>(f));
      }
    }
    return out;
  }

 private:
  // Bit 1: incident convex edge, bit 2: incident concave edge, restricted to
  // edges with both ends in `verts`.
  std::vector<int> InducedFlags(const std::vector<char>& in) const {
    std::vector<int> flags(graph_.vertex_count, 0);
    for (const auto& e : graph_.edges) {
      if (e.a == e.b || !in[e.a] || !in[e.b]) continue;
      int bit = e.label == CurveType::kConvex ? 1 : e.label == CurveType::kConcave ? 2 : 0;
      flags[e.a] |= bit;
      flags[e.b] |= bit;
    }
    return flags;
  }

  std::vector<char> Membership(const std::vector<int>& verts) const {
    std::vector<char> in(graph_.vertex_count, 0);
    for (int v : verts) in[v] = 1;
    return in;
  }

  std::vector<std::vector<int>> InducedComponents(const std::vector<int>& verts) const {
    PatchGraph sub;
    sub.vertex_count = graph_.vertex_count;
    auto in = Membership(verts);
    for (const auto& e : graph_.edges) {
      if (in[e.a] && in[e.b]) sub.AddEdge(e.a, e.b, e.label);
    }
    std::vector<std::vector<int>> out;
    for (auto& c : sub.Components()) {
      if (in[c.front()]) out.push_back(std::move(c));
    }
    return out;
  }

  void Create(std::vector<int> verts, int parent) {
    const TreeOp want =
        tree_.nodes[parent].op == TreeOp::kMin ? TreeOp::kMax : TreeOp::kMin;
    const int blocking = want == TreeOp::kMax ? 2 : 1;
    while (true) {
      auto in = Membership(verts);
      auto flags = InducedFlags(in);
      std::vector<int> q, rest;
      for (int v : verts) (flags[v] & blocking ? rest : q).push_back(v);
      if (!q.empty()) {
        int node = tree_.AddNode(want, parent);
        for (int v : q) tree_.AddLeaf(v, node);
        for (auto& comp : InducedComponents(rest)) Create(comp, node);
        return;
      }
      bool mixed = std::any_of(verts.begin(), verts.end(), [&](int v) { return flags[v] == 3; });
      if (!mixed) {
        // Every vertex carries only the blocking type, so the component is
        // combined by the parent's own op.
        if (parent == tree_.root) {
          tree_.virtual_root = false;
        } else {
          ++flipped_nonroot_;
        }
        for (int v : verts) tree_.AddLeaf(v, parent);
        return;
      }
      Decompose(verts, in);
    }
  }

  void Decompose(std::vector<int>& verts, const std::vector<char>& in) {
    if (decompositions_ >= options_.max_decompositions) {
      throw Error(ErrorKind::kDecompositionFailure, "decomposition limit reached");
    }
    std::vector<std::array<size_t, 2>> count(graph_.vertex_count, {0, 0});
    for (const auto& e : graph_.edges) {
      if (e.a == e.b || !in[e.a] || !in[e.b]) continue;
      int k = e.label == CurveType::kConvex ? 0 : e.label == CurveType::kConcave ? 1 : -1;
      if (k < 0) continue;
      size_t w = mesh_ && e.curve >= 0 ? graph_.curves[e.curve].edges.size() : 1;
      count[e.a][k] += w;
      count[e.b][k] += w;
    }
    std::vector<int> candidates;
    for (int v : verts) {
      if (count[v][0] > 0 && count[v][1] > 0) candidates.push_back(v);
    }
    auto score = [&](int v) { return std::min(count[v][0], count[v][1]); };
    auto best = std::min_element(candidates.begin(), candidates.end(), [&](int a, int b) {
      return score(a) != score(b) ? score(a) > score(b) : a < b;
    });
    std::iter_swap(candidates.begin(), best);
    std::shuffle(candidates.begin() + 1, candidates.end(), rng_);

    std::optional<Error> first_error;
    for (int v : candidates) {
      try {
        auto added = mesh_ ? SplitOnMesh(v) : SplitOnGraph(v);
        verts.insert(verts.end(), added.begin(), added.end());
        std::sort(verts.begin(), verts.end());
        ++decompositions_;
        return;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::kDecompositionFailure) throw;
        if (!first_error) first_error = err;
      }
    }
    throw *first_error;
  }

  std::vector<int> SplitOnGraph(int v) {
    int w = graph_.vertex_count++;
    parent_.push_back(parent_[v]);
    for (auto& e : graph_.edges) {
      if (e.label != CurveType::kConcave || e.a == e.b) continue;
      if (e.a == v) e.a = w;
      else if (e.b == v) e.b = w;
      else continue;
      if (e.a > e.b) std::swap(e.a, e.b);
    }
    graph_.AddEdge(v, w, CurveType::kSmooth);
    return {w};
  }

  std::vector<int> SplitOnMesh(int v) {
    PatchDecomposition d = DecomposePatch(*mesh_, graph_, v);
    mesh_ = std::move(d.mesh);
    std::vector<int> added;
    for (int id : d.subpatch_ids) {
      if (id == v) continue;
      if (id != static_cast<int>(parent_.size())) {
        throw Error(ErrorKind::kDecompositionFailure, "non-contiguous subpatch ids");
      }
      parent_.push_back(parent_[v]);
      added.push_back(id);
    }
    graph_ = BuildPatchGraph(*mesh_);
    for (auto& e : graph_.edges) {
      if (e.a != e.b && parent_[e.a] == parent_[e.b]) {
        e.label = CurveType::kSmooth;
        if (e.curve >= 0) graph_.curves[e.curve].type = CurveType::kSmooth;
      }
    }
    return added;
  }

  PatchGraph graph_;
  std::optional<BRepMesh> mesh_;
  std::vector<int> parent_;
  BooleanTree tree_;
  TreeOptions options_;
  std::mt19937_64 rng_;
  int decompositions_ = 0;
  int flipped_nonroot_ = 0;
};

}  // namespace

TreeValue EvaluateTree(const BooleanTree& tree, std::span<const double> values) {
  if (static_cast<int>(values.size()) != tree.SlotCount()) {
    throw Error(ErrorKind::kArityMismatch,
                "tree reads " + std::to_string(tree.SlotCount()) + " slots but got " +
                    std::to_string(values.size()) + " values");
  }
  int counter = 0;
  Eval e = EvaluateNode(tree, tree.root, values, counter);
  return {e.value, e.leaf, e.slot};
}

std::string SerializeTree(const BooleanTree& tree) {
  std::string out;
  if (tree.root >= 0) Emit(tree, tree.root, out);
  return out;
}

BooleanTree ParseTree(std::string_view text) { return ExpressionParser(text).Parse(); }

bool OpsAlternate(const BooleanTree& tree) {
  return tree.root < 0 || AlternatesFrom(tree, tree.root);
}

TreeConstruction ConstructTree(const PatchGraph& graph, const BRepMesh& mesh,
                               const TreeOptions& options) {
  if (graph.vertex_count != mesh.patch_count()) {
    throw Error(ErrorKind::kPrecondition, "patch graph does not match the mesh");
  }
  return TreeBuilder(graph, &mesh, options).Run();
}

TreeConstruction ConstructTree(const PatchGraph& graph, const TreeOptions& options) {
  return TreeBuilder(graph, nullptr, options).Run();
}

PatchCut BuildPatchCut(const BRepMesh& mesh, const PatchGraph& graph, int patch) {
  return BuildCut(mesh, MeshTopology::Build(mesh), BoundaryLabels(mesh, graph, patch), patch);
}

PatchDecomposition DecomposePatch(const BRepMesh& mesh, const PatchGraph& graph, int patch) {
  bool has_convex = false, has_concave = false;
  for (const auto& e : graph.edges) {
    if (e.a == e.b || (e.a != patch && e.b != patch)) continue;
    has_convex |= e.label == CurveType::kConvex;
    has_concave |= e.label == CurveType::kConcave;
  }
  if (!has_convex || !has_concave) {
    throw Error(ErrorKind::kPrecondition,
                "patch " + std::to_string(patch) + " has a homogeneous boundary");
  }
  EdgeLabels labels = BoundaryLabels(mesh, graph, patch);

  PatchDecomposition out;
  out.mesh = mesh;
  BRepMesh& m = out.mesh;
  const size_t original_faces = m.triangles.size();
  for (size_t f = 0; f < original_faces; ++f) {
    if (m.face_patch[f] != patch) continue;
    Triangle t = m.triangles[f];
    int kinds = 0;
    for (int k = 0; k < 3; ++k) {
      auto it = labels.find(Key(t[k], t[(k + 1) % 3]));
      if (it != labels.end()) kinds |= it->second == CurveType::kConvex ? 1 : 2;
    }
    if (kinds != 3) continue;
    int c = static_cast<int>(m.vertices.size());
    m.vertices.push_back((m.vertices[t[0]] + m.vertices[t[1]] + m.vertices[t[2]]) / 3.0);
    bool planar = m.planar[f];
    m.triangles[f] = {t[0], t[1], c};
    m.triangles.push_back({t[1], t[2], c});
    m.triangles.push_back({t[2], t[0], c});
    for (int k = 0; k < 2; ++k) {
      m.face_patch.push_back(patch);
      m.planar.push_back(planar);
    }
  }

  MeshTopology topo = MeshTopology::Build(m);
  PatchCut cut = BuildCut(m, topo, labels, patch);
  const auto& anchor = cut.problem.anchor;
  if (std::count(anchor.begin(), anchor.end(), 0) == 0 ||
      std::count(anchor.begin(), anchor.end(), 1) == 0) {
    throw Error(ErrorKind::kDecompositionFailure,
                "patch " + std::to_string(patch) + " has no triangle on one boundary type");
  }
  CutResult result = SolveMinCut(cut.problem);
  out.cut_value = result.value;

  // Edge-connected components of each label become subpatches.
  const int n = cut.problem.node_count;
  std::vector<int> comp(n);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (const auto& p : cut.problem.pairs) {
    if (result.label[p.i] != result.label[p.j]) continue;
    int a = find(p.i), b = find(p.j);
    if (a != b) comp[std::max(a, b)] = std::min(a, b);
  }
  std::map<int, int> id_of_root;
  int next_id = mesh.patch_count();
  for (int i = 0; i < n; ++i) {   // faces ascend, so the first root seen has the lowest face
    int r = find(i);
    if (id_of_root.count(r)) continue;
    int id = id_of_root.empty() ? patch : next_id++;
    id_of_root[r] = id;
    out.subpatch_ids.push_back(id);
  }
  if (out.subpatch_ids.size() < 2) {
    throw Error(ErrorKind::kDecompositionFailure,
                "min-cut left patch " + std::to_string(patch) + " in one piece");
  }
  for (int i = 0; i < n; ++i) m.face_patch[cut.faces[i]] = id_of_root[find(i)];

  std::set<std::pair<int, int>> seen;
  std::vector<UvRecord> uv;
  for (const UvRecord& r : m.uv) {
    if (r.patch != patch) {
      uv.push_back(r);
      continue;
    }
    // Copy the record to every subpatch that uses the vertex.
    for (int i = 0; i < n; ++i) {
      const Triangle& t = m.triangles[cut.faces[i]];
      if (std::find(t.begin(), t.end(), r.vertex) == t.end()) continue;
      int id = m.face_patch[cut.faces[i]];
      if (seen.insert({r.vertex, id}).second) uv.push_back({r.vertex, id, r.u, r.v});
    }
  }
  m.uv = std::move(uv);
  return out;
}

std::vector<int> GroupPatches(const PatchGraph& graph, int max_group) {
  std::vector<std::set<int>> adj(graph.vertex_count);
  for (const auto& e : graph.edges) {
    if (e.a == e.b) continue;
    adj[e.a].insert(e.b);
    adj[e.b].insert(e.a);
  }
  std::vector<int> slot(graph.vertex_count, -1);
  std::vector<int> size;
  for (int v = 0; v < graph.vertex_count; ++v) {
    std::set<int> taken;
    for (int u : adj[v]) {
      if (slot[u] >= 0) taken.insert(slot[u]);
    }
    int s = 0;
    while (s < static_cast<int>(size.size()) && (taken.count(s) || size[s] >= max_group)) ++s;
    if (s == static_cast<int>(size.size())) size.push_back(0);
    ++size[s];
    slot[v] = s;
  }
  return slot;
}

void AssignSlots(BooleanTree& tree, const std::vector<int>& slot_of_patch) {
  for (auto& node : tree.nodes) {
    if (node.op == TreeOp::kLeaf) node.slot = slot_of_patch.at(node.patch);
  }
}

}  // namespace nhrep
