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


#include "nhrep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

Vec3 ClosestPointOnTriangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(std::span<const Vec3> vertices, std::span<const Triangle> triangles)
    : vertices_(vertices.begin(), vertices.end()),
      triangles_(triangles.begin(), triangles.end()),
      order_(triangles.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  if (!triangles_.empty()) Build(0, int(order_.size()));
}

int TriangleBvh::Build(int begin, int end) {
  Node node;
  for (int n = begin; n < end; ++n) {
    for (int v : triangles_[order_[n]]) node.box.Extend(vertices_[v]);
  }
  const int id = int(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 4) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  int axis;
  node.box.Size().maxCoeff(&axis);
  auto centroid = [&](int t) {
    const Triangle& tri = triangles_[t];
    return vertices_[tri[0]][axis] + vertices_[tri[1]][axis] + vertices_[tri[2]][axis];
  };
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int x, int y) { return centroid(x) < centroid(y); });
  const int left = Build(begin, mid);
  const int right = Build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {

double BoxDistanceSquared(const Box3& box, const Vec3& p) {
  Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace

void TriangleBvh::Closest_(int id, const Vec3& p, Closest& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (int n = node.begin; n < node.end; ++n) {
      const Triangle& t = triangles_[order_[n]];
      Vec3 q = ClosestPointOnTriangle(p, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
      double d = (q - p).squaredNorm();
      if (d < best.distance) {
        best.distance = d;
        best.point = q;
        best.face = order_[n];
      }
    }
    return;
  }
  double dl = BoxDistanceSquared(nodes_[node.left].box, p);
  double dr = BoxDistanceSquared(nodes_[node.right].box, p);
  int first = node.left, second = node.right;
  if (dr < dl) {
    std::swap(first, second);
    std::swap(dl, dr);
  }
  if (dl < best.distance) Closest_(first, p, best);
  if (dr < best.distance) Closest_(second, p, best);
}

TriangleBvh::Closest TriangleBvh::ClosestPoint(const Vec3& p) const {
  Closest best;
  best.distance = std::numeric_limits<double>::infinity();
  if (!nodes_.empty()) Closest_(0, p, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

int TriangleBvh::Crossings(int id, const Vec3& o, int axis) const {
  const Node& node = nodes_[id];
  const int b = (axis + 1) % 3, c = (axis + 2) % 3;
  if (o[b] < node.box.min[b] || o[b] > node.box.max[b] || o[c] < node.box.min[c] ||
      o[c] > node.box.max[c] || o[axis] > node.box.max[axis]) {
    return 0;
  }
  if (node.left >= 0) return Crossings(node.left, o, axis) + Crossings(node.right, o, axis);
  int count = 0;
  for (int n = node.begin; n < node.end; ++n) {
    const Triangle& t = triangles_[order_[n]];
    const Vec3 &p0 = vertices_[t[0]], &p1 = vertices_[t[1]], &p2 = vertices_[t[2]];
    // Edge functions in the plane orthogonal to the ray. Zeros are resolved
    // by a top-left rule so an edge shared by two triangles on opposite
    // sides counts for exactly one of them.
    auto edge = [&](const Vec3& u, const Vec3& v) {
      return (v[b] - u[b]) * (o[c] - u[c]) - (v[c] - u[c]) * (o[b] - u[b]);
    };
    const double w0 = edge(p1, p2), w1 = edge(p2, p0), w2 = edge(p0, p1);
    const double sum = w0 + w1 + w2;
    if (sum == 0) continue;
    const double s = sum > 0 ? 1.0 : -1.0;
    auto covers = [&](double w, const Vec3& u, const Vec3& v) {
      if (s * w > 0) return true;
      if (s * w < 0) return false;
      const double db = s * (v[b] - u[b]), dc = s * (v[c] - u[c]);
      return dc > 0 || (dc == 0 && db < 0);
    };
    if (!covers(w0, p1, p2) || !covers(w1, p2, p0) || !covers(w2, p0, p1)) continue;
    const double hit = (w0 * p0[axis] + w1 * p1[axis] + w2 * p2[axis]) / sum;
    if (hit > o[axis]) ++count;
  }
  return count;
}

int TriangleBvh::AxisRayCrossings(const Vec3& origin, int axis) const {
  return nodes_.empty() ? 0 : Crossings(0, origin, axis);
}

bool TriangleBvh::Inside(const Vec3& p) const {
  int votes = 0;
  for (int a = 0; a < 3; ++a) votes += AxisRayCrossings(p, a) & 1;
  return votes >= 2;
}

double TriangleBvh::SignedDistance(const Vec3& p) const {
  double d = ClosestPoint(p).distance;
  return Inside(p) ? -d : d;
}

void RequireClosed(std::span<const Triangle> triangles) {
  std::map<std::pair<int, int>, int> count;
  for (const Triangle& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      ++count[{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])}];
    }
  }
  for (const auto& [e, n] : count) {
    if (n != 2) {
      throw Error(ErrorKind::kOpenGroundTruth,
                  "ground truth edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                      ") borders " + std::to_string(n) + " triangles");
    }
  }
}

namespace {

// Nearest index in `tree` for every query, computed in parallel.
std::vector<KdTree::Hit> NearestAll(const KdTree& tree, std::span<const Vec3> queries) {
  std::vector<KdTree::Hit> hits(queries.size());
  ParallelFor(queries.size(), 4096, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) hits[i] = tree.Nearest(queries[i]);
  });
  return hits;
}

void RequireNonEmpty(size_t a, size_t b, const char* what) {
  if (a == 0 || b == 0) throw Error(ErrorKind::kEmptySet, std::string("empty ") + what + " set");
}

}  // namespace

ChamferResult ChamferHausdorff(std::span<const Vec3> pe, std::span<const Vec3> pg) {
  RequireNonEmpty(pe.size(), pg.size(), "point");
  KdTree te(pe), tg(pg);
  ChamferResult r;
  double sums[2] = {0, 0};
  int side = 0;
  for (auto [queries, tree] : {std::pair{pe, &tg}, std::pair{pg, &te}}) {
    for (const auto& h : NearestAll(*tree, queries)) {
      double d = std::sqrt(h.distance_squared);
      sums[side] += d;
      r.hd = std::max(r.hd, d);
    }
    sums[side] /= double(queries.size());
    ++side;
  }
  r.cd = 0.5 * (sums[0] + sums[1]);
  return r;
}

namespace {

double AngleDegrees(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0)) * 180.0 / kPi;
}

}  // namespace

double NormalAngleError(const OrientedPoints& pe, const OrientedPoints& pg) {
  RequireNonEmpty(pe.points.size(), pg.points.size(), "point");
  KdTree te(pe.points), tg(pg.points);
  double total = 0;
  for (auto [from, to, tree] : {std::tuple{&pe, &pg, &tg}, std::tuple{&pg, &pe, &te}}) {
    auto hits = NearestAll(*tree, from->points);
    double sum = 0;
    for (size_t i = 0; i < hits.size(); ++i) {
      sum += AngleDegrees(from->normals[i], to->normals[hits[i].index]);
    }
    total += sum / double(hits.size());
  }
  return 0.5 * total;
}

std::vector<std::pair<std::pair<int, int>, double>> EdgeDihedrals(std::span<const Vec3> v,
                                                                  std::span<const Triangle> tris) {
  // Directed edge -> face.
  std::map<std::pair<int, int>, int> directed;
  for (size_t f = 0; f < tris.size(); ++f) {
    for (int k = 0; k < 3; ++k) directed[{tris[f][k], tris[f][(k + 1) % 3]}] = int(f);
  }
  auto normal = [&](int f) {
    const Triangle& t = tris[f];
    Vec3 n = (v[t[1]] - v[t[0]]).cross(v[t[2]] - v[t[0]]);
    double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3::Zero();
  };
  std::vector<std::pair<std::pair<int, int>, double>> out;
  for (const auto& [e, f0] : directed) {
    if (e.first > e.second) continue;
    auto it = directed.find({e.second, e.first});
    if (it == directed.end()) continue;
    const int f1 = it->second;
    const Vec3 n0 = normal(f0), n1 = normal(f1);
    const double theta = std::atan2(n0.cross(n1).norm(), n0.dot(n1)) * 180.0 / kPi;
    int apex = -1;
    for (int w : tris[f1]) {
      if (w != e.first && w != e.second) apex = w;
    }
    const bool convex = n0.dot(v[apex] - v[e.first]) <= 0;
    out.push_back({e, convex ? 180.0 - theta : 180.0 + theta});
  }
  return out;
}

FeatureSampleSet SampleFeatures(std::span<const Vec3> v, std::span<const Triangle> tris,
                                double threshold, double spacing) {
  std::vector<std::pair<std::pair<int, int>, double>> sharp;
  for (const auto& ed : EdgeDihedrals(v, tris)) {
    if (std::abs(180.0 - ed.second) >= threshold) sharp.push_back(ed);
  }
  std::map<int, std::vector<int>> incident;
  for (size_t i = 0; i < sharp.size(); ++i) {
    incident[sharp[i].first.first].push_back(int(i));
    incident[sharp[i].first.second].push_back(int(i));
  }
  std::vector<char> used(sharp.size(), 0);
  FeatureSampleSet out;
  auto walk = [&](int start_vertex, int first_edge) {
    // Collect the chain, then place samples by arc length.
    std::vector<int> verts{start_vertex}, edges;
    int cur = start_vertex, e = first_edge;
    while (e >= 0 && !used[e]) {
      used[e] = 1;
      edges.push_back(e);
      const auto& key = sharp[e].first;
      cur = key.first == cur ? key.second : key.first;
      verts.push_back(cur);
      e = -1;
      const auto& inc = incident[cur];
      if (inc.size() == 2) {
        for (int x : inc) {
          if (!used[x]) e = x;
        }
      }
    }
    const bool closed = verts.front() == verts.back() && verts.size() > 2;
    double next = 0, travelled = 0;
    for (size_t k = 0; k < edges.size(); ++k) {
      const Vec3 a = v[verts[k]], b = v[verts[k + 1]];
      const double len = (b - a).norm();
      while (next <= travelled + len + 1e-12) {
        double t = len > 0 ? std::clamp((next - travelled) / len, 0.0, 1.0) : 0.0;
        out.points.push_back(a + t * (b - a));
        out.angles.push_back(sharp[edges[k]].second);
        next += spacing;
      }
      travelled += len;
    }
    if (!closed && next - spacing < travelled - 1e-12 * std::max(1.0, travelled)) {
      out.points.push_back(v[verts.back()]);
      out.angles.push_back(sharp[edges.back()].second);
    } else if (closed && out.points.size() > 1 &&
               (out.points.back() - v[verts.front()]).norm() < 1e-12) {
      out.points.pop_back();
      out.angles.pop_back();
    }
  };
  for (const auto& [vertex, inc] : incident) {
    if (inc.size() == 2) continue;
    for (int e : inc) {
      if (!used[e]) walk(vertex, e);
    }
  }
  for (size_t e = 0; e < sharp.size(); ++e) {
    if (!used[e]) walk(sharp[e].first.first, int(e));
  }
  return out;
}

FeatureResult FeatureMetrics(const FeatureSampleSet& fe, const FeatureSampleSet& fg) {
  if (fe.points.empty() || fg.points.empty()) {
    throw Error(ErrorKind::kNoFeatures,
                std::string("no sharp feature edges on the ") +
                    (fe.points.empty() ? "extracted" : "ground truth") + " mesh");
  }
  FeatureResult r;
  r.fcd = ChamferHausdorff(fe.points, fg.points).cd;
  KdTree te(fe.points), tg(fg.points);
  double total = 0;
  for (auto [from, to, tree] : {std::tuple{&fe, &fg, &tg}, std::tuple{&fg, &fe, &te}}) {
    auto hits = NearestAll(*tree, from->points);
    double sum = 0;
    for (size_t i = 0; i < hits.size(); ++i) {
      sum += std::abs(from->angles[i] - to->angles[hits[i].index]);
    }
    total += sum / double(hits.size());
  }
  r.fae = 0.5 * total;
  return r;
}

std::vector<Vec3> UniformProbes(size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> out(count);
  for (Vec3& p : out) p = Vec3(u(rng), u(rng), u(rng));
  return out;
}

double DistanceError(const ScalarField& field, const TriangleBvh& truth,
                     std::span<const Vec3> probes, double delta) {
  if (probes.empty()) throw Error(ErrorKind::kEmptySet, "no probes");
  std::vector<double> f(probes.size()), terms(probes.size());
  field.EvaluateParallel(probes, f);
  ParallelFor(probes.size(), 1024, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) {
      const double g = truth.SignedDistance(probes[i]);
      terms[i] = std::abs(g - f[i]) / (std::abs(g) + delta);
    }
  });
  return std::accumulate(terms.begin(), terms.end(), 0.0) / double(probes.size());
}

double OccupancyIoU(const ScalarField& field, const TriangleBvh& truth,
                    std::span<const Vec3> probes) {
  std::vector<double> f(probes.size());
  std::vector<char> in_truth(probes.size());
  field.EvaluateParallel(probes, f);
  ParallelFor(probes.size(), 1024, [&](size_t b, size_t e) {
    for (size_t i = b; i < e; ++i) in_truth[i] = truth.Inside(probes[i]);
  });
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < probes.size(); ++i) {
    const bool a = f[i] < 0, g = in_truth[i];
    inter += a && g;
    uni += a || g;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

MetricsReport Evaluate(const IsoMesh& extracted, const ScalarField& field, const BRepMesh& truth,
                       const MetricsOptions& options) {
  RequireClosed(truth.triangles);
  if (extracted.triangles.empty()) throw Error(ErrorKind::kEmptySet, "extracted mesh is empty");
  // Same stream for both sides, so identical meshes give identical samples.
  Rng rng_e(options.seed), rng_g(options.seed);
  OrientedPoints pe = SampleTriangles(extracted.vertices, extracted.triangles,
                                      options.surface_samples, rng_e);
  OrientedPoints pg = SampleTriangles(truth.vertices, truth.triangles, options.surface_samples, rng_g);
  MetricsReport r;
  ChamferResult ch = ChamferHausdorff(pe.points, pg.points);
  r.cd = ch.cd;
  r.hd = ch.hd;
  r.nae = NormalAngleError(pe, pg);
  FeatureSampleSet fe = SampleFeatures(extracted.vertices, extracted.triangles);
  FeatureSampleSet fg = SampleFeatures(truth.vertices, truth.triangles);
  if (!fe.points.empty() && !fg.points.empty()) {
    FeatureResult fr = FeatureMetrics(fe, fg);
    r.fcd = fr.fcd;
    r.fae = fr.fae;
  }
  TriangleBvh bvh(truth.vertices, truth.triangles);
  auto probes = UniformProbes(options.volume_probes, options.seed);
  r.de = DistanceError(field, bvh, probes);
  r.iou = OccupancyIoU(field, bvh, probes);
  return r;
}

std::string MetricsCsvHeader() { return "model,CD,HD,NAE,FCD,FAE,DE,IoU"; }

std::string MetricsCsvRow(const std::string& model, const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? FormatDouble(*v) : std::string("NA"); };
  return model + "," + FormatDouble(r.cd) + "," + FormatDouble(r.hd) + "," + FormatDouble(r.nae) +
         "," + opt(r.fcd) + "," + opt(r.fae) + "," + FormatDouble(r.de) + "," +
         FormatDouble(r.iou);
}

}  // namespace nhrep
