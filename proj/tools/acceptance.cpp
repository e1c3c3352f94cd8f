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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "nhrep/apps.hpp"
#include "nhrep/boolean_tree.hpp"
#include "nhrep/error.hpp"
#include "nhrep/isosurface.hpp"
#include "nhrep/metrics.hpp"
#include "nhrep/patch_graph.hpp"
#include "nhrep/shapes.hpp"
#include "nhrep/text_io.hpp"
#include "nhrep/trainer.hpp"

namespace nhrep {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path workdir;
  fs::path config_path;
  fs::path cli;
  std::uint64_t seed = 7;
  int resolution = 256;
  std::map<std::string, FieldCheckpoint> trained;
};

// ---- analytic occupancy in model units -------------------------------------

using Occupancy = std::function<bool(const Vec3&)>;

Occupancy Oracle(const std::string& shape) {
  if (shape == "cube") return [](const Vec3& p) { return p.cwiseAbs().maxCoeff() < 0.5; };
  if (shape == "hole_cube") {
    return [](const Vec3& p) {
      return p.cwiseAbs().maxCoeff() < 0.5 && p.x() * p.x() + p.y() * p.y() > 0.25 * 0.25;
    };
  }
  if (shape == "lbracket") {
    return [](const Vec3& p) {
      const bool slab = p.z() > 0 && p.z() < 1 && p.x() > 0 && p.x() < 2 && p.y() > 0 && p.y() < 2;
      return slab && !(p.x() > 1 && p.y() > 1);
    };
  }
  throw Error(ErrorKind::kPrecondition, "no oracle for " + shape);
}

std::vector<Vec3> ProbesInBox(const Box3& box, size_t count, std::uint64_t seed) {
  std::vector<Vec3> p = UniformProbes(count, seed);
  const Vec3 c = box.Center(), h = 0.5 * box.Size();
  for (Vec3& x : p) x = c + h.cwiseProduct(x);
  return p;
}

double SignAgreement(const ScalarField& field, const Occupancy& inside,
                     std::span<const Vec3> probes) {
  std::vector<double> v(probes.size());
  field.EvaluateParallel(probes, v);
  size_t agree = 0;
  for (size_t i = 0; i < probes.size(); ++i) agree += (v[i] < 0) == inside(probes[i]);
  return double(agree) / double(probes.size());
}

// ---- training ------------------------------------------------------------

TrainConfig DeskConfig(const Context& ctx) {
  TrainConfig c = ParseTrainConfig(ReadTextFile(ctx.config_path));
  c.seed = ctx.seed;
  return c;
}

const FieldCheckpoint& TrainedShape(Context& ctx, const std::string& shape) {
  if (auto it = ctx.trained.find(shape); it != ctx.trained.end()) return it->second;
  ConvertOptions opt;
  opt.train = DeskConfig(ctx);
  opt.samples = 50000;
  std::ofstream log(ctx.workdir / (shape + ".log.csv"));
  const auto t0 = Clock::now();
  ConvertResult r = Convert(MakeShape(shape), opt, &log);
  if (r.training.failure) throw *r.training.failure;
  SaveCheckpoint(r.training.checkpoint, ctx.workdir / (shape + ".ckpt"));
  std::cout << "  trained " << shape << " tree " << r.training.checkpoint.tree << " in "
            << Fmt(Seconds(t0), 3) << " s" << std::endl;
  return ctx.trained.emplace(shape, std::move(r.training.checkpoint)).first->second;
}

// ---- criteria ------------------------------------------------------------

Outcome Criterion1(Context&) {
  const auto t0 = Clock::now();
  PatchGraph octagon =
      InducedSubgraph(BuildPatchGraph(MakeOctagonExample()), {0, 1, 2, 3, 4, 5, 6, 7});
  const std::string a = SerializeTree(ConstructTree(octagon).tree);
  PatchGraph concave;
  concave.vertex_count = 4;
  for (int i = 0; i < 4; ++i) concave.AddEdge(i, (i + 1) % 4, CurveType::kConcave);
  const std::string b = SerializeTree(ConstructTree(concave).tree);
  const double secs = Seconds(t0);
  return {a == "max(f0,f1,f2,f3,min(f4,f7,max(f5,f6)))" && b == "min(f0,f1,f2,f3)" && secs < 1.0,
          "octagon " + a + ", concave " + b + ", " + Fmt(secs, 3) + " s"};
}

Outcome Criterion2(Context& ctx) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(ctx.seed);
  int good = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> nv(1, 30);
    PatchGraph g;
    g.vertex_count = nv(rng);
    std::uniform_int_distribution<int> pick(0, g.vertex_count - 1);
    std::uniform_int_distribution<int> ne(0, 3 * g.vertex_count);
    std::bernoulli_distribution convex(0.5);
    const int edges = ne(rng);
    for (int i = 0; i < edges; ++i) {
      const int a = pick(rng), b = pick(rng);
      if (a != b) g.AddEdge(a, b, convex(rng) ? CurveType::kConvex : CurveType::kConcave);
    }
    TreeConstruction tc = ConstructTree(g, {.seed = std::uint64_t(trial)});
    std::vector<int> seen(tc.graph.vertex_count, 0);
    for (int leaf : tc.tree.Leaves()) ++seen[tc.tree.nodes[leaf].patch];
    const bool covered = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    good += OpsAlternate(tc.tree) && covered;
  }
  const double secs = Seconds(t0);
  return {good == 200 && secs < 30.0,
          std::to_string(good) + "/200 graphs alternate and cover, " + Fmt(secs, 3) + " s"};
}

Outcome Criterion3(Context& ctx) {
  const auto t0 = Clock::now();
  const BooleanTree tree = ParseTree("max(f0,min(f1,f2))");
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<int> patch(0, 2);
  LossWeights w;
  w.correction_start = 0;
  double worst = 0;
  size_t violating = 0;
  for (int round = 0; round < 10; ++round) {
    NeuralField net({3, 16, 16, 16, 3});
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) net.parameters()[i] = normal(rng);
    TrainingBatch b;
    const int n = 64;
    b.surface.resize(3, n);
    b.normals.resize(3, n);
    b.local.resize(3, n);
    b.global.resize(3, n);
    b.patch.resize(n);
    for (int j = 0; j < n; ++j) {
      b.surface.col(j) = Vec3(uni(rng), uni(rng), uni(rng));
      b.normals.col(j) = Vec3(uni(rng), uni(rng), uni(rng)).normalized();
      b.local.col(j) = Vec3(uni(rng), uni(rng), uni(rng));
      b.global.col(j) = Vec3(uni(rng), uni(rng), uni(rng));
      b.patch[j] = patch(rng);
    }
    Eigen::VectorXd g;
    violating += TotalLoss(net, tree, b, w, 0, &g).violating;
    Eigen::VectorXd fd(g.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      NeuralField p = net, m = net;
      p.parameters()[i] += h;
      m.parameters()[i] -= h;
      fd[i] = (TotalLoss(p, tree, b, w, 0).total - TotalLoss(m, tree, b, w, 0).total) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / fd.norm());
  }
  const double secs = Seconds(t0);
  return {worst < 1e-4 && secs < 120.0,
          "max relative error " + Fmt(worst, 3) + " over 10 batches (" +
              std::to_string(violating) + " correction points), " + Fmt(secs, 3) + " s"};
}

Outcome Criterion4(Context& ctx) {
  bool pass = true;
  std::string detail;
  for (const std::string shape : {"cube", "hole_cube", "lbracket"}) {
    const auto t0 = Clock::now();
    const FieldCheckpoint& ckpt = TrainedShape(ctx, shape);
    NeuralScalarField model(ckpt, /*model_units=*/true);
    NeuralScalarField field(ckpt);
    const Similarity& t = ckpt.transform;

    std::vector<Vec3> probes = UniformProbes(size_t(1) << 17, ctx.seed + 1);
    for (Vec3& p : probes) p = t.ApplyInverse(p);
    const double sign = SignAgreement(model, Oracle(shape), probes);

    GridSpec spec;
    spec.resolution = ctx.resolution;
    ExtractResult ex = Extract(field, spec);
    SaveObj(ToModelFrame(ex.mesh, t), ctx.workdir / (shape + ".obj"));
    MetricsOptions mo;
    mo.seed = ctx.seed;
    MetricsReport m = Evaluate(ex.mesh, field, Transformed(MakeShape(shape), t), mo);

    // Eikonal residual on the training distribution of global samples.
    std::mt19937_64 rng(ctx.seed + 2);
    std::normal_distribution<double> wide(0.0, DeskConfig(ctx).global_stdev);
    std::vector<Vec3> global(1 << 14);
    for (Vec3& p : global) {
      for (int k = 0; k < 3; ++k) p[k] = std::clamp(wide(rng), -1.0, 1.0);
    }
    std::vector<double> v(global.size());
    std::vector<Vec3> grad(global.size());
    field.EvaluateParallel(global, v, grad);
    double eik = 0;
    for (const Vec3& gr : grad) eik += (gr.norm() - 1) * (gr.norm() - 1);
    eik /= double(global.size());

    const double secs = Seconds(t0);
    const bool ok = sign >= 0.99 && m.nae < 10.0 && m.fae && *m.fae < 10.0 && eik < 0.05 &&
                    secs < 1200.0;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + shape + (ok ? " ok" : " FAILED") + " sign " +
              Fmt(100 * sign, 5) + "% NAE " + Fmt(m.nae) + " FAE " +
              (m.fae ? Fmt(*m.fae) : std::string("NA")) + " eik " + Fmt(eik, 3) + " CD " +
              Fmt(m.cd, 3) + " " + Fmt(secs, 4) + " s";
    std::ofstream(ctx.workdir / (shape + ".metrics.csv"))
        << MetricsCsvHeader() << "\n" << MetricsCsvRow(shape, m) << "\n";
  }
  return {pass, detail};
}

Outcome Criterion5(Context& ctx) {
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> a(1000), b(1000);
  for (Vec3& p : a) p = Vec3(u(rng), u(rng), u(rng));
  for (Vec3& p : b) p = Vec3(u(rng), u(rng), u(rng)) * 0.8;
  auto one_sided = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to,
                      double& mean, double& mx) {
    mean = 0, mx = 0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, (p - q).norm());
      mean += best;
      mx = std::max(mx, best);
    }
    mean /= double(from.size());
  };
  double m1, x1, m2, x2;
  one_sided(a, b, m1, x1);
  one_sided(b, a, m2, x2);
  ChamferResult c = ChamferHausdorff(a, b);
  const double cd_err = std::abs(c.cd - 0.5 * (m1 + m2)), hd_err = std::abs(c.hd - std::max(x1, x2));

  FunctionField cube([](const Vec3& p) { return p.cwiseAbs().maxCoeff() - 0.5; });
  BRepMesh shifted = MakeBox(Vec3(0, -0.5, -0.5), Vec3(1, 0.5, 0.5));
  TriangleBvh shifted_bvh(shifted.vertices, shifted.triangles);
  const auto probes = UniformProbes(size_t(1) << 17, ctx.seed);
  const double iou = OccupancyIoU(cube, shifted_bvh, probes);

  BRepMesh unit = MakeShape("cube");
  TriangleBvh unit_bvh(unit.vertices, unit.triangles);
  FunctionField exact([&](const Vec3& p) { return unit_bvh.SignedDistance(p); });
  const double de = DistanceError(exact, unit_bvh, probes);

  return {cd_err <= 1e-12 && hd_err <= 1e-12 && std::abs(iou - 1.0 / 3.0) <= 0.01 && de == 0.0,
          "CD/HD vs brute force " + Fmt(cd_err, 3) + "/" + Fmt(hd_err, 3) + ", IoU " +
              Fmt(iou, 5) + ", DE of exact SDF " + Fmt(de, 3)};
}

Outcome Criterion6(Context& ctx) {
  FunctionField cube([](const Vec3& p) { return p.cwiseAbs().maxCoeff() - 0.5; },
                     [](const Vec3& p) {
                       Vec3 a = p.cwiseAbs();
                       int k = 0;
                       for (int i = 1; i < 3; ++i)
                         if (a[i] > a[k]) k = i;
                       Vec3 g = Vec3::Zero();
                       g[k] = p[k] < 0 ? -1.0 : 1.0;
                       return g;
                     });
  GridSpec spec;
  spec.resolution = ctx.resolution;
  ExtractOptions dense_opt;
  dense_opt.octree = false;
  ExtractResult dense = Extract(cube, spec, dense_opt);
  ExtractResult tree = Extract(cube, spec);

  double worst_angle = 0;
  int sharp = 0;
  for (const auto& [edge, angle] : EdgeDihedrals(tree.mesh.vertices, tree.mesh.triangles)) {
    if (std::abs(180.0 - angle) < kSharpAngleDegrees) continue;
    ++sharp;
    worst_angle = std::max(worst_angle, std::abs(angle - 90.0));
  }
  double worst_dev = 0;
  for (const Vec3& v : tree.mesh.vertices) {
    worst_dev = std::max(worst_dev, std::abs(v.cwiseAbs().maxCoeff() - 0.5));
  }
  const double half_cell = 0.5 * spec.CellSize().x();
  double octree_gap = 0;
  bool same_topology = dense.mesh.vertices.size() == tree.mesh.vertices.size() &&
                       dense.mesh.triangles == tree.mesh.triangles;
  if (same_topology) {
    for (size_t i = 0; i < dense.mesh.vertices.size(); ++i) {
      octree_gap = std::max(octree_gap, (dense.mesh.vertices[i] - tree.mesh.vertices[i]).norm());
    }
  }
  return {sharp > 0 && worst_angle <= 2.0 && worst_dev < half_cell && same_topology &&
              octree_gap <= 1e-9,
          std::to_string(sharp) + " sharp edges, worst |angle-90| " + Fmt(worst_angle, 3) +
              " deg, worst deviation " + Fmt(worst_dev / half_cell, 3) +
              " half cells, octree vs dense " + (same_topology ? Fmt(octree_gap, 3) : "topology differs") +
              " (" + std::to_string(tree.evaluated_nodes) + " vs " +
              std::to_string(dense.evaluated_nodes) + " nodes)"};
}

Outcome Criterion7(Context& ctx) {
  size_t algebra_bad = 0, algebra_checked = 0;
  for (double rho = 0.01; rho <= 0.2; rho += 0.01) {
    ++algebra_checked;
    if (std::abs(Blend(0, 0, 1, rho) - rho / 2) > 1e-15) ++algebra_bad;
    for (double g = -rho; g >= -2.0; g -= 0.0137) {
      ++algebra_checked;
      if (Blend(0, g, 1, rho) != 0.0) ++algebra_bad;
    }
  }

  const FieldCheckpoint& ckpt = TrainedShape(ctx, "cube");
  const BlendConfig cfg;
  NeuralScalarField plain(ckpt);
  BlendedField blended(ckpt, cfg);
  const auto probes = UniformProbes(size_t(1) << 17, ctx.seed + 3);
  std::vector<double> h(probes.size()), b(probes.size());
  plain.EvaluateParallel(probes, h);
  blended.EvaluateParallel(probes, b);
  std::vector<double> near = blended.MinOperands(probes);
  size_t disagree = 0, outside = 0;
  for (size_t i = 0; i < probes.size(); ++i) {
    if ((h[i] < 0) == (b[i] < 0)) continue;
    ++disagree;
    if (!(near[i] < cfg.rho)) ++outside;
  }
  return {algebra_bad == 0 && outside == 0,
          std::to_string(algebra_checked - algebra_bad) + "/" + std::to_string(algebra_checked) +
              " algebra checks, " + std::to_string(disagree) +
              " sign changes on the cube checkpoint, " + std::to_string(outside) +
              " outside the rho-neighbourhood"};
}

Outcome Criterion8(Context& ctx) {
  auto box_sdf = [](Vec3 lo, Vec3 hi) {
    return std::make_shared<FunctionField>([lo, hi](const Vec3& p) {
      const Vec3 c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      const Vec3 q = (p - c).cwiseAbs() - h;
      return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
    });
  };
  auto sphere_sdf = [](Vec3 c, double r) {
    return std::make_shared<FunctionField>([c, r](const Vec3& p) { return (p - c).norm() - r; });
  };
  const BooleanOp ops[3] = {BooleanOp::kUnion, BooleanOp::kIntersection, BooleanOp::kDifference};
  const char* names[3] = {"union", "intersection", "a_minus_b"};
  auto combine = [](BooleanOp op, bool a, bool b) {
    return op == BooleanOp::kUnion ? (a || b) : op == BooleanOp::kIntersection ? (a && b) : (a && !b);
  };

  auto a = box_sdf(Vec3(-0.6, -0.5, -0.4), Vec3(0.3, 0.5, 0.4));
  auto s = sphere_sdf(Vec3(0.25, 0.1, 0), 0.45);
  const auto probes = UniformProbes(100000, ctx.seed + 4);
  size_t analytic_bad = 0;
  for (int k = 0; k < 3; ++k) {
    BooleanField f(a, s, ops[k]);
    std::vector<double> v(probes.size());
    f.EvaluateParallel(probes, v);
    for (size_t i = 0; i < probes.size(); ++i) {
      const bool want = combine(ops[k], a->Value(probes[i]) < 0, s->Value(probes[i]) < 0);
      analytic_bad += (v[i] < 0) != want;
    }
  }

  // Trained pair, combined in model units over a box around both solids.
  const FieldCheckpoint& ca = TrainedShape(ctx, "cube");
  const FieldCheckpoint& cb = TrainedShape(ctx, "lbracket");
  auto fa = std::make_shared<NeuralScalarField>(ca, true);
  auto fb = std::make_shared<NeuralScalarField>(cb, true);
  const Occupancy oa = Oracle("cube"), ob = Oracle("lbracket");
  const auto model_probes = ProbesInBox(Box3{Vec3(-0.7, -0.7, -0.7), Vec3(2.2, 2.2, 1.2)},
                                        100000, ctx.seed + 5);
  bool trained_ok = true;
  std::string detail = std::to_string(3 * probes.size() - analytic_bad) + "/" +
                       std::to_string(3 * probes.size()) + " analytic probes exact; trained";
  for (int k = 0; k < 3; ++k) {
    BooleanField f(fa, fb, ops[k]);
    const double agree = SignAgreement(
        f, [&](const Vec3& p) { return combine(ops[k], oa(p), ob(p)); }, model_probes);
    trained_ok = trained_ok && agree >= 0.99;
    detail += std::string(" ") + names[k] + " " + Fmt(100 * agree, 5) + "%";
  }
  return {analytic_bad == 0 && trained_ok, detail};
}

Outcome Criterion9(Context& ctx) {
  const auto t0 = Clock::now();
  ConvertOptions opt;
  opt.train = DeskConfig(ctx);
  opt.train.correction = false;
  opt.samples = 50000;
  opt.noise = SampleNoise{0.018, 3.0};
  std::ofstream log(ctx.workdir / "noisy_cube.log.csv");
  ConvertResult r = Convert(MakeShape("cube"), opt, &log);
  if (r.training.failure) throw *r.training.failure;
  SaveCheckpoint(r.training.checkpoint, ctx.workdir / "noisy_cube.ckpt");
  NeuralScalarField model(r.training.checkpoint, true);
  std::vector<Vec3> probes = UniformProbes(size_t(1) << 17, ctx.seed + 1);
  for (Vec3& p : probes) p = r.transform.ApplyInverse(p);
  const double sign = SignAgreement(model, Oracle("cube"), probes);
  return {sign >= 0.97, "noisy cube sign agreement " + Fmt(100 * sign, 5) + "%, " +
                            Fmt(Seconds(t0), 4) + " s"};
}

Outcome Criterion10(Context& ctx) {
  if (ctx.cli.empty()) return {false, "no --cli binary given"};
  const fs::path mesh = ctx.workdir / "repro_cube.brepmesh";
  SaveBRep(MakeShape("cube"), mesh);
  auto run = [&](const std::string& tag) {
    const fs::path out = ctx.workdir / ("repro_" + tag + ".ckpt");
    const std::string cmd = "NHREP_THREADS=1 '" + ctx.cli.string() + "' convert '" +
                            mesh.string() + "' -o '" + out.string() + "' --config '" +
                            ctx.config_path.string() + "' --iters 300 --seed " +
                            std::to_string(ctx.seed) + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return std::pair{rc, rc == 0 ? ReadTextFile(out) : std::string()};
  };
  auto [rc1, a] = run("a");
  auto [rc2, b] = run("b");
  return {rc1 == 0 && rc2 == 0 && !a.empty() && a == b,
          "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2) + ", " +
              std::to_string(a.size()) + " bytes, " + (a == b ? "bit-identical" : "different")};
}

}  // namespace
}  // namespace nhrep

int main(int argc, char** argv) {
  using namespace nhrep;
  CLI::App app{"NH-Rep acceptance checks"};
  Context ctx;
  std::vector<int> only;
  ctx.workdir = "acceptance_out";
  ctx.config_path = NHREP_SOURCE_DIR "/configs/desk.cfg";
  app.add_option("--criteria", only, "run only these criteria (1-10)")->delimiter(',');
  app.add_option("--workdir", ctx.workdir, "checkpoints, meshes and logs")->capture_default_str();
  app.add_option("--config", ctx.config_path, "training config")->capture_default_str();
  app.add_option("--cli", ctx.cli, "nhrep binary for the reproducibility check");
  app.add_option("--seed", ctx.seed)->capture_default_str();
  app.add_option("--res", ctx.resolution, "extraction resolution")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(ctx.workdir);

  const std::vector<std::function<Outcome(Context&)>> criteria = {
      Criterion1, Criterion2, Criterion3, Criterion4, Criterion5,
      Criterion6, Criterion7, Criterion8, Criterion9, Criterion10};
  std::ofstream report(ctx.workdir / "report.txt");
  int failed = 0;
  for (int k = 1; k <= 10; ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k - 1](ctx);
    } catch (const Error& e) {
      o = {false, std::string(e.kind_name()) + ": " + e.what()};
    }
    failed += !o.pass;
    std::ostringstream line;
    line << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
         << Fmt(Seconds(t0), 4) << " s]";
    std::cout << line.str() << std::endl;
    report << line.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
