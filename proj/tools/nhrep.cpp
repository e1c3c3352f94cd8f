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


// Command-line front end: convert, extract, eval, query, boolean, offset,
// blend, inspect and shape.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "nhrep/apps.hpp"
#include "nhrep/error.hpp"
#include "nhrep/isosurface.hpp"
#include "nhrep/metrics.hpp"
#include "nhrep/patch_graph.hpp"
#include "nhrep/shapes.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {
namespace {

struct GridFlags {
  int res = 256;
  double iso = 0.0;
  bool dense = false;
};

void AddGridFlags(CLI::App* cmd, GridFlags& g, bool with_iso = true) {
  cmd->add_option("--res", g.res, "grid cells per axis (power of two)")->capture_default_str();
  if (with_iso) cmd->add_option("--iso", g.iso, "isovalue")->capture_default_str();
  cmd->add_flag("--dense", g.dense, "skip octree pruning");
}

void Log(std::string_view msg) { std::cerr << "info: " << msg << "\n"; }

ExtractOptions MakeExtractOptions(const GridFlags& g) {
  ExtractOptions o;
  o.octree = !g.dense;
  o.log = Log;
  return o;
}

void WriteMesh(const ExtractResult& r, const Similarity& t, const std::string& path) {
  SaveObj(ToModelFrame(r.mesh, t), path);
  std::cerr << "info: wrote " << r.mesh.vertices.size() << " vertices, " << r.mesh.triangles.size()
            << " triangles at resolution " << r.resolution << " to " << path << "\n";
}

std::vector<Vec3> ReadPoints(std::istream& in) {
  std::vector<Vec3> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x())) continue;
    if (!(ls >> p.y() >> p.z())) {
      throw Error(ErrorKind::kParse, "points line " + std::to_string(line_no) + ": expected x y z");
    }
    pts.push_back(p);
  }
  return pts;
}

int Run(int argc, char** argv) {
  CLI::App app{"Neural halfspace representation tools"};
  app.require_subcommand(1);

  // convert
  std::string mesh_path, out_path, config_path, log_path;
  int iters = -1;
  std::uint64_t seed = 0;
  bool seed_set = false, no_correction = false, no_group = false;
  size_t samples = 50000;
  auto* convert = app.add_subcommand("convert", "train a checkpoint from a B-Rep mesh");
  convert->add_option("mesh", mesh_path, "input .brepmesh")->required()->check(CLI::ExistingFile);
  convert->add_option("-o,--output", out_path, "output checkpoint")->required();
  convert->add_option("--config", config_path, "key=value training config")->check(CLI::ExistingFile);
  convert->add_option("--iters", iters, "training iterations");
  convert->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_set = true; });
  convert->add_flag("--no-correction", no_correction, "drop the correction loss (noisy input)");
  convert->add_flag("--no-group", no_group, "one network output per patch");
  convert->add_option("--samples", samples, "surface samples")->capture_default_str();
  SampleNoise noise;
  convert->add_option("--noise-position", noise.position, "sample offset along the normal");
  convert->add_option("--noise-normal-deg", noise.normal_degrees, "normal tilt in degrees");
  convert->add_option("--log", log_path, "training log CSV (default: <output>.log.csv)");

  // extract
  std::string ckpt_path;
  GridFlags grid;
  auto* extract = app.add_subcommand("extract", "extract the zero level set as OBJ");
  extract->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  extract->add_option("-o,--output", out_path)->required();
  AddGridFlags(extract, grid);

  // eval
  std::string truth_path, extracted_path, model_name;
  auto* eval = app.add_subcommand("eval", "metrics report against a ground truth mesh");
  eval->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  eval->add_option("truth", truth_path, "ground truth .brepmesh")->required()->check(CLI::ExistingFile);
  eval->add_option("--mesh", extracted_path, "extracted OBJ (default: extract now)")
      ->check(CLI::ExistingFile);
  eval->add_option("--name", model_name, "model column of the report");
  eval->add_option("--seed", seed, "sampling seed");
  AddGridFlags(eval, grid, false);

  // query
  std::string points_path;
  auto* query = app.add_subcommand("query", "evaluate h at points (x y z per line)");
  query->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  query->add_option("--points", points_path, "points file (default: stdin)")->check(CLI::ExistingFile);

  // boolean
  std::string ckpt_b, op_name = "union";
  auto* boolean = app.add_subcommand("boolean", "combine two checkpoints and extract");
  boolean->add_option("a", ckpt_path)->required()->check(CLI::ExistingFile);
  boolean->add_option("b", ckpt_b)->required()->check(CLI::ExistingFile);
  boolean->add_option("--op", op_name, "union | intersection | a_minus_b")->capture_default_str();
  boolean->add_option("-o,--output", out_path)->required();
  AddGridFlags(boolean, grid, false);

  // offset
  auto* offset = app.add_subcommand("offset", "extract the level set h = iso");
  offset->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  offset->add_option("-o,--output", out_path)->required();
  AddGridFlags(offset, grid);

  // blend
  double rho = 0.05;
  auto* blend = app.add_subcommand("blend", "extract with every crease blended");
  blend->add_option("checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  blend->add_option("--rho", rho, "blend radius")->capture_default_str();
  blend->add_option("-o,--output", out_path)->required();
  AddGridFlags(blend, grid);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print the patch graph and tree expression");
  inspect->add_option("mesh", mesh_path)->required()->check(CLI::ExistingFile);

  // shape
  std::string shape_name;
  auto* shape = app.add_subcommand("shape", "write a built-in fixture mesh");
  shape->add_option("name", shape_name)->required()->check(CLI::IsMember(ShapeNames()));
  shape->add_option("-o,--output", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  GridSpec spec;
  spec.resolution = grid.res;
  spec.isovalue = grid.iso;

  if (*convert) {
    ConvertOptions opt;
    if (!config_path.empty()) opt.train = ParseTrainConfig(ReadTextFile(config_path));
    if (iters >= 0) {
      opt.train.iterations = iters;
      // Keep the correction phase inside a shortened schedule.
      if (opt.train.correction_start > iters) opt.train.correction_start = iters * 2 / 3;
    }
    if (seed_set) opt.train.seed = seed;
    if (no_correction) opt.train.correction = false;
    opt.group = !no_group;
    opt.samples = samples;
    opt.noise = noise;
    BRepMesh mesh = LoadBRep(mesh_path);
    if (log_path.empty()) log_path = out_path + ".log.csv";
    std::ofstream log(log_path);
    if (!log) throw Error(ErrorKind::kIo, "cannot write " + log_path);
    ConvertResult r = Convert(mesh, opt, &log);
    SaveCheckpoint(r.training.checkpoint, out_path);
    std::cerr << "info: tree " << r.training.checkpoint.tree << "\n"
              << "info: " << r.training.completed << " iterations, log " << log_path << "\n";
    if (r.training.failure) {
      std::cerr << "info: saved last good checkpoint to " << out_path << "\n";
      throw *r.training.failure;
    }
    return 0;
  }
  if (*extract || *offset) {
    NeuralScalarField field(LoadCheckpoint(ckpt_path));
    WriteMesh(Extract(field, spec, MakeExtractOptions(grid)), field.checkpoint().transform, out_path);
    return 0;
  }
  if (*blend) {
    FieldCheckpoint c = LoadCheckpoint(ckpt_path);
    Similarity t = c.transform;
    BlendedField field(std::move(c), BlendConfig{rho});
    WriteMesh(Extract(field, spec, MakeExtractOptions(grid)), t, out_path);
    return 0;
  }
  if (*eval) {
    NeuralScalarField field(LoadCheckpoint(ckpt_path));
    const Similarity& t = field.checkpoint().transform;
    BRepMesh truth = Transformed(LoadBRep(truth_path), t);
    IsoMesh mesh;
    if (!extracted_path.empty()) {
      mesh = LoadObj(extracted_path);
      for (Vec3& v : mesh.vertices) v = t.Apply(v);
    } else {
      mesh = Extract(field, spec, MakeExtractOptions(grid)).mesh;
    }
    MetricsOptions mo;
    mo.seed = seed;
    MetricsReport report = Evaluate(mesh, field, truth, mo);
    std::cout << MetricsCsvHeader() << "\n"
              << MetricsCsvRow(model_name.empty() ? ckpt_path : model_name, report) << "\n";
    return 0;
  }
  if (*query) {
    NeuralScalarField field(LoadCheckpoint(ckpt_path), /*model_units=*/true);
    std::vector<Vec3> pts;
    if (points_path.empty()) {
      pts = ReadPoints(std::cin);
    } else {
      std::ifstream in(points_path);
      pts = ReadPoints(in);
    }
    QueryResult r = Query(field, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
      std::cout << FormatDouble(pts[i].x()) << ' ' << FormatDouble(pts[i].y()) << ' '
                << FormatDouble(pts[i].z()) << ' ' << FormatDouble(r.values[i]) << ' '
                << (r.inside[i] ? "inside" : "outside") << "\n";
    }
    return 0;
  }
  if (*boolean) {
    FieldCheckpoint a = LoadCheckpoint(ckpt_path), b = LoadCheckpoint(ckpt_b);
    if (!SameFrame(a, b)) {
      std::cerr << "warning: FrameMismatch: checkpoints use different normalizations; "
                   "combining in model units\n";
    }
    // Model-unit evaluation over a box covering both normalized cubes.
    Box3 box;
    for (const FieldCheckpoint* c : {&a, &b}) {
      box.Extend(c->transform.ApplyInverse(Vec3::Constant(-1)));
      box.Extend(c->transform.ApplyInverse(Vec3::Constant(1)));
    }
    const double half = 0.5 * box.Size().maxCoeff();
    spec.bounds = Box3{box.Center() - Vec3::Constant(half), box.Center() + Vec3::Constant(half)};
    BooleanField field(std::make_shared<NeuralScalarField>(std::move(a), true),
                       std::make_shared<NeuralScalarField>(std::move(b), true),
                       ParseBooleanOp(op_name));
    ExtractResult r = Extract(field, spec, MakeExtractOptions(grid));
    WriteMesh(r, Similarity{}, out_path);
    return 0;
  }
  if (*inspect) {
    BRepMesh mesh = LoadBRep(mesh_path);
    auto [normalized, t] = Normalize(mesh);
    auto [graph, merged] = MergeSmoothPatches(BuildPatchGraph(normalized), normalized);
    TreeConstruction tc = ConstructTree(graph, merged);
    std::cout << FormatPatchGraph(graph);
    std::cout << "tree " << SerializeTree(tc.tree) << "\n";
    std::cout << "decompositions " << tc.decompositions << "\n";
    AssignSlots(tc.tree, GroupPatches(tc.graph));
    std::cout << "grouped " << SerializeTree(tc.tree) << "\n";
    return 0;
  }
  if (*shape) {
    SaveBRep(MakeShape(shape_name), out_path);
    return 0;
  }
  return 0;
}

}  // namespace
}  // namespace nhrep

int main(int argc, char** argv) {
  try {
    return nhrep::Run(argc, argv);
  } catch (const nhrep::Error& e) {
    std::cerr << "error: " << e.kind_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 3;
  }
}
