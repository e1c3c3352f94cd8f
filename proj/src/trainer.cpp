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

#include "nhrep/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

namespace {

double Sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void RequirePositive(bool ok, const char* name) {
  if (!ok) throw Error(ErrorKind::kPrecondition, std::string(name) + " must be positive");
}

}  // namespace

void TrainConfig::Validate() const {
  if (iterations < 0) throw Error(ErrorKind::kPrecondition, "iterations must be >= 0");
  RequirePositive(lr > 0, "lr");
  RequirePositive(lr_halving_period > 0, "lr_halving_period");
  RequirePositive(batch_surface > 0, "batch_surface");
  RequirePositive(local_samples > 0, "local_samples");
  RequirePositive(global_samples > 0, "global_samples");
  RequirePositive(global_stdev > 0, "global_stdev");
  RequirePositive(alpha > 0, "alpha");
  RequirePositive(beta > 0, "beta");
  RequirePositive(correction_tolerance > 0, "correction_tolerance");
  RequirePositive(hidden_width > 0, "hidden_width");
  RequirePositive(hidden_layers > 0, "hidden_layers");
  RequirePositive(softplus_beta > 0, "softplus_beta");
  RequirePositive(init_radius > 0, "init_radius");
  RequirePositive(log_every > 0, "log_every");
  if (correction_start < 0) throw Error(ErrorKind::kPrecondition, "correction_start must be >= 0");
  if (correction && iterations > 0 && correction_start > iterations) {
    throw Error(ErrorKind::kPrecondition,
                "correction_start " + std::to_string(correction_start) +
                    " exceeds iterations " + std::to_string(iterations));
  }
}

LossWeights TrainConfig::Weights() const {
  LossWeights w;
  w.alpha = alpha;
  w.beta = beta;
  w.correction_tolerance = correction_tolerance;
  w.correction_start = correction_start;
  w.correction = correction;
  return w;
}

std::vector<int> TrainConfig::LayerSizes(int outputs) const {
  std::vector<int> sizes{3};
  for (int i = 0; i < hidden_layers; ++i) sizes.push_back(hidden_width);
  sizes.push_back(outputs);
  return sizes;
}

TrainConfig ParseTrainConfig(std::string_view text, TrainConfig c) {
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::kParse, "config line " + std::to_string(line_no) + ": " + msg);
    };
    if (eq == std::string_view::npos) fail("expected key=value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    auto as_double = [&]() {
      double v = 0;
      auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size()) fail("bad number '" + value + "'");
      return v;
    };
    auto as_int = [&]() {
      long long v = 0;
      auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size() || v < INT32_MIN ||
          v > INT32_MAX) {
        fail("bad integer '" + value + "'");
      }
      return static_cast<int>(v);
    };
    if (key == "iterations") c.iterations = as_int();
    else if (key == "lr") c.lr = as_double();
    else if (key == "lr_halving_period") c.lr_halving_period = as_int();
    else if (key == "batch_surface") c.batch_surface = as_int();
    else if (key == "local_samples") c.local_samples = as_int();
    else if (key == "global_samples") c.global_samples = as_int();
    else if (key == "global_stdev") c.global_stdev = as_double();
    else if (key == "correction_start") c.correction_start = as_int();
    else if (key == "seed") {
      std::uint64_t v = 0;
      auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size()) fail("bad seed");
      c.seed = v;
    }
    else if (key == "alpha") c.alpha = as_double();
    else if (key == "beta") c.beta = as_double();
    else if (key == "correction_tolerance") c.correction_tolerance = as_double();
    else if (key == "correction") {
      int v = as_int();
      if (v != 0 && v != 1) fail("correction must be 0 or 1");
      c.correction = v == 1;
    }
    else if (key == "hidden_width") c.hidden_width = as_int();
    else if (key == "hidden_layers") c.hidden_layers = as_int();
    else if (key == "softplus_beta") c.softplus_beta = as_double();
    else if (key == "init_radius") c.init_radius = as_double();
    else if (key == "log_every") c.log_every = as_int();
    else fail("unknown key '" + key + "'");
  }
  return c;
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  auto d = [](double v) { return FormatDouble(v); };
  out << "iterations=" << c.iterations << "\n"
      << "lr=" << d(c.lr) << "\n"
      << "lr_halving_period=" << c.lr_halving_period << "\n"
      << "batch_surface=" << c.batch_surface << "\n"
      << "local_samples=" << c.local_samples << "\n"
      << "global_samples=" << c.global_samples << "\n"
      << "global_stdev=" << d(c.global_stdev) << "\n"
      << "correction_start=" << c.correction_start << "\n"
      << "seed=" << c.seed << "\n"
      << "alpha=" << d(c.alpha) << "\n"
      << "beta=" << d(c.beta) << "\n"
      << "correction_tolerance=" << d(c.correction_tolerance) << "\n"
      << "correction=" << (c.correction ? 1 : 0) << "\n"
      << "hidden_width=" << c.hidden_width << "\n"
      << "hidden_layers=" << c.hidden_layers << "\n"
      << "softplus_beta=" << d(c.softplus_beta) << "\n"
      << "init_radius=" << d(c.init_radius) << "\n"
      << "log_every=" << c.log_every << "\n";
  return out.str();
}

TrainingBatch MakeBatch(const SampleSet& samples, const TrainConfig& config, Rng& rng) {
  const int patches = samples.patch_count;
  std::vector<std::vector<int>> by_patch(patches);
  for (size_t i = 0; i < samples.size(); ++i) by_patch[samples.patch_of[i]].push_back(int(i));
  for (int p = 0; p < patches; ++p) {
    if (by_patch[p].empty()) {
      throw Error(ErrorKind::kPrecondition, "patch " + std::to_string(p) + " has no samples");
    }
  }

  TrainingBatch b;
  const int n = config.batch_surface;
  b.surface.resize(3, n);
  b.normals.resize(3, n);
  b.patch.resize(n);
  std::vector<double> sigma(n);
  int col = 0;
  for (int p = 0; p < patches; ++p) {
    int quota = n / patches + (p < n % patches ? 1 : 0);
    std::uniform_int_distribution<size_t> pick(0, by_patch[p].size() - 1);
    for (int q = 0; q < quota; ++q, ++col) {
      int i = by_patch[p][pick(rng)];
      b.surface.col(col) = samples.points[i];
      b.normals.col(col) = samples.normals[i];
      b.patch[col] = p;
      sigma[col] = samples.sigma[i];
    }
  }

  std::normal_distribution<double> unit(0.0, 1.0);
  b.local.resize(3, config.local_samples);
  for (int j = 0; j < config.local_samples; ++j) {
    int src = j % n;
    Vec3 dir(unit(rng), unit(rng), unit(rng));
    double len = dir.norm();
    dir = len > 0 ? Vec3(dir / len) : Vec3::UnitX();
    b.local.col(j) = b.surface.col(src) + sigma[src] * unit(rng) * dir;
  }

  std::normal_distribution<double> wide(0.0, config.global_stdev);
  b.global.resize(3, config.global_samples);
  for (int j = 0; j < config.global_samples; ++j) {
    for (int k = 0; k < 3; ++k) b.global(k, j) = std::clamp(wide(rng), -1.0, 1.0);
  }
  return b;
}

std::vector<int> SlotOfPatch(const BooleanTree& tree) {
  std::vector<int> slot;
  for (int leaf : tree.Leaves()) {
    const auto& node = tree.nodes[leaf];
    if (node.patch >= static_cast<int>(slot.size())) slot.resize(node.patch + 1, -1);
    slot[node.patch] = node.slot;
  }
  return slot;
}

LossBreakdown TotalLoss(const NeuralField& field, const BooleanTree& tree,
                        const TrainingBatch& batch, const LossWeights& w, int iter,
                        Eigen::VectorXd* grad) {
  const Eigen::Index ns = batch.surface.cols();
  const Eigen::Index nl = batch.local.cols();
  const Eigen::Index ng = batch.global.cols();
  const Eigen::Index total = ns + nl + ng;
  const int outputs = field.outputs();
  if (tree.SlotCount() != outputs) {
    throw Error(ErrorKind::kArityMismatch,
                "tree reads " + std::to_string(tree.SlotCount()) + " slots but the network has " +
                    std::to_string(outputs) + " outputs");
  }
  const std::vector<int> slot_of = SlotOfPatch(tree);

  Matrix3X x(3, total);
  x << batch.surface, batch.local, batch.global;
  FieldBatch fb;
  field.ForwardBatch(x, fb, grad != nullptr);
  for (Eigen::Index j = 0; j < total; ++j) {
    bool finite = fb.values.col(j).allFinite();
    for (int k = 0; k < 3; ++k) finite = finite && fb.grads[k].col(j).allFinite();
    if (!finite) {
      std::ostringstream msg;
      msg << "non-finite network output at point (" << x(0, j) << ", " << x(1, j) << ", "
          << x(2, j) << ")";
      throw Error(ErrorKind::kNonFiniteLoss, msg.str());
    }
  }

  Matrix d_values;
  std::array<Matrix, 3> d_grads;
  if (grad) {
    d_values = Matrix::Zero(outputs, total);
    for (auto& g : d_grads) g = Matrix::Zero(outputs, total);
  }
  auto grad_at = [&](int slot, Eigen::Index j) {
    return Vec3(fb.grads[0](slot, j), fb.grads[1](slot, j), fb.grads[2](slot, j));
  };

  LossBreakdown out;
  const bool correcting = w.correction && iter >= w.correction_start;
  std::vector<Eigen::Index> violators;
  std::vector<TreeValue> tv(total);
  for (Eigen::Index j = 0; j < total; ++j) {
    tv[j] = EvaluateTree(tree, std::span<const double>(fb.values.col(j).data(), outputs));
  }

  const double inv_s = 1.0 / static_cast<double>(ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    int p = batch.patch[j];
    if (p < 0 || p >= static_cast<int>(slot_of.size()) || slot_of[p] < 0) {
      throw Error(ErrorKind::kPrecondition, "sample patch " + std::to_string(p) + " has no leaf");
    }
    const int s = slot_of[p];
    const int a = tv[j].active_slot;
    const double fs = fb.values(s, j);
    const double h = tv[j].value;
    const double diff = fs - h;
    if (w.position) {
      out.position += (std::abs(fs) + std::abs(h)) * inv_s;
      if (grad) {
        d_values(s, j) += Sign(fs) * inv_s;
        d_values(a, j) += Sign(h) * inv_s;
      }
    }
    if (w.normal) {
      Vec3 d = grad_at(s, j) - Vec3(batch.normals.col(j));
      double r = d.norm();
      out.normal += r * inv_s;
      if (grad && r > 0) {
        for (int k = 0; k < 3; ++k) d_grads[k](s, j) += d[k] / r * inv_s;
      }
    }
    if (w.consistency) {
      out.consistency += std::abs(diff) * inv_s;
      if (grad) {
        d_values(s, j) += Sign(diff) * inv_s;
        d_values(a, j) -= Sign(diff) * inv_s;
      }
    }
    if (correcting && std::abs(diff) >= w.correction_tolerance) violators.push_back(j);
  }
  if (correcting && !violators.empty()) {
    const double scale = w.beta / static_cast<double>(violators.size());
    for (Eigen::Index j : violators) {
      const int s = slot_of[batch.patch[j]];
      const double diff = tv[j].value - fb.values(s, j);
      out.correction += scale * std::abs(diff);
      if (grad) {
        d_values(tv[j].active_slot, j) += scale * Sign(diff);
        d_values(s, j) -= scale * Sign(diff);
      }
    }
  }
  out.violating = violators.size();

  if (w.eikonal) {
    const double inv_e = 1.0 / static_cast<double>(nl + ng);
    for (Eigen::Index j = ns; j < total; ++j) {
      const int a = tv[j].active_slot;
      Vec3 g = grad_at(a, j);
      double r = g.norm();
      out.eikonal += (r - 1) * (r - 1) * inv_e;
      if (grad && r > 0) {
        for (int k = 0; k < 3; ++k) d_grads[k](a, j) += 2 * (r - 1) * g[k] / r * inv_e;
      }
    }
  }
  if (w.off_surface) {
    const double inv_g = 1.0 / static_cast<double>(ng);
    for (Eigen::Index j = ns + nl; j < total; ++j) {
      double h = tv[j].value;
      double e = std::exp(-w.alpha * std::abs(h));
      out.off_surface += e * inv_g;
      if (grad) d_values(tv[j].active_slot, j) += -w.alpha * Sign(h) * e * inv_g;
    }
  }

  out.total = out.position + out.normal + out.eikonal + out.off_surface + out.consistency +
              out.correction;
  if (!std::isfinite(out.total)) throw Error(ErrorKind::kNonFiniteLoss, "loss is not finite");
  if (grad) {
    *grad = Eigen::VectorXd::Zero(field.parameters().size());
    field.Backward(fb, d_values, d_grads, *grad);
  }
  return out;
}

Adam::Adam(Eigen::Index size, double b1, double b2, double eps)
    : m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)), b1_(b1), b2_(b2),
      eps_(eps) {}

void Adam::Step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr) {
  ++t_;
  m_ = b1_ * m_ + (1 - b1_) * grad;
  v_ = b2_ * v_ + (1 - b2_) * grad.cwiseProduct(grad);
  const double c1 = 1 - std::pow(b1_, t_);
  const double c2 = 1 - std::pow(b2_, t_);
  theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double LearningRate(const TrainConfig& config, int iter) {
  return config.lr * std::pow(0.5, iter / config.lr_halving_period);
}

std::string TrainLogHeader() {
  return "iter,lr,total,E_p,E_n,E_eik,E_o,E_cons,E_c,violating";
}

namespace {

void LogRow(std::ostream& log, int iter, double lr, const LossBreakdown& l) {
  log << iter << ',' << FormatDouble(lr) << ',' << FormatDouble(l.total) << ','
      << FormatDouble(l.position) << ',' << FormatDouble(l.normal) << ','
      << FormatDouble(l.eikonal) << ',' << FormatDouble(l.off_surface) << ','
      << FormatDouble(l.consistency) << ',' << FormatDouble(l.correction) << ',' << l.violating
      << '\n';
}

}  // namespace

TrainResult Train(const SampleSet& samples, const BooleanTree& tree, const TrainConfig& config,
                  const Similarity& transform, std::ostream* log) {
  config.Validate();
  const int outputs = tree.SlotCount();
  TrainResult result;
  result.checkpoint.field =
      GeometricInit(config.LayerSizes(outputs), config.init_radius, config.seed,
                    config.softplus_beta);
  result.checkpoint.tree = SerializeTree(tree);
  result.checkpoint.transform = transform;
  result.checkpoint.config = FormatTrainConfig(config);

  NeuralField& field = result.checkpoint.field;
  const LossWeights weights = config.Weights();
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(field.parameters().size());
  Eigen::VectorXd grad;
  if (log) *log << TrainLogHeader() << '\n';
  for (int iter = 0; iter < config.iterations; ++iter) {
    const double lr = LearningRate(config, iter);
    TrainingBatch batch = MakeBatch(samples, config, rng);
    LossBreakdown loss;
    Eigen::VectorXd saved = field.parameters();
    try {
      loss = TotalLoss(field, tree, batch, weights, iter, &grad);
      if (!grad.allFinite()) throw Error(ErrorKind::kNonFiniteLoss, "non-finite gradient");
      adam.Step(field.parameters(), grad, lr);
      if (!field.parameters().allFinite()) {
        field.parameters() = saved;
        throw Error(ErrorKind::kNonFiniteLoss, "parameters became non-finite");
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNonFiniteLoss) throw;
      result.failure = Error(e.kind(), "iteration " + std::to_string(iter) + ": " + e.what());
      return result;
    }
    result.completed = iter + 1;
    if (iter % config.log_every == 0 || iter + 1 == config.iterations) {
      result.history.emplace_back(iter, loss);
      if (log) LogRow(*log, iter, lr, loss);
    }
  }
  return result;
}

}  // namespace nhrep
