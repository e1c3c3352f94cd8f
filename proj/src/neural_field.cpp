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

#include "nhrep/neural_field.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "nhrep/binary_io.hpp"
#include "nhrep/error.hpp"
#include "nhrep/text_io.hpp"

namespace nhrep {

double SoftPlus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double SoftPlusDerivative(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// Element-wise activation helpers on beta-scaled arrays.
Matrix Activate(const Matrix& z, double beta) {
  Eigen::ArrayXXd t = beta * z.array();
  return ((t.max(0.0) + (-t.abs()).exp().log1p()) / beta).matrix();
}

Eigen::ArrayXXd Sigmoid(const Matrix& z, double beta) {
  return 1.0 / (1.0 + (-beta * z.array()).exp());
}

}  // namespace

NeuralField::NeuralField(std::vector<int> sizes, double beta)
    : sizes_(std::move(sizes)), beta_(beta) {
  if (sizes_.size() < 2 || sizes_.front() != 3) {
    throw Error(ErrorKind::kPrecondition, "network must map 3 inputs to at least one output");
  }
  for (int s : sizes_) {
    if (s <= 0) throw Error(ErrorKind::kPrecondition, "layer sizes must be positive");
  }
  if (!(beta > 0)) throw Error(ErrorKind::kPrecondition, "softplus beta must be positive");
  size_t total = 0;
  for (int l = 0; l < layers(); ++l) {
    offset_.push_back(total);
    total += static_cast<size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
}

Eigen::Map<Matrix> NeuralField::Weight(int l) {
  return {theta_.data() + offset_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<const Matrix> NeuralField::Weight(int l) const {
  return {theta_.data() + offset_[l], sizes_[l + 1], sizes_[l]};
}
Eigen::Map<Eigen::VectorXd> NeuralField::Bias(int l) {
  return {theta_.data() + offset_[l] + size_t(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}
Eigen::Map<const Eigen::VectorXd> NeuralField::Bias(int l) const {
  return {theta_.data() + offset_[l] + size_t(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
}

Matrix NeuralField::ForwardValues(const Matrix3X& x) const {
  Matrix a = x;
  for (int l = 0; l < layers(); ++l) {
    Matrix z = (Weight(l) * a).colwise() + Bias(l);
    a = l + 1 < layers() ? Activate(z, beta_) : std::move(z);
  }
  return a;
}

void NeuralField::ForwardBatch(const Matrix3X& x, FieldBatch& out, bool keep_cache) const {
  const Eigen::Index n = x.cols();
  out.z.clear();
  out.a.clear();
  out.zt.clear();
  out.at.clear();
  out.inputs = x;
  Matrix a = x;
  // Tangent of the input along axis k is e_k, so the first layer's tangent
  // is column k of its weight broadcast across the batch.
  std::array<Matrix, 3> at;
  for (int l = 0; l < layers(); ++l) {
    auto w = Weight(l);
    Matrix z = (w * a).colwise() + Bias(l);
    std::array<Matrix, 3> zt;
    for (int k = 0; k < 3; ++k) {
      zt[k] = l == 0 ? Matrix(w.col(k).replicate(1, n)) : Matrix(w * at[k]);
    }
    if (l + 1 == layers()) {
      out.values = std::move(z);
      out.grads = std::move(zt);
      break;
    }
    Eigen::ArrayXXd s = Sigmoid(z, beta_);
    a = Activate(z, beta_);
    for (int k = 0; k < 3; ++k) at[k] = (s * zt[k].array()).matrix();
    if (keep_cache) {
      out.z.push_back(std::move(z));
      out.a.push_back(a);
      out.zt.push_back(std::move(zt));
      out.at.push_back(at);
    }
  }
}

void NeuralField::Backward(const FieldBatch& batch, const Matrix& d_values,
                           const std::array<Matrix, 3>& d_grads,
                           Eigen::VectorXd& grad) const {
  if (static_cast<int>(batch.z.size()) != layers() - 1) {
    throw Error(ErrorKind::kPrecondition, "Backward needs a cached forward pass");
  }
  if (grad.size() != theta_.size()) grad = Eigen::VectorXd::Zero(theta_.size());
  Matrix dz = d_values;
  std::array<Matrix, 3> dzt = d_grads;
  for (int l = layers() - 1; l >= 0; --l) {
    Eigen::Map<Matrix> gw(grad.data() + offset_[l], sizes_[l + 1], sizes_[l]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offset_[l] + size_t(sizes_[l + 1]) * sizes_[l],
                                   sizes_[l + 1]);
    gb += dz.rowwise().sum();
    if (l == 0) {
      gw.noalias() += dz * batch.inputs.transpose();
      for (int k = 0; k < 3; ++k) gw.col(k) += dzt[k].rowwise().sum();
      break;
    }
    const Matrix& a = batch.a[l - 1];
    gw.noalias() += dz * a.transpose();
    for (int k = 0; k < 3; ++k) gw.noalias() += dzt[k] * batch.at[l - 1][k].transpose();

    auto w = Weight(l);
    Matrix da = w.transpose() * dz;
    std::array<Matrix, 3> dat;
    for (int k = 0; k < 3; ++k) dat[k] = w.transpose() * dzt[k];

    // Through a = sp(z), at_k = sp'(z) zt_k.
    Eigen::ArrayXXd s = Sigmoid(batch.z[l - 1], beta_);
    Eigen::ArrayXXd s2 = beta_ * s * (1.0 - s);
    Eigen::ArrayXXd acc = da.array() * s;
    for (int k = 0; k < 3; ++k) {
      acc += dat[k].array() * batch.zt[l - 1][k].array() * s2;
      dzt[k] = (dat[k].array() * s).matrix();
    }
    dz = acc.matrix();
  }
}

Eigen::VectorXd NeuralField::Forward(const Vec3& x) const {
  Matrix3X m(3, 1);
  m.col(0) = x;
  return ForwardValues(m).col(0);
}

JacobianRows NeuralField::InputGradient(const Vec3& x) const {
  Matrix3X m(3, 1);
  m.col(0) = x;
  FieldBatch b;
  ForwardBatch(m, b, false);
  JacobianRows j(outputs(), 3);
  for (int k = 0; k < 3; ++k) j.col(k) = b.grads[k].col(0);
  return j;
}

namespace {

constexpr double kInitGain = 2.0;
// Hidden draws whose best fit correlates worse than this with the cone are
// redrawn, up to kInitAttempts times in total.
constexpr double kInitMinCorrelation = 0.95;
constexpr int kInitAttempts = 8;

void DrawHidden(NeuralField& field, std::mt19937_64& rng) {
  const std::vector<int>& sizes = field.sizes();
  const int last = field.layers() - 1;
  for (int l = 0; l < last; ++l) {
    // He scaling doubled: with unit-sharpness SoftPlus the plain He variance
    // leaves the hidden layers too close to linear to bend into a cone.
    std::normal_distribution<double> normal(0.0, kInitGain * std::sqrt(2.0 / sizes[l]));
    auto w = field.Weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
    field.Bias(l).setZero();
  }
  if (last >= 2 && sizes[1] % 2 == 0) {
    // Mirrored first layer and pair-tied second layer make the net even in x,
    // which removes the odd part of the random field.
    const Eigen::Index half = sizes[1] / 2;
    auto w0 = field.Weight(0);
    w0.bottomRows(half) = -w0.topRows(half);
    auto w1 = field.Weight(1);
    w1.rightCols(half) = w1.leftCols(half);
  }
}

// Sets the output layer to a constant row (the mean direction of the last
// hidden layer) plus bias; only the magnitude and the bias are fitted, which
// keeps the weights small enough for the first optimizer steps. Returns the
// correlation of the fit with the target.
double FitOutput(NeuralField& field, const Matrix3X& x, const Eigen::VectorXd& target) {
  const int last = field.layers() - 1;
  const double m = double(x.cols());
  Matrix feat = x;
  for (int l = 0; l < last; ++l) {
    Matrix z = (field.Weight(l) * feat).colwise() + field.Bias(l);
    feat = Activate(z, field.beta());
  }
  Eigen::VectorXd mean_feat = feat.colwise().sum().transpose() / double(feat.rows());
  Eigen::Matrix2d normal_eq;
  Eigen::Vector2d rhs;
  normal_eq << mean_feat.squaredNorm(), mean_feat.sum(), mean_feat.sum(), m;
  rhs << mean_feat.dot(target), target.sum();
  Eigen::Vector2d coef = normal_eq.ldlt().solve(rhs);
  field.Weight(last).setConstant(coef[0] / feat.rows());
  field.Bias(last).setConstant(coef[1]);

  Eigen::ArrayXd a = mean_feat.array() - mean_feat.mean();
  Eigen::ArrayXd b = target.array() - target.mean();
  const double denom = std::sqrt((a * a).sum() * (b * b).sum());
  return denom > 0 ? (a * b).sum() / denom : 0.0;
}

}  // namespace

NeuralField GeometricInit(const std::vector<int>& sizes, double radius, std::uint64_t seed,
                          double beta) {
  if (!(radius > 0)) throw Error(ErrorKind::kPrecondition, "init radius must be positive");
  NeuralField field(sizes, beta);
  std::mt19937_64 rng(seed);

  // Fit points for |x| - radius over the cube.
  const int m = 4096;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix3X x(3, m);
  Eigen::VectorXd target(m);
  for (int i = 0; i < m; ++i) {
    x.col(i) = Vec3(uni(rng), uni(rng), uni(rng));
    target[i] = x.col(i).norm() - radius;
  }

  NeuralField best = field;
  double best_corr = -2.0;
  for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
    DrawHidden(field, rng);
    const double corr = FitOutput(field, x, target);
    if (corr > best_corr) {
      best_corr = corr;
      best = field;
    }
    if (best_corr >= kInitMinCorrelation) break;
  }
  return best;
}

HValue EvaluateH(const NeuralField& field, const BooleanTree& tree, const Vec3& x) {
  Matrix3X m(3, 1);
  m.col(0) = x;
  FieldBatch b;
  field.ForwardBatch(m, b, false);
  std::vector<double> values(b.values.data(), b.values.data() + b.values.rows());
  TreeValue tv = EvaluateTree(tree, values);
  HValue out;
  out.h = tv.value;
  out.active_leaf = tv.active_leaf;
  out.active_slot = tv.active_slot;
  for (int k = 0; k < 3; ++k) out.grad[k] = b.grads[k](tv.active_slot, 0);
  return out;
}

namespace {
constexpr char kMagic[4] = {'N', 'H', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string SerializeCheckpoint(const FieldCheckpoint& c) {
  BinaryWriter w;
  w.PutBytes(std::string_view(kMagic, 4));
  w.Put<std::uint32_t>(kVersion);
  const auto& sizes = c.field.sizes();
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(sizes.size() - 1));
  for (int s : sizes) w.Put<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.Put<double>(c.field.beta());
  const auto& theta = c.field.parameters();
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(theta.size()));
  w.PutBytes(std::string_view(reinterpret_cast<const char*>(theta.data()),
                              sizeof(double) * theta.size()));
  w.PutString(c.tree);
  w.Put<double>(c.transform.scale);
  for (int k = 0; k < 3; ++k) w.Put<double>(c.transform.translation[k]);
  w.PutString(c.config);
  return w.bytes();
}

FieldCheckpoint DeserializeCheckpoint(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.GetBytes(4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorKind::kFormat, "not a checkpoint file (bad magic)");
  }
  if (auto v = r.Get<std::uint32_t>(); v != kVersion) {
    throw Error(ErrorKind::kFormat, "unsupported checkpoint version " + std::to_string(v));
  }
  auto layers = r.Get<std::uint32_t>();
  if (layers == 0 || layers > 64) throw Error(ErrorKind::kFormat, "bad layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i <= layers; ++i) {
    auto s = r.Get<std::uint32_t>();
    if (s == 0 || s > (1u << 16)) throw Error(ErrorKind::kFormat, "bad layer size");
    sizes.push_back(static_cast<int>(s));
  }
  double beta = r.Get<double>();
  FieldCheckpoint c;
  try {
    c.field = NeuralField(sizes, beta);
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, std::string("checkpoint network: ") + e.what());
  }
  auto count = r.Get<std::uint64_t>();
  if (count != static_cast<std::uint64_t>(c.field.parameters().size())) {
    throw Error(ErrorKind::kFormat, "parameter count does not match layer sizes");
  }
  auto raw = r.GetBytes(sizeof(double) * count);
  std::memcpy(c.field.parameters().data(), raw.data(), raw.size());
  c.tree = r.GetString();
  c.transform.scale = r.Get<double>();
  for (int k = 0; k < 3; ++k) c.transform.translation[k] = r.Get<double>();
  c.config = r.GetString();
  if (!r.AtEnd()) throw Error(ErrorKind::kFormat, "trailing bytes after checkpoint");
  return c;
}

void SaveCheckpoint(const FieldCheckpoint& c, const std::filesystem::path& path) {
  WriteTextFile(path, SerializeCheckpoint(c));
}

FieldCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(ReadTextFile(path));
}

}  // namespace nhrep
