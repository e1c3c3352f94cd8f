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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "nhrep/error.hpp"
#include "nhrep/neural_field.hpp"
#include "nhrep/trainer.hpp"

namespace nhrep {
namespace {

NeuralField RandomNet(std::vector<int> sizes, std::uint64_t seed, double scale = 0.8,
                      double beta = 1.0) {
  NeuralField f(std::move(sizes), beta);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (Eigen::Index i = 0; i < f.parameters().size(); ++i) f.parameters()[i] = n(rng);
  return f;
}

TEST(SoftPlus, KnownValues) {
  EXPECT_NEAR(SoftPlus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(SoftPlus(50.0), 50.0, 1e-12);
  EXPECT_NEAR(SoftPlus(-50.0), std::exp(-50.0), 1e-30);
  EXPECT_TRUE(std::isfinite(SoftPlus(1000.0)));
  EXPECT_DOUBLE_EQ(SoftPlusDerivative(0.0), 0.5);
  EXPECT_NEAR(SoftPlusDerivative(800.0), 1.0, 1e-15);
  EXPECT_NEAR(SoftPlusDerivative(-800.0), 0.0, 1e-15);
}

TEST(NeuralField, ZeroWeightsGiveOutputBias) {
  NeuralField f({3, 8, 8, 2});
  f.Bias(2) << 0.25, -1.5;
  for (Vec3 x : {Vec3(0, 0, 0), Vec3(1, -1, 0.3), Vec3(-0.7, 0.2, 0.9)}) {
    auto v = f.Forward(x);
    EXPECT_EQ(v[0], 0.25);
    EXPECT_EQ(v[1], -1.5);
  }
}

TEST(NeuralField, LinearNetGradientIsExact) {
  NeuralField f({3, 1});
  f.Weight(0) << 0.3, -1.2, 2.5;
  auto j = f.InputGradient(Vec3(0.4, 0.1, -0.8));
  EXPECT_EQ(j(0, 0), 0.3);
  EXPECT_EQ(j(0, 1), -1.2);
  EXPECT_EQ(j(0, 2), 2.5);
}

TEST(NeuralField, InputGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::uint64_t seed : {1, 2, 3}) {
    NeuralField f = RandomNet({3, 32, 32, 32, 3}, seed, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
      Vec3 x(u(rng), u(rng), u(rng));
      auto j = f.InputGradient(x);
      const double h = 1e-4;
      for (int k = 0; k < 3; ++k) {
        Vec3 d = Vec3::Zero();
        d[k] = h;
        Eigen::VectorXd fd = (f.Forward(x + d) - f.Forward(x - d)) / (2 * h);
        for (int i = 0; i < 3; ++i) {
          EXPECT_LE(std::abs(fd[i] - j(i, k)), 1e-5 * std::max(1.0, std::abs(j(i, k))))
              << "seed " << seed << " output " << i << " axis " << k;
        }
      }
    }
  }
}

TEST(NeuralField, BatchMatchesPointwise) {
  NeuralField f = RandomNet({3, 16, 16, 2}, 9);
  Matrix3X x = Matrix3X::Random(3, 7);
  FieldBatch b;
  f.ForwardBatch(x, b);
  for (int j = 0; j < 7; ++j) {
    auto v = f.Forward(x.col(j));
    auto g = f.InputGradient(x.col(j));
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(b.values(i, j), v[i], 1e-13);
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(b.grads[k](i, j), g(i, k), 1e-13);
    }
  }
}

// Scalar objective mixing values and input gradients, differentiated through
// Backward and by central differences over every parameter.
double Probe(const NeuralField& f, const Matrix3X& x, const Matrix& cv,
             const std::array<Matrix, 3>& cg, Eigen::VectorXd* grad) {
  FieldBatch b;
  f.ForwardBatch(x, b, grad != nullptr);
  double total = 0;
  Matrix dv = Matrix::Zero(b.values.rows(), b.values.cols());
  std::array<Matrix, 3> dg;
  for (int k = 0; k < 3; ++k) dg[k] = Matrix::Zero(dv.rows(), dv.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < dv.rows(); ++i) {
      double v = b.values(i, j);
      total += cv(i, j) * v * v;
      dv(i, j) = 2 * cv(i, j) * v;
      Vec3 g(b.grads[0](i, j), b.grads[1](i, j), b.grads[2](i, j));
      double r = g.norm();
      total += (r - 1) * (r - 1);
      for (int k = 0; k < 3; ++k) {
        total += cg[k](i, j) * g[k];
        dg[k](i, j) = cg[k](i, j) + 2 * (r - 1) * g[k] / r;
      }
    }
  }
  if (grad) f.Backward(b, dv, dg, *grad);
  return total;
}

void ExpectGradientMatches(NeuralField f, const std::function<double(const NeuralField&,
                                                                     Eigen::VectorXd*)>& loss) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(f.parameters().size());
  loss(f, &grad);
  const double h = 1e-6;
  double worst = 0;
  for (Eigen::Index p = 0; p < f.parameters().size(); ++p) {
    const double keep = f.parameters()[p];
    f.parameters()[p] = keep + h;
    double up = loss(f, nullptr);
    f.parameters()[p] = keep - h;
    double down = loss(f, nullptr);
    f.parameters()[p] = keep;
    double fd = (up - down) / (2 * h);
    double err = std::abs(fd - grad[p]) / std::max({std::abs(fd), std::abs(grad[p]), 1e-3});
    worst = std::max(worst, err);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(NeuralField, BackwardMatchesFiniteDifferences) {
  for (double beta : {1.0, 10.0}) {
    NeuralField f = RandomNet({3, 16, 16, 2}, 21, 0.6, beta);
    Matrix3X x = Matrix3X::Random(3, 9);
    Matrix cv = Matrix::Random(2, 9);
    std::array<Matrix, 3> cg{Matrix::Random(2, 9), Matrix::Random(2, 9), Matrix::Random(2, 9)};
    ExpectGradientMatches(f, [&](const NeuralField& net, Eigen::VectorXd* g) {
      return Probe(net, x, cv, cg, g);
    });
  }
}

TrainingBatch SmallBatch(std::uint64_t seed, int patches) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  TrainingBatch b;
  const int ns = 18, nl = 12, ng = 10;
  b.surface.resize(3, ns);
  b.normals.resize(3, ns);
  b.local.resize(3, nl);
  b.global.resize(3, ng);
  for (int j = 0; j < ns; ++j) {
    b.surface.col(j) = Vec3(u(rng), u(rng), u(rng));
    b.normals.col(j) = Vec3(u(rng), u(rng), u(rng)).normalized();
    b.patch.push_back(j % patches);
  }
  for (int j = 0; j < nl; ++j) b.local.col(j) = Vec3(u(rng), u(rng), u(rng));
  for (int j = 0; j < ng; ++j) b.global.col(j) = Vec3(u(rng), u(rng), u(rng));
  return b;
}

TEST(LossGradients, TotalLossMatchesFiniteDifferences) {
  BooleanTree tree = ParseTree("max(f0,min(f1,f2))");
  NeuralField f = RandomNet({3, 16, 16, 3}, 4, 0.5);
  TrainingBatch batch = SmallBatch(8, 3);
  LossWeights w;
  w.alpha = 3.0;   // keeps exp(-alpha|h|) well above rounding noise
  w.beta = 2.0;
  w.correction_start = 0;
  auto loss = [&](const NeuralField& net, Eigen::VectorXd* g) {
    return TotalLoss(net, tree, batch, w, 5, g).total;
  };
  EXPECT_GT(TotalLoss(f, tree, batch, w, 5).violating, 0u);
  ExpectGradientMatches(f, loss);
}

TEST(LossGradients, PerfectFitHasZeroPositionLossAndGradient) {
  NeuralField f({3, 16, 16, 1});
  BooleanTree tree = ParseTree("f0");
  TrainingBatch batch = SmallBatch(3, 1);
  LossWeights w;
  w.normal = w.eikonal = w.off_surface = w.consistency = w.correction = false;
  Eigen::VectorXd g;
  auto l = TotalLoss(f, tree, batch, w, 0, &g);
  EXPECT_EQ(l.total, 0.0);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LossGradients, EikonalVanishesOnUnitSlope) {
  NeuralField f({3, 1});
  f.Weight(0) << 1, 0, 0;
  BooleanTree tree = ParseTree("f0");
  auto l = TotalLoss(f, tree, SmallBatch(2, 1), LossWeights{}, 0);
  EXPECT_EQ(l.eikonal, 0.0);
}

TEST(LossGradients, NonFiniteForwardNamesThePoint) {
  NeuralField f = RandomNet({3, 8, 1}, 1);
  f.parameters()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    TotalLoss(f, ParseTree("f0"), SmallBatch(1, 1), LossWeights{}, 0);
    FAIL() << "expected NonFiniteLoss";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFiniteLoss);
    EXPECT_NE(std::string(e.what()).find("point ("), std::string::npos);
  }
}

double Correlation(const NeuralField& f, int channel, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 10000;
  Matrix3X x(3, n);
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = Vec3(u(rng), u(rng), u(rng));
    t[i] = x.col(i).norm() - radius;
  }
  Eigen::VectorXd v = f.ForwardValues(x).row(channel).transpose();
  Eigen::VectorXd a = v.array() - v.mean(), b = t.array() - t.mean();
  return a.dot(b) / (a.norm() * b.norm());
}

TEST(GeometricInit, ApproximatesSphere) {
  // Default architecture; narrower nets fall short of the 0.9 correlation.
  for (double beta : {1.0, 100.0}) {
    for (std::uint64_t seed : {0, 17}) {
      NeuralField f = GeometricInit({3, 256, 256, 256, 4}, 0.5, seed, beta);
      for (int i = 0; i < f.outputs(); ++i) {
        EXPECT_GT(Correlation(f, i, 0.5, 123), 0.9);
        EXPECT_LT(f.Forward(Vec3::Zero())[i], 0.0);
        for (int c = 0; c < 8; ++c) {
          Vec3 corner((c & 1) ? 1 : -1, (c & 2) ? 1 : -1, (c & 4) ? 1 : -1);
          EXPECT_GT(f.Forward(corner / std::sqrt(3.0))[i], 0.0);
          EXPECT_GT(f.Forward(corner)[i], 0.0);
        }
      }
    }
  }
  EXPECT_THROW(GeometricInit({3, 8, 1}, 0.0, 1), Error);
}

TEST(EvaluateH, SingleSlotIsTheField) {
  NeuralField f = RandomNet({3, 8, 1}, 3);
  Vec3 x(0.1, 0.2, -0.3);
  HValue hv = EvaluateH(f, ParseTree("f0"), x);
  EXPECT_EQ(hv.h, f.Forward(x)[0]);
  EXPECT_EQ(hv.grad, Vec3(f.InputGradient(x).row(0).transpose()));
  EXPECT_EQ(hv.active_leaf, 0);
}

TEST(EvaluateH, MinPicksSmallerBranchAndTiesGoFirst) {
  NeuralField f({3, 2});
  f.Weight(0) << 1, 0, 0, 0, 1, 0;   // f0 = x, f1 = y
  BooleanTree tree = ParseTree("min(f0,f1)");
  HValue a = EvaluateH(f, tree, Vec3(-0.5, 0.2, 0));
  EXPECT_EQ(a.active_slot, 0);
  EXPECT_EQ(a.grad, Vec3(1, 0, 0));
  HValue b = EvaluateH(f, tree, Vec3(0.5, 0.2, 0));
  EXPECT_EQ(b.active_slot, 1);
  EXPECT_EQ(b.grad, Vec3(0, 1, 0));
  HValue tie = EvaluateH(f, tree, Vec3(0.3, 0.3, 0));
  EXPECT_EQ(tie.active_slot, 0);
  EXPECT_EQ(tie.grad, Vec3(1, 0, 0));
  EXPECT_THROW(EvaluateH(f, ParseTree("min(f0,f1,f2)"), Vec3::Zero()), Error);
}

TEST(EvaluateH, GradientMatchesDirectionalDifferences) {
  NeuralField f = RandomNet({3, 16, 16, 3}, 12, 0.5);
  BooleanTree tree = ParseTree("max(f0,min(f1,f2))");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 50; ++trial) {
    Vec3 x(u(rng), u(rng), u(rng));
    Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
    const double h = 1e-4;
    HValue c = EvaluateH(f, tree, x);
    HValue p = EvaluateH(f, tree, x + h * d), m = EvaluateH(f, tree, x - h * d);
    if (p.active_leaf != c.active_leaf || m.active_leaf != c.active_leaf) continue;
    double fd = (p.h - m.h) / (2 * h);
    double an = c.grad.dot(d);
    EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(1.0, std::abs(an)));
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  FieldCheckpoint c;
  c.field = GeometricInit({3, 16, 16, 3}, 0.5, 7, 2.0);
  c.tree = "max(f0,min(f1,f2))";
  c.transform.scale = 0.45;
  c.transform.translation = Vec3(0.1, -0.2, 1.0 / 3.0);
  c.config = "iterations=10\n";
  auto path = std::filesystem::temp_directory_path() / "nhrep_ckpt_test.bin";
  SaveCheckpoint(c, path);
  FieldCheckpoint d = LoadCheckpoint(path);
  std::filesystem::remove(path);
  EXPECT_EQ(d.field.sizes(), c.field.sizes());
  EXPECT_EQ(d.field.beta(), 2.0);
  EXPECT_EQ(d.tree, c.tree);
  EXPECT_EQ(d.transform, c.transform);
  EXPECT_EQ(d.config, c.config);
  Matrix3X x = Matrix3X::Random(3, 50);
  EXPECT_TRUE((d.field.ForwardValues(x).array() == c.field.ForwardValues(x).array()).all());
  EXPECT_EQ(SerializeCheckpoint(d), SerializeCheckpoint(c));
}

TEST(Checkpoint, RejectsCorruptInput) {
  FieldCheckpoint c;
  c.field = NeuralField({3, 4, 1});
  c.tree = "f0";
  std::string bytes = SerializeCheckpoint(c);
  auto kind = [](std::string_view b) {
    try {
      DeserializeCheckpoint(b);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind(bytes.substr(0, bytes.size() - 3)), ErrorKind::kFormat);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(kind(bad), ErrorKind::kFormat);
  EXPECT_EQ(kind(bytes + "x"), ErrorKind::kFormat);
}

}  // namespace
}  // namespace nhrep
