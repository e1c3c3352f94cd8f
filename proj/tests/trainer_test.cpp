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
#include <sstream>

#include "nhrep/error.hpp"
#include "nhrep/trainer.hpp"

namespace nhrep {
namespace {

// Points on the four side faces of the cube [-0.5,0.5]^3, one patch per face.
SampleSet FourPatchSamples(int per_patch, double sigma) {
  SampleSet s;
  s.patch_count = 4;
  Rng rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Vec3 normals[4] = {Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(), -Vec3::UnitY()};
  for (int p = 0; p < 4; ++p) {
    for (int i = 0; i < per_patch; ++i) {
      Vec3 x(u(rng), u(rng), u(rng));
      const int axis = p / 2;
      x[axis] = normals[p][axis] * 0.5;
      s.points.push_back(x);
      s.normals.push_back(normals[p]);
      s.patch_of.push_back(p);
      s.sigma.push_back(sigma);
    }
  }
  return s;
}

TrainConfig SmallConfig() {
  TrainConfig c;
  c.iterations = 20;
  c.batch_surface = 64;
  c.local_samples = 64;
  c.global_samples = 32;
  c.hidden_width = 16;
  c.hidden_layers = 2;
  c.correction_start = 10;
  c.log_every = 5;
  return c;
}

// Geometric init gives identical channels; offsets make the max pick one.
NeuralField SplitChannels(NeuralField f) {
  auto b = f.Bias(f.layers() - 1);
  for (Eigen::Index k = 0; k < b.size(); ++k) b[k] += 0.01 * double(k);
  return f;
}

const char* kFourTree = "max(f0,f1,f2,f3)";

TEST(MakeBatch, StratifiesPatchesEvenly) {
  SampleSet s = FourPatchSamples(100, 0.01);
  TrainConfig c;
  Rng rng(1);
  TrainingBatch b = MakeBatch(s, c, rng);
  std::vector<int> count(4, 0);
  for (int p : b.patch) ++count[p];
  for (int p = 0; p < 4; ++p) EXPECT_EQ(count[p], 4096);
  for (int j = 0; j < b.surface.cols(); ++j) {
    // Every drawn point is a sample of the patch it is labelled with.
    const int axis = b.patch[j] / 2;
    EXPECT_EQ(std::abs(b.surface(axis, j)), 0.5);
    EXPECT_EQ(b.normals.col(j).norm(), 1.0);
  }

  c.batch_surface = 10;
  b = MakeBatch(s, c, rng);
  count.assign(4, 0);
  for (int p : b.patch) ++count[p];
  EXPECT_EQ(count, (std::vector<int>{3, 3, 2, 2}));
}

TEST(MakeBatch, ZeroSigmaKeepsLocalSamplesOnTheSurface) {
  SampleSet s = FourPatchSamples(50, 0.0);
  TrainConfig c = SmallConfig();
  c.local_samples = 2 * c.batch_surface;
  Rng rng(2);
  TrainingBatch b = MakeBatch(s, c, rng);
  for (int j = 0; j < c.local_samples; ++j) {
    EXPECT_EQ(b.local.col(j), b.surface.col(j % c.batch_surface));
  }
}

TEST(MakeBatch, LocalSpreadFollowsSigma) {
  SampleSet s = FourPatchSamples(50, 0.02);
  TrainConfig c = SmallConfig();
  c.local_samples = 20000;
  Rng rng(4);
  TrainingBatch b = MakeBatch(s, c, rng);
  double sq = 0;
  for (int j = 0; j < c.local_samples; ++j) {
    sq += (b.local.col(j) - b.surface.col(j % c.batch_surface)).squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(sq / c.local_samples), 0.02, 0.001);
}

TEST(MakeBatch, GlobalSamplesAreClippedToTheCube) {
  SampleSet s = FourPatchSamples(50, 0.01);
  TrainConfig c = SmallConfig();
  c.global_samples = 5000;
  Rng rng(5);
  TrainingBatch b = MakeBatch(s, c, rng);
  EXPECT_LE(b.global.cwiseAbs().maxCoeff(), 1.0);
  int on_face = 0;
  for (int j = 0; j < b.global.cols(); ++j) on_face += b.global.col(j).cwiseAbs().maxCoeff() == 1.0;
  // P(|N(0,1.8)| > 1) is about 0.58 per coordinate.
  EXPECT_GT(on_face, 4000);
}

TEST(MakeBatch, EmptyPatchIsRejected) {
  SampleSet s = FourPatchSamples(10, 0.01);
  s.patch_count = 5;
  Rng rng(0);
  EXPECT_THROW(MakeBatch(s, SmallConfig(), rng), Error);
}

TEST(TotalLoss, OffSurfaceTermIsOneForZeroField) {
  NeuralField f({3, 8, 4});
  SampleSet s = FourPatchSamples(20, 0.01);
  Rng rng(6);
  TrainingBatch b = MakeBatch(s, SmallConfig(), rng);
  LossBreakdown l = TotalLoss(f, ParseTree(kFourTree), b, LossWeights{}, 0);
  EXPECT_NEAR(l.off_surface, 1.0, 1e-12);
  EXPECT_EQ(l.position, 0.0);
  EXPECT_NEAR(l.eikonal, 1.0, 1e-12);
}

TEST(TotalLoss, TermsSumToTotal) {
  SampleSet s = FourPatchSamples(20, 0.02);
  TrainConfig c = SmallConfig();
  NeuralField f = SplitChannels(GeometricInit(c.LayerSizes(4), 0.5, 9));
  Rng rng(7);
  TrainingBatch b = MakeBatch(s, c, rng);
  LossWeights w = c.Weights();
  w.correction_start = 0;
  LossBreakdown l = TotalLoss(f, ParseTree(kFourTree), b, w, 0);
  EXPECT_GT(l.violating, 0u);
  EXPECT_GT(l.correction, 0.0);
  const double sum =
      l.position + l.normal + l.eikonal + l.off_surface + l.consistency + l.correction;
  EXPECT_NEAR(l.total, sum, 1e-12 * std::abs(sum));
}

TEST(TotalLoss, CorrectionIsOffBeforeItsStart) {
  SampleSet s = FourPatchSamples(20, 0.02);
  TrainConfig c = SmallConfig();
  NeuralField f = SplitChannels(GeometricInit(c.LayerSizes(4), 0.5, 9));
  Rng rng(7);
  TrainingBatch b = MakeBatch(s, c, rng);
  LossWeights w = c.Weights();
  w.correction_start = 10;
  LossBreakdown before = TotalLoss(f, ParseTree(kFourTree), b, w, 9);
  LossBreakdown after = TotalLoss(f, ParseTree(kFourTree), b, w, 10);
  EXPECT_EQ(before.correction, 0.0);
  EXPECT_GT(after.correction, 0.0);
  EXPECT_EQ(after.total - after.correction, before.total);
  w.correction = false;
  EXPECT_EQ(TotalLoss(f, ParseTree(kFourTree), b, w, 10).correction, 0.0);
}

TEST(TotalLoss, SlotCountMustMatchTree) {
  NeuralField f({3, 8, 3});
  SampleSet s = FourPatchSamples(20, 0.01);
  Rng rng(6);
  TrainingBatch b = MakeBatch(s, SmallConfig(), rng);
  try {
    TotalLoss(f, ParseTree(kFourTree), b, LossWeights{}, 0);
    FAIL() << "expected ArityMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kArityMismatch);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Adam adam(3);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  adam.Step(theta, g, 0.1);
  EXPECT_NEAR(theta[0], -0.1, 1e-8);
  EXPECT_NEAR(theta[1], 0.1, 1e-7);
  EXPECT_EQ(theta[2], 0.0);
}

TEST(LearningRate, HalvesEveryPeriod) {
  TrainConfig c;
  EXPECT_EQ(LearningRate(c, 0), 0.005);
  EXPECT_EQ(LearningRate(c, 1999), 0.005);
  EXPECT_EQ(LearningRate(c, 2000), 0.0025);
  EXPECT_EQ(LearningRate(c, 14999), 0.005 / 128);
}

TEST(TrainConfig, ParseFormatRoundTrip) {
  TrainConfig c;
  c.iterations = 123;
  c.lr = 0.1 + 0.2;
  c.seed = 18446744073709551615ull;
  c.correction = false;
  c.softplus_beta = 7.5;
  TrainConfig back = ParseTrainConfig(FormatTrainConfig(c));
  EXPECT_EQ(FormatTrainConfig(back), FormatTrainConfig(c));
  EXPECT_EQ(back.lr, c.lr);
  EXPECT_EQ(back.seed, c.seed);

  TrainConfig partial = ParseTrainConfig("# desk run\niterations = 50\n\nlr=0.01 # faster\n");
  EXPECT_EQ(partial.iterations, 50);
  EXPECT_EQ(partial.lr, 0.01);
  EXPECT_EQ(partial.batch_surface, 16384);
}

TEST(TrainConfig, RejectsBadInput) {
  for (const char* text : {"iteration=5", "iterations=five", "lr", "correction=2"}) {
    try {
      ParseTrainConfig(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParse) << text;
    }
  }
  TrainConfig c;
  c.correction_start = c.iterations + 1;
  EXPECT_THROW(c.Validate(), Error);
  c.correction = false;
  EXPECT_NO_THROW(c.Validate());
  c.lr = 0;
  EXPECT_THROW(c.Validate(), Error);
}

TEST(Train, ZeroIterationsReturnsTheInitialization) {
  TrainConfig c = SmallConfig();
  c.iterations = 0;
  c.seed = 11;
  TrainResult r = Train(FourPatchSamples(20, 0.01), ParseTree(kFourTree), c, Similarity{});
  NeuralField init = GeometricInit(c.LayerSizes(4), c.init_radius, 11);
  EXPECT_EQ(r.completed, 0);
  EXPECT_FALSE(r.failure);
  EXPECT_EQ(r.checkpoint.field.parameters(), init.parameters());
  EXPECT_EQ(r.checkpoint.tree, kFourTree);
}

TEST(Train, IsDeterministicAndLogsCsv) {
  TrainConfig c = SmallConfig();
  SampleSet s = FourPatchSamples(30, 0.01);
  std::ostringstream log1, log2;
  TrainResult a = Train(s, ParseTree(kFourTree), c, Similarity{}, &log1);
  TrainResult b = Train(s, ParseTree(kFourTree), c, Similarity{}, &log2);
  EXPECT_EQ(a.completed, c.iterations);
  EXPECT_EQ(a.checkpoint.field.parameters(), b.checkpoint.field.parameters());
  EXPECT_EQ(log1.str(), log2.str());
  EXPECT_EQ(log1.str().substr(0, TrainLogHeader().size()), TrainLogHeader());
  // Rows at 0, 5, 10, 15 and the last iteration.
  EXPECT_EQ(a.history.size(), 5u);
  EXPECT_EQ(a.history.back().first, c.iterations - 1);

  c.seed = 1;
  TrainResult other = Train(s, ParseTree(kFourTree), c, Similarity{});
  EXPECT_NE(other.checkpoint.field.parameters(), a.checkpoint.field.parameters());
}

TEST(Train, ReducesTheLoss) {
  TrainConfig c = SmallConfig();
  c.iterations = 300;
  c.hidden_width = 32;
  c.lr = 0.005;
  c.correction = false;
  c.log_every = 299;
  TrainResult r = Train(FourPatchSamples(200, 0.02), ParseTree(kFourTree), c, Similarity{});
  ASSERT_EQ(r.history.size(), 2u);
  EXPECT_LT(r.history.back().second.position, 0.25 * r.history.front().second.position);
  EXPECT_LT(r.history.back().second.total, r.history.front().second.total);
}

TEST(Train, DivergenceKeepsLastGoodParameters) {
  TrainConfig c = SmallConfig();
  c.lr = 1e300;
  TrainResult r = Train(FourPatchSamples(20, 0.01), ParseTree(kFourTree), c, Similarity{});
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind(), ErrorKind::kNonFiniteLoss);
  EXPECT_LT(r.completed, c.iterations);
  EXPECT_TRUE(r.checkpoint.field.parameters().allFinite());
}

}  // namespace
}  // namespace nhrep
