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

#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nhrep/boolean_tree.hpp"
#include "nhrep/error.hpp"
#include "nhrep/neural_field.hpp"
#include "nhrep/sampling.hpp"

namespace nhrep {

struct LossWeights {
  double alpha = 100.0;               // off-surface sharpness
  double beta = 100.0;                // correction penalty
  double correction_tolerance = 1e-5;
  int correction_start = 10000;
  bool position = true;
  bool normal = true;
  bool eikonal = true;
  bool off_surface = true;
  bool consistency = true;
  bool correction = true;
};

struct TrainConfig {
  int iterations = 15000;
  double lr = 0.005;
  int lr_halving_period = 2000;
  int batch_surface = 16384;
  int local_samples = 16384;
  int global_samples = 2048;
  double global_stdev = 1.8;
  int correction_start = 10000;
  std::uint64_t seed = 0;
  double alpha = 100.0;
  double beta = 100.0;
  double correction_tolerance = 1e-5;
  bool correction = true;
  int hidden_width = 256;
  int hidden_layers = 3;
  double softplus_beta = 1.0;
  double init_radius = 0.5;
  int log_every = 100;

  /// Throws PreconditionError on non-positive sizes or rates, or when the
  /// correction term would start after the last iteration.
  void Validate() const;
  LossWeights Weights() const;
  std::vector<int> LayerSizes(int outputs) const;
};

/// key=value lines; '#' starts a comment. Unknown keys are a ParseError.
TrainConfig ParseTrainConfig(std::string_view text, TrainConfig base = {});
std::string FormatTrainConfig(const TrainConfig& config);

struct TrainingBatch {
  Matrix3X surface;
  Matrix3X normals;
  std::vector<int> patch;   // per surface point
  Matrix3X local;
  Matrix3X global;
};

/// Surface points stratified per patch (batch_surface / L each, remainder to
/// the lowest patches), local points displaced by N(0, sigma) along a random
/// unit direction, global points ~ N(0, global_stdev) clipped to [-1,1]^3.
TrainingBatch MakeBatch(const SampleSet& samples, const TrainConfig& config, Rng& rng);

struct LossBreakdown {
  double total = 0;
  double position = 0;
  double normal = 0;
  double eikonal = 0;
  double off_surface = 0;
  double consistency = 0;
  double correction = 0;
  size_t violating = 0;   // |D|
};

/// Maps each surface patch id to its output slot.
std::vector<int> SlotOfPatch(const BooleanTree& tree);

/// Evaluates the objective at iteration `iter`; when `grad` is non-null its
/// parameter gradient is written there. Throws NonFiniteLoss naming the first
/// point whose forward pass is not finite.
LossBreakdown TotalLoss(const NeuralField& field, const BooleanTree& tree,
                        const TrainingBatch& batch, const LossWeights& weights, int iter,
                        Eigen::VectorXd* grad = nullptr);

class Adam {
 public:
  explicit Adam(Eigen::Index size, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8);
  void Step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double lr);

 private:
  Eigen::VectorXd m_, v_;
  double b1_, b2_, eps_;
  int t_ = 0;
};

double LearningRate(const TrainConfig& config, int iter);

struct TrainResult {
  FieldCheckpoint checkpoint;        // last good parameters
  std::vector<std::pair<int, LossBreakdown>> history;   // logged rows
  int completed = 0;                 // optimizer steps taken
  std::optional<Error> failure;      // set when a non-finite loss aborted the run
};

/// Optimizes a geometrically initialized field against `samples`. `log`
/// receives the CSV training log.
TrainResult Train(const SampleSet& samples, const BooleanTree& tree, const TrainConfig& config,
                  const Similarity& transform, std::ostream* log = nullptr);

std::string TrainLogHeader();

}  // namespace nhrep
