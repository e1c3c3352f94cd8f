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


#include "nhrep/scalar_field.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "nhrep/error.hpp"

namespace nhrep {

int ThreadCount() {
  if (const char* env = std::getenv("NHREP_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(size_t n, size_t grain, const std::function<void(size_t, size_t)>& body) {
  if (n == 0) return;
  grain = std::max<size_t>(grain, 1);
  const size_t chunks = (n + grain - 1) / grain;
  const size_t workers = std::min<size_t>(ThreadCount(), chunks);
  if (workers <= 1) {
    for (size_t c = 0; c < chunks; ++c) body(c * grain, std::min(n, (c + 1) * grain));
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (size_t c; (c = next.fetch_add(1)) < chunks;) {
      try {
        body(c * grain, std::min(n, (c + 1) * grain));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double ScalarField::Value(const Vec3& p) const {
  double v;
  Evaluate({&p, 1}, {&v, 1}, {});
  return v;
}

Vec3 ScalarField::Gradient(const Vec3& p) const {
  double v;
  Vec3 g;
  Evaluate({&p, 1}, {&v, 1}, {&g, 1});
  return g;
}

void ScalarField::EvaluateParallel(std::span<const Vec3> points, std::span<double> values,
                                   std::span<Vec3> grads) const {
  ParallelFor(points.size(), 2048, [&](size_t b, size_t e) {
    Evaluate(points.subspan(b, e - b), values.subspan(b, e - b),
             grads.empty() ? std::span<Vec3>() : grads.subspan(b, e - b));
  });
}

void FunctionField::Evaluate(std::span<const Vec3> points, std::span<double> values,
                             std::span<Vec3> grads) const {
  for (size_t i = 0; i < points.size(); ++i) {
    values[i] = value_(points[i]);
    if (grads.empty()) continue;
    if (grad_) {
      grads[i] = grad_(points[i]);
      continue;
    }
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 d = Vec3::Zero();
      d[k] = h;
      grads[i][k] = (value_(points[i] + d) - value_(points[i] - d)) / (2 * h);
    }
  }
}

void ShiftedField::Evaluate(std::span<const Vec3> points, std::span<double> values,
                            std::span<Vec3> grads) const {
  base_.Evaluate(points, values, grads);
  for (double& v : values) v -= offset_;
}

NeuralScalarField::NeuralScalarField(FieldCheckpoint checkpoint, bool model_units)
    : checkpoint_(std::move(checkpoint)),
      tree_(ParseTree(checkpoint_.tree)),
      model_units_(model_units) {
  if (tree_.SlotCount() != checkpoint_.field.outputs()) {
    throw Error(ErrorKind::kArityMismatch,
                "checkpoint tree reads " + std::to_string(tree_.SlotCount()) +
                    " slots but the network has " + std::to_string(checkpoint_.field.outputs()) +
                    " outputs");
  }
}

void NeuralScalarField::Evaluate(std::span<const Vec3> points, std::span<double> values,
                                 std::span<Vec3> grads) const {
  const NeuralField& field = checkpoint_.field;
  const Similarity& t = checkpoint_.transform;
  const int n = field.outputs();
  constexpr size_t kChunk = 1024;
  Matrix3X x;
  FieldBatch batch;
  for (size_t b = 0; b < points.size(); b += kChunk) {
    const size_t e = std::min(points.size(), b + kChunk);
    x.resize(3, static_cast<Eigen::Index>(e - b));
    for (size_t i = b; i < e; ++i) {
      x.col(i - b) = model_units_ ? t.Apply(points[i]) : points[i];
    }
    const Matrix* out;
    Matrix plain;
    if (grads.empty()) {
      plain = field.ForwardValues(x);
      out = &plain;
    } else {
      field.ForwardBatch(x, batch, false);
      out = &batch.values;
    }
    for (size_t i = b; i < e; ++i) {
      const Eigen::Index j = static_cast<Eigen::Index>(i - b);
      TreeValue tv = EvaluateTree(tree_, std::span<const double>(out->col(j).data(), n));
      values[i] = model_units_ ? tv.value / t.scale : tv.value;
      if (!grads.empty()) {
        for (int k = 0; k < 3; ++k) grads[i][k] = batch.grads[k](tv.active_slot, j);
      }
    }
  }
}

}  // namespace nhrep
