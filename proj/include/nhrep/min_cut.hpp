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

#include <vector>

namespace nhrep {

/// Binary labelling problem: nodes anchored to label 0 or 1 with infinite
/// weight, plus symmetric pairwise costs paid when two nodes differ.
struct CutProblem {
  struct Pair {
    int i = 0;
    int j = 0;
    double weight = 0.0;
  };
  int node_count = 0;
  std::vector<Pair> pairs;
  /// -1 free, 0 forced to label 0, 1 forced to label 1.
  std::vector<int> anchor;

  /// Sum of pair weights across differing labels.
  double Energy(const std::vector<int>& label) const;
};

struct CutResult {
  double value = 0.0;
  /// Label 0 for nodes reachable from the label-0 terminal in the residual
  /// graph, 1 otherwise.
  std::vector<int> label;
};

/// Exact minimum s-t cut by Dinic max-flow. Throws DecompositionFailure when
/// both terminals are connected through anchored nodes with no finite cut.
CutResult SolveMinCut(const CutProblem& problem);

}  // namespace nhrep
