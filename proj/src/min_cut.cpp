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

#include "nhrep/min_cut.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "nhrep/error.hpp"

namespace nhrep {

namespace {

constexpr double kInfinite = 1e300;

class Dinic {
 public:
  explicit Dinic(int n) : head_(n, -1), level_(n), it_(n) {}

  void AddEdge(int u, int v, double cap_uv, double cap_vu) {
    arcs_.push_back({v, head_[u], cap_uv});
    head_[u] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({u, head_[v], cap_vu});
    head_[v] = static_cast<int>(arcs_.size()) - 1;
  }

  double MaxFlow(int s, int t) {
    double flow = 0;
    while (Bfs(s, t)) {
      it_ = head_;
      while (double pushed = Dfs(s, t, kInfinite)) flow += pushed;
    }
    return flow;
  }

  std::vector<bool> Reachable(int s) const {
    std::vector<bool> seen(head_.size(), false);
    std::queue<int> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
          seen[arcs_[a].to] = true;
          q.push(arcs_[a].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    int next;
    double cap;
  };

  bool Bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int a = head_[u]; a >= 0; a = arcs_[a].next) {
        if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
          level_[arcs_[a].to] = level_[u] + 1;
          q.push(arcs_[a].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double Dfs(int u, int t, double limit) {
    if (u == t) return limit;
    for (int& a = it_[u]; a >= 0; a = arcs_[a].next) {
      Arc& arc = arcs_[a];
      if (arc.cap <= 0 || level_[arc.to] != level_[u] + 1) continue;
      double pushed = Dfs(arc.to, t, std::min(limit, arc.cap));
      if (pushed > 0) {
        arc.cap -= pushed;
        arcs_[a ^ 1].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

double CutProblem::Energy(const std::vector<int>& label) const {
  double e = 0;
  for (const Pair& p : pairs) {
    if (label[p.i] != label[p.j]) e += p.weight;
  }
  return e;
}

CutResult SolveMinCut(const CutProblem& problem) {
  const int n = problem.node_count;
  const int s = n, t = n + 1;
  Dinic flow(n + 2);
  for (const auto& p : problem.pairs) flow.AddEdge(p.i, p.j, p.weight, p.weight);
  for (int i = 0; i < n; ++i) {
    if (problem.anchor[i] == 0) flow.AddEdge(s, i, kInfinite, 0);
    if (problem.anchor[i] == 1) flow.AddEdge(i, t, kInfinite, 0);
  }
  CutResult result;
  result.value = flow.MaxFlow(s, t);
  if (result.value >= kInfinite * 0.5) {
    throw Error(ErrorKind::kDecompositionFailure,
                "no finite cut separates the two anchored sets");
  }
  auto reach = flow.Reachable(s);
  result.label.resize(n);
  for (int i = 0; i < n; ++i) result.label[i] = reach[i] ? 0 : 1;
  return result;
}

}  // namespace nhrep
