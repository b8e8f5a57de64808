// Copyright 2026 The vislab Authors
// SPDX-License-Identifier: Apache-2.0
#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vislab/error.hpp"

namespace vislab::detail {
namespace {

constexpr char kTree = 0;
constexpr char kLower = 1;

class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand,
                 std::span<const double> cost)
      : m_(static_cast<long>(supply.size())),
        k_(static_cast<long>(demand.size())),
        cost_(cost),
        root_(m_ + k_) {
    const long nodes = m_ + k_ + 1;
    const long real = m_ * k_;
    flow_.assign(real + m_ + k_, 0.0);
    state_.assign(real + m_ + k_, kLower);
    art_src_.resize(m_ + k_);
    art_tgt_.resize(m_ + k_);
    art_cost_.resize(m_ + k_);
    parent_.resize(nodes);
    pred_.resize(nodes);
    fwd_.resize(nodes);
    pi_.resize(nodes);
    depth_.resize(nodes);
    children_.resize(nodes);

    const double max_cost = cost.empty() ? 0.0 : *std::max_element(cost.begin(), cost.end());
    const double art = (max_cost + 1.0) * static_cast<double>(m_ + k_);

    parent_[root_] = -1;
    pred_[root_] = -1;
    pi_[root_] = 0.0;
    depth_[root_] = 0;
    for (long u = 0; u < m_ + k_; ++u) {
      const long a = real + u;
      parent_[u] = root_;
      pred_[u] = a;
      depth_[u] = 1;
      state_[a] = kTree;
      children_[root_].push_back(u);
      if (u < m_) {
        art_src_[u] = u;
        art_tgt_[u] = root_;
        art_cost_[u] = 0.0;
        flow_[a] = supply[u];
        fwd_[u] = 1;
        pi_[u] = 0.0;
      } else {
        art_src_[u] = root_;
        art_tgt_[u] = u;
        art_cost_[u] = art;
        flow_[a] = demand[u - m_];
        fwd_[u] = 0;
        pi_[u] = art;
      }
    }
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real))));
  }

  TransportationResult solve() {
    initial_pivots();
    long in_arc = -1;
    const long cap = 100 * (m_ + k_) * (m_ + k_) + 100000;
    while (find_entering(in_arc)) {
      if (++pivots_ > cap) throw NumericalError("network simplex: pivot limit reached");
      pivot(in_arc);
    }
    const long real = m_ * k_;
    double shipped = 0.0;
    for (long a = 0; a < real; ++a) shipped += flow_[a];
    for (long u = 0; u < m_ + k_; ++u) {
      if (flow_[real + u] > 1e-9 * std::max(shipped, 1e-300)) {
        throw NumericalError("network simplex: infeasible (artificial flow remains)");
      }
    }
    TransportationResult r;
    r.flow.assign(flow_.begin(), flow_.begin() + real);
    r.cost = 0.0;
    for (long a = 0; a < real; ++a) {
      if (r.flow[a] > 0.0) r.cost += r.flow[a] * cost_[a];
    }
    r.pivots = pivots_;
    return r;
  }

 private:
  long src(long a) const { return a < m_ * k_ ? a / k_ : art_src_[a - m_ * k_]; }
  long tgt(long a) const { return a < m_ * k_ ? m_ + a % k_ : art_tgt_[a - m_ * k_]; }
  double cost(long a) const { return a < m_ * k_ ? cost_[a] : art_cost_[a - m_ * k_]; }

  double reduced(long a) const { return cost_[a] + pi_[a / k_] - pi_[m_ + a % k_]; }

  bool improving(long a, double rc) const {
    const double scale =
        std::max({std::abs(cost_[a]), std::abs(pi_[a / k_]), std::abs(pi_[m_ + a % k_])});
    return rc < -kEps * scale;
  }

  void initial_pivots() {
    for (long j = 0; j < k_; ++j) {
      long best = -1;
      double c = std::numeric_limits<double>::infinity();
      for (long i = 0; i < m_; ++i) {
        if (cost_[i * k_ + j] < c) {
          c = cost_[i * k_ + j];
          best = i * k_ + j;
        }
      }
      if (best >= 0 && state_[best] == kLower && improving(best, reduced(best))) {
        ++pivots_;
        pivot(best);
      }
    }
  }

  bool find_entering(long& in_arc) {
    const long real = m_ * k_;
    double best = 0.0;
    long cand = -1;
    long cnt = block_;
    long a = next_arc_;
    for (long ind = 0; ind < real; ++ind, ++a) {
      if (a == real) a = 0;
      if (state_[a] == kLower) {
        const double rc = reduced(a);
        if (rc < best) {
          best = rc;
          cand = a;
        }
      }
      if (--cnt == 0) {
        if (cand >= 0 && improving(cand, best)) {
          next_arc_ = a + 1 == real ? 0 : a + 1;
          in_arc = cand;
          return true;
        }
        cnt = block_;
      }
    }
    if (cand >= 0 && improving(cand, best)) {
      next_arc_ = a >= real ? 0 : a;
      in_arc = cand;
      return true;
    }
    return false;
  }

  void remove_child(long p, long c) {
    auto& ch = children_[p];
    auto it = std::find(ch.begin(), ch.end(), c);
    *it = ch.back();
    ch.pop_back();
  }

  void pivot(long in_arc) {
    const long first = src(in_arc);
    const long second = tgt(in_arc);
    long u = first;
    long v = second;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const long join = u;

    constexpr double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    long u_out = -1;
    int result = 0;
    for (long w = first; w != join; w = parent_[w]) {
      const double d = fwd_[w] ? flow_[pred_[w]] : inf;
      if (d < delta) {
        delta = d;
        u_out = w;
        result = 1;
      }
    }
    for (long w = second; w != join; w = parent_[w]) {
      const double d = fwd_[w] ? inf : flow_[pred_[w]];
      if (d <= delta) {
        delta = d;
        u_out = w;
        result = 2;
      }
    }
    if (result == 0) throw NumericalError("network simplex: unbounded cycle");

    if (delta > 0.0) {
      flow_[in_arc] += delta;
      for (long w = first; w != join; w = parent_[w]) flow_[pred_[w]] += fwd_[w] ? -delta : delta;
      for (long w = second; w != join; w = parent_[w]) flow_[pred_[w]] += fwd_[w] ? delta : -delta;
    }
    const long u_in = result == 1 ? first : second;
    const long v_in = result == 1 ? second : first;
    state_[in_arc] = kTree;
    state_[pred_[u_out]] = kLower;

    // Re-hang the subtree cut off at u_out from v_in, reversing the stem.
    stem_.clear();
    for (long w = u_in;; w = parent_[w]) {
      stem_.push_back(w);
      if (w == u_out) break;
    }
    for (long s : stem_) remove_child(parent_[s], s);
    for (std::size_t t = stem_.size() - 1; t >= 1; --t) {
      const long s = stem_[t];
      const long below = stem_[t - 1];
      parent_[s] = below;
      pred_[s] = pred_[below];
      fwd_[s] = !fwd_[below];
      children_[below].push_back(s);
    }
    parent_[u_in] = v_in;
    pred_[u_in] = in_arc;
    fwd_[u_in] = u_in == src(in_arc);
    children_[v_in].push_back(u_in);

    // Refresh depth and potentials in the moved subtree.
    dfs_.clear();
    dfs_.push_back(u_in);
    while (!dfs_.empty()) {
      const long w = dfs_.back();
      dfs_.pop_back();
      const long p = parent_[w];
      const double c = cost(pred_[w]);
      pi_[w] = fwd_[w] ? pi_[p] - c : pi_[p] + c;
      depth_[w] = depth_[p] + 1;
      for (long ch : children_[w]) dfs_.push_back(ch);
    }
  }

  static constexpr double kEps = 64.0 * std::numeric_limits<double>::epsilon();

  long m_;
  long k_;
  std::span<const double> cost_;
  long root_;
  std::vector<double> flow_;
  std::vector<char> state_;
  std::vector<long> art_src_, art_tgt_;
  std::vector<double> art_cost_;
  std::vector<long> parent_, pred_;
  std::vector<char> fwd_;
  std::vector<double> pi_;
  std::vector<long> depth_;
  std::vector<std::vector<long>> children_;
  std::vector<long> stem_, dfs_;
  long block_ = 10;
  long next_arc_ = 0;
  long pivots_ = 0;
};

}  // namespace

TransportationResult solve_transportation(std::span<const double> supply,
                                          std::span<const double> demand,
                                          std::span<const double> cost) {
  if (cost.size() != supply.size() * demand.size()) {
    throw InvalidArgument("solve_transportation: cost matrix has the wrong size");
  }
  for (double s : supply)
    if (!(s > 0.0)) throw InvalidArgument("solve_transportation: supplies must be positive");
  for (double d : demand)
    if (!(d > 0.0)) throw InvalidArgument("solve_transportation: demands must be positive");
  if (supply.empty() || demand.empty()) return {};
  NetworkSimplex ns(supply, demand, cost);
  return ns.solve();
}

}  // namespace vislab::detail
