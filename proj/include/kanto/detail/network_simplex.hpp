#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kanto::detail {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uncapacitated min-cost flow, min sum c_a x_a subject to
/// out(v) - in(v) = supply(v), x >= 0, by the primal network simplex on
/// strongly feasible spanning trees (Cunningham's leaving rule).
/// An artificial root with big-M arcs provides the starting basis.
class NetworkSimplex {
 public:
  NetworkSimplex(std::size_t nodes, std::vector<std::uint32_t> tail, std::vector<std::uint32_t> head,
                 std::vector<double> cost, std::vector<double> supply)
      : n_(nodes), m_(tail.size()), tail_(std::move(tail)), head_(std::move(head)), cost_(std::move(cost)),
        supply_(std::move(supply)) {
    if (head_.size() != m_ || cost_.size() != m_ || supply_.size() != n_)
      throw std::invalid_argument("network simplex: inconsistent sizes");
    for (std::size_t a = 0; a < m_; ++a) {
      if (tail_[a] >= n_ || head_[a] >= n_) throw std::invalid_argument("network simplex: arc endpoint out of range");
      if (!std::isfinite(cost_[a])) throw std::invalid_argument("network simplex: non-finite cost");
    }
    init_tree();
  }

  /// Replaces arc costs, keeping the current (still primal feasible) basis.
  void set_costs(std::vector<double> cost) {
    if (cost.size() != m_) throw std::invalid_argument("network simplex: cost size mismatch");
    cost_ = std::move(cost);
    const double big = big_m();
    if (big > art_cost_) {
      art_cost_ = big;
    }
    recompute_potentials();
  }

  void solve(std::size_t max_pivots = 0) {
    if (max_pivots == 0) max_pivots = 200 * (n_ + m_) + 100000;
    tol_ = 1e-12 * std::max(1.0, max_abs_cost());
    const std::size_t block = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(static_cast<double>(m_))));
    std::size_t pivots = 0;
    while (true) {
      const std::size_t e = price(block);
      if (e == kNone) break;
      pivot(e);
      if (++pivots > max_pivots) throw SolverError("network simplex: pivot limit reached");
      if (pivots % 2048 == 0) recompute_potentials();
    }
    recompute_potentials();
    // a final full pricing pass on exact potentials
    while (true) {
      const std::size_t e = price(m_ == 0 ? 1 : m_);
      if (e == kNone) break;
      pivot(e);
      recompute_potentials();
      if (++pivots > max_pivots) throw SolverError("network simplex: pivot limit reached");
    }
    recompute_flows();
    double art = 0.0;
    for (std::size_t v = 0; v < n_; ++v) art += flow_[m_ + v];
    if (art > 1e-9) throw SolverError("network simplex: supplies cannot be routed");
    pivots_ += pivots;
  }

  double value() const {
    double s = 0.0;
    for (std::size_t a = 0; a < m_; ++a) s += cost_[a] * flow_[a];
    return s;
  }

  /// Node potentials with reduced cost c_a + pi(tail) - pi(head) >= 0.
  std::vector<double> potentials() const { return std::vector<double>(pot_.begin(), pot_.begin() + static_cast<std::ptrdiff_t>(n_)); }

  double flow(std::size_t a) const { return flow_[a]; }
  const std::vector<double>& flows_with_artificial() const { return flow_; }
  std::size_t arcs() const { return m_; }
  std::size_t nodes() const { return n_; }
  std::uint32_t tail(std::size_t a) const { return tail_[a]; }
  std::uint32_t head(std::size_t a) const { return head_[a]; }
  double cost(std::size_t a) const { return cost_[a]; }
  std::size_t total_pivots() const { return pivots_; }

  double reduced_cost(std::size_t a) const { return cost_[a] + pot_[tail_[a]] - pot_[head_[a]]; }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  static constexpr int kUp = 0;    // tree arc oriented child -> parent
  static constexpr int kDown = 1;  // tree arc oriented parent -> child

  std::size_t n_, m_;
  std::vector<std::uint32_t> tail_, head_;
  std::vector<double> cost_, supply_;
  double art_cost_ = 0.0;
  double tol_ = 1e-12;
  std::size_t pivots_ = 0;
  std::size_t price_pos_ = 0;

  // tree over n_ + 1 nodes, root = n_
  std::vector<std::size_t> parent_, pred_;
  std::vector<int> dir_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> first_child_, next_sib_, prev_sib_;
  std::vector<double> pot_, flow_;
  std::vector<char> in_tree_;

  double max_abs_cost() const {
    double mx = 0.0;
    for (double c : cost_) mx = std::max(mx, std::abs(c));
    return mx;
  }

  double big_m() const { return (max_abs_cost() + 1.0) * static_cast<double>(n_ + 1); }

  double arc_cost(std::size_t a) const { return a < m_ ? cost_[a] : art_cost_; }
  std::size_t arc_tail(std::size_t a) const { return a < m_ ? tail_[a] : (supply_[a - m_] > 0 ? a - m_ : n_); }
  std::size_t arc_head(std::size_t a) const { return a < m_ ? head_[a] : (supply_[a - m_] > 0 ? n_ : a - m_); }

  void init_tree() {
    art_cost_ = big_m();
    const std::size_t N = n_ + 1;
    parent_.assign(N, kNone);
    pred_.assign(N, kNone);
    dir_.assign(N, kUp);
    depth_.assign(N, 0);
    first_child_.assign(N, kNone);
    next_sib_.assign(N, kNone);
    prev_sib_.assign(N, kNone);
    pot_.assign(N, 0.0);
    flow_.assign(m_ + n_, 0.0);
    in_tree_.assign(m_ + n_, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      const std::size_t a = m_ + v;
      in_tree_[a] = 1;
      // zero-supply nodes hang off the root by a downward arc: strongly feasible
      dir_[v] = supply_[v] > 0 ? kUp : kDown;
      flow_[a] = std::abs(supply_[v]);
      link(v, n_, a);
    }
    recompute_potentials();
  }

  void link(std::size_t v, std::size_t p, std::size_t arc) {
    parent_[v] = p;
    pred_[v] = arc;
    prev_sib_[v] = kNone;
    next_sib_[v] = first_child_[p];
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = v;
    first_child_[p] = v;
  }

  void unlink(std::size_t v) {
    const std::size_t p = parent_[v];
    if (prev_sib_[v] != kNone) {
      next_sib_[prev_sib_[v]] = next_sib_[v];
    } else {
      first_child_[p] = next_sib_[v];
    }
    if (next_sib_[v] != kNone) prev_sib_[next_sib_[v]] = prev_sib_[v];
    prev_sib_[v] = next_sib_[v] = kNone;
    parent_[v] = kNone;
  }

  // depth and potential for every node below (and including) start
  void refresh_subtree(std::size_t start) {
    std::vector<std::size_t> stack{start};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v != n_) {
        const std::size_t p = parent_[v];
        depth_[v] = depth_[p] + 1;
        const double c = arc_cost(pred_[v]);
        pot_[v] = dir_[v] == kUp ? pot_[p] - c : pot_[p] + c;
      }
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c]) stack.push_back(c);
    }
  }

  void recompute_potentials() {
    pot_[n_] = 0.0;
    depth_[n_] = 0;
    refresh_subtree(n_);
  }

  void recompute_flows() {
    std::vector<std::size_t> order;
    order.reserve(n_ + 1);
    std::vector<std::size_t> stack{n_};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (std::size_t c = first_child_[v]; c != kNone; c = next_sib_[c]) stack.push_back(c);
    }
    std::vector<double> surplus(n_ + 1, 0.0);
    for (std::size_t v = 0; v < n_; ++v) surplus[v] = supply_[v];
    std::fill(flow_.begin(), flow_.end(), 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t v = *it;
      if (v == n_) continue;
      double f = dir_[v] == kUp ? surplus[v] : -surplus[v];
      if (f < 0.0) {
        if (f < -1e-9) throw SolverError("network simplex: basis lost primal feasibility");
        f = 0.0;
      }
      flow_[pred_[v]] = f;
      surplus[parent_[v]] += surplus[v];
    }
  }

  std::size_t price(std::size_t block) {
    if (m_ == 0) return kNone;
    std::size_t scanned = 0;
    while (scanned < m_) {
      double best = -tol_;
      std::size_t arg = kNone;
      const std::size_t stop = std::min(m_, scanned + block);
      for (; scanned < stop; ++scanned) {
        const std::size_t a = price_pos_;
        price_pos_ = price_pos_ + 1 == m_ ? 0 : price_pos_ + 1;
        if (in_tree_[a]) continue;
        const double rc = reduced_cost(a);
        if (rc < best) {
          best = rc;
          arg = a;
        }
      }
      if (arg != kNone) return arg;
    }
    return kNone;
  }

  void pivot(std::size_t e) {
    const std::size_t k = tail_[e], l = head_[e];
    // apex
    std::size_t u = k, v = l;
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
    const std::size_t apex = u;
    // k side: arcs oriented upward lose flow; keep the one nearest k on ties
    double dk = std::numeric_limits<double>::infinity();
    std::size_t leave_k = kNone;
    for (std::size_t x = k; x != apex; x = parent_[x]) {
      if (dir_[x] == kUp && flow_[pred_[x]] < dk) {
        dk = flow_[pred_[x]];
        leave_k = x;
      }
    }
    // l side: arcs oriented downward lose flow; keep the one nearest the apex
    double dl = std::numeric_limits<double>::infinity();
    std::size_t leave_l = kNone;
    for (std::size_t x = l; x != apex; x = parent_[x]) {
      if (dir_[x] == kDown && flow_[pred_[x]] <= dl) {
        dl = flow_[pred_[x]];
        leave_l = x;
      }
    }
    if (leave_k == kNone && leave_l == kNone) throw SolverError("network simplex: unbounded cycle");
    const bool on_l = dl <= dk;
    const double delta = on_l ? dl : dk;
    const std::size_t out = on_l ? leave_l : leave_k;

    if (delta > 0.0) {
      flow_[e] += delta;
      for (std::size_t x = k; x != apex; x = parent_[x]) flow_[pred_[x]] += dir_[x] == kUp ? -delta : delta;
      for (std::size_t x = l; x != apex; x = parent_[x]) flow_[pred_[x]] += dir_[x] == kUp ? delta : -delta;
    }
    in_tree_[pred_[out]] = 0;
    in_tree_[e] = 1;
    flow_[pred_[out]] = 0.0;

    // re-hang the path q_in .. out under p_in through the entering arc
    const std::size_t q_in = on_l ? l : k;
    const std::size_t p_in = on_l ? k : l;
    std::size_t prev = p_in, prev_arc = e;
    int prev_dir = (tail_[e] == q_in) ? kUp : kDown;
    std::size_t x = q_in;
    while (true) {
      const std::size_t old_parent = parent_[x];
      const std::size_t old_arc = pred_[x];
      const int old_dir = dir_[x];
      unlink(x);
      dir_[x] = prev_dir;
      link(x, prev, prev_arc);
      if (x == out) break;
      prev = x;
      prev_arc = old_arc;
      prev_dir = old_dir == kUp ? kDown : kUp;
      x = old_parent;
    }
    refresh_subtree(q_in);
  }
};

}  // namespace kanto::detail
