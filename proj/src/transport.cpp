#include "qm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qm/error.hpp"

namespace qm {

namespace {

enum Dir : signed char { up = 1, down = -1 };  // up: arc runs node -> parent

template <class Cost>
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& a, const std::vector<double>& b, Cost cost)
      : n_(a.size()), m_(b.size()), cost_(std::move(cost)) {
    nodes_ = n_ + m_ + 1;
    root_ = n_ + m_;
    real_arcs_ = n_ * m_;
    double cmax = 0;
    // Sample the cost scale; the big-M only has to dominate every path.
    const std::size_t stride = std::max<std::size_t>(1, real_arcs_ / 4096);
    for (std::size_t e = 0; e < real_arcs_; e += stride) cmax = std::max(cmax, arc_cost(e));
    for (std::size_t i = 0; i < n_; ++i) cmax = std::max(cmax, cost_(i, m_ - 1));
    for (std::size_t j = 0; j < m_; ++j) cmax = std::max(cmax, cost_(n_ - 1, j));
    big_m_ = (cmax + 1.0) * static_cast<double>(nodes_);
    eps_ = 1e-12 * (cmax + 1.0);
    double total = std::accumulate(a.begin(), a.end(), 0.0);
    flow_eps_ = 1e-15 * std::max(1.0, total);

    parent_.assign(nodes_, root_);
    pred_.assign(nodes_, 0);
    dir_.assign(nodes_, up);
    flow_.assign(nodes_, 0.0);
    pi_.assign(nodes_, 0.0);
    depth_.assign(nodes_, 1);
    children_.assign(nodes_, {});
    pos_.assign(nodes_, 0);
    depth_[root_] = 0;
    parent_[root_] = root_;
    for (std::size_t k = 0; k < root_; ++k) {
      pred_[k] = real_arcs_ + k;
      pos_[k] = children_[root_].size();
      children_[root_].push_back(k);
      if (k < n_) {
        dir_[k] = up;  // k -> root carries the supply
        flow_[k] = a[k];
        pi_[k] = -big_m_;
      } else {
        dir_[k] = down;  // root -> k carries the demand
        flow_[k] = b[k - n_];
        pi_[k] = big_m_;
      }
    }
    block_ = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(real_arcs_ + root_))));
  }

  void run() {
    const std::size_t total_arcs = real_arcs_ + root_;
    std::size_t next = 0;
    for (;;) {
      // Block search: scan blocks until one yields an eligible arc.
      std::size_t best = total_arcs;
      double best_rc = -eps_;
      std::size_t scanned = 0, in_block = 0;
      while (scanned < total_arcs) {
        const double rc = reduced_cost(next);
        if (rc < best_rc) {
          best_rc = rc;
          best = next;
        }
        if (++next == total_arcs) next = 0;
        ++scanned;
        if (++in_block == block_) {
          if (best != total_arcs) break;
          in_block = 0;
        }
      }
      if (best == total_arcs) break;
      pivot(best, best_rc);
      ++pivots_;
    }
    recompute_potentials();
  }

  TransportResult result() const {
    TransportResult r;
    r.pivots = pivots_;
    for (std::size_t k = 0; k < root_; ++k) {
      const std::size_t e = pred_[k];
      if (e >= real_arcs_) {
        require(flow_[k] <= 1e-9, "transport: masses do not balance");
        continue;
      }
      if (flow_[k] <= 0) continue;
      r.plan.push_back({e / m_, e % m_, flow_[k]});
    }
    std::sort(r.plan.begin(), r.plan.end(),
              [](const PlanEntry& x, const PlanEntry& y) { return x.from != y.from ? x.from < y.from : x.to < y.to; });
    for (const auto& p : r.plan) r.cost += p.mass * cost_(p.from, p.to);
    r.u.resize(n_);
    r.v.resize(m_);
    for (std::size_t i = 0; i < n_; ++i) r.u[i] = -pi_[i];
    for (std::size_t j = 0; j < m_; ++j) r.v[j] = pi_[n_ + j];
    return r;
  }

 private:
  double arc_cost(std::size_t e) const { return cost_(e / m_, e % m_); }

  std::size_t tail(std::size_t e) const {
    if (e < real_arcs_) return e / m_;
    const std::size_t k = e - real_arcs_;
    return k < n_ ? k : root_;
  }
  std::size_t head(std::size_t e) const {
    if (e < real_arcs_) return n_ + e % m_;
    const std::size_t k = e - real_arcs_;
    return k < n_ ? root_ : k;
  }

  double reduced_cost(std::size_t e) const {
    if (e < real_arcs_) return arc_cost(e) + pi_[e / m_] - pi_[n_ + e % m_];
    const std::size_t k = e - real_arcs_;
    return k < n_ ? big_m_ + pi_[k] - pi_[root_] : big_m_ + pi_[root_] - pi_[k];
  }

  void pivot(std::size_t e, double rc) {
    const std::size_t first = tail(e), second = head(e);
    // Join node.
    std::size_t x = first, y = second;
    while (x != y) {
      if (depth_[x] > depth_[y]) x = parent_[x];
      else if (depth_[y] > depth_[x]) y = parent_[y];
      else {
        x = parent_[x];
        y = parent_[y];
      }
    }
    const std::size_t join = x;
    constexpr double inf = std::numeric_limits<double>::infinity();
    double delta = inf;
    std::size_t out = root_;
    int side = 0;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      const double d = dir_[w] == up ? flow_[w] : inf;
      if (d < delta) {
        delta = d;
        out = w;
        side = 1;
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      const double d = dir_[w] == down ? flow_[w] : inf;
      if (d <= delta) {
        delta = d;
        out = w;
        side = 2;
      }
    }
    require(side != 0, "transport: unbounded cycle");
    for (std::size_t w = first; w != join; w = parent_[w]) flow_[w] += dir_[w] == up ? -delta : delta;
    for (std::size_t w = second; w != join; w = parent_[w]) flow_[w] += dir_[w] == up ? delta : -delta;
    for (std::size_t w = first; w != join; w = parent_[w])
      if (flow_[w] < flow_eps_) flow_[w] = 0;
    for (std::size_t w = second; w != join; w = parent_[w])
      if (flow_[w] < flow_eps_) flow_[w] = 0;

    // Re-hang the path from the entering end to `out` below the other end.
    const std::size_t start = side == 1 ? first : second;
    const std::size_t anchor = side == 1 ? second : first;
    std::size_t node = start, new_parent = anchor, new_pred = e;
    Dir new_dir = side == 1 ? up : down;
    double new_flow = delta;
    for (;;) {
      const std::size_t old_parent = parent_[node];
      const std::size_t old_pred = pred_[node];
      const Dir old_dir = dir_[node];
      const double old_flow = flow_[node];
      detach(node);
      attach(node, new_parent);
      pred_[node] = new_pred;
      dir_[node] = new_dir;
      flow_[node] = new_flow;
      if (node == out) break;
      new_parent = node;
      new_pred = old_pred;
      new_dir = old_dir == up ? down : up;
      new_flow = old_flow;
      node = old_parent;
    }
    // Shift potentials and depths of the moved subtree.
    const double shift = side == 1 ? -rc : rc;
    stack_.clear();
    stack_.push_back(start);
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      pi_[w] += shift;
      depth_[w] = depth_[parent_[w]] + 1;
      for (auto c : children_[w]) stack_.push_back(c);
    }
  }

  void detach(std::size_t node) {
    auto& sib = children_[parent_[node]];
    const std::size_t p = pos_[node];
    sib[p] = sib.back();
    pos_[sib[p]] = p;
    sib.pop_back();
  }
  void attach(std::size_t node, std::size_t par) {
    parent_[node] = par;
    pos_[node] = children_[par].size();
    children_[par].push_back(node);
  }

  // Potentials from scratch along the tree, removing drift from the
  // incremental shifts.
  void recompute_potentials() {
    pi_[root_] = 0;
    stack_.assign(children_[root_].begin(), children_[root_].end());
    while (!stack_.empty()) {
      const std::size_t w = stack_.back();
      stack_.pop_back();
      const std::size_t e = pred_[w];
      const double c = e < real_arcs_ ? arc_cost(e) : big_m_;
      // Tree arcs have zero reduced cost: c + pi[tail] - pi[head] = 0.
      pi_[w] = dir_[w] == up ? pi_[parent_[w]] - c : pi_[parent_[w]] + c;
      for (auto ch : children_[w]) stack_.push_back(ch);
    }
  }

  std::size_t n_, m_, nodes_ = 0, root_ = 0, real_arcs_ = 0, block_ = 64, pivots_ = 0;
  Cost cost_;
  double big_m_ = 0, eps_ = 0, flow_eps_ = 0;
  std::vector<std::size_t> parent_, pred_, depth_, pos_, stack_;
  std::vector<Dir> dir_;
  std::vector<double> flow_, pi_;
  std::vector<std::vector<std::size_t>> children_;
};

template <class Cost>
TransportResult solve(const std::vector<double>& a, const std::vector<double>& b, Cost cost) {
  require(!a.empty() && !b.empty(), "transport: empty side");
  for (double w : a) require(w > 0 && std::isfinite(w), "transport: supplies must be positive");
  for (double w : b) require(w > 0 && std::isfinite(w), "transport: demands must be positive");
  NetworkSimplex<Cost> ns(a, b, std::move(cost));
  ns.run();
  TransportResult r = ns.result();
  for (std::size_t i = 0; i < a.size(); ++i) r.dual += a[i] * r.u[i];
  for (std::size_t j = 0; j < b.size(); ++j) r.dual += b[j] * r.v[j];
  return r;
}

}  // namespace

TransportResult solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                const std::function<double(std::size_t, std::size_t)>& cost) {
  return solve(supply, demand, cost);
}

TransportResult solve_transport(const std::vector<Point>& from, const std::vector<double>& supply,
                                const std::vector<Point>& to, const std::vector<double>& demand) {
  require(from.size() == supply.size() && to.size() == demand.size(), "transport: size mismatch");
  const Point* p = from.data();
  const Point* q = to.data();
  return solve(supply, demand, [p, q](std::size_t i, std::size_t j) { return distance(p[i], q[j]); });
}

}  // namespace qm
