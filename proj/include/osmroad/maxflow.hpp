#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace osmroad {

/// Boykov-Kolmogorov max-flow on a graph with terminal (source/sink) capacities.
/// Arcs are stored in sister pairs (arc ^ 1 is the reverse arc).
class MaxFlow {
 public:
  enum class Segment { source, sink };

  explicit MaxFlow(std::size_t nodes = 0) { reset(nodes); }

  void reset(std::size_t nodes) {
    nodes_.assign(nodes, Node{});
    arcs_.clear();
    flow_ = 0.0;
    solved_ = false;
  }

  void reserve_edges(std::size_t edges) { arcs_.reserve(2 * edges); }

  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Adds capacity from the source and to the sink; the common part flows directly.
  void add_tweights(std::size_t i, double cap_source, double cap_sink) {
    auto& n = nodes_[i];
    const double delta = n.tr_cap;
    if (delta > 0) {
      cap_source += delta;
    } else {
      cap_sink -= delta;
    }
    flow_ += cap_source < cap_sink ? cap_source : cap_sink;
    n.tr_cap = cap_source - cap_sink;
  }

  /// Edge i -> j with capacity `cap` and reverse capacity `rev_cap`.
  void add_edge(std::size_t i, std::size_t j, double cap, double rev_cap) {
    const auto a = static_cast<std::int32_t>(arcs_.size());
    arcs_.push_back({static_cast<std::int32_t>(j), nodes_[i].first, cap});
    nodes_[i].first = a;
    arcs_.push_back({static_cast<std::int32_t>(i), nodes_[j].first, rev_cap});
    nodes_[j].first = a + 1;
  }

  double solve() {
    init();
    std::int32_t current = kNone;
    while (true) {
      std::int32_t i = current;
      current = kNone;
      if (i != kNone) {
        nodes_[static_cast<std::size_t>(i)].in_queue = false;
        if (nodes_[static_cast<std::size_t>(i)].parent == kNone) i = kNone;
      }
      if (i == kNone) {
        i = next_active();
        if (i == kNone) break;
      }
      const std::int32_t meet = grow(i);
      ++time_;
      if (meet != kNone) {
        // Keep growing from the same node after the augmentation.
        nodes_[static_cast<std::size_t>(i)].in_queue = true;
        current = i;
        augment(meet);
        adopt_orphans();
      }
    }
    solved_ = true;
    return flow_;
  }

  double flow() const noexcept { return flow_; }

  /// Side of the minimum cut. Nodes reachable from neither terminal go to the source side.
  Segment segment(std::size_t i) const {
    const auto& n = nodes_[i];
    if (n.parent != kNone && n.is_sink) return Segment::sink;
    return Segment::source;
  }

 private:
  static constexpr std::int32_t kNone = -1;
  static constexpr std::int32_t kTerminal = -2;
  static constexpr std::int32_t kOrphan = -3;
  static constexpr int kInfiniteDist = std::numeric_limits<int>::max();

  struct Arc {
    std::int32_t head;
    std::int32_t next;
    double r_cap;
  };

  struct Node {
    std::int32_t first = kNone;
    std::int32_t parent = kNone;  // arc to the parent, or kNone / kTerminal / kOrphan
    double tr_cap = 0.0;          // > 0: residual from source, < 0: residual to sink
    long ts = 0;
    int dist = 0;
    bool is_sink = false;
    bool in_queue = false;
  };

  static std::int32_t sister(std::int32_t a) { return a ^ 1; }
  Arc& arc(std::int32_t a) { return arcs_[static_cast<std::size_t>(a)]; }
  Node& node(std::int32_t i) { return nodes_[static_cast<std::size_t>(i)]; }

  void set_active(std::int32_t i) {
    auto& n = node(i);
    if (!n.in_queue) {
      n.in_queue = true;
      active_.push_back(i);
    }
  }

  std::int32_t next_active() {
    while (!active_.empty()) {
      const std::int32_t i = active_.front();
      active_.pop_front();
      node(i).in_queue = false;
      if (node(i).parent != kNone) return i;
    }
    return kNone;
  }

  void init() {
    active_.clear();
    orphans_.clear();
    time_ = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      auto& n = nodes_[k];
      n.in_queue = false;
      n.ts = 0;
      if (n.tr_cap > 0) {
        n.is_sink = false;
        n.parent = kTerminal;
        n.dist = 1;
        set_active(static_cast<std::int32_t>(k));
      } else if (n.tr_cap < 0) {
        n.is_sink = true;
        n.parent = kTerminal;
        n.dist = 1;
        set_active(static_cast<std::int32_t>(k));
      } else {
        n.parent = kNone;
      }
    }
  }

  // Grows the tree of node i; returns the arc (source side -> sink side) where the two
  // trees meet, or kNone.
  std::int32_t grow(std::int32_t i) {
    Node& ni = node(i);
    for (std::int32_t a = ni.first; a != kNone; a = arc(a).next) {
      const double cap = ni.is_sink ? arc(sister(a)).r_cap : arc(a).r_cap;
      if (cap <= 0) continue;
      const std::int32_t j = arc(a).head;
      Node& nj = node(j);
      if (nj.parent == kNone) {
        nj.is_sink = ni.is_sink;
        nj.parent = sister(a);
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
        set_active(j);
      } else if (nj.is_sink != ni.is_sink) {
        return ni.is_sink ? sister(a) : a;
      } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
        nj.parent = sister(a);
        nj.ts = ni.ts;
        nj.dist = ni.dist + 1;
      }
    }
    return kNone;
  }

  void set_orphan_front(std::int32_t i) {
    node(i).parent = kOrphan;
    orphans_.push_front(i);
  }

  void set_orphan_rear(std::int32_t i) {
    node(i).parent = kOrphan;
    orphans_.push_back(i);
  }

  void augment(std::int32_t middle) {
    double bottleneck = arc(middle).r_cap;
    std::int32_t i = arc(sister(middle)).head;
    while (node(i).parent != kTerminal) {
      const std::int32_t a = node(i).parent;
      if (bottleneck > arc(sister(a)).r_cap) bottleneck = arc(sister(a)).r_cap;
      i = arc(a).head;
    }
    if (bottleneck > node(i).tr_cap) bottleneck = node(i).tr_cap;
    i = arc(middle).head;
    while (node(i).parent != kTerminal) {
      const std::int32_t a = node(i).parent;
      if (bottleneck > arc(a).r_cap) bottleneck = arc(a).r_cap;
      i = arc(a).head;
    }
    if (bottleneck > -node(i).tr_cap) bottleneck = -node(i).tr_cap;

    arc(sister(middle)).r_cap += bottleneck;
    arc(middle).r_cap -= bottleneck;

    i = arc(sister(middle)).head;
    while (node(i).parent != kTerminal) {
      const std::int32_t a = node(i).parent;
      arc(a).r_cap += bottleneck;
      arc(sister(a)).r_cap -= bottleneck;
      const std::int32_t up = arc(a).head;
      if (arc(sister(a)).r_cap <= 0) set_orphan_front(i);
      i = up;
    }
    node(i).tr_cap -= bottleneck;
    if (node(i).tr_cap <= 0) set_orphan_front(i);

    i = arc(middle).head;
    while (node(i).parent != kTerminal) {
      const std::int32_t a = node(i).parent;
      arc(sister(a)).r_cap += bottleneck;
      arc(a).r_cap -= bottleneck;
      const std::int32_t up = arc(a).head;
      if (arc(a).r_cap <= 0) set_orphan_front(i);
      i = up;
    }
    node(i).tr_cap += bottleneck;
    if (node(i).tr_cap >= 0) set_orphan_front(i);

    flow_ += bottleneck;
  }

  void adopt_orphans() {
    while (!orphans_.empty()) {
      const std::int32_t i = orphans_.front();
      orphans_.pop_front();
      process_orphan(i);
    }
  }

  void process_orphan(std::int32_t i) {
    const bool sink = node(i).is_sink;
    std::int32_t best_arc = kNone;
    int best_dist = kInfiniteDist;
    for (std::int32_t a0 = node(i).first; a0 != kNone; a0 = arc(a0).next) {
      // Candidate parent j must have residual capacity toward i along its tree direction.
      const double cap = sink ? arc(a0).r_cap : arc(sister(a0)).r_cap;
      if (cap <= 0) continue;
      std::int32_t j = arc(a0).head;
      if (node(j).is_sink != sink || node(j).parent == kNone) continue;
      // Walk to the root, checking that j's tree path ends at a terminal.
      int d = 0;
      while (true) {
        Node& nj = node(j);
        if (nj.ts == time_) {
          d += nj.dist;
          break;
        }
        const std::int32_t a = nj.parent;
        ++d;
        if (a == kTerminal) {
          nj.ts = time_;
          nj.dist = 1;
          break;
        }
        if (a == kOrphan) {
          d = kInfiniteDist;
          break;
        }
        j = arc(a).head;
      }
      if (d < kInfiniteDist) {
        if (d < best_dist) {
          best_arc = a0;
          best_dist = d;
        }
        // Stamp distances along the verified path.
        for (j = arc(a0).head; node(j).ts != time_; j = arc(node(j).parent).head) {
          node(j).ts = time_;
          node(j).dist = d--;
        }
      }
    }
    Node& ni = node(i);
    ni.parent = best_arc;
    if (best_arc != kNone) {
      ni.ts = time_;
      ni.dist = best_dist + 1;
      return;
    }
    // No valid parent: i becomes free; neighbours that could reach it become active and
    // its children become orphans.
    for (std::int32_t a0 = ni.first; a0 != kNone; a0 = arc(a0).next) {
      const std::int32_t j = arc(a0).head;
      Node& nj = node(j);
      if (nj.is_sink != sink || nj.parent == kNone) continue;
      const double cap = sink ? arc(a0).r_cap : arc(sister(a0)).r_cap;
      if (cap > 0) set_active(j);
      if (nj.parent != kTerminal && nj.parent != kOrphan && arc(nj.parent).head == i) {
        set_orphan_rear(j);
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<std::int32_t> active_;
  std::deque<std::int32_t> orphans_;
  double flow_ = 0.0;
  long time_ = 0;
  bool solved_ = false;
};

}  // namespace osmroad
