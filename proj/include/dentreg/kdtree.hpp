#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dentreg/errors.hpp"
#include "dentreg/types.hpp"

namespace dentreg {

// Immutable kd-tree over a 3xN point matrix. Queries return exactly what a
// brute-force scan would: neighbors ordered by (squared distance, index),
// ties resolved toward the lower index. Distances are computed with the same
// expression as the scan, so results are bit-equal, not just set-equal.
// Safe for concurrent read-only queries.
template <typename Scalar>
class KdTreeT {
 public:
  using Vec = Eigen::Vector3<Scalar>;

  explicit KdTreeT(PointsT<Scalar> pts) : pts_(std::move(pts)) {
    const Index n = pts_.cols();
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(static_cast<std::size_t>(n));
    if (n > 0) root_ = build(0, static_cast<std::int32_t>(n));
  }

  Index size() const { return pts_.cols(); }
  const PointsT<Scalar>& points() const { return pts_; }

  // Indices of the k nearest points to q, nearest first.
  std::vector<Index> knn(const Vec& q, int k) const {
    if (k <= 0 || static_cast<Index>(k) > size())
      throw Error("knn: k out of range");
    Best best(k);
    search(root_, q, best);
    return best.sorted_indices();
  }

  Index nearest(const Vec& q) const { return knn(q, 1)[0]; }

  // Squared distance from q to its nearest indexed point.
  Scalar nearest_dist2(const Vec& q, Index* idx = nullptr) const {
    Best best(1);
    search(root_, q, best);
    if (idx) *idx = best.heap[0].second;
    return best.heap[0].first;
  }

 private:
  struct Node {
    std::int32_t point = -1;  // column index of the splitting point
    std::int8_t axis = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  // Bounded max-heap keyed lexicographically on (dist2, index) so that equal
  // distances keep the lower index.
  struct Best {
    explicit Best(int k) : capacity(k) { heap.reserve(k); }
    int capacity;
    std::vector<std::pair<Scalar, Index>> heap;

    bool full() const { return static_cast<int>(heap.size()) == capacity; }
    const std::pair<Scalar, Index>& worst() const { return heap.front(); }

    void offer(Scalar d2, Index idx) {
      const std::pair<Scalar, Index> cand{d2, idx};
      if (!full()) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < worst()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }

    std::vector<Index> sorted_indices() {
      std::sort(heap.begin(), heap.end());
      std::vector<Index> out(heap.size());
      for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
      return out;
    }
  };

  std::int32_t build(std::int32_t lo, std::int32_t hi) {
    if (lo >= hi) return -1;
    Eigen::Vector3<Scalar> mn = pts_.col(order_[lo]);
    Eigen::Vector3<Scalar> mx = mn;
    for (std::int32_t i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(pts_.col(order_[i]));
      mx = mx.cwiseMax(pts_.col(order_[i]));
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);

    const std::int32_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid,
                     order_.begin() + hi,
                     [&](std::int32_t a, std::int32_t b) {
                       const Scalar ca = pts_(axis, a);
                       const Scalar cb = pts_(axis, b);
                       return ca < cb || (ca == cb && a < b);
                     });

    Node node;
    node.point = order_[mid];
    node.axis = static_cast<std::int8_t>(axis);
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    const std::int32_t left = build(lo, mid);
    const std::int32_t right = build(mid + 1, hi);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::int32_t id, const Vec& q, Best& best) const {
    if (id < 0) return;
    const Node& node = nodes_[id];
    const Index p = node.point;
    best.offer((pts_.col(p) - q).squaredNorm(), p);

    const Scalar delta = q[node.axis] - pts_(node.axis, p);
    const std::int32_t near = delta < Scalar(0) ? node.left : node.right;
    const std::int32_t far = delta < Scalar(0) ? node.right : node.left;
    search(near, q, best);
    // A far-side point can still tie the current worst (and win on index),
    // so prune only on strict inequality.
    if (!best.full() || delta * delta <= best.worst().first)
      search(far, q, best);
  }

  PointsT<Scalar> pts_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

using KdTree = KdTreeT<double>;

}  // namespace dentreg
