#ifndef KMATCH_GRAPH_HPP
#define KMATCH_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace kmatch {

using Vertex = std::uint32_t;

/// An undirected weighted edge, normalized so that u < v.
template <class W>
struct BasicEdge {
  Vertex u = 0;
  Vertex v = 0;
  W w{};

  friend bool operator==(const BasicEdge&, const BasicEdge&) = default;
};

using Edge = BasicEdge<std::int64_t>;

/// beta(e) = (w, u, v), compared lexicographically.
template <class W>
constexpr auto beta(const BasicEdge<W>& e) noexcept {
  return std::tuple<W, Vertex, Vertex>(e.w, e.u, e.v);
}

template <class W>
constexpr bool beta_less(const BasicEdge<W>& a, const BasicEdge<W>& b) noexcept {
  return beta(a) < beta(b);
}

template <class W>
constexpr bool beta_greater(const BasicEdge<W>& a, const BasicEdge<W>& b) noexcept {
  return beta(b) < beta(a);
}

template <class W>
BasicEdge<W> make_edge(Vertex a, Vertex b, W w) {
  if (a == b) throw DomainError("self-loop");
  return a < b ? BasicEdge<W>{a, b, w} : BasicEdge<W>{b, a, w};
}

/// k vertex-disjoint edges, stored in decreasing beta order.
template <class W>
struct BasicMatching {
  std::vector<BasicEdge<W>> edges;
  W weight{};

  friend bool operator==(const BasicMatching&, const BasicMatching&) = default;
};

using Matching = BasicMatching<std::int64_t>;

enum class EdgeOp { Insert, Delete };

/// One stream element: an insertion or deletion of edge (u, v) with weight w.
struct EdgeUpdate {
  Edge edge;
  EdgeOp op = EdgeOp::Insert;

  friend bool operator==(const EdgeUpdate&, const EdgeUpdate&) = default;
};

template <class W>
BasicMatching<W> make_matching(std::vector<BasicEdge<W>> edges) {
  std::sort(edges.begin(), edges.end(), beta_greater<W>);
  W total{};
  for (const auto& e : edges) total += e.w;
  return {std::move(edges), total};
}

/// Triangular id v(v-1)/2 + u of the pair u < v.
inline std::uint64_t edge_id(Vertex u, Vertex v, std::uint64_t n) {
  if (u >= v) throw DomainError("edge_id needs u < v");
  if (v >= n) throw DomainError("edge_id vertex out of range");
  return static_cast<std::uint64_t>(v) * (v - 1) / 2 + u;
}

inline std::uint64_t edge_id_count(std::uint64_t n) noexcept { return n * (n - 1) / 2; }

inline std::pair<Vertex, Vertex> decode_edge_id(std::uint64_t id) {
  auto v = static_cast<std::uint64_t>(std::sqrt(2.0L * static_cast<long double>(id))) + 1;
  while (v * (v - 1) / 2 > id) --v;
  while ((v + 1) * v / 2 <= id) ++v;
  return {static_cast<Vertex>(id - v * (v - 1) / 2), static_cast<Vertex>(v)};
}

/// Keeps one copy per vertex pair, the beta-maximum one.
template <class W>
std::vector<BasicEdge<W>> dedupe_pairs(std::span<const BasicEdge<W>> edges) {
  std::vector<BasicEdge<W>> out(edges.begin(), edges.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) != std::tie(b.u, b.v) ? std::tie(a.u, a.v) < std::tie(b.u, b.v) : beta_greater(a, b);
  });
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.u == b.u && a.v == b.v; }),
            out.end());
  return out;
}

/// True when `m` has exactly k pairwise vertex-disjoint edges and the right weight.
template <class W>
bool is_k_matching(const BasicMatching<W>& m, std::size_t k) {
  if (m.edges.size() != k) return false;
  std::set<Vertex> seen;
  W total{};
  for (const auto& e : m.edges) {
    if (e.u >= e.v) return false;
    if (!seen.insert(e.u).second || !seen.insert(e.v).second) return false;
    total += e.w;
  }
  return total == m.weight;
}

/// Current edge multiset of a stream prefix; tracks insertions and deletions.
class LiveGraph {
 public:
  void insert(const Edge& e) { ++count_[{e.u, e.v, e.w}]; }

  void erase(const Edge& e) {
    auto it = count_.find({e.u, e.v, e.w});
    if (it == count_.end()) {
      count_[{e.u, e.v, e.w}] = -1;
      return;
    }
    if (--it->second == 0) count_.erase(it);
  }

  bool contains(const Edge& e) const {
    auto it = count_.find({e.u, e.v, e.w});
    return it != count_.end() && it->second > 0;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [key, c] : count_) {
      if (c > 0) out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key)});
    }
    return out;
  }

  /// True weight of the live copy of pair (u, v), the beta-maximum one if several.
  std::optional<std::int64_t> weight_of(Vertex u, Vertex v) const {
    std::optional<std::int64_t> best;
    for (auto it = count_.lower_bound({u, v, INT64_MIN}); it != count_.end(); ++it) {
      if (std::get<0>(it->first) != u || std::get<1>(it->first) != v) break;
      if (it->second > 0) best = std::get<2>(it->first);
    }
    return best;
  }

 private:
  std::map<std::tuple<Vertex, Vertex, std::int64_t>, std::int64_t> count_;
};

}  // namespace kmatch

#endif  // KMATCH_GRAPH_HPP
