#ifndef KMATCH_EXACT_MATCHING_HPP
#define KMATCH_EXACT_MATCHING_HPP

// Exact maximum-weight k-matching on small edge sets, and brute-force oracles.
//
// Ties between equal-weight k-matchings go to the one whose beta keys, listed
// in decreasing order, form the lexicographically largest sequence.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace kmatch {

namespace detail {

/// Maximum-cardinality matching size via Edmonds' blossom search.
class BlossomMatcher {
 public:
  explicit BlossomMatcher(std::vector<std::vector<int>> adj)
      : n_(static_cast<int>(adj.size())), adj_(std::move(adj)), match_(n_, -1), parent_(n_), base_(n_),
        used_(n_), blossom_(n_) {}

  std::size_t solve() {
    std::size_t size = 0;
    for (int v = 0; v < n_; ++v) {
      if (match_[v] != -1) continue;
      for (int to : adj_[v]) {
        if (match_[to] == -1) {
          match_[to] = v;
          match_[v] = to;
          ++size;
          break;
        }
      }
    }
    for (int v = 0; v < n_; ++v) {
      if (match_[v] != -1) continue;
      int w = find_path(v);
      if (w == -1) continue;
      ++size;
      while (w != -1) {
        const int pv = parent_[w];
        const int ppv = match_[pv];
        match_[w] = pv;
        match_[pv] = w;
        w = ppv;
      }
    }
    return size;
  }

 private:
  int lca(int a, int b) {
    std::vector<char> seen(n_, 0);
    while (true) {
      a = base_[a];
      seen[a] = 1;
      if (match_[a] == -1) break;
      a = parent_[match_[a]];
    }
    while (true) {
      b = base_[b];
      if (seen[b] != 0) return b;
      b = parent_[match_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      blossom_[base_[v]] = blossom_[base_[match_[v]]] = 1;
      parent_[v] = child;
      child = match_[v];
      v = parent_[match_[v]];
    }
  }

  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), 0);
    std::fill(parent_.begin(), parent_.end(), -1);
    std::iota(base_.begin(), base_.end(), 0);
    used_[root] = 1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int to : adj_[v]) {
        if (base_[v] == base_[to] || match_[v] == to) continue;
        if (to == root || (match_[to] != -1 && parent_[match_[to]] != -1)) {
          const int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), 0);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n_; ++i) {
            if (blossom_[base_[i]] != 0) {
              base_[i] = cur;
              if (used_[i] == 0) {
                used_[i] = 1;
                queue.push_back(i);
              }
            }
          }
        } else if (parent_[to] == -1) {
          parent_[to] = v;
          if (match_[to] == -1) return to;
          used_[match_[to]] = 1;
          queue.push_back(match_[to]);
        }
      }
    }
    return -1;
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_, parent_, base_;
  std::vector<char> used_, blossom_;
};

template <class W>
bool beta_sequence_greater(const std::vector<BasicEdge<W>>& a, const std::vector<BasicEdge<W>>& b) {
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end(), beta_less<W>);
}

template <class W>
class BranchAndBound {
 public:
  BranchAndBound(std::vector<BasicEdge<W>> edges, std::size_t k) : edges_(std::move(edges)), k_(k) {
    std::unordered_map<Vertex, int> index;
    for (const auto& e : edges_) {
      for (Vertex x : {e.u, e.v}) index.emplace(x, static_cast<int>(index.size()));
    }
    slots_.reserve(edges_.size());
    for (const auto& e : edges_) slots_.push_back({index[e.u], index[e.v]});
    used_.assign(index.size(), 0);
  }

  std::optional<BasicMatching<W>> run() {
    chosen_.clear();
    dfs(0, W{});
    if (!best_weight_) return std::nullopt;
    std::vector<BasicEdge<W>> out;
    for (auto i : best_) out.push_back(edges_[i]);
    return BasicMatching<W>{std::move(out), *best_weight_};
  }

 private:
  bool free(std::size_t i) const { return used_[slots_[i].first] == 0 && used_[slots_[i].second] == 0; }

  void dfs(std::size_t start, W weight) {
    if (chosen_.size() == k_) {
      if (!best_weight_ || weight > *best_weight_) {
        best_weight_ = weight;
        best_ = chosen_;
      }
      return;
    }
    const std::size_t need = k_ - chosen_.size();
    W bound = weight;
    std::size_t found = 0;
    for (std::size_t i = start; i < edges_.size() && found < need; ++i) {
      if (free(i)) {
        bound += edges_[i].w;
        ++found;
      }
    }
    if (found < need) return;
    if (best_weight_ && !(bound > *best_weight_)) return;

    for (std::size_t i = start; i < edges_.size(); ++i) {
      if (!free(i)) continue;
      if (best_weight_ && !(weight + edges_[i].w * static_cast<W>(need) > *best_weight_)) break;
      used_[slots_[i].first] = used_[slots_[i].second] = 1;
      chosen_.push_back(i);
      dfs(i + 1, weight + edges_[i].w);
      chosen_.pop_back();
      used_[slots_[i].first] = used_[slots_[i].second] = 0;
    }
  }

  std::vector<BasicEdge<W>> edges_;
  std::size_t k_;
  std::vector<std::pair<int, int>> slots_;
  std::vector<char> used_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_;
  std::optional<W> best_weight_;
};

}  // namespace detail

/// Size of a maximum-cardinality matching of the edge set (weights ignored).
template <class W>
std::size_t matching_number(std::span<const BasicEdge<W>> edges) {
  std::unordered_map<Vertex, int> index;
  for (const auto& e : edges) {
    for (Vertex x : {e.u, e.v}) index.emplace(x, static_cast<int>(index.size()));
  }
  std::vector<std::vector<int>> adj(index.size());
  for (const auto& e : edges) {
    adj[index[e.u]].push_back(index[e.v]);
    adj[index[e.v]].push_back(index[e.u]);
  }
  return detail::BlossomMatcher(std::move(adj)).solve();
}

/// Maximum-weight matching with exactly k edges, or nullopt when none exists.
/// Branch-and-bound over edges in decreasing beta order; parallel copies of
/// a pair collapse to the beta-maximum one.
template <class W>
std::optional<BasicMatching<W>> solve_exact(std::span<const BasicEdge<W>> edges, std::size_t k) {
  if (k < 1) throw ParameterError("solve_exact needs k >= 1");
  auto simple = dedupe_pairs(edges);
  if (simple.size() < k) return std::nullopt;
  if (matching_number(std::span<const BasicEdge<W>>(simple)) < k) return std::nullopt;
  std::sort(simple.begin(), simple.end(), beta_greater<W>);
  return detail::BranchAndBound<W>(std::move(simple), k).run();
}

template <class W>
std::optional<BasicMatching<W>> solve_exact(const std::vector<BasicEdge<W>>& edges, std::size_t k) {
  return solve_exact(std::span<const BasicEdge<W>>(edges), k);
}

/// Above this many k-subsets the oracles refuse to run.
inline constexpr std::uint64_t kOracleSubsetLimit = 50'000'000;

namespace detail {

inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) return cap + 1;
  }
  return r;
}

// Visits every k-subset of [0, m) in lexicographic order and keeps the best
// admissible one under (weight, beta sequence).
template <class W, class Admit>
std::optional<BasicMatching<W>> exhaustive_best(std::span<const BasicEdge<W>> input, std::size_t k, Admit admit) {
  if (k < 1) throw ParameterError("oracle needs k >= 1");
  const auto edges = dedupe_pairs(input);
  const std::size_t m = edges.size();
  if (binomial_capped(m, k, kOracleSubsetLimit) > kOracleSubsetLimit) {
    throw ParameterError("instance too large for the enumeration oracle");
  }
  if (m < k) return std::nullopt;
  std::optional<BasicMatching<W>> best;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<BasicEdge<W>> pick(k);
  while (true) {
    for (std::size_t t = 0; t < k; ++t) pick[t] = edges[idx[t]];
    if (admit(pick)) {
      auto cand = make_matching(pick);
      if (!best || cand.weight > best->weight ||
          (cand.weight == best->weight && beta_sequence_greater(cand.edges, best->edges))) {
        best = std::move(cand);
      }
    }
    std::size_t t = k;
    while (t > 0 && idx[t - 1] == m - k + (t - 1)) --t;
    if (t == 0) break;
    ++idx[t - 1];
    for (std::size_t s = t; s < k; ++s) idx[s] = idx[s - 1] + 1;
  }
  return best;
}

template <class W>
bool pairwise_disjoint(const std::vector<BasicEdge<W>>& pick) {
  for (std::size_t a = 0; a < pick.size(); ++a) {
    for (std::size_t b = a + 1; b < pick.size(); ++b) {
      if (pick[a].u == pick[b].u || pick[a].u == pick[b].v || pick[a].v == pick[b].u || pick[a].v == pick[b].v) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Brute force over all k-subsets of edges.
template <class W>
std::optional<BasicMatching<W>> enumerate_oracle(std::span<const BasicEdge<W>> edges, std::size_t k) {
  return detail::exhaustive_best<W>(edges, k, [](const auto& pick) { return detail::pairwise_disjoint(pick); });
}

template <class W>
std::optional<BasicMatching<W>> enumerate_oracle(const std::vector<BasicEdge<W>>& edges, std::size_t k) {
  return enumerate_oracle(std::span<const BasicEdge<W>>(edges), k);
}

/// Brute force over k-matchings whose 2k endpoints fall in 2k distinct parts.
template <class W, class PartFn>
std::optional<BasicMatching<W>> max_nice_matching(std::span<const BasicEdge<W>> edges, PartFn part, std::size_t k) {
  return detail::exhaustive_best<W>(edges, k, [&](const auto& pick) {
    std::vector<std::uint64_t> parts;
    for (const auto& e : pick) {
      parts.push_back(part(e.u));
      parts.push_back(part(e.v));
    }
    std::sort(parts.begin(), parts.end());
    return std::adjacent_find(parts.begin(), parts.end()) == parts.end();
  });
}

template <class W, class PartFn>
std::optional<BasicMatching<W>> max_nice_matching(const std::vector<BasicEdge<W>>& edges, PartFn part, std::size_t k) {
  return max_nice_matching(std::span<const BasicEdge<W>>(edges), part, k);
}

}  // namespace kmatch

#endif  // KMATCH_EXACT_MATCHING_HPP
