#ifndef KMATCH_INSERT_MATCHER_HPP
#define KMATCH_INSERT_MATCHER_HPP

// Maximum-weight k-matching over an insert-only edge stream in O(k^2) edges
// per copy.
//
// Vertices are hashed into 4k^2 parts. With q = k(16k-1), position i of the
// stream has the "reduced" graph G^f at every multiple of q,
//
//   G^f_q = {},   G^f_i = RedCom(G^f_{i-q} + e_{i-2q+1} .. e_{i-q}),
//
// and the queryable graph G^s_i = G^f_hat + e_{i*+1} .. e_i, where hat is the
// last multiple of q strictly below i and i* = max(hat - q, 0). The RedCom
// that yields G^f_{jq} runs as a resumable task spread over the q updates
// (jq-q, jq] with a fixed per-update operation budget.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "exact_matching.hpp"
#include "field_hash.hpp"
#include "graph.hpp"
#include "l0_sampler.hpp"

namespace kmatch {

/// q = k(16k - 1).
inline constexpr std::uint64_t reduce_quota(std::uint64_t k) noexcept { return k * (16 * k - 1); }

/// Number of vertex parts, 4k^2.
inline constexpr std::uint64_t part_count(std::uint64_t k) noexcept { return 4 * k * k; }

/// For every pair of distinct parts, the beta-maximum edge between them.
/// Intra-part edges are dropped. Output in decreasing beta order.
inline std::vector<Edge> compact(std::span<const Edge> h, const UniversalHash& f) {
  std::map<std::pair<std::uint64_t, std::uint64_t>, Edge> best;
  for (const Edge& e : h) {
    const std::uint64_t a = f(e.u);
    const std::uint64_t b = f(e.v);
    if (a == b) continue;
    auto [it, fresh] = best.try_emplace({std::min(a, b), std::max(a, b)}, e);
    if (!fresh && beta_less(it->second, e)) it->second = e;
  }
  std::vector<Edge> out;
  out.reserve(best.size());
  for (const auto& [key, e] : best) out.push_back(e);
  std::sort(out.begin(), out.end(), beta_greater<std::int64_t>);
  return out;
}

/// compact(h), restricted to edges among the 8k beta-heaviest at both of
/// their parts, then cut to the q beta-heaviest. Output in decreasing beta order.
inline std::vector<Edge> red_com(std::span<const Edge> h, const UniversalHash& f, std::uint64_t k) {
  const std::vector<Edge> c = compact(h, f);
  std::map<std::uint64_t, std::uint64_t> seen;  // part -> edges ranked so far
  std::vector<Edge> kept;
  std::vector<std::uint64_t> rank_u(c.size()), rank_v(c.size());
  for (std::size_t t = 0; t < c.size(); ++t) {  // c is already in decreasing beta order
    rank_u[t] = ++seen[f(c[t].u)];
    rank_v[t] = ++seen[f(c[t].v)];
  }
  for (std::size_t t = 0; t < c.size(); ++t) {
    if (rank_u[t] <= 8 * k && rank_v[t] <= 8 * k) kept.push_back(c[t]);
  }
  if (kept.size() > reduce_quota(k)) kept.resize(reduce_quota(k));
  return kept;
}

namespace detail {

inline std::uint64_t ceil_log2(std::uint64_t n) noexcept {
  return n <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(n - 1));
}

/// Element moves of a bottom-up merge sort on s items.
inline std::uint64_t merge_ops(std::uint64_t s) noexcept { return s * ceil_log2(s); }

}  // namespace detail

/// Upper bound on ReduceTask operations for an input of n edges.
inline std::uint64_t reduce_max_ops(std::uint64_t n, std::uint64_t q) noexcept {
  return 6 * n + 2 * detail::merge_ops(n) + detail::merge_ops(2 * n) + std::min(q, n);
}

/// Per-update budget that finishes any task on <= 2q edges within q updates.
inline std::uint64_t reduce_budget(std::uint64_t k) noexcept {
  const std::uint64_t q = reduce_quota(k);
  return (reduce_max_ops(2 * q, q) + q - 1) / q;
}

/// Index arrays a resumable reduction works in; sized once per copy.
struct ReduceWorkspace {
  explicit ReduceWorkspace(std::uint64_t q = 0)
      : ref(2 * q), pa(2 * q), pb(2 * q), kept(2 * q), bad(2 * q), inc_part(4 * q), inc_edge(4 * q), a(4 * q),
        tmp(4 * q) {}

  std::vector<std::uint32_t> ref;  // input index of each gathered edge
  std::vector<std::uint32_t> pa, pb;
  std::vector<std::uint32_t> kept;
  std::vector<std::uint8_t> bad;
  std::vector<std::uint32_t> inc_part, inc_edge;
  std::vector<std::uint32_t> a, tmp;

  std::uint64_t words() const noexcept {
    return ref.size() + pa.size() + pb.size() + kept.size() + bad.size() + inc_part.size() + inc_edge.size() +
           a.size() + tmp.size();
  }
};

/// RedCom over (G^f, ring slice) as a sequence of unit operations that can be
/// advanced a bounded number at a time. The ring must not overwrite the slice
/// before the task is done.
class ReduceTask {
 public:
  ReduceTask() = default;

  ReduceTask(std::shared_ptr<const std::vector<Edge>> gf, std::shared_ptr<const std::vector<Edge>> ring,
             std::uint64_t slice_first, std::uint64_t slice_len, const UniversalHash& f, std::uint64_t k,
             ReduceWorkspace* ws)
      : gf_(std::move(gf)), ring_(std::move(ring)), first_(slice_first), slice_len_(slice_len), f_(f), k_(k),
        q_(reduce_quota(k)), ws_(ws), phase_(Phase::Gather) {
    n_in_ = gf_->size() + slice_len_;
    if (n_in_ > 2 * q_) throw std::logic_error("reduce input exceeds 2q edges");
  }

  bool active() const noexcept { return phase_ != Phase::Idle; }
  bool done() const noexcept { return phase_ == Phase::Done; }
  std::uint64_t ops_done() const noexcept { return ops_; }
  std::uint64_t input_size() const noexcept { return n_in_; }

  /// Edges of the output built so far.
  std::uint64_t stored_edges() const noexcept { return out_ ? out_->size() : 0; }

  /// The edges the task reduces, in input order.
  std::vector<Edge> input() const {
    std::vector<Edge> v;
    for (std::uint64_t t = 0; t < n_in_; ++t) v.push_back(fetch(t));
    return v;
  }

  /// Performs at most `budget` unit operations; returns how many ran.
  std::uint64_t step(std::uint64_t budget) {
    std::uint64_t used = 0;
    while (used < budget && phase_ != Phase::Done && phase_ != Phase::Idle) {
      if (advance()) ++used;
    }
    ops_ += used;
    return used;
  }

  std::uint64_t run_to_completion() {
    std::uint64_t total = 0;
    while (active() && !done()) total += step(UINT64_MAX);
    return total;
  }

  std::shared_ptr<const std::vector<Edge>> take_result() {
    if (!done()) throw std::logic_error("reduce task not finished");
    phase_ = Phase::Idle;
    return std::move(out_);
  }

 private:
  enum class Phase { Idle, Gather, SortPairs, PairMax, Incidences, SortIncidences, Rank, Survive, SortBeta, Emit, Done };
  enum class Order { Pairs, Incidences, Beta };

  const Edge& fetch(std::uint64_t t) const {
    if (t < gf_->size()) return (*gf_)[t];
    return (*ring_)[(first_ + (t - gf_->size())) % ring_->size()];
  }
  const Edge& work_edge(std::uint32_t w) const { return fetch(ws_->ref[w]); }

  bool before(std::uint32_t x, std::uint32_t y) const {
    switch (order_) {
      case Order::Pairs:
        if (ws_->pa[x] != ws_->pa[y]) return ws_->pa[x] < ws_->pa[y];
        if (ws_->pb[x] != ws_->pb[y]) return ws_->pb[x] < ws_->pb[y];
        return beta_greater(work_edge(x), work_edge(y));
      case Order::Incidences:
        if (ws_->inc_part[x] != ws_->inc_part[y]) return ws_->inc_part[x] < ws_->inc_part[y];
        return beta_greater(work_edge(ws_->inc_edge[x]), work_edge(ws_->inc_edge[y]));
      case Order::Beta:
        return beta_greater(work_edge(x), work_edge(y));
    }
    return false;
  }

  void start_sort(std::uint64_t n, Order order) {
    order_ = order;
    sort_n_ = n;
    width_ = 1;
    lo_ = 0;
    run_open_ = false;
  }

  // One element move of the bottom-up merge sort of ws_->a[0, sort_n_).
  // Returns false (no work) once sorted; the result is then in ws_->a.
  bool sort_step() {
    if (width_ >= sort_n_) return false;
    auto& a = ws_->a;
    auto& t = ws_->tmp;
    if (!run_open_) {
      mid_ = std::min(lo_ + width_, sort_n_);
      hi_ = std::min(lo_ + 2 * width_, sort_n_);
      i_ = lo_;
      j_ = mid_;
      o_ = lo_;
      run_open_ = true;
    }
    if (i_ < mid_ && (j_ >= hi_ || !before(a[j_], a[i_]))) {
      t[o_++] = a[i_++];
    } else {
      t[o_++] = a[j_++];
    }
    if (o_ == hi_) {
      run_open_ = false;
      lo_ = hi_;
      if (lo_ >= sort_n_) {
        a.swap(t);
        width_ *= 2;
        lo_ = 0;
      }
    }
    return true;
  }

  // Runs one unit of the current phase, or moves to the next phase. Returns
  // true when a unit operation was spent.
  bool advance() {
    switch (phase_) {
      case Phase::Gather: {
        if (cursor_ == n_in_) {
          start_sort(gathered_, Order::Pairs);
          phase_ = Phase::SortPairs;
          return false;
        }
        const Edge& e = fetch(cursor_);
        const auto x = static_cast<std::uint32_t>(f_->eval_unchecked(e.u));
        const auto y = static_cast<std::uint32_t>(f_->eval_unchecked(e.v));
        if (x != y) {
          ws_->ref[gathered_] = static_cast<std::uint32_t>(cursor_);
          ws_->pa[gathered_] = std::min(x, y);
          ws_->pb[gathered_] = std::max(x, y);
          ws_->a[gathered_] = static_cast<std::uint32_t>(gathered_);
          ++gathered_;
        }
        ++cursor_;
        return true;
      }
      case Phase::SortPairs:
        if (sort_step()) return true;
        phase_ = Phase::PairMax;
        cursor_ = 0;
        return false;
      case Phase::PairMax: {
        if (cursor_ == gathered_) {
          phase_ = Phase::Incidences;
          cursor_ = 0;
          return false;
        }
        const std::uint32_t w = ws_->a[cursor_];
        const bool first = cursor_ == 0 || ws_->pa[ws_->a[cursor_ - 1]] != ws_->pa[w] ||
                           ws_->pb[ws_->a[cursor_ - 1]] != ws_->pb[w];
        if (first) ws_->kept[n_kept_++] = w;
        ++cursor_;
        return true;
      }
      case Phase::Incidences: {
        if (cursor_ == n_kept_) {
          start_sort(2 * n_kept_, Order::Incidences);
          phase_ = Phase::SortIncidences;
          return false;
        }
        const std::uint32_t w = ws_->kept[cursor_];
        const auto c = static_cast<std::uint32_t>(cursor_);
        ws_->inc_part[2 * c] = ws_->pa[w];
        ws_->inc_edge[2 * c] = w;
        ws_->inc_part[2 * c + 1] = ws_->pb[w];
        ws_->inc_edge[2 * c + 1] = w;
        ws_->a[2 * c] = 2 * c;
        ws_->a[2 * c + 1] = 2 * c + 1;
        ws_->bad[w] = 0;
        ++cursor_;
        return true;
      }
      case Phase::SortIncidences:
        if (sort_step()) return true;
        phase_ = Phase::Rank;
        cursor_ = 0;
        rank_ = 0;
        return false;
      case Phase::Rank: {
        if (cursor_ == 2 * n_kept_) {
          phase_ = Phase::Survive;
          cursor_ = 0;
          return false;
        }
        const std::uint32_t r = ws_->a[cursor_];
        if (cursor_ == 0 || ws_->inc_part[ws_->a[cursor_ - 1]] != ws_->inc_part[r]) rank_ = 0;
        if (++rank_ > 8 * k_) ws_->bad[ws_->inc_edge[r]] = 1;
        ++cursor_;
        return true;
      }
      case Phase::Survive: {
        if (cursor_ == n_kept_) {
          start_sort(n_survive_, Order::Beta);
          phase_ = Phase::SortBeta;
          return false;
        }
        const std::uint32_t w = ws_->kept[cursor_];
        if (ws_->bad[w] == 0) ws_->a[n_survive_++] = w;
        ++cursor_;
        return true;
      }
      case Phase::SortBeta:
        if (sort_step()) return true;
        phase_ = Phase::Emit;
        cursor_ = 0;
        out_ = std::make_shared<std::vector<Edge>>();
        out_->reserve(std::min(q_, n_survive_));
        return false;
      case Phase::Emit:
        if (cursor_ == std::min(q_, n_survive_)) {
          phase_ = Phase::Done;
          return false;
        }
        out_->push_back(work_edge(ws_->a[cursor_]));
        ++cursor_;
        return true;
      case Phase::Idle:
      case Phase::Done:
        return false;
    }
    return false;
  }

  std::shared_ptr<const std::vector<Edge>> gf_;
  std::shared_ptr<const std::vector<Edge>> ring_;
  std::uint64_t first_ = 0;
  std::uint64_t slice_len_ = 0;
  std::optional<UniversalHash> f_;
  std::uint64_t k_ = 0;
  std::uint64_t q_ = 0;
  ReduceWorkspace* ws_ = nullptr;
  Phase phase_ = Phase::Idle;
  std::uint64_t n_in_ = 0;
  std::uint64_t ops_ = 0;

  std::uint64_t cursor_ = 0;
  std::uint64_t gathered_ = 0;
  std::uint64_t n_kept_ = 0;
  std::uint64_t n_survive_ = 0;
  std::uint64_t rank_ = 0;
  std::shared_ptr<std::vector<Edge>> out_;

  Order order_ = Order::Pairs;
  std::uint64_t sort_n_ = 0, width_ = 1, lo_ = 0, mid_ = 0, hi_ = 0, i_ = 0, j_ = 0, o_ = 0;
  bool run_open_ = false;
};

/// Called when a window closes: (position, reduce input, reduce output).
using WindowObserver = std::function<void(std::uint64_t, const std::vector<Edge>&, const std::vector<Edge>&)>;

/// One independent pipeline of the insert-only algorithm.
class CopyState {
 public:
  template <class URBG>
  CopyState(std::uint64_t n, std::uint64_t k, URBG& rng)
      : CopyState(n, k, UniversalHash::draw(n, part_count(k), rng)) {}

  CopyState(std::uint64_t n, std::uint64_t k, UniversalHash f)
      : n_(n), k_(k), q_(reduce_quota(k)), budget_(reduce_budget(k)), f_(std::move(f)),
        ring_(std::make_shared<std::vector<Edge>>(2 * q_)), gf_hat_(std::make_shared<const std::vector<Edge>>()),
        ws_(std::make_unique<ReduceWorkspace>(q_)) {
    if (k < 1 || n < 2 || k > n / 2) throw ParameterError("insert-only matcher needs 1 <= k <= n/2");
    if (f_.range() != part_count(k)) throw ParameterError("partition hash must map into 4k^2 parts");
  }

  CopyState(const CopyState&) = delete;
  CopyState& operator=(const CopyState&) = delete;
  CopyState(CopyState&&) = default;
  CopyState& operator=(CopyState&&) = default;

  /// Processes edge e_{i+1}. Returns the unit operations spent.
  std::uint64_t update(const Edge& e) {
    if (e.u >= e.v) throw DomainError("insert needs u < v");
    if (e.v >= n_) throw DomainError("insert vertex out of range");
    if (e.w < 0) throw DomainError("negative edge weight");
    std::uint64_t ops = 0;
    if (gf_next_) {
      gf_hat_ = std::move(gf_next_);
      gf_next_.reset();
      ++ops;
    }
    ++i_;
    if (task_.active()) ops += task_.step(budget_);
    (*ring_)[(i_ - 1) % ring_->size()] = e;
    ++ops;
    if (i_ % q_ == 0) {
      std::shared_ptr<const std::vector<Edge>> gf;
      if (task_.active()) {
        if (!task_.done()) throw std::logic_error("reduce task missed its window");
        std::vector<Edge> in;
        if (observer_) in = task_.input();
        gf = task_.take_result();
        if (observer_) observer_(i_, in, *gf);
      } else {
        gf = std::make_shared<const std::vector<Edge>>();
      }
      gf_next_ = gf;
      task_ = ReduceTask(gf, ring_, i_ - q_, q_, f_, k_, ws_.get());
      ++ops;
    }
    peak_edges_ = std::max(peak_edges_, stored_edges());
    if (stored_edges() > 5 * q_) throw std::logic_error("copy stores more than 5q edges");
    last_ops_ = ops;
    return ops;
  }

  /// G^s_i: the last completed G^f plus the buffered edges after i*.
  std::vector<Edge> view() const {
    std::vector<Edge> out(gf_hat_->begin(), gf_hat_->end());
    const std::uint64_t lo = window_start();
    for (std::uint64_t p = lo + 1; p <= i_; ++p) out.push_back((*ring_)[(p - 1) % ring_->size()]);
    return out;
  }

  std::uint64_t position() const noexcept { return i_; }
  std::uint64_t q() const noexcept { return q_; }
  std::uint64_t k() const noexcept { return k_; }
  std::uint64_t budget() const noexcept { return budget_; }
  const UniversalHash& partition_hash() const noexcept { return f_; }
  std::uint64_t reduced_size() const noexcept { return gf_hat_->size(); }
  std::uint64_t buffered() const noexcept { return i_ - window_start(); }
  std::uint64_t last_ops() const noexcept { return last_ops_; }
  std::uint64_t peak_edges() const noexcept { return peak_edges_; }

  /// Edges held: current and pending G^f, buffered edges, partial task output.
  std::uint64_t stored_edges() const noexcept {
    return gf_hat_->size() + (gf_next_ ? gf_next_->size() : 0) + buffered() + task_.stored_edges();
  }

  /// Words of state: edges at 3 words, hash (p, a, b), workspace indices.
  std::uint64_t stored_words() const noexcept { return 3 * stored_edges() + 3 + ws_->words(); }

  void set_observer(WindowObserver obs) { observer_ = std::move(obs); }

 private:
  // i* for the current position.
  std::uint64_t window_start() const noexcept {
    if (i_ == 0) return 0;
    const std::uint64_t hat = ((i_ - 1) / q_) * q_;
    return hat >= q_ ? hat - q_ : 0;
  }

  std::uint64_t n_;
  std::uint64_t k_;
  std::uint64_t q_;
  std::uint64_t budget_;
  UniversalHash f_;
  std::shared_ptr<std::vector<Edge>> ring_;
  std::shared_ptr<const std::vector<Edge>> gf_hat_;
  std::shared_ptr<const std::vector<Edge>> gf_next_;
  std::unique_ptr<ReduceWorkspace> ws_;
  ReduceTask task_;
  std::uint64_t i_ = 0;
  std::uint64_t last_ops_ = 0;
  std::uint64_t peak_edges_ = 0;
  WindowObserver observer_;
};

/// ceil(log2(1/delta)) independent copies; the query solves the union of their views.
class InsertMatcher {
 public:
  template <class URBG>
  InsertMatcher(std::uint64_t n, std::uint64_t k, double delta, URBG& rng) : k_(k) {
    if (k < 1 || n < 2 || k > n / 2) throw ParameterError("insert-only matcher needs 1 <= k <= n/2");
    const unsigned copies = ceil_log2_inverse(delta);
    copies_.reserve(copies);
    for (unsigned c = 0; c < copies; ++c) copies_.emplace_back(n, k, rng);
  }

  std::uint64_t update(const Edge& e) {
    std::uint64_t ops = 0;
    for (auto& c : copies_) ops += c.update(e);
    last_ops_ = ops;
    return ops;
  }

  void update(const EdgeUpdate& upd) {
    if (upd.op != EdgeOp::Insert) throw ModelError("deletion in an insert-only stream");
    update(upd.edge);
  }

  std::vector<Edge> kernel() const {
    std::vector<Edge> all;
    for (const auto& c : copies_) {
      auto v = c.view();
      all.insert(all.end(), v.begin(), v.end());
    }
    return dedupe_pairs(std::span<const Edge>(all));
  }

  std::optional<Matching> query() const {
    const auto g = kernel();
    return solve_exact(std::span<const Edge>(g), k_);
  }

  std::uint64_t k() const noexcept { return k_; }
  std::size_t copy_count() const noexcept { return copies_.size(); }
  const CopyState& copy(std::size_t c) const { return copies_.at(c); }
  CopyState& copy(std::size_t c) { return copies_.at(c); }
  std::uint64_t last_ops() const noexcept { return last_ops_; }

  std::uint64_t stored_words() const noexcept {
    std::uint64_t w = 0;
    for (const auto& c : copies_) w += c.stored_words();
    return w;
  }

 private:
  std::uint64_t k_;
  std::vector<CopyState> copies_;
  std::uint64_t last_ops_ = 0;
};

}  // namespace kmatch

#endif  // KMATCH_INSERT_MATCHER_HPP
