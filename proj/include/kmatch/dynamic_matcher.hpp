#ifndef KMATCH_DYNAMIC_MATCHER_HPP
#define KMATCH_DYNAMIC_MATCHER_HPP

// Maximum-weight k-matching over a dynamic (insert/delete) edge stream.
//
// Vertices are spread by a partition scheme built for subsets of size 2k.
// Every update of edge uv with weight class w is fed to the l0-sampler keyed
// (i, j, w) for each i in G(u), j in G(v); samplers are created on first use.
// A query draws one edge per sampler and solves the resulting small graph
// exactly. Any answer is made of live edges, so a k-matching is never
// reported for a graph that has none.

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "exact_matching.hpp"
#include "graph.hpp"
#include "l0_sampler.hpp"
#include "partition.hpp"

namespace kmatch {

/// The integer i with (1+eps)^(i-1) < w <= (1+eps)^i.
inline std::int64_t weight_class(double w, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("weight classes need a positive weight");
  const double base = 1.0 + eps;
  auto i = static_cast<std::int64_t>(std::ceil(std::log(w) / std::log1p(eps)));
  while (std::pow(base, static_cast<double>(i - 1)) >= w) --i;
  while (std::pow(base, static_cast<double>(i)) < w) ++i;
  return i;
}

/// Samplers keyed by the exact (scaled integer) weight.
struct ExactWeights {
  using Key = std::int64_t;
  using Value = std::int64_t;

  Key key(std::int64_t w) const {
    if (w < 0) throw DomainError("negative edge weight");
    return w;
  }
  Value value(Key key) const noexcept { return key; }
};

/// Samplers keyed by the (1+eps) class of the weight; answers carry the class
/// representative (1+eps)^i, an upper bound on the true weight.
struct RoundedWeights {
  using Key = std::int64_t;
  using Value = double;

  double epsilon = 0.1;
  std::int64_t scale = 1;  ///< stream weights are integers in units of 1/scale

  Key key(std::int64_t w) const { return weight_class(static_cast<double>(w) / static_cast<double>(scale), epsilon); }
  Value value(Key key) const { return std::pow(1.0 + epsilon, static_cast<double>(key)); }
};

/// Per-sampler failure probability 1 / (20 k^4 ln 2k).
inline double dynamic_delta(std::uint64_t k) {
  const double kd = static_cast<double>(k);
  return 1.0 / (20.0 * kd * kd * kd * kd * std::log(2.0 * kd));
}

struct DynUpdateStats {
  std::uint64_t samplers_touched = 0;
  std::uint64_t samplers_created = 0;
  std::uint64_t cell_writes = 0;
};

template <class Value>
struct DynQueryResult {
  std::optional<BasicMatching<Value>> answer;
  std::vector<BasicEdge<Value>> candidates;  ///< E', deduplicated
  std::uint64_t sampled = 0;
  std::uint64_t empty = 0;
  std::uint64_t failed = 0;
};

template <class Policy>
class DynamicMatcher {
 public:
  using Key = typename Policy::Key;
  using Value = typename Policy::Value;

  struct BankKey {
    std::uint64_t i;
    std::uint64_t j;
    Key w;
    auto operator<=>(const BankKey&) const = default;
  };

  template <class URBG>
  DynamicMatcher(std::uint64_t n, std::uint64_t k, Policy policy, URBG& rng)
      : n_(n), k_(k), policy_(std::move(policy)), scheme_(build_scheme_checked(n, k, rng)), delta_(dynamic_delta(k)) {
    basis_ = std::make_shared<const SketchBasis>(edge_id_count(n), delta_, rng);
  }

  void update(const EdgeUpdate& upd) {
    const Edge& e = upd.edge;
    if (e.u >= e.v) throw DomainError("dynamic update needs u < v");
    if (e.v >= n_) throw DomainError("dynamic update vertex out of range");
    const Key key = policy_.key(e.w);
    scheme_.relation_into(e.u, gu_);
    scheme_.relation_into(e.v, gv_);
    basis_->prepare(edge_id(e.u, e.v, n_), prepared_);
    const std::int64_t c = upd.op == EdgeOp::Insert ? 1 : -1;

    DynUpdateStats stats;
    for (auto i : gu_) {
      for (auto j : gv_) {
        auto [it, created] = bank_.try_emplace(BankKey{i, j, key}, basis_);
        stats.samplers_created += created ? 1 : 0;
        stats.cell_writes += it->second.apply(prepared_, c);
        ++stats.samplers_touched;
      }
    }
    ++updates_;
    classes_.insert(key);
    last_ = stats;
    check_bank_bound();
  }

  void insert(Vertex a, Vertex b, std::int64_t w) { update({make_edge(a, b, w), EdgeOp::Insert}); }
  void erase(Vertex a, Vertex b, std::int64_t w) { update({make_edge(a, b, w), EdgeOp::Delete}); }

  DynQueryResult<Value> query_detailed() const {
    DynQueryResult<Value> r;
    std::vector<BasicEdge<Value>> found;
    for (const auto& [key, sampler] : bank_) {
      const SampleResult s = sampler.query();
      switch (s.kind) {
        case SampleKind::Sampled: {
          ++r.sampled;
          const auto [a, b] = decode_edge_id(s.id);
          found.push_back({a, b, policy_.value(key.w)});
          break;
        }
        case SampleKind::Empty:
          ++r.empty;
          break;
        case SampleKind::Fail:
          ++r.failed;
          break;
      }
    }
    r.candidates = dedupe_pairs(std::span<const BasicEdge<Value>>(found));
    r.answer = solve_exact(std::span<const BasicEdge<Value>>(r.candidates), k_);
    return r;
  }

  std::optional<BasicMatching<Value>> query() const { return query_detailed().answer; }

  std::uint64_t n() const noexcept { return n_; }
  std::uint64_t k() const noexcept { return k_; }
  double delta() const noexcept { return delta_; }
  const Policy& policy() const noexcept { return policy_; }
  const HashScheme& scheme() const noexcept { return scheme_; }
  const SketchBasis& basis() const noexcept { return *basis_; }
  const std::map<BankKey, L0Sampler>& bank() const noexcept { return bank_; }
  std::size_t bank_size() const noexcept { return bank_.size(); }
  std::size_t distinct_classes() const noexcept { return classes_.size(); }
  std::uint64_t updates() const noexcept { return updates_; }
  const DynUpdateStats& last_update() const noexcept { return last_; }

  /// min(#updates * d2^2, #classes * (d1 d2 d3)^2), saturating.
  std::uint64_t bank_bound() const noexcept {
    const auto& p = scheme_.params();
    const std::uint64_t by_updates = sat_mul(updates_, p.d2 * p.d2);
    const std::uint64_t by_classes = sat_mul(classes_.size(), sat_mul(p.range(), p.range()));
    return std::min(by_updates, by_classes);
  }

  /// Words of state: scheme and basis coefficients plus nominal sampler counters.
  std::uint64_t stored_words() const noexcept {
    const std::uint64_t per_sampler = 3ULL * basis_->reps() * basis_->levels();
    return scheme_.stored_words() + basis_->stored_words() + per_sampler * bank_.size();
  }

  /// Counter cells actually non-zero, times three words.
  std::uint64_t live_counter_words() const noexcept {
    std::uint64_t cells = 0;
    for (const auto& [key, s] : bank_) cells += s.live_cells();
    return 3 * cells;
  }

 private:
  template <class URBG>
  static HashScheme build_scheme_checked(std::uint64_t n, std::uint64_t k, URBG& rng) {
    if (k < 1 || n < 2 || k > n / 2) throw ParameterError("dynamic matcher needs 1 <= k <= n/2");
    return HashScheme::build(n, 2 * k, rng);
  }

  static std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t r;
    return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
  }

  void check_bank_bound() const {
    if (bank_.size() > bank_bound()) throw std::logic_error("sampler bank exceeds its size bound");
  }

  std::uint64_t n_;
  std::uint64_t k_;
  Policy policy_;
  HashScheme scheme_;
  double delta_;
  std::shared_ptr<const SketchBasis> basis_;
  std::map<BankKey, L0Sampler> bank_;
  std::set<Key> classes_;
  std::uint64_t updates_ = 0;
  DynUpdateStats last_;
  std::vector<std::uint64_t> gu_, gv_;
  PreparedKey prepared_;
};

using ExactDynamicMatcher = DynamicMatcher<ExactWeights>;
using ApproxDynamicMatcher = DynamicMatcher<RoundedWeights>;

}  // namespace kmatch

#endif  // KMATCH_DYNAMIC_MATCHER_HPP
