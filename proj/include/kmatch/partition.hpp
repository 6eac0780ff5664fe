#ifndef KMATCH_PARTITION_HPP
#define KMATCH_PARTITION_HPP

// The partition scheme {f, F_0..F_{d1-1}} and the multi-valued relation G
// that spreads every key over d2 disjoint index intervals.
//
// Keys x in [U) are first split into d1 = 2^d parts by a ceil(12 ln k)-wise
// independent f. Part j owns the index range I'_j = [j*d2*d3, (j+1)*d2*d3),
// cut into d2 blocks of d3 indices; the i-th universal hash of family F_j
// places x inside block i. For any k-subset S, with high probability one
// index per element of S can be chosen so that the preimage sets are pairwise
// disjoint and each holds exactly one element of S.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "errors.hpp"
#include "field_hash.hpp"

namespace kmatch {

namespace detail {

// Interval [lo, hi] around c * ln(k). For integer k >= 2, c*ln k is
// irrational, so a narrow enclosure that does not straddle an integer decides
// every ceiling and comparison exactly.
struct LnEnclosure {
  long double lo;
  long double hi;
};

inline LnEnclosure scaled_ln(std::uint64_t c, std::uint64_t k) {
  const long double x = static_cast<long double>(c) * std::log(static_cast<long double>(k));
  const long double slack = std::fabs(x) * 1e-15L + 1e-15L;
  return {x - slack, x + slack};
}

}  // namespace detail

/// ceil(c * ln k) for k >= 2, decided exactly.
inline std::uint64_t ceil_scaled_ln(std::uint64_t c, std::uint64_t k) {
  if (k < 2) throw ParameterError("ceil_scaled_ln needs k >= 2");
  const auto e = detail::scaled_ln(c, k);
  const long double f = std::floor(e.hi);
  if (std::floor(e.lo) != f) throw std::logic_error("ln enclosure straddles an integer");
  return static_cast<std::uint64_t>(f) + 1;
}

/// Largest integer s with s <= c * ln k.
inline std::uint64_t floor_scaled_ln(std::uint64_t c, std::uint64_t k) {
  return ceil_scaled_ln(c, k) - 1;
}

struct SchemeParams {
  std::uint64_t universe = 0;  ///< |U|
  std::uint64_t k = 0;         ///< requested subset size
  std::uint64_t k_eff = 0;     ///< k clamped to >= 2 for the formulas
  unsigned u = 0;              ///< 2^{u-1} < |U| <= 2^u
  unsigned d = 0;              ///< 2^{d-1} < k/ln k <= 2^d
  std::uint64_t d1 = 0;        ///< number of parts, 2^d
  std::uint64_t d2 = 0;        ///< members per family, ceil(8 ln k)
  std::uint64_t d3 = 0;        ///< universal range, ceil(13 ln k)^2
  unsigned kappa = 0;          ///< independence of f, ceil(12 ln k)

  std::uint64_t range() const noexcept { return d1 * d2 * d3; }
  /// Sizes |S_j| above this break the balanced-split event.
  std::uint64_t part_size_limit() const { return floor_scaled_ln(13, k_eff); }

  static SchemeParams compute(std::uint64_t universe, std::uint64_t k) {
    if (universe <= 1) throw ParameterError("partition scheme needs |U| > 1");
    if (k < 1) throw ParameterError("partition scheme needs k >= 1");
    SchemeParams p;
    p.universe = universe;
    p.k = k;
    p.k_eff = std::max<std::uint64_t>(k, 2);
    p.u = static_cast<unsigned>(std::bit_width(universe - 1));

    // Smallest d >= 1 with k / ln k <= 2^d, i.e. k <= 2^d ln k.
    const long double ln_k = std::log(static_cast<long double>(p.k_eff));
    const long double ratio = static_cast<long double>(p.k_eff) / ln_k;
    const long double slack = ratio * 1e-15L;
    unsigned d = 1;
    while (true) {
      const long double bound = std::ldexp(1.0L, static_cast<int>(d));
      if (ratio + slack <= bound) break;
      if (ratio - slack <= bound) throw std::logic_error("k/ln k enclosure straddles a power of two");
      ++d;
    }
    p.d = d;
    p.d1 = std::uint64_t{1} << d;
    p.d2 = ceil_scaled_ln(8, p.k_eff);
    const std::uint64_t c13 = ceil_scaled_ln(13, p.k_eff);
    p.d3 = c13 * c13;
    p.kappa = static_cast<unsigned>(ceil_scaled_ln(12, p.k_eff));
    return p;
  }

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

/// Output of the scheme construction; immutable once built.
class HashScheme {
 public:
  HashScheme(SchemeParams params, KWiseHash f, std::vector<UniversalHash> members)
      : params_(params), f_(std::move(f)), members_(std::move(members)) {
    if (members_.size() != params_.d1 * params_.d2) {
      throw ParameterError("scheme needs d1*d2 family members");
    }
  }

  template <class URBG>
  static HashScheme build(std::uint64_t universe, std::uint64_t k, URBG& rng) {
    const SchemeParams p = SchemeParams::compute(universe, k);
    KWiseHash f = KWiseHash::draw(p.kappa, p.u, p.d, rng);
    std::vector<UniversalHash> members;
    members.reserve(p.d1 * p.d2);
    for (std::uint64_t i = 0; i < p.d1 * p.d2; ++i) {
      members.push_back(UniversalHash::draw(universe, p.d3, rng));
    }
    return HashScheme(p, std::move(f), std::move(members));
  }

  const SchemeParams& params() const noexcept { return params_; }
  const KWiseHash& partition_hash() const noexcept { return f_; }

  /// Member i (0-based, draw order) of family F_j.
  const UniversalHash& member(std::uint64_t part, std::uint64_t i) const {
    return members_.at(part * params_.d2 + i);
  }

  std::uint64_t part_of(std::uint64_t x) const {
    check_key(x);
    return f_(x);
  }

  /// G(x) in block order: entry i is j*d2*d3 + i*d3 + h_i(x).
  void relation_into(std::uint64_t x, std::vector<std::uint64_t>& out) const {
    const std::uint64_t j = part_of(x);
    const std::uint64_t d2 = params_.d2;
    const std::uint64_t d3 = params_.d3;
    out.resize(d2);
    const UniversalHash* fam = &members_[j * d2];
    for (std::uint64_t i = 0; i < d2; ++i) {
      out[i] = j * d2 * d3 + i * d3 + fam[i].eval_unchecked(x);
    }
  }

  std::vector<std::uint64_t> relation(std::uint64_t x) const {
    std::vector<std::uint64_t> out;
    relation_into(x, out);
    return out;
  }

  /// Words of storage held: kappa coefficients plus (a, b) per family member.
  std::uint64_t stored_words() const noexcept { return f_.kappa() + 2 * members_.size(); }

 private:
  void check_key(std::uint64_t x) const {
    if (x >= params_.universe) throw DomainError("key outside the scheme's universe");
  }

  SchemeParams params_;
  KWiseHash f_;
  std::vector<UniversalHash> members_;
};

/// T_i = { x in [universe) : i in G(x) } for every index with a non-empty preimage.
inline std::map<std::uint64_t, std::vector<std::uint64_t>> collect_preimages(const HashScheme& scheme,
                                                                             std::uint64_t universe) {
  if (universe > scheme.params().universe) throw DomainError("universe larger than the scheme's");
  std::map<std::uint64_t, std::vector<std::uint64_t>> t;
  std::vector<std::uint64_t> g;
  for (std::uint64_t x = 0; x < universe; ++x) {
    scheme.relation_into(x, g);
    for (auto i : g) t[i].push_back(x);
  }
  return t;
}

struct WitnessReport {
  bool part_sizes_ok = false;     ///< every |S_j| <= 13 ln k
  bool perfect_per_part = false;  ///< every F_j has a member injective on S_j
  /// One index per element of S (aligned with the input order) when every part has a perfect member.
  std::optional<std::vector<std::uint64_t>> witness;
  /// Set when the witness was checked against exact preimages.
  std::optional<bool> conditions_hold;
};

/// Builds the disjoint-preimage witness for S from the first perfect member
/// of every part. With `preimages` supplied, also checks that the indices are
/// distinct, that each T-set meets S in exactly its own element, and that the
/// T-sets are pairwise disjoint.
inline WitnessReport find_witness(std::span<const std::uint64_t> subset, const HashScheme& scheme,
                                  const std::map<std::uint64_t, std::vector<std::uint64_t>>* preimages = nullptr) {
  const SchemeParams& p = scheme.params();
  if (subset.size() != p.k) throw ParameterError("witness subset must have exactly k elements");
  if (std::set<std::uint64_t>(subset.begin(), subset.end()).size() != subset.size()) {
    throw ParameterError("witness subset has repeated keys");
  }

  std::map<std::uint64_t, std::vector<std::uint64_t>> parts;
  for (auto x : subset) parts[scheme.part_of(x)].push_back(x);

  WitnessReport report;
  const std::uint64_t limit = p.part_size_limit();
  report.part_sizes_ok = std::all_of(parts.begin(), parts.end(),
                                     [&](const auto& kv) { return kv.second.size() <= limit; });

  std::map<std::uint64_t, std::uint64_t> chosen;  // part -> member index
  for (const auto& [j, elems] : parts) {
    for (std::uint64_t i = 0; i < p.d2; ++i) {
      std::set<std::uint64_t> images;
      for (auto x : elems) images.insert(scheme.member(j, i)(x));
      if (images.size() == elems.size()) {
        chosen[j] = i;
        break;
      }
    }
  }
  report.perfect_per_part = chosen.size() == parts.size();
  if (!report.perfect_per_part) return report;

  std::vector<std::uint64_t> w;
  w.reserve(subset.size());
  for (auto x : subset) {
    const std::uint64_t j = scheme.part_of(x);
    const std::uint64_t i = chosen[j];
    w.push_back(j * p.d2 * p.d3 + i * p.d3 + scheme.member(j, i)(x));
  }
  report.witness = w;

  if (preimages != nullptr) {
    bool ok = std::set<std::uint64_t>(w.begin(), w.end()).size() == w.size();
    const std::set<std::uint64_t> s(subset.begin(), subset.end());
    std::set<std::uint64_t> seen;
    for (std::size_t t = 0; ok && t < w.size(); ++t) {
      auto it = preimages->find(w[t]);
      if (it == preimages->end()) {
        ok = false;
        break;
      }
      std::size_t hits = 0;
      for (auto x : it->second) {
        if (s.count(x) != 0) {
          ++hits;
          if (x != subset[t]) ok = false;
        }
        if (!seen.insert(x).second) ok = false;
      }
      if (hits != 1) ok = false;
    }
    report.conditions_hold = ok;
  }
  return report;
}

struct IntervalLemmaReport {
  std::uint64_t block_violations = 0;  ///< x in T_a and T_b for distinct a, b in one block I_q
  std::uint64_t part_violations = 0;   ///< G(x) leaves the range I'_t of x's part t
  std::uint64_t cross_violations = 0;  ///< x in T_a and T_b with a, b in different part ranges
};

/// Exhaustive check of the block and part-range disjointness properties of
/// the preimage sets over [universe).
inline IntervalLemmaReport check_interval_lemma(const HashScheme& scheme, std::uint64_t universe) {
  const SchemeParams& p = scheme.params();
  IntervalLemmaReport rep;
  const auto pre = collect_preimages(scheme, universe);

  // Block property from the T-sets: within each block the T-sets must be disjoint.
  std::map<std::uint64_t, std::vector<std::uint64_t>> block_members;
  for (const auto& [idx, xs] : pre) {
    auto& v = block_members[idx / p.d3];
    v.insert(v.end(), xs.begin(), xs.end());
  }
  for (auto& [q, xs] : block_members) {
    std::sort(xs.begin(), xs.end());
    rep.block_violations += static_cast<std::uint64_t>(xs.end() - std::unique(xs.begin(), xs.end()));
  }

  // Part-range property, and the cross-range disjointness it implies.
  const std::uint64_t span = p.d2 * p.d3;
  std::map<std::uint64_t, std::set<std::uint64_t>> ranges_of_key;
  for (const auto& [idx, xs] : pre) {
    for (auto x : xs) {
      if (idx / span != scheme.part_of(x)) ++rep.part_violations;
      ranges_of_key[x].insert(idx / span);
    }
  }
  for (const auto& [x, rs] : ranges_of_key) rep.cross_violations += rs.size() - 1;
  return rep;
}

}  // namespace kmatch

#endif  // KMATCH_PARTITION_HPP
