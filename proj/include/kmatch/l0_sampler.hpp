#ifndef KMATCH_L0_SAMPLER_HPP
#define KMATCH_L0_SAMPLER_HPP

// l0-sampling over a coordinate domain [N).
//
// Each of `reps` repetitions holds levels 0..L, L = ceil(log2 N). Level l keeps
// a one-sparse recovery sketch of the coordinates admitted by a universal hash
// into [2^l) (admitted iff the hash is 0; level 0 admits everything). A query
// returns the first level, scanning repetitions in order and levels upward,
// whose sketch verifies as exactly one-sparse.
//
// The random part (level hashes and fingerprint bases z) lives in a
// SketchBasis that several samplers may share; the counters are per sampler.
// Sharing keeps every individual sampler's failure probability unchanged.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "errors.hpp"
#include "field_hash.hpp"

namespace kmatch {

inline constexpr std::uint64_t kFingerprintPrime = (std::uint64_t{1} << 61) - 1;

namespace detail {

inline constexpr std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) noexcept {
  const u128 t = static_cast<u128>(a) * b;
  std::uint64_t r = (static_cast<std::uint64_t>(t) & kFingerprintPrime) + static_cast<std::uint64_t>(t >> 61);
  if (r >= kFingerprintPrime) r -= kFingerprintPrime;
  return r;
}

inline constexpr std::uint64_t powmod61(std::uint64_t base, std::uint64_t e) noexcept {
  std::uint64_t r = 1;
  while (e != 0) {
    if ((e & 1U) != 0) r = mulmod61(r, base);
    base = mulmod61(base, base);
    e >>= 1;
  }
  return r;
}

/// c mod P for a signed c, as a residue in [0, P).
inline constexpr std::uint64_t residue61(std::int64_t c) noexcept {
  const std::int64_t m = c % static_cast<std::int64_t>(kFingerprintPrime);
  return static_cast<std::uint64_t>(m < 0 ? m + static_cast<std::int64_t>(kFingerprintPrime) : m);
}

}  // namespace detail

/// Smallest r >= 1 with 2^r * delta >= 1, i.e. ceil(log2(1/delta)).
inline unsigned ceil_log2_inverse(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  unsigned r = 1;
  while (std::ldexp(delta, static_cast<int>(r)) < 1.0) ++r;
  return r;
}

/// Counters (phi, iota, tau) = (sum c, sum c*id, sum c*z^id mod P).
struct OneSparseSketch {
  std::int64_t phi = 0;
  std::int64_t iota = 0;
  std::uint64_t tau = 0;

  bool is_zero() const noexcept { return phi == 0 && iota == 0 && tau == 0; }

  void add(std::uint64_t id, std::uint64_t z_pow_id, std::int64_t c) noexcept {
    phi += c;
    iota += c * static_cast<std::int64_t>(id);
    tau = (tau + detail::mulmod61(detail::residue61(c), z_pow_id)) % kFingerprintPrime;
  }

  /// The recovered coordinate when the sketch verifies as one-sparse.
  std::optional<std::uint64_t> recover(std::uint64_t domain, std::uint64_t z) const noexcept {
    if (phi == 0 || iota % phi != 0) return std::nullopt;
    const std::int64_t id = iota / phi;
    if (id < 0 || static_cast<std::uint64_t>(id) >= domain) return std::nullopt;
    const std::uint64_t expect =
        detail::mulmod61(detail::residue61(phi), detail::powmod61(z, static_cast<std::uint64_t>(id)));
    if (expect != tau) return std::nullopt;
    return static_cast<std::uint64_t>(id);
  }

  friend bool operator==(const OneSparseSketch&, const OneSparseSketch&) = default;
};

/// The (slot, z^id) pairs an update of one coordinate touches.
struct PreparedKey {
  std::uint64_t id = 0;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> slots;
};

/// Shared randomness: one admission hash and one fingerprint base per (rep, level).
class SketchBasis {
 public:
  template <class URBG>
  SketchBasis(std::uint64_t domain, double delta, URBG& rng)
      : domain_(domain), delta_(delta), reps_(ceil_log2_inverse(delta)) {
    if (domain < 1) throw ParameterError("sampler domain must be non-empty");
    levels_ = static_cast<unsigned>(std::bit_width(domain - 1)) + 1;
    std::uniform_int_distribution<std::uint64_t> pick_z(1, kFingerprintPrime - 1);
    hashes_.reserve(std::size_t{reps_} * levels_);
    z_.reserve(std::size_t{reps_} * levels_);
    for (unsigned r = 0; r < reps_; ++r) {
      for (unsigned l = 0; l < levels_; ++l) {
        hashes_.push_back(UniversalHash::draw(domain, std::uint64_t{1} << l, rng));
        z_.push_back(pick_z(rng));
      }
    }
  }

  std::uint64_t domain() const noexcept { return domain_; }
  double delta() const noexcept { return delta_; }
  unsigned reps() const noexcept { return reps_; }
  unsigned levels() const noexcept { return levels_; }
  std::size_t slot_count() const noexcept { return hashes_.size(); }
  std::uint64_t z(std::size_t slot) const { return z_.at(slot); }
  const UniversalHash& level_hash(std::size_t slot) const { return hashes_.at(slot); }

  bool admits(std::size_t slot, std::uint64_t id) const noexcept {
    return slot % levels_ == 0 || hashes_[slot].eval_unchecked(id) == 0;
  }

  void prepare(std::uint64_t id, PreparedKey& out) const {
    if (id >= domain_) throw DomainError("sampler coordinate " + std::to_string(id) + " out of range");
    out.id = id;
    out.slots.clear();
    for (std::size_t s = 0; s < hashes_.size(); ++s) {
      if (admits(s, id)) out.slots.emplace_back(static_cast<std::uint32_t>(s), detail::powmod61(z_[s], id));
    }
  }

  /// Hash coefficients (a, b) plus z per slot.
  std::uint64_t stored_words() const noexcept { return 3 * hashes_.size(); }

 private:
  std::uint64_t domain_;
  double delta_;
  unsigned reps_;
  unsigned levels_ = 0;
  std::vector<UniversalHash> hashes_;
  std::vector<std::uint64_t> z_;
};

enum class SampleKind { Sampled, Empty, Fail };

struct SampleResult {
  SampleKind kind = SampleKind::Empty;
  std::uint64_t id = 0;

  friend bool operator==(const SampleResult&, const SampleResult&) = default;
};

class L0Sampler {
 public:
  explicit L0Sampler(std::shared_ptr<const SketchBasis> basis) : basis_(std::move(basis)) {
    if (!basis_) throw ParameterError("sampler needs a basis");
  }

  template <class URBG>
  static L0Sampler create(std::uint64_t domain, double delta, URBG& rng) {
    return L0Sampler(std::make_shared<const SketchBasis>(domain, delta, rng));
  }

  void update(std::uint64_t id, std::int64_t c) {
    PreparedKey key;
    basis_->prepare(id, key);
    apply(key, c);
  }

  /// Applies a key prepared against this sampler's basis. Returns the number
  /// of counter cells written.
  std::size_t apply(const PreparedKey& key, std::int64_t c) {
    for (const auto& [slot, zp] : key.slots) {
      auto it = std::lower_bound(cells_.begin(), cells_.end(), slot,
                                 [](const Cell& cell, std::uint32_t s) { return cell.slot < s; });
      if (it == cells_.end() || it->slot != slot) it = cells_.insert(it, Cell{slot, {}});
      it->sketch.add(key.id, zp, c);
      if (it->sketch.is_zero()) cells_.erase(it);
    }
    return key.slots.size();
  }

  SampleResult query() const {
    if (cells_.empty()) return {SampleKind::Empty, 0};
    for (const auto& cell : cells_) {
      if (auto id = cell.sketch.recover(basis_->domain(), basis_->z(cell.slot))) return {SampleKind::Sampled, *id};
    }
    return {SampleKind::Fail, 0};
  }

  /// Counters of slot (rep, level); all zero when never touched.
  OneSparseSketch sketch(unsigned rep, unsigned level) const {
    const auto slot = static_cast<std::uint32_t>(rep * basis_->levels() + level);
    auto it = std::lower_bound(cells_.begin(), cells_.end(), slot,
                               [](const Cell& cell, std::uint32_t s) { return cell.slot < s; });
    return (it != cells_.end() && it->slot == slot) ? it->sketch : OneSparseSketch{};
  }

  const SketchBasis& basis() const noexcept { return *basis_; }
  unsigned reps() const noexcept { return basis_->reps(); }
  unsigned levels() const noexcept { return basis_->levels(); }
  /// Nominal counter words of the construction: reps * levels * 3.
  std::uint64_t counter_count() const noexcept { return std::uint64_t{3} * reps() * levels(); }
  /// Counter cells currently non-zero.
  std::size_t live_cells() const noexcept { return cells_.size(); }

  friend bool operator==(const L0Sampler& x, const L0Sampler& y) {
    return x.basis_ == y.basis_ && x.cells_ == y.cells_;
  }

 private:
  struct Cell {
    std::uint32_t slot;
    OneSparseSketch sketch;
    friend bool operator==(const Cell&, const Cell&) = default;
  };

  std::shared_ptr<const SketchBasis> basis_;
  std::vector<Cell> cells_;  // sorted by slot, zero cells erased
};

}  // namespace kmatch

#endif  // KMATCH_L0_SAMPLER_HPP
