#ifndef KMATCH_FIELD_HASH_HPP
#define KMATCH_FIELD_HASH_HPP

// Universal ((ax+b) mod p) mod r hashing and kappa-wise independent
// polynomial hashing over GF(2^w).

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "gf2.hpp"

namespace kmatch {

namespace detail {

using u128 = unsigned __int128;

inline constexpr std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>((static_cast<u128>(a) * b) % m);
}

inline constexpr std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) noexcept {
  std::uint64_t r = 1 % m;
  base %= m;
  while (e) {
    if (e & 1U) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin; the base set is exact for all 64-bit inputs.
inline constexpr bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned i = 1; i < s; ++i) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

/// Smallest prime >= n (and >= 2).
inline constexpr std::uint64_t next_prime(std::uint64_t n) {
  if (n > (std::uint64_t{1} << 62)) throw ParameterError("prime search limited to 2^62");
  if (n <= 2) return 2;
  for (std::uint64_t c = n | 1U;; c += 2) {
    if (is_prime(c)) return c;
  }
}

/// One member h_{a,b,r}(x) = ((a x + b) mod p) mod r of the universal family.
class UniversalHash {
 public:
  UniversalHash(std::uint64_t p, std::uint64_t a, std::uint64_t b, std::uint64_t range)
      : p_(p), a_(a), b_(b), r_(range) {
    if (!is_prime(p)) throw ParameterError("universal hash modulus must be prime");
    if (a < 1 || a >= p) throw ParameterError("universal hash multiplier must be in [1, p-1]");
    if (b >= p) throw ParameterError("universal hash offset must be in [0, p-1]");
    if (range < 1) throw ParameterError("universal hash range must be >= 1");
  }

  /// Draws uniformly from the family with p = next_prime(domain_size).
  template <class URBG>
  static UniversalHash draw(std::uint64_t domain_size, std::uint64_t range, URBG& rng) {
    if (domain_size < 1) throw ParameterError("universal hash domain must be non-empty");
    if (range < 1) throw ParameterError("universal hash range must be >= 1");
    const std::uint64_t p = next_prime(domain_size);
    std::uniform_int_distribution<std::uint64_t> pick_a(1, p - 1);
    std::uniform_int_distribution<std::uint64_t> pick_b(0, p - 1);
    const std::uint64_t a = pick_a(rng);
    const std::uint64_t b = pick_b(rng);
    return UniversalHash(p, a, b, range);
  }

  std::uint64_t operator()(std::uint64_t x) const {
    if (x >= p_) throw DomainError("universal hash key " + std::to_string(x) + " >= p");
    return eval_unchecked(x);
  }

  std::uint64_t eval_unchecked(std::uint64_t x) const noexcept {
    return ((static_cast<detail::u128>(a_) * x + b_) % p_) % r_;
  }

  std::uint64_t modulus() const noexcept { return p_; }
  std::uint64_t multiplier() const noexcept { return a_; }
  std::uint64_t offset() const noexcept { return b_; }
  std::uint64_t range() const noexcept { return r_; }

  friend bool operator==(const UniversalHash&, const UniversalHash&) = default;

 private:
  std::uint64_t p_;
  std::uint64_t a_;
  std::uint64_t b_;
  std::uint64_t r_;
};

/// A polynomial a_0 + a_1 x + ... + a_{kappa-1} x^{kappa-1} over GF(2^w),
/// w = max(in_bits, out_bits), read off in its out_bits low-order bits.
///
/// The low d bits of a uniform field element are uniform on {0,1}^d, so the
/// truncated family stays exactly kappa-wise independent.
class KWiseHash {
 public:
  KWiseHash(unsigned in_bits, unsigned out_bits, std::vector<std::uint64_t> coeffs)
      : field_(checked_width(in_bits, out_bits)), in_bits_(in_bits), out_bits_(out_bits),
        coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw ParameterError("kappa must be >= 1");
    for (auto c : coeffs_) {
      if (!field_.contains(c)) throw ParameterError("coefficient outside GF(2^w)");
    }
  }

  template <class URBG>
  static KWiseHash draw(unsigned kappa, unsigned in_bits, unsigned out_bits, URBG& rng) {
    if (kappa < 1) throw ParameterError("kappa must be >= 1");
    const Gf2Field field(checked_width(in_bits, out_bits));
    std::uniform_int_distribution<std::uint64_t> pick(0, field.mask());
    std::vector<std::uint64_t> coeffs(kappa);
    for (auto& c : coeffs) c = pick(rng);
    return KWiseHash(in_bits, out_bits, std::move(coeffs));
  }

  /// Horner evaluation at x (a u-bit string, zero-extended to w bits).
  std::uint64_t operator()(std::uint64_t x) const {
    if (in_bits_ < 64 && (x >> in_bits_) != 0) {
      throw DomainError("k-wise hash key wider than " + std::to_string(in_bits_) + " bits");
    }
    std::uint64_t acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = Gf2Field::add(field_.mul(acc, x), *it);
    }
    return acc & out_mask();
  }

  unsigned kappa() const noexcept { return static_cast<unsigned>(coeffs_.size()); }
  unsigned in_bits() const noexcept { return in_bits_; }
  unsigned out_bits() const noexcept { return out_bits_; }
  unsigned field_width() const noexcept { return field_.width(); }
  const std::vector<std::uint64_t>& coefficients() const noexcept { return coeffs_; }

  friend bool operator==(const KWiseHash& x, const KWiseHash& y) {
    return x.in_bits_ == y.in_bits_ && x.out_bits_ == y.out_bits_ && x.coeffs_ == y.coeffs_;
  }

 private:
  static unsigned checked_width(unsigned in_bits, unsigned out_bits) {
    if (out_bits < 1) throw ParameterError("k-wise hash needs at least one output bit");
    const unsigned w = in_bits > out_bits ? in_bits : out_bits;
    if (w > 64) throw ParameterError("k-wise hash width exceeds 64 bits");
    return w;
  }

  std::uint64_t out_mask() const noexcept {
    return out_bits_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << out_bits_) - 1);
  }

  Gf2Field field_;
  unsigned in_bits_;
  unsigned out_bits_;
  std::vector<std::uint64_t> coeffs_;
};

}  // namespace kmatch

#endif  // KMATCH_FIELD_HASH_HPP
