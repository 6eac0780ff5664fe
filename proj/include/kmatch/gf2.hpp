#ifndef KMATCH_GF2_HPP
#define KMATCH_GF2_HPP

#include <array>
#include <cstdint>

#include "errors.hpp"

namespace kmatch {

// Low-order terms of the reduction polynomial x^w + low for GF(2^w), w = 1..64.
// Each entry is the numerically smallest `low` giving an irreducible polynomial
// (index 0 unused). The unit tests re-check irreducibility.
inline constexpr std::array<std::uint64_t, 65> kGf2ReductionLow = {
    0x0,                                                     //
    0x1,  0x3,  0x3,  0x3,  0x5,  0x3,  0x3,  0x1b,          // w = 1..8
    0x3,  0x9,  0x5,  0x9,  0x1b, 0x21, 0x3,  0x2b,          // 9..16
    0x9,  0x9,  0x27, 0x9,  0x5,  0x3,  0x21, 0x1b,          // 17..24
    0x9,  0x1b, 0x27, 0x3,  0x5,  0x3,  0x9,  0x8d,          // 25..32
    0x4b, 0x1b, 0x5,  0x35, 0x3f, 0x63, 0x11, 0x39,          // 33..40
    0x9,  0x27, 0x59, 0x21, 0x1b, 0x3,  0x21, 0x2d,          // 41..48
    0x71, 0x1d, 0x4b, 0x9,  0x47, 0x7d, 0x47, 0x95,          // 49..56
    0x11, 0x63, 0x7b, 0x3,  0x27, 0x69, 0x3,  0x1b,          // 57..64
};

/// Arithmetic in GF(2^w) with elements stored in the low w bits of a word.
class Gf2Field {
 public:
  using Element = std::uint64_t;

  explicit constexpr Gf2Field(unsigned width) : width_(width) {
    if (width < 1 || width > 64) throw ParameterError("GF(2^w) width must be in [1, 64]");
    mask_ = width == 64 ? ~Element{0} : ((Element{1} << width) - 1);
    low_ = kGf2ReductionLow[width];
  }

  constexpr unsigned width() const noexcept { return width_; }
  constexpr Element mask() const noexcept { return mask_; }
  /// Reduction polynomial without its leading x^w term.
  constexpr Element reduction_low() const noexcept { return low_; }

  constexpr bool contains(Element a) const noexcept { return (a & ~mask_) == 0; }

  static constexpr Element add(Element a, Element b) noexcept { return a ^ b; }

  /// Shift-and-add carry-less product, reduced bit by bit (MSB first).
  constexpr Element mul(Element a, Element b) const noexcept {
    Element r = 0;
    for (int i = static_cast<int>(width_) - 1; i >= 0; --i) {
      const Element carry = (r >> (width_ - 1)) & 1U;
      r = (r << 1) & mask_;
      if (carry) r ^= low_;
      if ((b >> i) & 1U) r ^= a;
    }
    return r;
  }

 private:
  unsigned width_;
  Element mask_ = 0;
  Element low_ = 0;
};

}  // namespace kmatch

#endif  // KMATCH_GF2_HPP
