#pragma once

// Arithmetic in GF(2^m), 1 ≤ m ≤ 16.
//
// Elements and polynomials are bit-encoded, LSB = constant term. The field
// for degree m is GF(2)[x] modulo the numerically smallest irreducible
// polynomial of that degree; the table is computed and checked at compile
// time.

#include <array>
#include <cstdint>

namespace obliq::gf {

using Element = std::uint32_t;

inline constexpr int kMaxDegree = 16;

constexpr int degree(std::uint64_t poly) {
  int d = -1;
  while (poly != 0) {
    poly >>= 1;
    ++d;
  }
  return d;
}

/// Carry-less product, no reduction.
constexpr std::uint64_t clmul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  while (b != 0) {
    if (b & 1U) out ^= a;
    a <<= 1;
    b >>= 1;
  }
  return out;
}

constexpr std::uint64_t poly_mod(std::uint64_t a, std::uint64_t modulus) {
  const int dm = degree(modulus);
  for (int da = degree(a); da >= dm; da = degree(a)) a ^= modulus << (da - dm);
  return a;
}

/// Trial division by every polynomial of degree 1..deg/2.
constexpr bool is_irreducible(std::uint64_t poly) {
  const int d = degree(poly);
  if (d < 1) return false;
  for (std::uint64_t f = 2; degree(f) <= d / 2; ++f) {
    if (poly_mod(poly, f) == 0) return false;
  }
  return true;
}

constexpr std::uint64_t least_irreducible(int deg) {
  for (std::uint64_t p = std::uint64_t{1} << deg;; ++p) {
    if (is_irreducible(p)) return p;
  }
}

constexpr std::array<std::uint32_t, kMaxDegree + 1> make_moduli() {
  std::array<std::uint32_t, kMaxDegree + 1> table{};
  for (int d = 1; d <= kMaxDegree; ++d) table[d] = static_cast<std::uint32_t>(least_irreducible(d));
  return table;
}

inline constexpr auto kModuli = make_moduli();

static_assert(kModuli[1] == 0b10);
static_assert(kModuli[2] == 0b111);
static_assert(kModuli[3] == 0b1011);
static_assert(kModuli[4] == 0b10011);
static_assert(kModuli[8] == 0x11B);

constexpr std::uint32_t modulus(int m) { return kModuli.at(static_cast<std::size_t>(m)); }

constexpr Element add(Element a, Element b) { return a ^ b; }

constexpr Element mul(Element a, Element b, int m) {
  return static_cast<Element>(poly_mod(clmul(a, b), modulus(m)));
}

constexpr Element pow(Element a, std::uint64_t e, int m) {
  Element result = 1 % (Element{1} << m);
  while (e != 0) {
    if (e & 1U) result = mul(result, a, m);
    a = mul(a, a, m);
    e >>= 1;
  }
  return result;
}

/// Multiplicative inverse by the extended Euclidean algorithm; a must be nonzero.
constexpr Element inverse(Element a, int m) {
  std::uint64_t r0 = modulus(m), r1 = a;
  std::uint64_t s0 = 0, s1 = 1;
  while (r1 != 0) {
    std::uint64_t q = 0;
    std::uint64_t r = r0;
    const int d1 = degree(r1);
    for (int dr = degree(r); dr >= d1; dr = degree(r)) {
      q ^= std::uint64_t{1} << (dr - d1);
      r ^= r1 << (dr - d1);
    }
    const std::uint64_t s = s0 ^ clmul(q, s1);
    r0 = r1;
    r1 = r;
    s0 = s1;
    s1 = s;
  }
  // r0 is the gcd, 1 for a nonzero element of a field.
  return static_cast<Element>(poly_mod(s0, modulus(m)));
}

/// Absolute trace to GF(2): a + a^2 + a^4 + … + a^(2^(m−1)).
constexpr int trace(Element a, int m) {
  Element t = 0;
  Element x = a;
  for (int i = 0; i < m; ++i) {
    t ^= x;
    x = mul(x, x, m);
  }
  return static_cast<int>(t & 1U);
}

static_assert(mul(0b010, 0b110, 3) == 0b111);
static_assert(mul(inverse(0b101, 3), 0b101, 3) == 1);

}  // namespace obliq::gf
