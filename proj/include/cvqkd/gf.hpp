#pragma once

#include <cstdint>
#include <vector>

namespace cvqkd {

// GF(2^k) arithmetic for 1 <= k <= 8 with dense add/mul tables.
//
// Elements are k-bit integers; addition is XOR. Multiplication reduces the
// carry-less product modulo an irreducible polynomial over GF(2), given as a
// bit mask including the leading term (e.g. 0b10011 = x^4 + x + 1).
class GfField {
 public:
  // poly == 0 selects the canonical polynomial for k.
  explicit GfField(unsigned k, unsigned poly = 0);

  unsigned k() const { return k_; }
  unsigned order() const { return order_; }  // 2^k
  unsigned poly() const { return poly_; }

  std::uint8_t add(std::uint8_t a, std::uint8_t b) const { return a ^ b; }
  std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
    return mul_table_[(static_cast<unsigned>(a) << k_) | b];
  }
  std::uint8_t inv(std::uint8_t a) const { return inv_table_[a]; }  // inv(0) undefined, stored 0

  // Reference multiply: carry-less product then polynomial reduction.
  // Table construction uses this; tests compare against it.
  static std::uint8_t mul_slow(std::uint8_t a, std::uint8_t b, unsigned k, unsigned poly);

  static unsigned canonical_poly(unsigned k);

 private:
  unsigned k_;
  unsigned order_;
  unsigned poly_;
  std::vector<std::uint8_t> mul_table_;  // order*order, row-major
  std::vector<std::uint8_t> inv_table_;
};

// Sparse parity-check matrix over GF(2^k), row-major storage. Every row
// holds the column indices and coefficients of its nonzero entries.
struct SparseGfMatrix {
  unsigned rows = 0;
  unsigned cols = 0;
  std::vector<std::vector<std::uint32_t>> row_cols;
  std::vector<std::vector<std::uint8_t>> row_vals;
};

// y = H * x over the field.
std::vector<std::uint8_t> gf_matvec(const GfField& gf, const SparseGfMatrix& h,
                                    const std::vector<std::uint8_t>& x);

}  // namespace cvqkd
