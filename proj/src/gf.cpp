#include "cvqkd/gf.hpp"

#include <stdexcept>

namespace cvqkd {

unsigned GfField::canonical_poly(unsigned k) {
  switch (k) {
    case 1: return 0b11;          // x + 1
    case 2: return 0b111;         // x^2 + x + 1
    case 3: return 0b1011;        // x^3 + x + 1
    case 4: return 0b10011;       // x^4 + x + 1
    case 5: return 0b100101;      // x^5 + x^2 + 1
    case 6: return 0b1000011;     // x^6 + x + 1
    case 7: return 0b10000011;    // x^7 + x + 1
    case 8: return 0x11B;         // x^8 + x^4 + x^3 + x + 1
    default: throw std::invalid_argument("field size must satisfy 1 <= k <= 8");
  }
}

std::uint8_t GfField::mul_slow(std::uint8_t a, std::uint8_t b, unsigned k, unsigned poly) {
  // Carry-less product, at most (2k-1) bits wide.
  unsigned prod = 0;
  for (unsigned i = 0; i < k; ++i)
    if ((b >> i) & 1u) prod ^= static_cast<unsigned>(a) << i;
  // Reduce high terms with shifted copies of the modulus.
  for (int bit = static_cast<int>(2 * k - 2); bit >= static_cast<int>(k); --bit)
    if ((prod >> bit) & 1u) prod ^= poly << (bit - k);
  return static_cast<std::uint8_t>(prod);
}

GfField::GfField(unsigned k, unsigned poly) : k_(k) {
  if (k < 1 || k > 8) throw std::invalid_argument("field size must satisfy 1 <= k <= 8");
  order_ = 1u << k;
  poly_ = (poly == 0) ? canonical_poly(k) : poly;
  if (poly_ >> k != 1u) throw std::invalid_argument("modulus must have degree k");

  mul_table_.assign(static_cast<std::size_t>(order_) * order_, 0);
  for (unsigned a = 0; a < order_; ++a)
    for (unsigned b = 0; b < order_; ++b)
      mul_table_[(a << k_) | b] =
          mul_slow(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), k_, poly_);

  // Every nonzero element of a field has an inverse; a reducible modulus
  // produces zero divisors and fails here.
  inv_table_.assign(order_, 0);
  for (unsigned a = 1; a < order_; ++a) {
    bool found = false;
    for (unsigned b = 1; b < order_; ++b) {
      if (mul_table_[(a << k_) | b] == 1) {
        inv_table_[a] = static_cast<std::uint8_t>(b);
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("modulus is not irreducible over GF(2)");
  }
}

std::vector<std::uint8_t> gf_matvec(const GfField& gf, const SparseGfMatrix& h,
                                    const std::vector<std::uint8_t>& x) {
  std::vector<std::uint8_t> y(h.rows, 0);
  for (unsigned j = 0; j < h.rows; ++j) {
    std::uint8_t acc = 0;
    const auto& cols = h.row_cols[j];
    const auto& vals = h.row_vals[j];
    for (std::size_t t = 0; t < cols.size(); ++t) acc ^= gf.mul(vals[t], x[cols[t]]);
    y[j] = acc;
  }
  return y;
}

}  // namespace cvqkd
