#pragma once

#include <cstdint>
#include <vector>

#include "cvqkd/gf.hpp"
#include "cvqkd/random.hpp"

namespace cvqkd {

struct DiscretizationScheme {
  double alpha;
  int p;
  int q;
  int d;         // p - q
  double delta;  // 2 alpha / 2^p

  // Bin borders: a_0 = -inf, b_{2^p-1} = +inf, interior edges -alpha + k*delta.
  double left_border(std::uint32_t kappa) const;
  double right_border(std::uint32_t kappa) const;
};

DiscretizationScheme make_scheme(double alpha, int p, int q);

// K_i = kappa such that Y_i lies in [a_kappa, b_kappa).
std::vector<std::uint16_t> discretize(const std::vector<double>& Y,
                                      const DiscretizationScheme& s);

// kappa = kappa_top * 2^d + kappa_bottom.
void split(const std::vector<std::uint16_t>& K, int q, int d, std::vector<std::uint8_t>& top,
           std::vector<std::uint8_t>& bottom);

// Shannon entropy (bits) of the empirical symbol distribution; symbols < 2^p.
double empirical_entropy(const std::vector<std::uint16_t>& symbols, int p);

// Regular-code construction: column weight exactly 2, row weights in
// {floor(2n/l), ceil(2n/l)}, nonzero entries uniform over the field. When
// the row count admits it (l(l-1)/2 >= n) no two columns share more than one
// row; degenerate toy sizes skip that constraint. Throws after 200 restarts.
SparseGfMatrix build_parity_matrix(std::uint64_t n, double R_code, const GfField& gf,
                                   std::uint64_t seed);

// Flat n x 2^q table of P(K_top = kappa_bar | X_i, K_bottom_i), normalized
// per position: prior masses of the bins kappa_bar*2^d + bottom_i under
// Y | X ~ N(rho X, 1 - rho^2).
std::vector<double> a_priori_probabilities(const std::vector<double>& X,
                                           const std::vector<std::uint8_t>& bottom, double rho,
                                           const DiscretizationScheme& s);

struct DecodeResult {
  std::vector<std::uint8_t> k_hat;
  bool fnd = false;
  int fnd_rnd = 0;  // iteration of the first syndrome match, 1-based
};

// Non-binary sum-product decoding. priors is the flat n x 2^q table; the
// horizontal step uses forward/backward partial-sum distributions, costing
// O(n * d_c * 2^(2q)) per iteration.
DecodeResult decode(const GfField& gf, const SparseGfMatrix& h,
                    const std::vector<std::uint8_t>& syndrome, const std::vector<double>& priors,
                    int iter_max);

// Near-universal mangling hash for the correctness test. Both q-bit strings
// are packed MSB-first into Q = 32 bit chunks (zero symbols appended so the
// bit count divides by Q), combined with shared randomness (odd v_i and u,
// Q* = 63 bits) as (sum v_i x_i + u) mod 2^63, keeping the top t bits.
std::uint64_t verification_tag(const std::vector<std::uint8_t>& symbols, int q,
                               const std::vector<std::uint64_t>& v, std::uint64_t u, int t);

// Draws (v, u) from the seed and compares tags of the two strings.
struct VerifyOutcome {
  bool passed = false;
  int t = 0;
  std::uint64_t tag_a = 0, tag_b = 0;
};
VerifyOutcome verify(const std::vector<std::uint8_t>& top_a, const std::vector<std::uint8_t>& top_b,
                     int q, double eps_cor, std::uint64_t seed);

// Per-block outcome frequencies: p_EC = p_SMT * p_ver.
struct EcAccounting {
  double p_smt = 0.0;
  double p_ver = 0.0;
  double p_ec = 0.0;
  double fer = 1.0;
};
EcAccounting ec_success_accounting(int n_blocks, int n_smt, int n_ver);

}  // namespace cvqkd
