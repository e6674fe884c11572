#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd {

// Toeplitz extractor T[i][j] = seed[i - j + n_tilde - 1] for an r x n_tilde
// matrix; seed holds n_tilde + r - 1 bits. Bits are passed as 0/1 bytes.

// Reference product over GF(2), O(r * n_tilde / 64) via packed words.
std::vector<std::uint8_t> toeplitz_hash_naive(const std::vector<std::uint8_t>& seed_bits,
                                              const std::vector<std::uint8_t>& s, std::size_t r);

// Circulant-embedding path: the seed rotated by n_tilde - 1 is circularly
// convolved with the zero-padded input via real FFTs, rounded, reduced mod 2;
// the first r entries are the key. Round-off is validated against a 0.25
// residual bound; on violation the convolution is redone exactly with an
// integer NTT. Bit-identical to the naive product.
std::vector<std::uint8_t> toeplitz_hash_fft(const std::vector<std::uint8_t>& seed_bits,
                                            const std::vector<std::uint8_t>& s, std::size_t r);

namespace detail {
// Integer-exact convolution path (number-theoretic transform); the FFT
// routine falls back to this when its round-off validation fails.
std::vector<std::uint8_t> toeplitz_hash_exact(const std::vector<std::uint8_t>& seed_bits,
                                              const std::vector<std::uint8_t>& s, std::size_t r);
}  // namespace detail

struct FinalKeys {
  std::vector<std::uint8_t> bob;    // K = T S
  std::vector<std::uint8_t> alice;  // T S_hat
  bool match = false;
  std::string status;               // "ok" or "no extractable key"
};

// Hashes both concatenated strings with the same public seed material
// (expanded from seed64 in counter mode).
FinalKeys finalize_keys(const std::vector<std::uint8_t>& s, const std::vector<std::uint8_t>& s_hat,
                        std::int64_t r, std::uint64_t seed64);

}  // namespace cvqkd
