#include <doctest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "cvqkd/privacy.hpp"
#include "cvqkd/random.hpp"

using namespace cvqkd;

namespace {

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng() & 1);
  return v;
}

}  // namespace

TEST_CASE("naive Toeplitz product: hand cases") {
  // 1x1: K = seed[0] * S[0]
  CHECK(toeplitz_hash_naive({1}, {1}, 1) == std::vector<std::uint8_t>{1});
  CHECK(toeplitz_hash_naive({1}, {0}, 1) == std::vector<std::uint8_t>{0});
  CHECK(toeplitz_hash_naive({0}, {1}, 1) == std::vector<std::uint8_t>{0});

  // zero input stays zero for any seed
  std::mt19937_64 rng(2);
  const std::size_t nt = 37, r = 11;
  const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
  const std::vector<std::uint8_t> zero(nt, 0);
  CHECK(toeplitz_hash_naive(seed, zero, r) == std::vector<std::uint8_t>(r, 0));

  // basis vector e_j picks out column j: K_i = T[i][j] = seed[i - j + nt - 1]
  for (std::size_t j : {std::size_t{0}, std::size_t{17}, std::size_t{36}}) {
    std::vector<std::uint8_t> e(nt, 0);
    e[j] = 1;
    const std::vector<std::uint8_t> k = toeplitz_hash_naive(seed, e, r);
    for (std::size_t i = 0; i < r; ++i) CHECK(k[i] == seed[i - j + nt - 1]);
  }

  // length mismatch rejected
  CHECK_THROWS(toeplitz_hash_naive(std::vector<std::uint8_t>(5, 0), zero, r));
}

TEST_CASE("FFT path equals the naive product on random instances") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t nt = 1 + rng() % 3000;
    const std::size_t r = 1 + rng() % 1200;
    const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
    const std::vector<std::uint8_t> s = random_bits(rng, nt);
    CHECK(toeplitz_hash_fft(seed, s, r) == toeplitz_hash_naive(seed, s, r));
  }
  // r > n_tilde also valid (tall matrix)
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t nt = 1 + rng() % 50;
    const std::size_t r = nt + rng() % 300;
    const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
    const std::vector<std::uint8_t> s = random_bits(rng, nt);
    CHECK(toeplitz_hash_fft(seed, s, r) == toeplitz_hash_naive(seed, s, r));
  }
}

TEST_CASE("hash is linear over GF(2)") {
  std::mt19937_64 rng(12);
  const std::size_t nt = 700, r = 256;
  const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
  const std::vector<std::uint8_t> s1 = random_bits(rng, nt);
  const std::vector<std::uint8_t> s2 = random_bits(rng, nt);
  std::vector<std::uint8_t> sx(nt);
  for (std::size_t i = 0; i < nt; ++i) sx[i] = s1[i] ^ s2[i];
  const auto k1 = toeplitz_hash_fft(seed, s1, r);
  const auto k2 = toeplitz_hash_fft(seed, s2, r);
  const auto kx = toeplitz_hash_fft(seed, sx, r);
  for (std::size_t i = 0; i < r; ++i) CHECK(kx[i] == (k1[i] ^ k2[i]));
}

TEST_CASE("different seeds decorrelate the outputs") {
  std::mt19937_64 rng(13);
  const std::size_t nt = 4096, r = 512;
  const std::vector<std::uint8_t> s = random_bits(rng, nt);
  double mean_diff = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const auto seed_a = random_bits(rng, nt + r - 1);
    const auto seed_b = random_bits(rng, nt + r - 1);
    const auto ka = toeplitz_hash_fft(seed_a, s, r);
    const auto kb = toeplitz_hash_fft(seed_b, s, r);
    int diff = 0;
    for (std::size_t i = 0; i < r; ++i) diff += ka[i] != kb[i];
    mean_diff += diff;
  }
  mean_diff /= trials;
  CHECK(mean_diff > 0.9 * r / 2.0);
  CHECK(mean_diff < 1.1 * r / 2.0);
}

TEST_CASE("exact integer fallback agrees with the naive product") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nt = 1 + rng() % 2000;
    const std::size_t r = 1 + rng() % 800;
    const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
    const std::vector<std::uint8_t> s = random_bits(rng, nt);
    CHECK(detail::toeplitz_hash_exact(seed, s, r) == toeplitz_hash_naive(seed, s, r));
  }
  // larger instance where convolution counts reach the thousands
  const std::size_t nt = 60000, r = 4000;
  const std::vector<std::uint8_t> seed = random_bits(rng, nt + r - 1);
  const std::vector<std::uint8_t> s = random_bits(rng, nt);
  CHECK(toeplitz_hash_fft(seed, s, r) == toeplitz_hash_naive(seed, s, r));
}

TEST_CASE("finalize_keys: agreement, mismatch flag, empty-key status") {
  std::mt19937_64 rng(15);
  const std::size_t nt = 5000;
  const std::int64_t r = 700;
  std::vector<std::uint8_t> s = random_bits(rng, nt);

  const FinalKeys same = finalize_keys(s, s, r, 99);
  CHECK(same.status == "ok");
  CHECK(same.match);
  CHECK(same.bob.size() == static_cast<std::size_t>(r));
  CHECK(same.bob == same.alice);

  // deterministic in the seed
  const FinalKeys again = finalize_keys(s, s, r, 99);
  CHECK(again.bob == same.bob);
  const FinalKeys other = finalize_keys(s, s, r, 100);
  CHECK(other.bob != same.bob);

  // single-bit disagreement flips about half the key bits
  std::vector<std::uint8_t> s2 = s;
  s2[1234] ^= 1;
  const FinalKeys diff = finalize_keys(s, s2, r, 99);
  CHECK(!diff.match);
  int flipped = 0;
  for (std::size_t i = 0; i < diff.bob.size(); ++i) flipped += diff.bob[i] != diff.alice[i];
  CHECK(flipped > 0);

  const FinalKeys none = finalize_keys(s, s, 0, 99);
  CHECK(none.status == "no extractable key");
  CHECK(none.bob.empty());
  const FinalKeys neg = finalize_keys(s, s, -5, 99);
  CHECK(neg.status == "no extractable key");
}
