#include "cvqkd/privacy.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "cvqkd/random.hpp"

namespace cvqkd {

namespace {

std::vector<std::uint64_t> pack_bits(const std::uint8_t* bits, std::size_t count) {
  std::vector<std::uint64_t> words((count + 63) / 64, 0);
  for (std::size_t i = 0; i < count; ++i)
    if (bits[i]) words[i >> 6] |= std::uint64_t{1} << (i & 63);
  return words;
}

// Smallest integer >= target whose prime factors are all in {2, 3, 5};
// FFT lengths of this form keep FFTW on its fast codelets.
std::size_t next_5_smooth(std::size_t target) {
  std::size_t best = SIZE_MAX;
  for (std::size_t p2 = 1;; p2 *= 2) {
    if (p2 >= best) break;
    for (std::size_t p23 = p2;; p23 *= 3) {
      if (p23 >= best) break;
      std::size_t f = p23;
      while (f < target) {
        if (f > best / 5) {
          f = SIZE_MAX;
          break;
        }
        f *= 5;
      }
      best = std::min(best, f);
      if (p23 > best / 3) break;
    }
    if (p2 > best / 2) break;
  }
  return best;
}

std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe

// ---- Exact fallback: negacyclic-free integer convolution over the prime
// field 2^64 - 2^32 + 1 (supports power-of-two transforms up to 2^32).
constexpr std::uint64_t kNttP = 0xffffffff00000001ULL;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kNttP);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t acc = 1;
  while (exp) {
    if (exp & 1) acc = mulmod(acc, base);
    base = mulmod(base, base);
    exp >>= 1;
  }
  return acc;
}

void ntt(std::vector<std::uint64_t>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::uint64_t w = powmod(7, (kNttP - 1) / len);  // 7 generates the multiplicative group
    if (inverse) w = powmod(w, kNttP - 2);
    for (std::size_t i = 0; i < n; i += len) {
      std::uint64_t wn = 1;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::uint64_t u = a[i + k];
        const std::uint64_t v = mulmod(a[i + k + len / 2], wn);
        a[i + k] = u + v >= kNttP || u + v < u ? u + v - kNttP : u + v;
        a[i + k + len / 2] = u >= v ? u - v : u + kNttP - v;
        wn = mulmod(wn, w);
      }
    }
  }
  if (inverse) {
    const std::uint64_t inv_n = powmod(n % kNttP, kNttP - 2);
    for (auto& x : a) x = mulmod(x, inv_n);
  }
}

// Exact linear convolution counts of two 0/1 sequences.
std::vector<std::uint64_t> convolve_exact(const std::vector<std::uint8_t>& a,
                                          const std::vector<std::uint8_t>& b) {
  const std::size_t out_len = a.size() + b.size() - 1;
  std::size_t f = 1;
  while (f < out_len) f <<= 1;
  std::vector<std::uint64_t> fa(f, 0), fb(f, 0);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  ntt(fa, false);
  ntt(fb, false);
  for (std::size_t i = 0; i < f; ++i) fa[i] = mulmod(fa[i], fb[i]);
  ntt(fa, true);
  fa.resize(out_len);
  return fa;
}

}  // namespace

std::vector<std::uint8_t> toeplitz_hash_naive(const std::vector<std::uint8_t>& seed_bits,
                                              const std::vector<std::uint8_t>& s, std::size_t r) {
  const std::size_t n_tilde = s.size();
  if (seed_bits.size() != n_tilde + r - 1) throw std::invalid_argument("seed length mismatch");

  // Row i of T is the reversed seed, windowed at offset r - 1 - i.
  std::vector<std::uint8_t> rev(seed_bits.rbegin(), seed_bits.rend());
  const std::vector<std::uint64_t> sw = pack_bits(s.data(), n_tilde);
  const std::vector<std::uint64_t> rw = pack_bits(rev.data(), rev.size());

  std::vector<std::uint8_t> key(r);
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t off = r - 1 - i;
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < sw.size(); ++k) {
      const std::size_t bit = off + 64 * k;
      const std::size_t word = bit >> 6;
      const unsigned shift = bit & 63;
      std::uint64_t window = rw[word] >> shift;
      if (shift != 0 && word + 1 < rw.size()) window |= rw[word + 1] << (64 - shift);
      acc ^= window & sw[k];
    }
    key[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return key;
}

namespace detail {

std::vector<std::uint8_t> toeplitz_hash_exact(const std::vector<std::uint8_t>& seed_bits,
                                              const std::vector<std::uint8_t>& s, std::size_t r) {
  const std::size_t n_tilde = s.size();
  if (seed_bits.size() != n_tilde + r - 1) throw std::invalid_argument("seed length mismatch");
  const std::size_t L = n_tilde + r - 1;
  std::vector<std::uint8_t> c_def(L);
  for (std::size_t t = 0; t < L; ++t) c_def[t] = seed_bits[(t + n_tilde - 1) % L];

  const std::vector<std::uint64_t> lin = convolve_exact(c_def, s);
  std::vector<std::uint8_t> key(r);
  for (std::size_t k = 0; k < r; ++k) {
    const std::uint64_t head = lin[k];
    const std::uint64_t tail = k + L < lin.size() ? lin[k + L] : 0;
    key[k] = static_cast<std::uint8_t>((head + tail) & 1);
  }
  return key;
}

}  // namespace detail

std::vector<std::uint8_t> toeplitz_hash_fft(const std::vector<std::uint8_t>& seed_bits,
                                            const std::vector<std::uint8_t>& s, std::size_t r) {
  const std::size_t n_tilde = s.size();
  if (seed_bits.size() != n_tilde + r - 1) throw std::invalid_argument("seed length mismatch");
  const std::size_t L = n_tilde + r - 1;

  // Definition sequence: seed rotated so the key sits in the first r slots
  // of the circular convolution.
  std::vector<std::uint8_t> c_def(L);
  for (std::size_t t = 0; t < L; ++t) c_def[t] = seed_bits[(t + n_tilde - 1) % L];

  const std::size_t lin_len = n_tilde + L - 1;
  const std::size_t f = next_5_smooth(std::max<std::size_t>(lin_len, 16));

  std::vector<double> buf1(2 * (f / 2 + 1), 0.0);
  std::vector<double> buf2(2 * (f / 2 + 1), 0.0);
  for (std::size_t i = 0; i < L; ++i) buf1[i] = c_def[i];
  for (std::size_t i = 0; i < n_tilde; ++i) buf2[i] = s[i];

  fftw_plan p1, p2, pinv;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    p1 = fftw_plan_dft_r2c_1d(static_cast<int>(f), buf1.data(),
                              reinterpret_cast<fftw_complex*>(buf1.data()), FFTW_ESTIMATE);
    p2 = fftw_plan_dft_r2c_1d(static_cast<int>(f), buf2.data(),
                              reinterpret_cast<fftw_complex*>(buf2.data()), FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_1d(static_cast<int>(f), reinterpret_cast<fftw_complex*>(buf1.data()),
                                buf1.data(), FFTW_ESTIMATE);
  }
  fftw_execute(p1);
  fftw_execute(p2);
  const double scale = 1.0 / static_cast<double>(f);
  for (std::size_t k = 0; k <= f / 2; ++k) {
    const double re1 = buf1[2 * k], im1 = buf1[2 * k + 1];
    const double re2 = buf2[2 * k], im2 = buf2[2 * k + 1];
    buf1[2 * k] = (re1 * re2 - im1 * im2) * scale;
    buf1[2 * k + 1] = (re1 * im2 + im1 * re2) * scale;
  }
  fftw_execute(pinv);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(p1);
    fftw_destroy_plan(p2);
    fftw_destroy_plan(pinv);
  }

  // The circular result folds the linear convolution once: entry k plus
  // entry k + L. Validate round-off before trusting the rounding.
  double max_err = 0.0;
  for (std::size_t k = 0; k < r; ++k) {
    max_err = std::max(max_err, std::abs(buf1[k] - std::nearbyint(buf1[k])));
    if (k + L < lin_len)
      max_err = std::max(max_err, std::abs(buf1[k + L] - std::nearbyint(buf1[k + L])));
  }
  if (max_err >= 0.25) return detail::toeplitz_hash_exact(seed_bits, s, r);

  std::vector<std::uint8_t> key(r);
  for (std::size_t k = 0; k < r; ++k) {
    const std::uint64_t head = static_cast<std::uint64_t>(std::llround(buf1[k]));
    const std::uint64_t tail =
        k + L < lin_len ? static_cast<std::uint64_t>(std::llround(buf1[k + L])) : 0;
    key[k] = static_cast<std::uint8_t>((head + tail) & 1);
  }
  return key;
}

FinalKeys finalize_keys(const std::vector<std::uint8_t>& s, const std::vector<std::uint8_t>& s_hat,
                        std::int64_t r, std::uint64_t seed64) {
  FinalKeys out;
  if (r <= 0 || s.empty()) {
    out.status = "no extractable key";
    return out;
  }
  if (s.size() != s_hat.size()) throw std::invalid_argument("concatenated strings differ in length");

  const std::size_t n_tilde = s.size();
  const std::size_t seed_len = n_tilde + static_cast<std::size_t>(r) - 1;
  const std::vector<std::uint64_t> words = expand_bits(seed64, seed_len);
  std::vector<std::uint8_t> seed_bits(seed_len);
  for (std::size_t i = 0; i < seed_len; ++i) seed_bits[i] = (words[i >> 6] >> (i & 63)) & 1;

  out.bob = toeplitz_hash_fft(seed_bits, s, static_cast<std::size_t>(r));
  out.alice = toeplitz_hash_fft(seed_bits, s_hat, static_cast<std::size_t>(r));
  out.match = out.bob == out.alice;
  out.status = "ok";
  return out;
}

}  // namespace cvqkd
