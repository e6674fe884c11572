#include "cvqkd/random.hpp"

#include <cmath>

namespace cvqkd {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t master, SeedStage stage, std::uint64_t index) {
  return mix64(mix64(master ^ mix64(static_cast<std::uint64_t>(stage))) + index);
}

double GaussianSampler::uniform01() {
  // 53-bit mantissa, shifted into (0,1].
  return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
}

double GaussianSampler::standard() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

void GaussianSampler::fill_normal(std::vector<double>& out, std::size_t count, double sigma) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = sigma * standard();
}

std::vector<std::uint64_t> expand_bits(std::uint64_t seed, std::size_t nbits) {
  const std::size_t nwords = (nbits + 63) / 64;
  std::vector<std::uint64_t> words(nwords);
  for (std::size_t i = 0; i < nwords; ++i) words[i] = mix64(seed + 0x632be59bd9b4e019ULL * (i + 1));
  const std::size_t tail = nbits % 64;
  if (tail != 0 && nwords > 0) words[nwords - 1] &= (~0ULL >> (64 - tail));
  return words;
}

}  // namespace cvqkd
