#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cvqkd {

// Stage tags for sub-seed derivation. Every (stage, index) pair owns an
// independent stream, so per-block work gives identical results under any
// thread schedule or block ordering.
enum class SeedStage : std::uint64_t {
  StatePrep = 1,
  ChannelNoise = 2,
  PeSelection = 3,
  ParityMatrix = 4,
  VerifyHash = 5,
  ToeplitzSeed = 6,
  Sweep = 7,
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Deterministic stream seed for (master, stage, index).
std::uint64_t sub_seed(std::uint64_t master, SeedStage stage, std::uint64_t index);

// Gaussian source: std::mt19937_64 + Box-Muller (trigonometric form).
// Both parts are fully specified by the standard, so the sample stream is
// bit-identical across platforms and standard libraries.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

  // Uniform on (0,1]; never returns 0 so log() stays finite.
  double uniform01();

  double standard();  // N(0,1)
  double normal(double sigma) { return sigma * standard(); }
  void fill_normal(std::vector<double>& out, std::size_t count, double sigma);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Counter-mode expansion of a seed into nbits of public randomness, packed
// LSB-first: bit i of the stream is (words[i/64] >> (i%64)) & 1.
std::vector<std::uint64_t> expand_bits(std::uint64_t seed, std::size_t nbits);

}  // namespace cvqkd
