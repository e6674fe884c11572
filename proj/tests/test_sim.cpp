#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "cvqkd/random.hpp"
#include "cvqkd/sim.hpp"

using namespace cvqkd;

TEST_CASE("state preparation: variance and determinism") {
  const double mu = 21.89226929460376;
  GaussianSampler rng(sub_seed(42, SeedStage::StatePrep, 0));
  const std::vector<double> x = prepare_states(mu, 1000000, rng);

  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / x.size();
  const double var = s2 / x.size() - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var / (mu - 1.0) - 1.0) < 0.01);

  GaussianSampler rng2(sub_seed(42, SeedStage::StatePrep, 0));
  const std::vector<double> x2 = prepare_states(mu, 1000000, rng2);
  CHECK(x == x2);

  GaussianSampler rng3(sub_seed(42, SeedStage::StatePrep, 1));
  const std::vector<double> x3 = prepare_states(mu, 10, rng3);
  CHECK(x3 != std::vector<double>(x.begin(), x.begin() + 10));

  GaussianSampler bad(1);
  CHECK_THROWS(prepare_states(0.5, 10, bad));
}

TEST_CASE("channel: gain, residual noise variance, correlation") {
  const double mu = 21.89226929460376;
  const double T = 0.7943282347242815, eta = 0.8, xi = 0.01, v_el = 0.1;
  GaussianSampler prep(sub_seed(7, SeedStage::StatePrep, 0));
  GaussianSampler chan(sub_seed(7, SeedStage::ChannelNoise, 0));
  const std::size_t n = 1000000;
  const std::vector<double> x = prepare_states(mu, n, prep);
  const std::vector<double> y = transmit_and_measure(x, T, eta, xi, v_el, chan);
  REQUIRE(y.size() == n);

  const double gain = std::sqrt(T * eta);
  double sxx = 0.0, sxy = 0.0, szz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    const double z = y[i] - gain * x[i];
    szz += z * z;
  }
  const double tau = sxy / sxx;
  const double sz2_true = 1.0 + v_el + eta * T * xi;
  CHECK(std::abs(tau / gain - 1.0) < 0.01);
  CHECK(std::abs(szz / n / sz2_true - 1.0) < 0.01);

  // empirical SNR near (mu-1)/chi_noise = 12
  const double snr_emp = gain * gain * (sxx / n) / (szz / n);
  CHECK(std::abs(snr_emp / 12.0 - 1.0) < 0.03);
}

TEST_CASE("sub-seed separation: stages and indices decorrelate streams") {
  CHECK(sub_seed(1, SeedStage::StatePrep, 0) != sub_seed(1, SeedStage::ChannelNoise, 0));
  CHECK(sub_seed(1, SeedStage::StatePrep, 0) != sub_seed(1, SeedStage::StatePrep, 1));
  CHECK(sub_seed(1, SeedStage::StatePrep, 0) != sub_seed(2, SeedStage::StatePrep, 0));
  // deterministic
  CHECK(sub_seed(1, SeedStage::VerifyHash, 3) == sub_seed(1, SeedStage::VerifyHash, 3));
}

TEST_CASE("counter-mode bit expansion") {
  const auto w1 = expand_bits(99, 130);
  const auto w2 = expand_bits(99, 130);
  CHECK(w1 == w2);
  REQUIRE(w1.size() == 3);
  // tail beyond bit 129 is masked off
  CHECK((w1[2] >> 2) == 0);
  const auto w3 = expand_bits(100, 130);
  CHECK(w1 != w3);
  // roughly balanced bits
  int ones = 0;
  const auto big = expand_bits(5, 64000);
  for (auto w : big) ones += std::popcount(w);
  CHECK(std::abs(ones - 32000) < 800);
}
