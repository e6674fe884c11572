#pragma once

#include <cstdint>
#include <vector>

#include "cvqkd/random.hpp"

namespace cvqkd {

// Positions reserved for parameter estimation, per block.
struct PePartition {
  std::uint64_t m = 0;  // PE points per block
  std::uint64_t n = 0;  // key points per block
  std::vector<std::vector<std::uint32_t>> pe_indices;   // sorted, per block
  std::vector<std::vector<std::uint32_t>> key_indices;  // sorted complement
};

// Uniform without-replacement choice of m = floor(M / n_bks) positions in
// each block (the remainder of M is unused). Deterministic in the seed and
// independent of block processing order.
PePartition select_pe_positions(std::uint64_t N, int n_bks, std::uint64_t M,
                                std::uint64_t master_seed);

struct Estimates {
  double tau_hat = 0.0;       // estimator of sqrt(T eta)
  double sigma_z2_hat = 0.0;
  double T_hat = 0.0;
  double Xi_hat = 0.0;
  double delta_tau = 0.0;     // confidence half-widths
  double delta_sigma = 0.0;
  double T_M = 0.0;           // worst-case (low) transmissivity
  double Xi_M = 0.0;          // worst-case (high) excess-noise variance
  double snr_hat = 0.0;
  double rho_hat = 0.0;
  double w = 0.0;             // sqrt(2) erfinv(1 - eps_pe)
  std::uint64_t m_used = 0;
  bool t_clamped = false;     // tau_hat - delta_tau fell below 0
};

// Maximum-likelihood estimators over the pooled PE samples:
// tau = sum(xy)/sum(x^2), sigma_z^2 = mean((y - tau x)^2), with worst-case
// endpoints T_M = (tau - w sqrt(sigma_z^2/(m (mu-1))))^2 / eta and
// Xi_M = Xi_hat + w sigma_z^2 sqrt(2/m).
Estimates estimate(const std::vector<double>& x, const std::vector<double>& y, double mu,
                   double eta, double v_el, double eps_pe);

// Covariance / chi-squared variant: T from the sample covariance with the
// known modulation sigma_x^2 = mu - 1, worst case via the Gaussian standard
// deviations sigma_T, sigma_Xi.
Estimates estimate_appendix_a(const std::vector<double>& x, const std::vector<double>& y,
                              double mu, double eta, double v_el, double eps_pe);

// Proceed iff I(x:y) at the point estimates strictly exceeds the Holevo
// bound at the worst-case estimates.
bool early_termination_check(const Estimates& est, double mu, double eta, double v_el);

}  // namespace cvqkd
