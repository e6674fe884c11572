#include "cvqkd/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cvqkd/rates.hpp"

namespace cvqkd {

namespace {

// Unbiased uniform draw in [0, bound) via rejection.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = -bound % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

PePartition select_pe_positions(std::uint64_t N, int n_bks, std::uint64_t M,
                                std::uint64_t master_seed) {
  if (n_bks < 1) throw std::invalid_argument("n_bks must be >= 1");
  const std::uint64_t m = M / static_cast<std::uint64_t>(n_bks);
  if (m >= N) throw std::invalid_argument("PE set must leave key positions: M/n_bks < N");

  PePartition part;
  part.m = m;
  part.n = N - m;
  part.pe_indices.resize(n_bks);
  part.key_indices.resize(n_bks);

  std::vector<std::uint32_t> pool(N);
  std::vector<std::uint8_t> taken(N);
  for (int b = 0; b < n_bks; ++b) {
    std::mt19937_64 rng(sub_seed(master_seed, SeedStage::PeSelection, b));
    std::iota(pool.begin(), pool.end(), 0u);
    // Partial Fisher-Yates: after m swaps the prefix is the sample.
    for (std::uint64_t i = 0; i < m; ++i)
      std::swap(pool[i], pool[i + uniform_below(rng, N - i)]);

    std::fill(taken.begin(), taken.end(), 0);
    auto& pe = part.pe_indices[b];
    pe.assign(pool.begin(), pool.begin() + m);
    std::sort(pe.begin(), pe.end());
    for (const std::uint32_t idx : pe) taken[idx] = 1;

    auto& key = part.key_indices[b];
    key.clear();
    key.reserve(N - m);
    for (std::uint32_t i = 0; i < N; ++i)
      if (!taken[i]) key.push_back(i);
  }
  return part;
}

Estimates estimate(const std::vector<double>& x, const std::vector<double>& y, double mu,
                   double eta, double v_el, double eps_pe) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 sample pairs");
  if (mu <= 1.0) throw std::invalid_argument("mu must exceed 1 for estimation");
  const std::size_t m = x.size();

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  if (sxx == 0.0) throw std::runtime_error("degenerate PE sample: sum x^2 = 0");

  Estimates est;
  est.m_used = m;
  est.w = confidence_factor(eps_pe);
  est.tau_hat = sxy / sxx;

  double srr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - est.tau_hat * x[i];
    srr += r * r;
  }
  est.sigma_z2_hat = srr / static_cast<double>(m);

  est.delta_tau = est.w * std::sqrt(est.sigma_z2_hat / (static_cast<double>(m) * (mu - 1.0)));
  est.delta_sigma = est.w * est.sigma_z2_hat * std::sqrt(2.0 / static_cast<double>(m));

  est.T_hat = est.tau_hat * est.tau_hat / eta;
  est.Xi_hat = est.sigma_z2_hat - 1.0 - v_el;

  double tau_low = est.tau_hat - est.delta_tau;
  if (tau_low < 0.0) {
    tau_low = 0.0;
    est.t_clamped = true;
  }
  est.T_M = tau_low * tau_low / eta;
  est.Xi_M = est.Xi_hat + est.delta_sigma;

  est.snr_hat = (mu - 1.0) * eta * est.T_hat / (1.0 + v_el + est.Xi_hat);
  est.rho_hat = correlation_from_snr(est.snr_hat);
  return est;
}

Estimates estimate_appendix_a(const std::vector<double>& x, const std::vector<double>& y,
                              double mu, double eta, double v_el, double eps_pe) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 sample pairs");
  if (mu <= 1.0) throw std::invalid_argument("mu must exceed 1 for estimation");
  const std::size_t m = x.size();
  const double md = static_cast<double>(m);
  const double sigma_x2 = mu - 1.0;  // configured modulation, not re-estimated

  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) sxy += x[i] * y[i];
  const double c_hat = sxy / md;

  Estimates est;
  est.m_used = m;
  est.w = confidence_factor(eps_pe);
  est.T_hat = c_hat * c_hat / (eta * sigma_x2 * sigma_x2);
  est.tau_hat = std::sqrt(eta * est.T_hat) * (c_hat < 0.0 ? -1.0 : 1.0);

  const double gain = std::sqrt(eta * est.T_hat) * (c_hat < 0.0 ? -1.0 : 1.0);
  double srr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - gain * x[i];
    srr += r * r;
  }
  est.sigma_z2_hat = srr / md;
  est.Xi_hat = est.sigma_z2_hat - 1.0 - v_el;

  const double ratio = est.T_hat > 0.0
                           ? est.sigma_z2_hat / (eta * est.T_hat * sigma_x2)
                           : 0.0;
  const double sigma_T = est.T_hat > 0.0
                             ? std::sqrt(4.0 / md * est.T_hat * est.T_hat * (2.0 + ratio))
                             : 0.0;
  const double sigma_Xi = est.sigma_z2_hat * std::sqrt(2.0 / md);

  est.delta_tau = est.w * sigma_T;      // half-width directly in T for this variant
  est.delta_sigma = est.w * sigma_Xi;

  est.T_M = est.T_hat - est.w * sigma_T;
  if (est.T_M < 0.0) {
    est.T_M = 0.0;
    est.t_clamped = true;
  }
  est.Xi_M = est.Xi_hat + est.w * sigma_Xi;

  est.snr_hat = (mu - 1.0) * eta * est.T_hat / (1.0 + v_el + est.Xi_hat);
  est.rho_hat = correlation_from_snr(est.snr_hat);
  return est;
}

bool early_termination_check(const Estimates& est, double mu, double eta, double v_el) {
  const double info = mutual_information(est.snr_hat);
  const double chi = holevo_bound_from_Xi(mu, est.T_M, eta, est.Xi_M, v_el);
  return info > chi;
}

}  // namespace cvqkd
