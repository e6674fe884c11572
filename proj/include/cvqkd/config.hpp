#pragma once

#include <cstdint>
#include <string>

namespace cvqkd {

// All run inputs. Channel/detector values are in shot-noise units.
struct ProtocolConfig {
  double L = 5.0;       // channel length, km
  double A = 0.2;       // attenuation, dB/km
  double xi = 0.01;     // excess noise
  double eta = 0.8;     // detector efficiency
  double v_el = 0.1;    // electronic noise
  double beta = 0.9225; // reconciliation efficiency

  int n_bks = 10;          // blocks per run
  std::uint64_t N = 200000;  // uses per block
  std::uint64_t M = 0;       // PE instances overall; 0 -> 0.1 * n_bks * N

  int p = 6;          // discretization bits
  int q = 4;          // top (error-corrected) bits
  double alpha = 7.0; // discretization cut-off
  int iter_max = 100; // decoder iteration cap

  double eps_pe = 0x1p-32;
  double eps_s = 0x1p-32;
  double eps_h = 0x1p-32;
  double eps_cor = 0x1p-32;

  // Modulation selection: exactly one of
  //   mu >= 1           fixed modulation variance
  //   snr > 0           mu chosen so the true channel SNR equals this
  //   optimize_mu       mu maximizing the asymptotic rate
  double mu = 0.0;
  double snr = 0.0;
  bool optimize_mu = false;

  std::uint64_t seed = 1;
  int threads = 0;  // 0 -> automatic (bounded; decoding is memory-hungry)
};

// Quantities derived from the config (the "related parameters" of a run).
struct DerivedParams {
  double T;         // transmissivity 10^(-A L / 10)
  double sigma_z2;  // 1 + v_el + eta T xi
  double Xi;        // eta T xi
  double omega;     // environment thermal variance; 1 when T = 1
  double chi_noise; // equivalent noise xi + (1 + v_el)/(T eta)
  double mu;        // resolved modulation variance
  double snr;       // (mu - 1) / chi_noise
  double rho;       // sqrt(snr / (1 + snr))
  std::uint64_t m;  // PE points per block, floor(M / n_bks)
  std::uint64_t n;  // key points per block, N - m
  std::uint64_t M_used;  // m * n_bks (remainder of M unused)
  double delta;     // lattice step alpha / 2^(p-1)
  int d;            // bottom bits p - q
  int t;            // verification tag bits, ceil(-log2 eps_cor)
  unsigned gf_order;  // 2^q
};

// Throws std::invalid_argument with a descriptive message on any violation.
void validate_config(const ProtocolConfig& cfg);

// Validates, resolves mu (fixed / snr target / optimized), fills every field.
DerivedParams derive_params(const ProtocolConfig& cfg);

// Flat "name = value" file, one pair per line, '#' comments. Unknown keys are
// rejected. Keys: L, A, xi, eta, v_el, beta, n_bks, N, M, p, q, alpha,
// iter_max, eps_pe, eps_s, eps_h, eps_cor, mu (number or "optimize"), snr,
// seed, threads.
ProtocolConfig load_config(const std::string& path);

}  // namespace cvqkd
