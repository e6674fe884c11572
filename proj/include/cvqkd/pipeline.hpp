#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cvqkd/config.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/reconciliation.hpp"

namespace cvqkd {

struct BlockRecord {
  int block_index = 0;
  std::uint64_t syndrome_digest = 0;  // FNV-1a over the syndrome symbols
  bool fnd = false;
  int fnd_rnd = 0;
  bool smt_passed = false;  // syndrome-matching test (decoder convergence)
  bool ver_passed = false;  // hash verification; false when SMT already failed
  std::uint64_t leak_bits = 0;  // published bits: l*q + n*d
};

struct RateReport {
  double I_xy = 0.0;       // mutual information at the estimated SNR
  double chi_worst = 0.0;  // Holevo bound at the worst-case (T_M, Xi_M)
  double R_asy = 0.0;      // asymptotic rate at the true channel
  double R_M = 0.0;        // beta*I - chi_worst
  double R_M_EC = 0.0;     // with the realized reconciliation leakage
  double R_tilde = 0.0;    // per-use composable rate of a surviving block
  double R = 0.0;          // (n p_EC / N) R_tilde, signed
  double R_theo = 0.0;     // prediction with guessed beta, p_EC = 0.99
  double delta_aep = 0.0;
  double theta = 0.0;
  std::int64_t key_bits = 0;   // r, clamped at 0
  std::uint64_t n_tilde = 0;   // privacy-amplification input bits
  double epsilon = 0.0;        // total security parameter
};

// Everything a run produces except the raw transcript. Timings are
// excluded from the determinism guarantee; all other fields are a pure
// function of (config, seed).
struct RunReport {
  ProtocolConfig cfg;
  DerivedParams derived{};
  std::string status;  // "OK", "aborted: I ≤ χ", "invalid code rate"
  Estimates est;       // pooled maximum-likelihood estimates (drives the run)
  Estimates est_cov;   // covariance-method cross-check, logged only
  double H_K_emp = 0.0;
  double H_K_analytic = 0.0;
  double R_code_requested = 0.0;
  double R_code_realized = 0.0;  // 1 - l/n after rounding l
  std::uint64_t l_rows = 0;
  std::vector<BlockRecord> blocks;
  int n_smt = 0, n_ver = 0;
  EcAccounting acct;
  double mean_fnd_rnd = 0.0;  // over syndrome-matched blocks
  RateReport rates;
  std::vector<std::uint8_t> key;  // final key bits, Bob side
  bool keys_match = false;        // vacuously true when no key is extractable
  std::string key_status;         // "ok" or "no extractable key"
  std::uint64_t key_digest = 0;   // FNV-1a over the packed key bytes
  std::uint64_t toeplitz_seed = 0;
  std::map<std::string, double> timings_ms;
};

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string hex64(std::uint64_t v);

// Key bits packed 8 per byte, MSB first, zero-padded; the key.bin content.
std::vector<std::uint8_t> pack_key_bytes(const std::vector<std::uint8_t>& bits);

RunReport run_protocol(const ProtocolConfig& cfg);

std::string report_to_json(const RunReport& rep);
std::string blocks_to_jsonl(const RunReport& rep);

struct SweepPoint {
  double value = 0.0;
  std::vector<double> rep_R;        // signed composable rate; 0 for aborted runs
  std::vector<double> rep_fer;
  std::vector<double> rep_p_ec;
  std::vector<double> rep_fnd_rnd;  // NaN when the run never decoded
  std::vector<std::string> rep_status;
  double mean_R = 0.0, stderr_R = 0.0;
  double mean_fer = 0.0, stderr_fer = 0.0;
  double mean_p_ec = 0.0, stderr_p_ec = 0.0;
  double mean_fnd_rnd = 0.0, stderr_fnd_rnd = 0.0;
};

// param is one of N, L, xi, snr, p. Repetition j runs every grid point with
// the same derived seed, so points are compared under common random numbers.
// Per-point failures are recorded in rep_status and the sweep continues.
std::vector<SweepPoint> run_sweep(const ProtocolConfig& base, const std::string& param,
                                  const std::vector<double>& grid, int reps);

std::string sweep_to_csv(const std::string& param, const std::vector<SweepPoint>& points);

}  // namespace cvqkd
