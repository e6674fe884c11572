#include "cvqkd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cvqkd/gf.hpp"
#include "cvqkd/privacy.hpp"
#include "cvqkd/random.hpp"
#include "cvqkd/rates.hpp"
#include "cvqkd/sim.hpp"

namespace cvqkd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int resolve_threads(int requested, int n_blocks) {
  int t = requested;
  if (t <= 0) {
    // Each decoder worker holds O(n * 2^(2q)) doubles; cap the default.
    const unsigned hw = std::thread::hardware_concurrency();
    t = static_cast<int>(hw == 0 ? 1 : std::min(hw, 4u));
  }
  return std::max(1, std::min(t, n_blocks));
}

void mean_stderr(const std::vector<double>& v, double& mean, double& se) {
  mean = 0.0;
  se = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (static_cast<double>(v.size() - 1) * static_cast<double>(v.size())));
}

nlohmann::json estimates_json(const Estimates& e) {
  return {{"tau_hat", e.tau_hat},       {"sigma_z2_hat", e.sigma_z2_hat},
          {"T_hat", e.T_hat},           {"Xi_hat", e.Xi_hat},
          {"delta_tau", e.delta_tau},   {"delta_sigma", e.delta_sigma},
          {"T_M", e.T_M},               {"Xi_M", e.Xi_M},
          {"snr_hat", e.snr_hat},       {"rho_hat", e.rho_hat},
          {"w", e.w},                   {"m_used", e.m_used},
          {"t_clamped", e.t_clamped}};
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::uint8_t> pack_key_bytes(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
  return bytes;
}

RunReport run_protocol(const ProtocolConfig& cfg_in) {
  const auto t_total = Clock::now();
  RunReport rep;
  rep.cfg = cfg_in;
  rep.derived = derive_params(cfg_in);
  const ProtocolConfig& cfg = rep.cfg;
  const DerivedParams& dp = rep.derived;

  const int nb = cfg.n_bks;
  const std::size_t N = cfg.N;
  const std::size_t n = dp.n;
  rep.toeplitz_seed = sub_seed(cfg.seed, SeedStage::ToeplitzSeed, 0);
  rep.key_status = "no extractable key";
  rep.keys_match = true;

  rep.rates.R_asy = asymptotic_rate(cfg.beta, dp.mu, cfg.eta, cfg.v_el, dp.T, cfg.xi);
  rep.rates.R_theo =
      theoretical_rate(dp.mu, dp.T, cfg.eta, cfg.xi, cfg.v_el, cfg.beta, 0.99,
                       static_cast<double>(n), static_cast<double>(N),
                       static_cast<double>(dp.M_used), cfg.p, cfg.eps_pe, cfg.eps_s, cfg.eps_h);

  auto finish = [&](RunReport& r) -> RunReport& {
    r.rates.epsilon =
        epsilon_total(r.acct.p_ec, cfg.eps_pe, cfg.eps_cor, cfg.eps_s, cfg.eps_h);
    r.timings_ms["total"] = ms_since(t_total);
    return r;
  };

  // ---- coherent-state exchange and homodyne detection, per block
  auto t0 = Clock::now();
  std::vector<std::vector<double>> xs(nb), ys(nb);
  for (int b = 0; b < nb; ++b) {
    GaussianSampler prep(sub_seed(cfg.seed, SeedStage::StatePrep, b));
    xs[b] = prepare_states(dp.mu, N, prep);
    GaussianSampler chan(sub_seed(cfg.seed, SeedStage::ChannelNoise, b));
    ys[b] = transmit_and_measure(xs[b], dp.T, cfg.eta, cfg.xi, cfg.v_el, chan);
  }
  rep.timings_ms["simulate"] = ms_since(t0);

  // ---- parameter estimation over the pooled declared positions
  t0 = Clock::now();
  const PePartition part = select_pe_positions(N, nb, dp.M_used, cfg.seed);
  std::vector<double> x_pe, y_pe;
  x_pe.reserve(dp.M_used);
  y_pe.reserve(dp.M_used);
  for (int b = 0; b < nb; ++b)
    for (std::uint32_t idx : part.pe_indices[b]) {
      x_pe.push_back(xs[b][idx]);
      y_pe.push_back(ys[b][idx]);
    }
  rep.est = estimate(x_pe, y_pe, dp.mu, cfg.eta, cfg.v_el, cfg.eps_pe);
  rep.est_cov = estimate_appendix_a(x_pe, y_pe, dp.mu, cfg.eta, cfg.v_el, cfg.eps_pe);
  x_pe.clear();
  x_pe.shrink_to_fit();
  y_pe.clear();
  y_pe.shrink_to_fit();

  rep.rates.I_xy = mutual_information(rep.est.snr_hat);
  rep.rates.chi_worst =
      holevo_bound_from_Xi(dp.mu, rep.est.T_M, cfg.eta, rep.est.Xi_M, cfg.v_el);
  rep.rates.R_M = cfg.beta * rep.rates.I_xy - rep.rates.chi_worst;
  rep.timings_ms["estimate"] = ms_since(t0);

  if (!early_termination_check(rep.est, dp.mu, cfg.eta, cfg.v_el)) {
    rep.status = "aborted: I ≤ χ";
    return finish(rep);
  }

  // ---- normalization and discretization of the key record
  t0 = Clock::now();
  const DiscretizationScheme scheme = make_scheme(cfg.alpha, cfg.p, cfg.q);
  double sx2 = 0.0, sy2 = 0.0;
  for (int b = 0; b < nb; ++b)
    for (std::uint32_t idx : part.key_indices[b]) {
      sx2 += xs[b][idx] * xs[b][idx];
      sy2 += ys[b][idx] * ys[b][idx];
    }
  const double total_keys = static_cast<double>(n) * nb;
  const double sx = std::sqrt(sx2 / total_keys);
  const double sy = std::sqrt(sy2 / total_keys);

  std::vector<std::vector<double>> Xn(nb);
  std::vector<std::vector<std::uint8_t>> top(nb), bottom(nb);
  std::vector<std::uint16_t> kappa_all;
  kappa_all.reserve(static_cast<std::size_t>(total_keys));
  for (int b = 0; b < nb; ++b) {
    Xn[b].resize(n);
    std::vector<double> Yn(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t idx = part.key_indices[b][i];
      Xn[b][i] = xs[b][idx] / sx;
      Yn[i] = ys[b][idx] / sy;
    }
    const std::vector<std::uint16_t> kappa = discretize(Yn, scheme);
    split(kappa, cfg.q, dp.d, top[b], bottom[b]);
    kappa_all.insert(kappa_all.end(), kappa.begin(), kappa.end());
    xs[b].clear();
    xs[b].shrink_to_fit();
    ys[b].clear();
    ys[b].shrink_to_fit();
  }
  rep.H_K_emp = empirical_entropy(kappa_all, cfg.p);
  rep.H_K_analytic = discretization_entropy(cfg.alpha, cfg.p);
  kappa_all.clear();
  kappa_all.shrink_to_fit();
  rep.timings_ms["discretize"] = ms_since(t0);

  // ---- code rate and parity matrix
  rep.R_code_requested = compute_code_rate(rep.est.snr_hat, cfg.beta, cfg.p, cfg.q, rep.H_K_emp);
  const long long l = std::llround(static_cast<double>(n) * (1.0 - rep.R_code_requested));
  if (!(rep.R_code_requested > 0.0 && rep.R_code_requested <= 1.0) || l < 2 ||
      l >= static_cast<long long>(n)) {
    rep.status = "invalid code rate";
    return finish(rep);
  }
  rep.l_rows = static_cast<std::uint64_t>(l);
  rep.R_code_realized = 1.0 - static_cast<double>(l) / static_cast<double>(n);

  t0 = Clock::now();
  const GfField gf(static_cast<unsigned>(cfg.q));
  const SparseGfMatrix H =
      build_parity_matrix(n, rep.R_code_requested, gf, sub_seed(cfg.seed, SeedStage::ParityMatrix, 0));
  if (H.rows != rep.l_rows) throw std::logic_error("parity-matrix row count mismatch");
  rep.timings_ms["matrix"] = ms_since(t0);

  // ---- syndrome decoding and verification, blocks in parallel
  t0 = Clock::now();
  rep.blocks.assign(nb, BlockRecord{});
  std::vector<std::vector<std::uint8_t>> k_hat(nb);
  const std::uint64_t leak_bits =
      rep.l_rows * static_cast<std::uint64_t>(cfg.q) + static_cast<std::uint64_t>(n) * dp.d;
  std::atomic<int> next_block{0};
  auto worker = [&]() {
    for (;;) {
      const int b = next_block.fetch_add(1);
      if (b >= nb) return;
      BlockRecord rec;
      rec.block_index = b;
      rec.leak_bits = leak_bits;
      const std::vector<std::uint8_t> z = gf_matvec(gf, H, top[b]);
      rec.syndrome_digest = fnv1a64(z.data(), z.size());
      const std::vector<double> priors =
          a_priori_probabilities(Xn[b], bottom[b], rep.est.rho_hat, scheme);
      DecodeResult dr = decode(gf, H, z, priors, cfg.iter_max);
      rec.fnd = dr.fnd;
      rec.fnd_rnd = dr.fnd_rnd;
      rec.smt_passed = dr.fnd;
      if (dr.fnd) {
        const VerifyOutcome vo = verify(top[b], dr.k_hat, cfg.q, cfg.eps_cor,
                                        sub_seed(cfg.seed, SeedStage::VerifyHash, b));
        rec.ver_passed = vo.passed;
      }
      k_hat[b] = std::move(dr.k_hat);
      rep.blocks[b] = rec;
    }
  };
  const int n_threads = resolve_threads(cfg.threads, nb);
  {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  rep.timings_ms["reconcile"] = ms_since(t0);

  double rnd_sum = 0.0;
  for (const BlockRecord& rec : rep.blocks) {
    if (rec.smt_passed) {
      ++rep.n_smt;
      rnd_sum += rec.fnd_rnd;
    }
    if (rec.ver_passed) ++rep.n_ver;
  }
  rep.acct = ec_success_accounting(nb, rep.n_smt, rep.n_ver);
  rep.mean_fnd_rnd = rep.n_smt > 0 ? rnd_sum / rep.n_smt : 0.0;

  // ---- composable rate
  rep.rates.R_M_EC =
      rep.H_K_emp + rep.R_code_realized * cfg.q - cfg.p - rep.rates.chi_worst;
  const ComposableRate comp =
      composable_rate(rep.rates.R_M_EC, static_cast<double>(n), static_cast<double>(N), cfg.p,
                      rep.acct.p_ec, cfg.eps_s, cfg.eps_h);
  rep.rates.R_tilde = comp.R_tilde;
  rep.rates.R = comp.R;
  if (rep.acct.p_ec > 0.0) {
    rep.rates.delta_aep = delta_aep(cfg.p, rep.acct.p_ec, cfg.eps_s);
    rep.rates.theta = theta_term(rep.acct.p_ec, cfg.eps_s, cfg.eps_h);
  }
  std::int64_t r_key = 0;
  if (rep.n_ver > 0) {
    r_key = static_cast<std::int64_t>(
        std::floor(static_cast<double>(rep.n_ver) * static_cast<double>(n) * comp.R_tilde));
    if (r_key < 0) r_key = 0;
  }
  rep.rates.key_bits = r_key;
  rep.rates.n_tilde = static_cast<std::uint64_t>(rep.n_ver) * n * cfg.p;

  // ---- privacy amplification over the verified blocks, in block order
  t0 = Clock::now();
  if (rep.n_ver > 0 && r_key > 0) {
    std::vector<std::uint8_t> S, S_hat;
    S.reserve(rep.rates.n_tilde);
    S_hat.reserve(rep.rates.n_tilde);
    for (int b = 0; b < nb; ++b) {
      if (!rep.blocks[b].ver_passed) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const unsigned kb = (static_cast<unsigned>(top[b][i]) << dp.d) | bottom[b][i];
        const unsigned ka = (static_cast<unsigned>(k_hat[b][i]) << dp.d) | bottom[b][i];
        for (int bit = cfg.p - 1; bit >= 0; --bit) {
          S.push_back(static_cast<std::uint8_t>((kb >> bit) & 1u));
          S_hat.push_back(static_cast<std::uint8_t>((ka >> bit) & 1u));
        }
      }
    }
    const FinalKeys fk = finalize_keys(S, S_hat, r_key, rep.toeplitz_seed);
    rep.key = fk.bob;
    rep.keys_match = fk.match;
    rep.key_status = fk.status;
    const std::vector<std::uint8_t> packed = pack_key_bytes(rep.key);
    rep.key_digest = fnv1a64(packed.data(), packed.size());
  }
  rep.timings_ms["privacy"] = ms_since(t0);

  rep.status = "OK";
  return finish(rep);
}

std::string report_to_json(const RunReport& rep) {
  using nlohmann::json;
  const ProtocolConfig& c = rep.cfg;
  const DerivedParams& d = rep.derived;
  json j;
  j["status"] = rep.status;
  j["config"] = {{"L", c.L},           {"A", c.A},
                 {"xi", c.xi},         {"eta", c.eta},
                 {"v_el", c.v_el},     {"beta", c.beta},
                 {"n_bks", c.n_bks},   {"N", c.N},
                 {"M", c.M},           {"p", c.p},
                 {"q", c.q},           {"alpha", c.alpha},
                 {"iter_max", c.iter_max}, {"eps_pe", c.eps_pe},
                 {"eps_s", c.eps_s},   {"eps_h", c.eps_h},
                 {"eps_cor", c.eps_cor}, {"mu", c.mu},
                 {"snr", c.snr},       {"optimize_mu", c.optimize_mu},
                 {"seed", c.seed},     {"threads", c.threads}};
  j["derived"] = {{"T", d.T},           {"sigma_z2", d.sigma_z2},
                  {"Xi", d.Xi},         {"omega", d.omega},
                  {"chi_noise", d.chi_noise}, {"mu", d.mu},
                  {"snr", d.snr},       {"rho", d.rho},
                  {"m", d.m},           {"n", d.n},
                  {"M_used", d.M_used}, {"delta", d.delta},
                  {"d", d.d},           {"t", d.t},
                  {"gf_order", d.gf_order}};
  j["estimates"] = estimates_json(rep.est);
  j["estimates_covariance_method"] = estimates_json(rep.est_cov);
  j["entropy"] = {{"H_K_empirical", rep.H_K_emp}, {"H_K_analytic", rep.H_K_analytic}};
  if (rep.l_rows > 0) {
    const std::uint64_t two_n = 2 * d.n;
    j["code"] = {{"R_code_requested", rep.R_code_requested},
                 {"R_code_realized", rep.R_code_realized},
                 {"l", rep.l_rows},
                 {"d_c_low", two_n / rep.l_rows},
                 {"d_c_high", (two_n + rep.l_rows - 1) / rep.l_rows}};
  } else {
    j["code"] = {{"R_code_requested", rep.R_code_requested}};
  }
  j["blocks_summary"] = {{"n_blocks", c.n_bks},     {"n_smt", rep.n_smt},
                         {"n_ver", rep.n_ver},       {"p_SMT", rep.acct.p_smt},
                         {"p_ver", rep.acct.p_ver},  {"p_EC", rep.acct.p_ec},
                         {"FER", rep.acct.fer},      {"mean_fnd_rnd", rep.mean_fnd_rnd}};
  j["rates"] = {{"I_xy", rep.rates.I_xy},
                {"chi_worst_case", rep.rates.chi_worst},
                {"R_asy", rep.rates.R_asy},
                {"R_M", rep.rates.R_M},
                {"R_M_EC", rep.rates.R_M_EC},
                {"R_tilde", rep.rates.R_tilde},
                {"R_theo", rep.rates.R_theo},
                {"delta_aep", rep.rates.delta_aep},
                {"theta", rep.rates.theta}};
  // flat duplicates of the headline numbers, for tooling
  j["R"] = rep.rates.R;
  j["r"] = rep.rates.key_bits;
  j["n_tilde"] = rep.rates.n_tilde;
  j["epsilon"] = rep.rates.epsilon;
  j["p_EC"] = rep.acct.p_ec;
  j["FER"] = rep.acct.fer;
  j["key"] = {{"bits", rep.key.size()},
              {"digest_fnv1a64", hex64(rep.key_digest)},
              {"match", rep.keys_match},
              {"status", rep.key_status},
              {"toeplitz_seed", rep.toeplitz_seed}};
  j["timings_ms"] = rep.timings_ms;
  return j.dump(2);
}

std::string blocks_to_jsonl(const RunReport& rep) {
  using nlohmann::json;
  std::string out;
  for (const BlockRecord& b : rep.blocks) {
    json j = {{"block_index", b.block_index},
              {"syndrome_digest", hex64(b.syndrome_digest)},
              {"fnd", b.fnd},
              {"fnd_rnd", b.fnd_rnd},
              {"smt_passed", b.smt_passed},
              {"ver_passed", b.ver_passed},
              {"leak_bits", b.leak_bits}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SweepPoint> run_sweep(const ProtocolConfig& base, const std::string& param,
                                  const std::vector<double>& grid, int reps) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (reps < 1) throw std::invalid_argument("sweep repetitions must be >= 1");
  if (param != "N" && param != "L" && param != "xi" && param != "snr" && param != "p")
    throw std::invalid_argument("unknown sweep parameter: " + param);

  std::vector<SweepPoint> points;
  points.reserve(grid.size());
  for (double v : grid) {
    SweepPoint pt;
    pt.value = v;
    for (int j = 0; j < reps; ++j) {
      ProtocolConfig c = base;
      if (param == "N") {
        c.N = static_cast<std::uint64_t>(std::llround(v));
      } else if (param == "L") {
        c.L = v;
      } else if (param == "xi") {
        c.xi = v;
      } else if (param == "snr") {
        c.snr = v;
        c.mu = 0.0;
        c.optimize_mu = false;
      } else {
        c.p = static_cast<int>(std::llround(v));
      }
      c.seed = sub_seed(base.seed, SeedStage::Sweep, static_cast<std::uint64_t>(j));
      try {
        const RunReport rep = run_protocol(c);
        pt.rep_status.push_back(rep.status);
        if (rep.status == "OK") {
          pt.rep_R.push_back(rep.rates.R);
          pt.rep_fer.push_back(rep.acct.fer);
          pt.rep_p_ec.push_back(rep.acct.p_ec);
          pt.rep_fnd_rnd.push_back(rep.n_smt > 0 ? rep.mean_fnd_rnd
                                                 : std::numeric_limits<double>::quiet_NaN());
        } else {
          pt.rep_R.push_back(0.0);
          pt.rep_fer.push_back(1.0);
          pt.rep_p_ec.push_back(0.0);
          pt.rep_fnd_rnd.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      } catch (const std::exception& ex) {
        pt.rep_status.push_back(std::string("error: ") + ex.what());
      }
    }
    mean_stderr(pt.rep_R, pt.mean_R, pt.stderr_R);
    mean_stderr(pt.rep_fer, pt.mean_fer, pt.stderr_fer);
    mean_stderr(pt.rep_p_ec, pt.mean_p_ec, pt.stderr_p_ec);
    std::vector<double> rounds;
    for (double x : pt.rep_fnd_rnd)
      if (!std::isnan(x)) rounds.push_back(x);
    mean_stderr(rounds, pt.mean_fnd_rnd, pt.stderr_fnd_rnd);
    points.push_back(std::move(pt));
  }
  return points;
}

std::string sweep_to_csv(const std::string& param, const std::vector<SweepPoint>& points) {
  std::string out = param +
                    ",reps,mean_R,stderr_R,mean_FER,stderr_FER,mean_p_EC,stderr_p_EC,"
                    "mean_fnd_rnd,stderr_fnd_rnd\n";
  char line[512];
  for (const SweepPoint& pt : points) {
    std::snprintf(line, sizeof line, "%.10g,%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  pt.value, pt.rep_status.size(), pt.mean_R, pt.stderr_R, pt.mean_fer,
                  pt.stderr_fer, pt.mean_p_ec, pt.stderr_p_ec, pt.mean_fnd_rnd,
                  pt.stderr_fnd_rnd);
    out += line;
  }
  return out;
}

}  // namespace cvqkd
