#include "cvqkd/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cvqkd/rates.hpp"

namespace cvqkd {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

bool in01(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void validate_config(const ProtocolConfig& cfg) {
  if (cfg.L < 0.0) fail("L must be >= 0");
  if (cfg.A < 0.0) fail("A must be >= 0");
  if (cfg.xi < 0.0) fail("xi must be >= 0");
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) fail("eta must be in (0,1]");
  if (cfg.v_el < 0.0) fail("v_el must be >= 0");
  if (!in01(cfg.beta)) fail("beta must be in (0,1)");
  if (cfg.n_bks < 1) fail("n_bks must be >= 1");
  if (cfg.N < 2) fail("N must be >= 2");
  if (cfg.p < 1 || cfg.p > 16) fail("p must be in [1,16]");
  if (cfg.q < 1 || cfg.q > 8) fail("q must be in [1,8]");
  if (cfg.q > cfg.p) fail("q must not exceed p");
  if (cfg.alpha < 3.0) fail("alpha must be >= 3");
  if (cfg.iter_max < 1) fail("iter_max must be >= 1");
  if (!in01(cfg.eps_pe) || !in01(cfg.eps_s) || !in01(cfg.eps_h) || !in01(cfg.eps_cor))
    fail("all epsilon parameters must be in (0,1)");

  const int modes = (cfg.mu != 0.0) + (cfg.snr != 0.0) + cfg.optimize_mu;
  if (modes != 1) fail("exactly one of mu, snr, optimize must be set");
  if (cfg.mu != 0.0 && cfg.mu < 1.0) fail("mu must be >= 1");
  if (cfg.snr < 0.0) fail("snr must be > 0 when set");

  const std::uint64_t total = cfg.N * static_cast<std::uint64_t>(cfg.n_bks);
  const std::uint64_t M = cfg.M == 0 ? total / 10 : cfg.M;
  if (M == 0) fail("M must be > 0");
  if (M >= total) fail("M must be < N * n_bks");
  if (M / cfg.n_bks >= cfg.N) fail("no key points left: M / n_bks >= N");
  if (cfg.threads < 0) fail("threads must be >= 0");
}

DerivedParams derive_params(const ProtocolConfig& cfg) {
  validate_config(cfg);
  DerivedParams d{};
  d.T = std::pow(10.0, -cfg.A * cfg.L / 10.0);
  d.chi_noise = cfg.xi + (1.0 + cfg.v_el) / (d.T * cfg.eta);

  if (cfg.mu != 0.0) {
    d.mu = cfg.mu;
  } else if (cfg.snr != 0.0) {
    d.mu = 1.0 + cfg.snr * d.chi_noise;
  } else {
    const ModulationSearch s = optimal_modulation(cfg.beta, cfg.eta, cfg.v_el, d.T, cfg.xi);
    if (!s.positive) fail("no positive asymptotic rate for any modulation");
    d.mu = s.mu_opt;
  }

  d.Xi = cfg.eta * d.T * cfg.xi;
  d.sigma_z2 = 1.0 + cfg.v_el + d.Xi;
  d.omega = d.T < 1.0 ? (d.T * cfg.xi - d.T + 1.0) / (1.0 - d.T) : 1.0;
  d.snr = (d.mu - 1.0) / d.chi_noise;
  d.rho = correlation_from_snr(d.snr);

  const std::uint64_t total = cfg.N * static_cast<std::uint64_t>(cfg.n_bks);
  const std::uint64_t M = cfg.M == 0 ? total / 10 : cfg.M;
  d.m = M / static_cast<std::uint64_t>(cfg.n_bks);
  d.n = cfg.N - d.m;
  d.M_used = d.m * static_cast<std::uint64_t>(cfg.n_bks);
  d.delta = cfg.alpha * std::exp2(1.0 - cfg.p);
  d.d = cfg.p - cfg.q;
  d.t = static_cast<int>(std::ceil(-std::log2(cfg.eps_cor)));
  d.gf_order = 1u << cfg.q;
  return d;
}

ProtocolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);

  ProtocolConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(path + ":" + std::to_string(lineno) + ": expected 'name = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string val = trim(stripped.substr(eq + 1));
    if (key.empty() || val.empty())
      fail(path + ":" + std::to_string(lineno) + ": expected 'name = value'");

    auto num = [&](const char* what) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
      } catch (const std::exception&) {
        fail(path + ":" + std::to_string(lineno) + ": bad numeric value for " + what);
      }
    };
    auto unum = [&](const char* what) {
      const double v = num(what);
      if (v < 0.0 || v != std::floor(v))
        fail(path + ":" + std::to_string(lineno) + ": " + what + " must be a non-negative integer");
      return static_cast<std::uint64_t>(v);
    };

    if (key == "L") cfg.L = num("L");
    else if (key == "A") cfg.A = num("A");
    else if (key == "xi") cfg.xi = num("xi");
    else if (key == "eta") cfg.eta = num("eta");
    else if (key == "v_el") cfg.v_el = num("v_el");
    else if (key == "beta") cfg.beta = num("beta");
    else if (key == "n_bks") cfg.n_bks = static_cast<int>(unum("n_bks"));
    else if (key == "N") cfg.N = unum("N");
    else if (key == "M") cfg.M = unum("M");
    else if (key == "p") cfg.p = static_cast<int>(unum("p"));
    else if (key == "q") cfg.q = static_cast<int>(unum("q"));
    else if (key == "alpha") cfg.alpha = num("alpha");
    else if (key == "iter_max") cfg.iter_max = static_cast<int>(unum("iter_max"));
    else if (key == "eps_pe") cfg.eps_pe = num("eps_pe");
    else if (key == "eps_s") cfg.eps_s = num("eps_s");
    else if (key == "eps_h") cfg.eps_h = num("eps_h");
    else if (key == "eps_cor") cfg.eps_cor = num("eps_cor");
    else if (key == "mu") {
      if (val == "optimize") cfg.optimize_mu = true;
      else cfg.mu = num("mu");
    } else if (key == "snr") cfg.snr = num("snr");
    else if (key == "seed") cfg.seed = unum("seed");
    else if (key == "threads") cfg.threads = static_cast<int>(unum("threads"));
    else fail(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace cvqkd
