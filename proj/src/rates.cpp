#include "cvqkd/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kSqrtPiOver2 = 0.88622692545275801365;  // sqrt(pi)/2

double log2_(double x) { return std::log(x) * kLog2e; }

// Winitzki's approximation of erfinv given ln(1 - x^2), good to ~1e-2.
double erfinv_guess(double ln_one_minus_x2) {
  constexpr double a = 0.147;
  const double t = 2.0 / (3.14159265358979323846 * a) + 0.5 * ln_one_minus_x2;
  const double s = std::sqrt(t * t - ln_one_minus_x2 / a) - t;
  return std::sqrt(std::max(s, 0.0));
}

}  // namespace

double erfinv_one_minus(double eps) {
  if (!(eps > 0.0 && eps < 2.0)) throw std::domain_error("erfinv argument outside (-1,1)");
  if (eps == 1.0) return 0.0;
  const double sign = eps < 1.0 ? 1.0 : -1.0;
  const double e = eps < 1.0 ? eps : 2.0 - eps;
  // 1 - x^2 = e*(2-e) computed without cancellation.
  double x = erfinv_guess(std::log(e) + std::log(2.0 - e));
  const double ln_e = std::log(e);
  for (int it = 0; it < 6; ++it) {
    if (x * x > 700.0) break;  // exp(x*x) would overflow; eps < ~1e-305
    const double ec = std::erfc(x);
    if (!(ec > 0.0)) break;
    // Newton on ln erfc(x) = ln e; the log residual is near-linear in x,
    // so this converges even where erfc spans hundreds of decades.
    const double step = (std::log(ec) - ln_e) * ec * kSqrtPiOver2 * std::exp(x * x);
    x += step;
    if (std::abs(step) <= 1e-13 * (1.0 + std::abs(x))) break;
  }
  return sign * x;
}

double erfinv(double x) {
  if (!(x > -1.0 && x < 1.0)) throw std::domain_error("erfinv argument outside (-1,1)");
  return erfinv_one_minus(1.0 - x);
}

double confidence_factor(double eps_pe) { return std::sqrt(2.0) * erfinv_one_minus(eps_pe); }

double mutual_information(double snr) {
  if (snr < 0.0) throw std::domain_error("snr must be non-negative");
  return 0.5 * log2_(1.0 + snr);
}

double correlation_from_snr(double snr) {
  if (snr < 0.0) throw std::domain_error("snr must be non-negative");
  return std::sqrt(snr / (1.0 + snr));
}

double von_neumann_h(double nu) {
  if (nu < 1.0 - 1e-9) throw std::domain_error("symplectic eigenvalue below 1");
  if (nu <= 1.0) return 0.0;
  const double a = 0.5 * (nu + 1.0);
  const double b = 0.5 * (nu - 1.0);
  const double bterm = b > 0.0 ? b * log2_(b) : 0.0;
  return a * log2_(a) - bterm;
}

SymplecticPair symplectic_spectrum_2mode(const TwoModeCM& v) {
  const double det_a = v.a1 * v.a2;
  const double det_b = v.b1 * v.b2;
  const double det_c = v.c1 * v.c2;
  // Quadratures decouple into two 2x2 systems when all blocks are diagonal.
  const double det_v = (v.a1 * v.b1 - v.c1 * v.c1) * (v.a2 * v.b2 - v.c2 * v.c2);
  const double delta = det_a + det_b + 2.0 * det_c;
  double disc = delta * delta - 4.0 * det_v;
  if (disc < 0.0) {
    if (disc < -1e-9 * std::max(1.0, delta * delta))
      throw std::runtime_error("negative symplectic discriminant");
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double hi = 0.5 * (delta + root);
  // delta - root cancels badly when 4 detV << delta^2 (huge modulation);
  // nu+^2 nu-^2 = detV recovers the small eigenvalue stably.
  const double lo = hi > 0.0 ? det_v / hi : 0.0;
  return {std::sqrt(std::max(hi, 0.0)), std::sqrt(std::max(lo, 0.0))};
}

HolevoBreakdown holevo_breakdown(double mu, double T, double eta, double Xi, double v_el) {
  HolevoBreakdown out;
  Xi = std::max(Xi, 0.0);
  T = std::clamp(T, 0.0, 1.0);
  if (T >= 1.0 - 1e-12) return out;  // no environment coupling

  // Thermal variance of the environment mode reproducing Xi at Bob's input.
  const double omega = (Xi / eta - T + 1.0) / (1.0 - T);
  const double omega2m1 = std::max(omega * omega - 1.0, 0.0);

  // Bob's measured variance and his correlations with Eve's modes (e, E').
  const double b = eta * T * (mu - 1.0) + 1.0 + v_el + Xi;
  const double gamma = std::sqrt(eta * (1.0 - T) * omega2m1);
  const double theta = std::sqrt(eta * T * (1.0 - T)) * (omega - mu);

  // Eve's reduced state: blocks omega*I, phi*I, psi*Z.
  const double psi = std::sqrt(T * omega2m1);
  const double phi = T * omega + (1.0 - T) * mu;

  const TwoModeCM v_eE{omega, omega, phi, phi, psi, -psi};
  const SymplecticPair top = symplectic_spectrum_2mode(v_eE);

  // Homodyne conditioning removes rank-one q-quadrature terms scaled by 1/b.
  const TwoModeCM v_cond{omega - gamma * gamma / b, omega,           phi - theta * theta / b,
                         phi,                       psi - gamma * theta / b, -psi};
  const SymplecticPair bot = symplectic_spectrum_2mode(v_cond);

  out.nu_plus = top.nu_plus;
  out.nu_minus = top.nu_minus;
  out.nu_cond_plus = bot.nu_plus;
  out.nu_cond_minus = bot.nu_minus;
  out.chi = von_neumann_h(top.nu_plus) + von_neumann_h(top.nu_minus) -
            von_neumann_h(bot.nu_plus) - von_neumann_h(bot.nu_minus);
  return out;
}

double holevo_bound_from_Xi(double mu, double T, double eta, double Xi, double v_el) {
  return holevo_breakdown(mu, T, eta, Xi, v_el).chi;
}

double holevo_bound(double mu, double T, double eta, double xi, double v_el) {
  return holevo_bound_from_Xi(mu, T, eta, eta * T * xi, v_el);
}

double asymptotic_rate(double beta, double mu, double eta, double v_el, double T, double xi) {
  const double chi_noise = xi + (1.0 + v_el) / (T * eta);
  const double snr = (mu - 1.0) / chi_noise;
  return beta * mutual_information(snr) - holevo_bound(mu, T, eta, xi, v_el);
}

ModulationSearch optimal_modulation(double beta, double eta, double v_el, double T_guess,
                                    double xi_guess, double mu_max) {
  const double inv_phi = 0.6180339887498949;
  double a = 1.0, b = mu_max;
  auto rate = [&](double mu) { return asymptotic_rate(beta, mu, eta, v_el, T_guess, xi_guess); };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = rate(x1), f2 = rate(x2);
  while (b - a > 1e-3) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = rate(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = rate(x1);
    }
  }
  ModulationSearch out;
  out.mu_opt = 0.5 * (a + b);
  out.rate = rate(out.mu_opt);
  out.positive = out.rate > 0.0;
  return out;
}

double delta_aep(double p, double p_ec, double eps_s) {
  const double log_term = log2_(18.0) - 2.0 * log2_(p_ec) - 4.0 * log2_(eps_s);
  return 4.0 * log2_(std::exp2(1.0 + 0.5 * p) + 1.0) * std::sqrt(log_term);
}

double theta_term(double p_ec, double eps_s, double eps_h) {
  return log2_(p_ec * (1.0 - eps_s * eps_s / 3.0)) + 2.0 * log2_(std::sqrt(2.0) * eps_h);
}

ComposableRate composable_rate(double R_M_EC, double n, double N, double p, double p_ec,
                               double eps_s, double eps_h) {
  if (!(p_ec > 0.0)) return {0.0, 0.0};
  ComposableRate out;
  out.R_tilde = R_M_EC - delta_aep(p, p_ec, eps_s) / std::sqrt(n) + theta_term(p_ec, eps_s, eps_h) / n;
  out.R = (n * p_ec / N) * out.R_tilde;
  return out;
}

double epsilon_total(double p_ec, double eps_pe, double eps_cor, double eps_s, double eps_h) {
  const double eps_sec = eps_s + eps_h;
  return p_ec * eps_pe + eps_cor + eps_sec;
}

double discretization_entropy(double alpha, double p) {
  return p + log2_(std::sqrt(3.14159265358979323846 * std::exp(1.0) / 2.0) / alpha);
}

double compute_code_rate(double snr_hat, double beta, double p, double q, double H_K) {
  return ((beta / 2.0) * log2_(1.0 + snr_hat) + p - H_K) / q;
}

double theoretical_rate(double mu, double T, double eta, double xi, double v_el, double beta_guess,
                        double p_ec_guess, double n, double N, double M, double p, double eps_pe,
                        double eps_s, double eps_h) {
  const double Xi = eta * T * xi;
  const double sigma_z2 = 1.0 + v_el + Xi;
  const double w = confidence_factor(eps_pe);
  const double root_T = std::sqrt(T) - w * std::sqrt(sigma_z2 / (M * eta * (mu - 1.0)));
  const double T_star = root_T > 0.0 ? root_T * root_T : 0.0;
  const double Xi_star = Xi + w * sigma_z2 * std::sqrt(2.0 / M);
  const double chi_noise = xi + (1.0 + v_el) / (T * eta);
  const double snr = (mu - 1.0) / chi_noise;
  const double R_M_star = beta_guess * mutual_information(snr) -
                          holevo_bound_from_Xi(mu, T_star, eta, Xi_star, v_el);
  return composable_rate(R_M_star, n, N, p, p_ec_guess, eps_s, eps_h).R;
}

}  // namespace cvqkd
