#pragma once

#include <cstdint>

namespace cvqkd {

// Inverse error function, |x| < 1. Winitzki-style initial guess refined with
// Newton steps on erf/erfc to better than 1e-10 relative accuracy.
double erfinv(double x);

// Solves erf(w) = 1 - eps for eps in (0, 2). Uses erfc in the refinement so
// the result stays accurate when eps is tiny (down to ~1e-300).
double erfinv_one_minus(double eps);

// Confidence factor w = sqrt(2) * erfinv(1 - eps_pe).
double confidence_factor(double eps_pe);

// I(x:y) = (1/2) log2(1 + snr), bits per use.
double mutual_information(double snr);

// rho = sqrt(snr / (1 + snr)).
double correlation_from_snr(double snr);

// Entropy of a thermal state with symplectic eigenvalue nu >= 1, in bits:
// h(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2).
double von_neumann_h(double nu);

// Two-mode covariance matrix with all 2x2 blocks diagonal:
//   V = [[diag(a1,a2), diag(c1,c2)], [diag(c1,c2), diag(b1,b2)]].
// Covers every state appearing in this protocol (blocks of the form xI, xZ,
// and their homodyne-conditioned deformations).
struct TwoModeCM {
  double a1, a2;
  double b1, b2;
  double c1, c2;
};

struct SymplecticPair {
  double nu_plus;
  double nu_minus;
};

// Closed-form two-mode symplectic spectrum from the Delta invariant:
// nu_pm^2 = (Delta +- sqrt(Delta^2 - 4 detV)) / 2.
SymplecticPair symplectic_spectrum_2mode(const TwoModeCM& v);

struct HolevoBreakdown {
  double nu_plus = 1.0, nu_minus = 1.0;            // Eve's reduced state eE'
  double nu_cond_plus = 1.0, nu_cond_minus = 1.0;  // after Bob's homodyne outcome
  double chi = 0.0;                                // bits per use
};

// Holevo information chi(E:y) for the entangling-cloner dilation of the
// thermal-loss channel, with detector efficiency eta and electronic noise
// v_el on Bob's homodyne. Parameterized by the excess-noise variance
// Xi = eta*T*xi so the worst-case endpoint Xi_M can be substituted directly
// (well defined even as T -> 0). Negative Xi is clamped to 0 and T is
// clamped to [0, 1]; T = 1 means no environment coupling, chi = 0.
HolevoBreakdown holevo_breakdown(double mu, double T, double eta, double Xi, double v_el);

// chi(E:y) with the physical excess noise xi (SNU); Xi = eta*T*xi.
double holevo_bound(double mu, double T, double eta, double xi, double v_el);
double holevo_bound_from_Xi(double mu, double T, double eta, double Xi, double v_el);

// R_asy = beta * I(x:y) - chi(E:y) at the true channel parameters.
double asymptotic_rate(double beta, double mu, double eta, double v_el, double T, double xi);

struct ModulationSearch {
  double mu_opt = 1.0;
  double rate = 0.0;
  bool positive = false;  // false: no positive rate anywhere in the bracket
};

// Golden-section maximization of R_asy over mu in [1, mu_max], tolerance 1e-3.
ModulationSearch optimal_modulation(double beta, double eta, double v_el, double T_guess,
                                    double xi_guess, double mu_max = 200.0);

// Finite-size penalty terms of the composable rate.
double delta_aep(double p, double p_ec, double eps_s);
double theta_term(double p_ec, double eps_s, double eps_h);

struct ComposableRate {
  double R_tilde;  // per-use rate of a surviving block, may be negative
  double R;        // (n * p_ec / N) * R_tilde, reported signed
};

ComposableRate composable_rate(double R_M_EC, double n, double N, double p, double p_ec,
                               double eps_s, double eps_h);

// epsilon = p_ec * eps_pe + eps_cor + (eps_s + eps_h).
double epsilon_total(double p_ec, double eps_pe, double eps_cor, double eps_s, double eps_h);

// Analytic entropy of the discretized unit-variance Gaussian:
// H(K) ~= p + log2(sqrt(pi*e/2) / alpha), valid for alpha >~ 3 and fine bins.
double discretization_entropy(double alpha, double p);

// R_code = [ (beta/2) log2(1 + snr_hat) + p - H_K ] / q.
double compute_code_rate(double snr_hat, double beta, double p, double q, double H_K);

// Theoretical composable rate with guessed beta and p_EC, mean-value
// estimators T*_M = (sqrt(T) - w sqrt(sigma_z^2/(M eta (mu-1))))^2 and
// Xi*_M = Xi + w sigma_z^2 sqrt(2/M).
double theoretical_rate(double mu, double T, double eta, double xi, double v_el, double beta_guess,
                        double p_ec_guess, double n, double N, double M, double p, double eps_pe,
                        double eps_s, double eps_h);

}  // namespace cvqkd
