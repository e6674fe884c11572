#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cvqkd/gf.hpp"
#include "cvqkd/random.hpp"
#include "cvqkd/rates.hpp"
#include "cvqkd/reconciliation.hpp"

using namespace cvqkd;

TEST_CASE("discretization scheme: borders and bin assignment") {
  const DiscretizationScheme s = make_scheme(3.0, 3, 2);
  CHECK(s.delta == doctest::Approx(0.75));
  CHECK(s.d == 1);
  CHECK(s.left_border(0) == -std::numeric_limits<double>::infinity());
  CHECK(s.right_border(7) == std::numeric_limits<double>::infinity());
  CHECK(s.left_border(1) == doctest::Approx(-3.0 + 0.75));
  CHECK(s.right_border(1) == doctest::Approx(-3.0 + 1.5));

  // zero lands in the first bin right of the center
  const std::vector<std::uint16_t> k = discretize({0.0, -100.0, 100.0, -2.9}, s);
  CHECK(k[0] == 4);
  CHECK(k[1] == 0);
  CHECK(k[2] == 7);
  CHECK(k[3] == 0);

  // interval membership: y in [a_k, b_k)
  for (double y : {-3.1, -2.4, -0.01, 0.0, 0.74, 0.76, 2.99, 3.5}) {
    const std::uint16_t kk = discretize({y}, s)[0];
    CHECK(y >= s.left_border(kk));
    CHECK(y < s.right_border(kk));
  }
}

TEST_CASE("discretization is monotone") {
  const DiscretizationScheme s = make_scheme(7.0, 6, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> ys(2000);
  for (auto& v : ys) v = g(rng);
  const std::vector<std::uint16_t> ks = discretize(ys, s);
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      if (ys[i] <= ys[j]) CHECK(ks[i] <= ks[j]);
}

TEST_CASE("split and recombine round-trip") {
  const int p = 5, q = 2, d = 3;
  std::vector<std::uint16_t> K(1 << p);
  for (int v = 0; v < (1 << p); ++v) K[v] = static_cast<std::uint16_t>(v);
  std::vector<std::uint8_t> top, bottom;
  split(K, q, d, top, bottom);
  // kappa = 5 = 0b00101 -> top 0b00, bottom 0b101
  CHECK(top[5] == 0);
  CHECK(bottom[5] == 5);
  CHECK(top[29] == 3);   // 0b11101
  CHECK(bottom[29] == 5);
  for (int v = 0; v < (1 << p); ++v)
    CHECK(static_cast<int>(top[v] << d | bottom[v]) == v);
}

TEST_CASE("empirical entropy") {
  // uniform over 2^p symbols -> p bits
  std::vector<std::uint16_t> u;
  for (int rep = 0; rep < 4; ++rep)
    for (int v = 0; v < 64; ++v) u.push_back(static_cast<std::uint16_t>(v));
  CHECK(empirical_entropy(u, 6) == doctest::Approx(6.0).epsilon(1e-12));

  CHECK(empirical_entropy(std::vector<std::uint16_t>(100, 7), 6) == doctest::Approx(0.0));

  // discretized standard Gaussian at alpha=7, p=6 is close to the analytic value
  GaussianSampler rng(77);
  std::vector<double> ys(200000);
  for (auto& v : ys) v = rng.standard();
  const DiscretizationScheme s = make_scheme(7.0, 6, 4);
  const double H = empirical_entropy(discretize(ys, s), 6);
  CHECK(std::abs(H - discretization_entropy(7.0, 6.0)) < 0.05);
}

TEST_CASE("parity matrix: regularity, row weights, overlap") {
  const GfField gf(4);
  const std::uint64_t n = 2000;
  const double R_code = 0.866;
  const SparseGfMatrix h = build_parity_matrix(n, R_code, gf, 9);
  const std::uint64_t l = std::llround(n * (1.0 - R_code));
  REQUIRE(h.rows == l);
  REQUIRE(h.cols == n);

  // every column appears in exactly two rows, entries nonzero
  std::vector<int> col_deg(n, 0);
  std::vector<std::set<std::uint32_t>> col_rows(n);
  std::size_t entries = 0;
  const std::uint64_t w_lo = 2 * n / l, w_hi = (2 * n + l - 1) / l;
  for (std::uint32_t r = 0; r < h.rows; ++r) {
    REQUIRE(h.row_cols[r].size() == h.row_vals[r].size());
    const std::uint64_t w = h.row_cols[r].size();
    CHECK(w >= w_lo);
    CHECK(w <= w_hi);
    std::set<std::uint32_t> uniq(h.row_cols[r].begin(), h.row_cols[r].end());
    CHECK(uniq.size() == w);  // no repeated column within a row
    for (std::size_t e = 0; e < w; ++e) {
      CHECK(h.row_vals[r][e] != 0);
      ++col_deg[h.row_cols[r][e]];
      col_rows[h.row_cols[r][e]].insert(r);
    }
    entries += w;
  }
  CHECK(entries == 2 * n);
  for (std::uint64_t c = 0; c < n; ++c) {
    CHECK(col_deg[c] == 2);
    CHECK(col_rows[c].size() == 2);  // two distinct rows
  }

  // no two columns share both rows (girth > 4 for column pairs)
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint64_t c = 0; c < n; ++c) {
    auto it = col_rows[c].begin();
    const std::uint32_t r1 = *it++;
    const std::uint32_t r2 = *it;
    const auto pr = std::minmax(r1, r2);
    CHECK(pairs.insert({pr.first, pr.second}).second);
  }
}

TEST_CASE("parity matrix: degenerate toy size still builds") {
  // n=15, R_code=0.866 -> l=2: pair-uniqueness is impossible (C(2,2)=1 < 15),
  // so only regularity is enforced.
  const GfField gf(4);
  const SparseGfMatrix h = build_parity_matrix(15, 0.866, gf, 1);
  REQUIRE(h.rows == 2);
  std::vector<int> col_deg(15, 0);
  for (std::uint32_t r = 0; r < 2; ++r) {
    CHECK(h.row_cols[r].size() == 15);
    for (auto c : h.row_cols[r]) ++col_deg[c];
  }
  for (int c = 0; c < 15; ++c) CHECK(col_deg[c] == 2);
}

TEST_CASE("priors: normalization, decoupling at rho=0, concentration at high rho") {
  const DiscretizationScheme s = make_scheme(7.0, 6, 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> X(200);
  std::vector<std::uint8_t> bottom(200);
  for (std::size_t i = 0; i < X.size(); ++i) {
    X[i] = g(rng);
    bottom[i] = static_cast<std::uint8_t>(rng() & 3);
  }
  const std::vector<double> pri = a_priori_probabilities(X, bottom, 0.96, s);
  REQUIRE(pri.size() == X.size() * 16);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < 16; ++k) sum += pri[i * 16 + k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  // rho = 0: prior equals the marginal mass of the bins, independent of X
  const std::vector<double> p0 = a_priori_probabilities(X, bottom, 0.0, s);
  for (int k = 0; k < 16; ++k) {
    const double ref = p0[0 * 16 + k];
    for (std::size_t i = 1; i < X.size(); ++i) {
      if (bottom[i] != bottom[0]) continue;
      CHECK(p0[i * 16 + k] == doctest::Approx(ref).epsilon(1e-9));
    }
  }

  // rho ~ 1 with X centered in a bin: mass concentrates on the true top bits
  const double y_center = -7.0 + 33.5 * s.delta;  // bin kappa = 33
  const std::uint16_t kappa = discretize({y_center}, s)[0];
  REQUIRE(kappa == 33);
  const std::vector<double> p1 = a_priori_probabilities(
      {y_center}, {static_cast<std::uint8_t>(33 & 3)}, 0.9999, s);
  CHECK(p1[33 >> 2] > 0.999);
}

TEST_CASE("decoder: noiseless priors decode in one round") {
  const GfField gf(2);
  const std::uint64_t n = 60;
  const SparseGfMatrix h = build_parity_matrix(n, 0.8, gf, 4);
  std::mt19937_64 rng(8);
  std::vector<std::uint8_t> truth(n);
  for (auto& v : truth) v = static_cast<std::uint8_t>(rng() & 3);
  const std::vector<std::uint8_t> z = gf_matvec(gf, h, truth);

  std::vector<double> priors(n * 4, 1e-12);
  for (std::uint64_t i = 0; i < n; ++i) priors[i * 4 + truth[i]] = 1.0;
  const DecodeResult res = decode(gf, h, z, priors, 10);
  CHECK(res.fnd);
  CHECK(res.fnd_rnd == 1);
  CHECK(res.k_hat == truth);
}

TEST_CASE("decoder: hand-worked GF(4) toy system") {
  const GfField gf(2);
  SparseGfMatrix h;
  h.rows = 3;
  h.cols = 5;
  h.row_cols = {{2, 4}, {0, 3}, {1, 3, 4}};
  h.row_vals = {{3, 1}, {2, 1}, {1, 2, 3}};
  const std::vector<std::uint8_t> z = {3, 1, 2};
  const std::vector<std::uint8_t> expect = {0, 0, 1, 1, 0};

  std::vector<double> priors(5 * 4, 0.01);
  for (int i = 0; i < 5; ++i) priors[i * 4 + expect[i]] = 0.97;
  const DecodeResult res = decode(gf, h, z, priors, 10);
  CHECK(res.fnd);
  CHECK(res.fnd_rnd <= 2);
  CHECK(res.k_hat == expect);
  CHECK(gf_matvec(gf, h, res.k_hat) == z);
}

TEST_CASE("decoder: flat priors with a random syndrome do not converge") {
  const GfField gf(4);
  const SparseGfMatrix h = build_parity_matrix(300, 0.8, gf, 21);
  std::mt19937_64 rng(22);
  std::vector<std::uint8_t> z(h.rows);
  for (auto& v : z) v = static_cast<std::uint8_t>(rng() & 15);
  const std::vector<double> priors(300 * 16, 1.0 / 16.0);
  const DecodeResult res = decode(gf, h, z, priors, 10);
  CHECK(!res.fnd);
  CHECK(res.fnd_rnd == 10);
}

TEST_CASE("decoder: correlated Gaussian data at high rho decodes and satisfies the syndrome") {
  // one miniature reconciliation: Bob's discretized top bits recovered from
  // Alice's correlated variable
  const double rho = 0.999;
  const DiscretizationScheme s = make_scheme(7.0, 6, 4);
  const GfField gf(4);
  const std::uint64_t n = 500;
  const SparseGfMatrix h = build_parity_matrix(n, 0.866, gf, 31);

  GaussianSampler rng(sub_seed(31, SeedStage::StatePrep, 0));
  std::vector<double> X(n), Y(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    X[i] = rng.standard();
    Y[i] = rho * X[i] + std::sqrt(1.0 - rho * rho) * rng.standard();
  }
  const std::vector<std::uint16_t> kappa = discretize(Y, s);
  std::vector<std::uint8_t> top, bottom;
  split(kappa, 4, 2, top, bottom);
  const std::vector<std::uint8_t> z = gf_matvec(gf, h, top);
  const std::vector<double> priors = a_priori_probabilities(X, bottom, rho, s);
  const DecodeResult res = decode(gf, h, z, priors, 30);
  CHECK(res.fnd);
  CHECK(gf_matvec(gf, h, res.k_hat) == z);
  CHECK(res.k_hat == top);
}

TEST_CASE("verification tag: chunking and determinism") {
  // q=4: symbols pack MSB-first into 32-bit chunks, 8 symbols per chunk
  const std::vector<std::uint64_t> v = {3, 5};
  // one full chunk from 8 symbols
  const std::vector<std::uint8_t> syms = {1, 2, 3, 4, 5, 6, 7, 8};
  std::uint64_t chunk = 0;
  for (auto sy : syms) chunk = chunk << 4 | sy;
  const std::uint64_t expect = ((3 * chunk + 9) & ((1ull << 63) - 1)) >> (63 - 32);
  CHECK(verification_tag(syms, 4, {3}, 9, 32) == expect);

  // partial chunk is padded with zero symbols on the right
  const std::vector<std::uint8_t> partial = {1, 2};
  const std::uint64_t padded_chunk = 0x12000000ull;
  const std::uint64_t expect2 = ((7 * padded_chunk + 1) & ((1ull << 63) - 1)) >> (63 - 32);
  CHECK(verification_tag(partial, 4, {7}, 1, 32) == expect2);
}

TEST_CASE("verify: identical strings always pass, differing strings almost never") {
  std::mt19937_64 rng(44);
  std::vector<std::uint8_t> a(1000);
  for (auto& v : a) v = static_cast<std::uint8_t>(rng() & 15);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const VerifyOutcome vo = verify(a, a, 4, 0x1p-32, seed);
    CHECK(vo.passed);
    CHECK(vo.t == 32);
    CHECK(vo.tag_a == vo.tag_b);
  }

  // single-symbol difference: false accepts bounded by 2^-t; at t=16 over
  // 10^4 draws the expected count is ~0.15, so allow a small slack
  std::vector<std::uint8_t> b = a;
  b[123] ^= 5;
  int accepted = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    if (verify(a, b, 4, 0x1p-16, 1000 + trial).passed) ++accepted;
  }
  CHECK(accepted <= 2);
}

TEST_CASE("accounting frequencies") {
  const EcAccounting all = ec_success_accounting(10, 10, 10);
  CHECK(all.p_ec == 1.0);
  CHECK(all.fer == 0.0);

  const EcAccounting half = ec_success_accounting(10, 5, 5);
  CHECK(half.p_smt == 0.5);
  CHECK(half.p_ver == 1.0);
  CHECK(half.p_ec == 0.5);
  CHECK(half.fer == 0.5);

  const EcAccounting none = ec_success_accounting(10, 0, 0);
  CHECK(none.p_ec == 0.0);
  CHECK(none.p_ver == 0.0);
  CHECK(none.fer == 1.0);
}

TEST_CASE("leakage identity: published bits per block") {
  // l syndrome symbols of q bits plus n bottom strings of d bits
  const std::uint64_t n = 1800, l = 241;
  const int q = 4, d = 2;
  const std::uint64_t leak = l * q + n * d;
  CHECK(leak == 4564);
  // per use: d + (l/n) q, the syndrome rate times q on top of the cleartext bits
  const double syn_rate = static_cast<double>(l) / n;
  CHECK(static_cast<double>(leak) / n == doctest::Approx(d + syn_rate * q).epsilon(1e-12));
}
