#include "cvqkd/reconciliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = -bound % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

double DiscretizationScheme::left_border(std::uint32_t kappa) const {
  return kappa == 0 ? -kInf : -alpha + kappa * delta;
}

double DiscretizationScheme::right_border(std::uint32_t kappa) const {
  const std::uint32_t last = (1u << p) - 1;
  return kappa == last ? kInf : -alpha + (kappa + 1.0) * delta;
}

DiscretizationScheme make_scheme(double alpha, int p, int q) {
  if (p < 1 || q < 1 || q > p) throw std::invalid_argument("need 1 <= q <= p");
  DiscretizationScheme s;
  s.alpha = alpha;
  s.p = p;
  s.q = q;
  s.d = p - q;
  s.delta = 2.0 * alpha / std::exp2(p);
  return s;
}

std::vector<std::uint16_t> discretize(const std::vector<double>& Y,
                                      const DiscretizationScheme& s) {
  const std::int64_t last = (std::int64_t{1} << s.p) - 1;
  std::vector<std::uint16_t> K(Y.size());
  for (std::size_t i = 0; i < Y.size(); ++i) {
    std::int64_t k = static_cast<std::int64_t>(std::floor((Y[i] + s.alpha) / s.delta));
    k = std::clamp<std::int64_t>(k, 0, last);
    K[i] = static_cast<std::uint16_t>(k);
  }
  return K;
}

void split(const std::vector<std::uint16_t>& K, int q, int d, std::vector<std::uint8_t>& top,
           std::vector<std::uint8_t>& bottom) {
  (void)q;
  const std::uint16_t mask = static_cast<std::uint16_t>((1u << d) - 1u);
  top.resize(K.size());
  bottom.resize(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) {
    top[i] = static_cast<std::uint8_t>(K[i] >> d);
    bottom[i] = static_cast<std::uint8_t>(K[i] & mask);
  }
}

double empirical_entropy(const std::vector<std::uint16_t>& symbols, int p) {
  if (symbols.empty()) throw std::invalid_argument("empty symbol record");
  std::vector<std::uint64_t> counts(std::size_t{1} << p, 0);
  for (const std::uint16_t s : symbols) counts[s]++;
  const double total = static_cast<double>(symbols.size());
  double h = 0.0;
  for (const std::uint64_t c : counts) {
    if (c == 0) continue;
    const double f = static_cast<double>(c) / total;
    h -= f * std::log2(f);
  }
  return h;
}

SparseGfMatrix build_parity_matrix(std::uint64_t n, double R_code, const GfField& gf,
                                   std::uint64_t seed) {
  const std::uint64_t l = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * (1.0 - R_code)));
  if (l < 2) throw std::invalid_argument("parity matrix needs at least 2 checks");
  if (l > n) throw std::invalid_argument("more checks than variables");

  // Row capacities: as even as possible with sum 2n.
  const std::uint64_t base = (2 * n) / l;
  const std::uint64_t extra = (2 * n) % l;  // this many rows take base+1

  // Two columns sharing both rows would create a length-4 cycle; forbid the
  // duplicate pair whenever enough distinct pairs exist.
  const bool unique_pairs = l * (l - 1) / 2 >= n;

  std::mt19937_64 rng(seed);
  for (int restart = 0; restart < 200; ++restart) {
    std::vector<std::uint32_t> capacity(l);
    for (std::uint64_t j = 0; j < l; ++j)
      capacity[j] = static_cast<std::uint32_t>(base + (j < extra ? 1 : 0));

    std::vector<std::vector<std::uint64_t>> pair_sets(l);  // per low row: high rows used
    SparseGfMatrix h;
    h.rows = static_cast<unsigned>(l);
    h.cols = static_cast<unsigned>(n);
    h.row_cols.assign(l, {});
    h.row_vals.assign(l, {});

    std::vector<std::uint32_t> open;  // rows with remaining capacity
    open.reserve(l);
    for (std::uint32_t j = 0; j < l; ++j) open.push_back(j);

    bool failed = false;
    for (std::uint64_t col = 0; col < n && !failed; ++col) {
      bool placed = false;
      for (int attempt = 0; attempt < 200; ++attempt) {
        if (open.size() < 2) break;
        const std::size_t ia = uniform_below(rng, open.size());
        std::size_t ib = uniform_below(rng, open.size() - 1);
        if (ib >= ia) ++ib;
        std::uint32_t r1 = open[ia], r2 = open[ib];
        if (r1 > r2) std::swap(r1, r2);
        if (unique_pairs) {
          auto& used = pair_sets[r1];
          if (std::find(used.begin(), used.end(), r2) != used.end()) continue;
          used.push_back(r2);
        }
        const std::uint8_t v1 = static_cast<std::uint8_t>(1 + uniform_below(rng, gf.order() - 1));
        const std::uint8_t v2 = static_cast<std::uint8_t>(1 + uniform_below(rng, gf.order() - 1));
        h.row_cols[r1].push_back(static_cast<std::uint32_t>(col));
        h.row_vals[r1].push_back(v1);
        h.row_cols[r2].push_back(static_cast<std::uint32_t>(col));
        h.row_vals[r2].push_back(v2);
        for (const std::uint32_t r : {r2, r1}) {
          if (--capacity[r] == 0)
            open.erase(std::find(open.begin(), open.end(), r));
        }
        placed = true;
        break;
      }
      if (!placed) failed = true;
    }
    if (!failed) return h;
  }
  throw std::runtime_error("parity-matrix construction failed after 200 restarts");
}

std::vector<double> a_priori_probabilities(const std::vector<double>& X,
                                           const std::vector<std::uint8_t>& bottom, double rho,
                                           const DiscretizationScheme& s) {
  if (X.size() != bottom.size()) throw std::invalid_argument("X and bottom-string sizes differ");
  if (!(rho * rho < 1.0)) throw std::domain_error("|rho| must be below 1");
  const unsigned ord = 1u << s.q;
  const double denom = std::sqrt(2.0 * (1.0 - rho * rho));

  std::vector<double> priors(X.size() * ord);
  for (std::size_t i = 0; i < X.size(); ++i) {
    double* row = priors.data() + i * ord;
    const double center = rho * X[i];
    double sum = 0.0;
    for (unsigned kb = 0; kb < ord; ++kb) {
      const std::uint32_t kappa = (kb << s.d) | bottom[i];
      const double lo = s.left_border(kappa);
      const double hi = s.right_border(kappa);
      const double el = lo == -kInf ? -1.0 : std::erf((lo - center) / denom);
      const double eh = hi == kInf ? 1.0 : std::erf((hi - center) / denom);
      double pmass = 0.5 * (eh - el);
      if (pmass < 1e-300) pmass = 1e-300;
      row[kb] = pmass;
      sum += pmass;
    }
    for (unsigned kb = 0; kb < ord; ++kb) row[kb] /= sum;
  }
  return priors;
}

std::uint64_t verification_tag(const std::vector<std::uint8_t>& symbols, int q,
                               const std::vector<std::uint64_t>& v, std::uint64_t u, int t) {
  // Pack the q-bit symbols MSB-first into 32-bit chunks, zero-padded.
  constexpr int kChunk = 32;
  const std::size_t total_bits = symbols.size() * static_cast<std::size_t>(q);
  const std::size_t n_chunks = (total_bits + kChunk - 1) / kChunk;
  if (v.size() < n_chunks) throw std::invalid_argument("verification randomness too short");

  std::uint64_t acc = u;
  std::uint64_t chunk = 0;
  int bits_in_chunk = 0;
  std::size_t chunk_idx = 0;
  auto flush = [&]() {
    acc += v[chunk_idx] * chunk;  // wraps mod 2^64; 2^63 divides 2^64
    ++chunk_idx;
    chunk = 0;
    bits_in_chunk = 0;
  };
  for (const std::uint8_t sym : symbols) {
    for (int b = q - 1; b >= 0; --b) {
      chunk = (chunk << 1) | ((sym >> b) & 1u);
      if (++bits_in_chunk == kChunk) flush();
    }
  }
  if (bits_in_chunk > 0) {
    chunk <<= (kChunk - bits_in_chunk);  // zero symbols on the right
    flush();
  }
  acc &= (std::uint64_t{1} << 63) - 1;
  return acc >> (63 - t);
}

VerifyOutcome verify(const std::vector<std::uint8_t>& top_a, const std::vector<std::uint8_t>& top_b,
                     int q, double eps_cor, std::uint64_t seed) {
  if (top_a.size() != top_b.size()) throw std::invalid_argument("string lengths differ");
  VerifyOutcome out;
  out.t = static_cast<int>(std::ceil(-std::log2(eps_cor)));

  const std::size_t total_bits = top_a.size() * static_cast<std::size_t>(q);
  const std::size_t n_chunks = (total_bits + 31) / 32;
  constexpr std::uint64_t kMask63 = (std::uint64_t{1} << 63) - 1;
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> v(n_chunks);
  for (auto& vi : v) vi = (rng() & kMask63) | 1u;  // odd, 63-bit
  const std::uint64_t u = rng() & kMask63;

  out.tag_a = verification_tag(top_a, q, v, u, out.t);
  out.tag_b = verification_tag(top_b, q, v, u, out.t);
  out.passed = out.tag_a == out.tag_b;
  return out;
}

EcAccounting ec_success_accounting(int n_blocks, int n_smt, int n_ver) {
  if (n_blocks < 1) throw std::invalid_argument("need at least one block");
  EcAccounting acc;
  acc.p_smt = static_cast<double>(n_smt) / n_blocks;
  acc.p_ver = n_smt > 0 ? static_cast<double>(n_ver) / n_smt : 0.0;
  acc.p_ec = static_cast<double>(n_ver) / n_blocks;
  acc.fer = 1.0 - acc.p_ec;
  return acc;
}

}  // namespace cvqkd
