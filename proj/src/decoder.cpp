#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvqkd/reconciliation.hpp"

namespace cvqkd {

namespace {

constexpr double kFloor = 1e-300;

// out[s] = sum_{u ^ v = s} a[u] * b[v]; the distribution of a sum of two
// independent field elements (field addition is XOR).
void xor_convolve(const double* a, const double* b, double* out, unsigned ord) {
  std::fill(out, out + ord, 0.0);
  for (unsigned u = 0; u < ord; ++u) {
    const double au = a[u];
    if (au == 0.0) continue;
    const double* brow = b;
    double* orow = out;
    for (unsigned v = 0; v < ord; ++v) orow[u ^ v] += au * brow[v];
  }
}

}  // namespace

DecodeResult decode(const GfField& gf, const SparseGfMatrix& h,
                    const std::vector<std::uint8_t>& syndrome, const std::vector<double>& priors,
                    int iter_max) {
  const unsigned ord = gf.order();
  const unsigned l = h.rows;
  const unsigned n = h.cols;
  if (syndrome.size() != l) throw std::invalid_argument("syndrome length mismatch");
  if (priors.size() != static_cast<std::size_t>(n) * ord)
    throw std::invalid_argument("prior table size mismatch");

  // Check-major edge arrays plus a per-column view of the same edges.
  std::vector<std::uint32_t> row_start(l + 1, 0);
  for (unsigned j = 0; j < l; ++j)
    row_start[j + 1] = row_start[j] + static_cast<std::uint32_t>(h.row_cols[j].size());
  const std::uint32_t n_edges = row_start[l];

  std::vector<std::uint32_t> edge_col(n_edges);
  std::vector<std::uint8_t> edge_coef(n_edges);
  std::vector<std::uint32_t> col_degree(n, 0);
  for (unsigned j = 0; j < l; ++j) {
    for (std::size_t k = 0; k < h.row_cols[j].size(); ++k) {
      const std::uint32_t e = row_start[j] + static_cast<std::uint32_t>(k);
      edge_col[e] = h.row_cols[j][k];
      edge_coef[e] = h.row_vals[j][k];
      col_degree[h.row_cols[j][k]]++;
    }
  }
  std::vector<std::uint32_t> col_start(n + 1, 0);
  for (unsigned i = 0; i < n; ++i) col_start[i + 1] = col_start[i] + col_degree[i];
  std::vector<std::uint32_t> col_edges(n_edges);
  {
    std::vector<std::uint32_t> cursor(col_start.begin(), col_start.end() - 1);
    for (std::uint32_t e = 0; e < n_edges; ++e) col_edges[cursor[edge_col[e]]++] = e;
  }

  std::vector<double> q_msg(static_cast<std::size_t>(n_edges) * ord);
  std::vector<double> r_msg(static_cast<std::size_t>(n_edges) * ord);
  for (std::uint32_t e = 0; e < n_edges; ++e)
    std::copy_n(priors.data() + static_cast<std::size_t>(edge_col[e]) * ord, ord,
                q_msg.data() + static_cast<std::size_t>(e) * ord);

  unsigned max_dc = 0;
  for (unsigned j = 0; j < l; ++j)
    max_dc = std::max<unsigned>(max_dc, static_cast<unsigned>(h.row_cols[j].size()));

  std::vector<double> pushed((max_dc + 1) * ord);
  std::vector<double> fwd((max_dc + 1) * ord);
  std::vector<double> bwd((max_dc + 1) * ord);
  std::vector<double> pair(ord);
  std::vector<std::uint8_t> k_hat(n, 0);
  std::vector<std::uint8_t> check_acc(l);

  DecodeResult res;
  for (int iter = 1; iter <= iter_max; ++iter) {
    // Horizontal step: distributions of the forward partial sums
    // sigma_{j,<k} and backward rho_{j,>k} of H_ji * K_i along each check,
    // convolved to give Prob[sum = z_j - H_ji * kappa] for the spared edge.
    for (unsigned j = 0; j < l; ++j) {
      const std::uint32_t beg = row_start[j];
      const unsigned dc = row_start[j + 1] - beg;
      for (unsigned k = 0; k < dc; ++k) {
        const std::uint32_t e = beg + k;
        const double* qe = q_msg.data() + static_cast<std::size_t>(e) * ord;
        double* g = pushed.data() + static_cast<std::size_t>(k) * ord;
        std::fill(g, g + ord, 0.0);
        const std::uint8_t coef = edge_coef[e];
        for (unsigned kap = 0; kap < ord; ++kap) g[gf.mul(coef, static_cast<std::uint8_t>(kap))] += qe[kap];
      }
      double* f0 = fwd.data();
      std::fill(f0, f0 + ord, 0.0);
      f0[0] = 1.0;
      for (unsigned k = 1; k <= dc; ++k)
        xor_convolve(fwd.data() + (k - 1) * ord, pushed.data() + (k - 1) * ord,
                     fwd.data() + k * ord, ord);
      double* bN = bwd.data() + static_cast<std::size_t>(dc) * ord;
      std::fill(bN, bN + ord, 0.0);
      bN[0] = 1.0;
      for (unsigned k = dc; k-- > 0;)
        xor_convolve(bwd.data() + (k + 1) * ord, pushed.data() + k * ord, bwd.data() + k * ord,
                     ord);

      const std::uint8_t zj = syndrome[j];
      for (unsigned k = 0; k < dc; ++k) {
        xor_convolve(fwd.data() + k * ord, bwd.data() + (k + 1) * ord, pair.data(), ord);
        const std::uint32_t e = beg + k;
        const std::uint8_t coef = edge_coef[e];
        double* re = r_msg.data() + static_cast<std::size_t>(e) * ord;
        double mx = 0.0;
        for (unsigned kap = 0; kap < ord; ++kap) {
          const double val = pair[zj ^ gf.mul(coef, static_cast<std::uint8_t>(kap))];
          re[kap] = val < kFloor ? kFloor : val;
          mx = std::max(mx, re[kap]);
        }
        for (unsigned kap = 0; kap < ord; ++kap) re[kap] /= mx;  // scale guard only
      }
    }

    // Vertical step and tentative decoding.
    for (unsigned i = 0; i < n; ++i) {
      const std::uint32_t cbeg = col_start[i];
      const unsigned dv = col_start[i + 1] - cbeg;
      const double* fi = priors.data() + static_cast<std::size_t>(i) * ord;

      double best = -1.0;
      std::uint8_t arg = 0;
      for (unsigned kap = 0; kap < ord; ++kap) {
        double prod = fi[kap];
        for (unsigned a = 0; a < dv; ++a)
          prod *= r_msg[static_cast<std::size_t>(col_edges[cbeg + a]) * ord + kap];
        if (prod > best) {
          best = prod;
          arg = static_cast<std::uint8_t>(kap);
        }
      }
      k_hat[i] = arg;

      for (unsigned a = 0; a < dv; ++a) {
        const std::uint32_t e = col_edges[cbeg + a];
        double* qe = q_msg.data() + static_cast<std::size_t>(e) * ord;
        double sum = 0.0;
        for (unsigned kap = 0; kap < ord; ++kap) {
          double prod = fi[kap];
          for (unsigned b = 0; b < dv; ++b) {
            if (b == a) continue;
            prod *= r_msg[static_cast<std::size_t>(col_edges[cbeg + b]) * ord + kap];
          }
          qe[kap] = prod < kFloor ? kFloor : prod;
          sum += qe[kap];
        }
        for (unsigned kap = 0; kap < ord; ++kap) qe[kap] /= sum;
      }
    }

    std::fill(check_acc.begin(), check_acc.end(), 0);
    for (unsigned j = 0; j < l; ++j) {
      std::uint8_t acc = 0;
      for (std::uint32_t e = row_start[j]; e < row_start[j + 1]; ++e)
        acc ^= gf.mul(edge_coef[e], k_hat[edge_col[e]]);
      check_acc[j] = acc;
    }
    if (std::equal(check_acc.begin(), check_acc.end(), syndrome.begin())) {
      res.k_hat = k_hat;
      res.fnd = true;
      res.fnd_rnd = iter;
      return res;
    }
  }
  res.k_hat = k_hat;
  res.fnd = false;
  res.fnd_rnd = iter_max;
  return res;
}

}  // namespace cvqkd
