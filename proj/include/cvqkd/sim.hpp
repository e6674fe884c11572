#pragma once

#include <cstddef>
#include <vector>

#include "cvqkd/random.hpp"

namespace cvqkd {

// Alice's symbols: i.i.d. N(0, mu-1).
std::vector<double> prepare_states(double mu, std::size_t count, GaussianSampler& rng);

// Thermal-loss channel plus homodyne detection:
// y_i = sqrt(T*eta) x_i + z_i, z ~ N(0, 1 + v_el + eta*T*xi).
std::vector<double> transmit_and_measure(const std::vector<double>& x, double T, double eta,
                                         double xi, double v_el, GaussianSampler& rng);

}  // namespace cvqkd
