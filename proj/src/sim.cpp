#include "cvqkd/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd {

std::vector<double> prepare_states(double mu, std::size_t count, GaussianSampler& rng) {
  if (mu < 1.0) throw std::invalid_argument("modulation variance must be >= 1");
  std::vector<double> x;
  rng.fill_normal(x, count, std::sqrt(mu - 1.0));
  return x;
}

std::vector<double> transmit_and_measure(const std::vector<double>& x, double T, double eta,
                                         double xi, double v_el, GaussianSampler& rng) {
  const double gain = std::sqrt(T * eta);
  const double sigma_z = std::sqrt(1.0 + v_el + eta * T * xi);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = gain * x[i] + rng.normal(sigma_z);
  return y;
}

}  // namespace cvqkd
