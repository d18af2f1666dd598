#pragma once

// Deterministic sampling helpers.  std::mt19937_64 has a standard-specified
// output sequence, but the std distribution adaptors do not, so the transforms
// are spelled out here to make every seeded draw bit-reproducible across
// platforms and standard libraries.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sarop {

// Uniform draw in (0, 1]; never returns 0 so logs are safe.
inline double uniform01(std::mt19937_64& gen) {
  return 1.0 - (gen() >> 11) * 0x1.0p-53;
}

// Unit-rate exponential via inverse CDF.
inline double sample_exponential(std::mt19937_64& gen) {
  return -std::log(uniform01(gen));
}

// Standard normal via Box-Muller; draws two uniforms per call.
inline double sample_normal(std::mt19937_64& gen) {
  const double u = uniform01(gen);
  const double v = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

// Uniform draw from the probability simplex (normalized exponentials).
inline Eigen::VectorXd sample_simplex(int n, std::mt19937_64& gen) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = sample_exponential(gen);
  return x / x.sum();
}

}  // namespace sarop
