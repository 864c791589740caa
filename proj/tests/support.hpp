#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "reelprint/core.hpp"
#include "reelprint/timefreq.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(REELPRINT_TEST_DATA) / name;
}

inline reelprint::Signal random_signal(std::size_t n, std::uint64_t seed, double sample_rate = 8000.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  reelprint::Signal s{Eigen::VectorXd(static_cast<Eigen::Index>(n)), sample_rate};
  for (auto& v : s.samples) v = normal(rng);
  return s;
}

inline reelprint::Signal tone(double freq, std::size_t n, double sample_rate, double phase = 0.0) {
  reelprint::Signal s{Eigen::VectorXd(static_cast<Eigen::Index>(n)), sample_rate};
  for (std::size_t i = 0; i < n; ++i)
    s.samples[static_cast<Eigen::Index>(i)] =
        std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sample_rate + phase);
  return s;
}

/// X[k] = sum_n x[n] exp(-2 pi i k n / N), evaluated term by term.
inline reelprint::ComplexVector<double> direct_dft(const reelprint::ComplexVector<double>& x, bool inverse = false) {
  const auto n = x.size();
  reelprint::ComplexVector<double> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / static_cast<double>(n);
      acc += x[m] * std::polar(1.0, angle);
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

/// W(a, b) = a^{-1/2} sum_t x[t] conj(psi((t - b) / a)) over every sample,
/// with the wavelet written out from its definition.
inline std::complex<double> direct_cwt(const reelprint::Signal& x, double a, Eigen::Index b, double f0) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index t = 0; t < x.samples.size(); ++t) {
    const double u = static_cast<double>(t - b) / a;
    const std::complex<double> psi =
        std::pow(std::numbers::pi, -0.25) * std::exp(std::complex<double>(-0.5 * u * u, f0 * u));
    acc += x.samples[t] * std::conj(psi);
  }
  return acc / std::sqrt(a);
}

inline double relative_frobenius(const Eigen::Ref<const reelprint::ComplexMatrix<double>>& a,
                                 const Eigen::Ref<const reelprint::ComplexMatrix<double>>& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace testing
