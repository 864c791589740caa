#include "reelprint/fourier.hpp"

#include <cmath>
#include <numbers>

namespace reelprint {

ComplexVector<double> dft_any_length(const ComplexVector<double>& x, bool inverse) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n == 0) return {};
  if (is_pow2(n)) {
    ComplexVector<double> out = x;
    auto plan = FftPlan<double>::get(n);
    if (inverse) plan->inverse(out.data()); else plan->forward(out.data());
    return out;
  }

  // X[k] = conj(c[k]) * sum_j (x[j] conj(c[j])) c[k - j],  c[m] = exp(i pi m^2 / n)
  const double sign = inverse ? -1.0 : 1.0;
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t m = 0; m < n; ++m) {
    // m^2 mod 2n keeps the angle argument small for long inputs.
    const auto m2 = static_cast<double>((static_cast<unsigned long long>(m) * m) % (2ULL * n));
    const double angle = sign * std::numbers::pi * m2 / static_cast<double>(n);
    chirp[m] = {std::cos(angle), std::sin(angle)};
  }
  const std::size_t len = next_pow2(2 * n - 1);
  ComplexVector<double> a = ComplexVector<double>::Zero(static_cast<Eigen::Index>(len));
  ComplexVector<double> b = ComplexVector<double>::Zero(static_cast<Eigen::Index>(len));
  for (std::size_t j = 0; j < n; ++j) a[j] = x[j] * std::conj(chirp[j]);
  b[0] = chirp[0];
  for (std::size_t m = 1; m < n; ++m) {
    b[m] = chirp[m];
    b[len - m] = chirp[m];
  }
  auto plan = FftPlan<double>::get(len);
  plan->forward(a.data());
  plan->forward(b.data());
  a = a.cwiseProduct(b);
  plan->inverse(a.data());

  ComplexVector<double> out(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * std::conj(chirp[k]);
  if (inverse) out /= static_cast<double>(n);
  return out;
}

Eigen::VectorXd resample_fourier(const Eigen::VectorXd& x, double from_rate, double to_rate) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n == 0 || from_rate == to_rate) return x;
  const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) * to_rate / from_rate));
  if (m == 0) return {};

  const ComplexVector<double> spectrum = dft_any_length(x.cast<std::complex<double>>());
  ComplexVector<double> resized = ComplexVector<double>::Zero(static_cast<Eigen::Index>(m));
  const std::size_t keep = std::min(n, m);
  // Positive frequencies 0..keep/2 (inclusive of the shared Nyquist bin
  // when keep is even, which is split between both halves).
  const std::size_t positive = keep / 2 + 1;
  for (std::size_t k = 0; k < positive && k < m; ++k) resized[k] = spectrum[k];
  for (std::size_t k = 1; k < (keep + 1) / 2; ++k) resized[m - k] = spectrum[n - k];
  if (keep % 2 == 0 && keep > 0) {
    const std::size_t nyq = keep / 2;
    if (m > n) {
      // Upsampling: split the source Nyquist bin symmetrically.
      resized[nyq] = 0.5 * spectrum[nyq];
      resized[m - nyq] += 0.5 * spectrum[nyq];
    } else if (m < n) {
      // Downsampling: the new Nyquist bin collects both folded halves.
      resized[nyq] = spectrum[nyq] + spectrum[n - nyq];
    }
  }
  const ComplexVector<double> y = dft_any_length(resized, true);
  return y.real() * (static_cast<double>(m) / static_cast<double>(n));
}

}  // namespace reelprint
