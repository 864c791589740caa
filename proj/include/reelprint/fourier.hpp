#pragma once

// Radix-2 FFT/IFFT. Forward transform is unnormalized,
//   X[k] = sum_n x[n] exp(-i 2 pi k n / N),
// and the inverse carries the 1/N factor. Inputs of other lengths are
// zero-padded at the end to the next power of two.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "reelprint/core.hpp"

namespace reelprint {

enum class FourierErrc { NonPowerOfTwoLength };
using FourierError = CodedError<FourierErrc>;

/// Bit-reversal and per-stage twiddle tables for one power-of-two length.
/// Immutable after construction; shared between threads through get().
template <typename Scalar>
class FftPlan {
 public:
  using Complex = std::complex<Scalar>;

  explicit FftPlan(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw FourierError(FourierErrc::NonPowerOfTwoLength, "FFT length must be a power of two");
    bitrev_.resize(n);
    unsigned bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (unsigned b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = static_cast<std::uint32_t>(r);
    }
    // Stage with half-length h keeps its h twiddles at offset h - 1.
    twiddles_.resize(n > 1 ? n - 1 : 0);
    for (std::size_t half = 1; half < n; half <<= 1) {
      for (std::size_t k = 0; k < half; ++k) {
        const double angle = -std::numbers::pi * static_cast<double>(k) / static_cast<double>(half);
        twiddles_[half - 1 + k] = Complex(static_cast<Scalar>(std::cos(angle)), static_cast<Scalar>(std::sin(angle)));
      }
    }
  }

  /// Shared plan for length n, built on first use.
  static std::shared_ptr<const FftPlan> get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::shared_ptr<const FftPlan>> plans;
    std::lock_guard lock(mutex);
    auto& slot = plans[n];
    if (!slot) slot = std::make_shared<const FftPlan>(n);
    return slot;
  }

  std::size_t size() const { return n_; }

  void forward(Complex* data) const { run(data, false); }

  void inverse(Complex* data) const {
    run(data, true);
    const Scalar scale = Scalar(1) / static_cast<Scalar>(n_);
    for (std::size_t i = 0; i < n_; ++i) data[i] *= scale;
  }

 private:
  void run(Complex* data, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t r = bitrev_[i];
      if (i < r) std::swap(data[i], data[r]);
    }
    Scalar* d = reinterpret_cast<Scalar*>(data);
    const Scalar sign = inverse ? Scalar(-1) : Scalar(1);
    for (std::size_t half = 1; half < n_; half <<= 1) {
      const Complex* w = twiddles_.data() + (half - 1);
      const std::size_t len = half << 1;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const Scalar wr = w[k].real();
          const Scalar wi = sign * w[k].imag();
          Scalar* a = d + 2 * (start + k);
          Scalar* b = d + 2 * (start + k + half);
          const Scalar br = b[0] * wr - b[1] * wi;
          const Scalar bi = b[0] * wi + b[1] * wr;
          b[0] = a[0] - br;
          b[1] = a[1] - bi;
          a[0] += br;
          a[1] += bi;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::uint32_t> bitrev_;
  std::vector<Complex> twiddles_;
};

/// DFT coefficients on a padded power-of-two length.
template <typename Scalar>
struct Spectrum {
  ComplexVector<Scalar> coefficients;
  double bin_hz = 1.0;              ///< sample_rate / padded length
  std::size_t original_length = 0;  ///< input length before padding

  std::size_t size() const { return static_cast<std::size_t>(coefficients.size()); }
};

/// Forward FFT of a real or complex vector expression, zero-padded to the
/// next power of two. `sample_rate` only labels the bins.
template <typename Derived>
auto fft(const Eigen::MatrixBase<Derived>& x, double sample_rate = 1.0)
    -> Spectrum<typename Eigen::NumTraits<typename Derived::Scalar>::Real> {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  const auto n = static_cast<std::size_t>(x.size());
  const std::size_t padded = next_pow2(std::max<std::size_t>(n, 1));
  Spectrum<Real> out;
  out.original_length = n;
  out.bin_hz = sample_rate / static_cast<double>(padded);
  out.coefficients = ComplexVector<Real>::Zero(static_cast<Eigen::Index>(padded));
  out.coefficients.head(x.size()) = x.template cast<std::complex<Real>>();
  FftPlan<Real>::get(padded)->forward(out.coefficients.data());
  return out;
}

inline Spectrum<double> fft(const Signal& x) { return fft(x.samples, x.sample_rate); }

/// Inverse FFT. The caller truncates any padding.
template <typename Scalar>
ComplexVector<Scalar> ifft(const ComplexVector<Scalar>& coefficients) {
  const auto n = static_cast<std::size_t>(coefficients.size());
  if (!is_pow2(n)) throw FourierError(FourierErrc::NonPowerOfTwoLength, "inverse FFT length must be a power of two");
  ComplexVector<Scalar> out = coefficients;
  FftPlan<Scalar>::get(n)->inverse(out.data());
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> ifft(const Spectrum<Scalar>& spectrum) {
  return ifft(spectrum.coefficients);
}

/// DFT of arbitrary length via Bluestein's chirp-z algorithm on top of the
/// radix-2 engine. `inverse` applies the 1/N convention of ifft.
ComplexVector<double> dft_any_length(const ComplexVector<double>& x, bool inverse = false);

/// Band-limited resampling by truncating or zero-extending the spectrum of
/// the whole signal. Output length is round(n * to_rate / from_rate).
Eigen::VectorXd resample_fourier(const Eigen::VectorXd& x, double from_rate, double to_rate);

}  // namespace reelprint
