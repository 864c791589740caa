#pragma once

// Time-frequency decompositions: Gaussian-windowed STFT (Gabor transform)
// and the Morlet continuous wavelet transform
//
//   W(a, b) = a^{-1/2} sum_t x[t] conj(psi((t - b) / a)),
//   psi(t)  = pi^{-1/4} exp(i f0 t) exp(-t^2 / 2),
//
// with a and b in samples. A scale a corresponds to the pseudo-frequency
// f = f0 * sample_rate / (2 pi a).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "reelprint/core.hpp"
#include "reelprint/fourier.hpp"
#include "reelprint/parallel.hpp"

namespace reelprint {

enum class TimeFreqErrc { InvalidArgument, InvalidRange, WindowTooLong };
using TimeFreqError = CodedError<TimeFreqErrc>;

struct MorletParams {
  double f0 = 5.0;

  void validate() const {
    if (!(f0 >= 4.0)) throw TimeFreqError(TimeFreqErrc::InvalidArgument, "Morlet f0 must be >= 4");
  }
  bool operator==(const MorletParams&) const = default;
};

inline std::complex<double> morlet(double t, double f0) {
  const double envelope = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * t * t);
  return {envelope * std::cos(f0 * t), envelope * std::sin(f0 * t)};
}

inline double scale_for_frequency(double frequency, double sample_rate, double f0) {
  return f0 * sample_rate / (2.0 * std::numbers::pi * frequency);
}

inline double frequency_for_scale(double scale, double sample_rate, double f0) {
  return f0 * sample_rate / (2.0 * std::numbers::pi * scale);
}

enum class Spacing { Log, Linear };

/// Pseudo-frequencies in descending order (row 0 = highest frequency,
/// smallest scale) with their paired scales in samples.
struct ScaleGrid {
  Eigen::VectorXd frequencies;
  Eigen::VectorXd scales;
  double sample_rate = 0.0;
  double f0 = 5.0;
  Spacing spacing = Spacing::Log;

  Eigen::Index count() const { return frequencies.size(); }
  bool operator==(const ScaleGrid& other) const {
    return sample_rate == other.sample_rate && f0 == other.f0 && spacing == other.spacing &&
           frequencies.size() == other.frequencies.size() && frequencies == other.frequencies;
  }
};

/// Frequencies from f_max down to f_min. With include_max = false the top
/// endpoint is dropped and the spacing is over `count` steps instead.
ScaleGrid make_scale_grid(double f_min, double f_max, Eigen::Index count, double sample_rate,
                          const MorletParams& morlet = {}, Spacing spacing = Spacing::Log,
                          bool include_max = true);

/// Frequency range and resolution of a scale grid, independent of the
/// signal it will be applied to.
struct GridConfig {
  double f_min = 200.0;
  double f_max = 1200.0;
  Eigen::Index count = 200;
  Spacing spacing = Spacing::Log;
  bool operator==(const GridConfig&) const = default;
};

inline ScaleGrid make_scale_grid(const GridConfig& config, double sample_rate, const MorletParams& morlet = {}) {
  return make_scale_grid(config.f_min, config.f_max, config.count, sample_rate, morlet, config.spacing);
}

/// Per-timestep largest scale (samples) inside the cone of influence:
/// min(t, n - 1 - t) / sqrt(2).
Eigen::VectorXd cone_of_influence(std::size_t signal_length, const ScaleGrid& grid);

/// mask(i, t) is true when scale i at timestep t lies inside the cone.
BoolMatrix coi_mask(const Eigen::VectorXd& coi, const ScaleGrid& grid);

template <typename Scalar = double>
struct Scalogram {
  ComplexMatrix<Scalar> coefficients;  ///< [scales x timesteps]
  ScaleGrid grid;
  double sample_rate = 0.0;
  Eigen::VectorXd coi;

  Eigen::Index scales() const { return coefficients.rows(); }
  Eigen::Index timesteps() const { return coefficients.cols(); }
};

struct TransformOptions {
  unsigned threads = 0;  ///< 0 = one per hardware thread, 1 = sequential
};

/// Number of CWTs computed in this process (both implementations).
std::uint64_t cwt_call_count();

namespace detail {
void count_cwt_call();
void check_cwt_inputs(const Signal& x, const ScaleGrid& grid, const MorletParams& morlet);

/// |psi| below this is dropped from the direct convolution.
inline constexpr double kWaveletTruncation = 1e-8;

inline std::ptrdiff_t naive_half_width(double scale) {
  return static_cast<std::ptrdiff_t>(std::ceil(scale * std::sqrt(-2.0 * std::log(kWaveletTruncation))));
}
}  // namespace detail

/// Direct convolution, O(S * N * support). Zero-padded edges.
template <typename Scalar = double>
Scalogram<Scalar> cwt_naive(const Signal& x, const ScaleGrid& grid, const MorletParams& morlet = {},
                            const TransformOptions& options = {}) {
  detail::check_cwt_inputs(x, grid, morlet);
  detail::count_cwt_call();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const Vector<Scalar> samples = x.samples.cast<Scalar>();

  Scalogram<Scalar> out;
  out.grid = grid;
  out.sample_rate = x.sample_rate;
  out.coefficients.resize(grid.count(), n);
  out.coi = cone_of_influence(x.size(), grid);

  const double norm = std::pow(std::numbers::pi, -0.25);
  parallel_for(static_cast<std::size_t>(grid.count()), options.threads, [&](std::size_t row) {
    const double a = grid.scales[static_cast<Eigen::Index>(row)];
    const std::ptrdiff_t half = detail::naive_half_width(a);
    const std::size_t taps = static_cast<std::size_t>(2 * half + 1);
    // conj(psi(m / a)) / sqrt(a), split into real and imaginary parts.
    std::vector<Scalar> re(taps), im(taps);
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
      const double u = static_cast<double>(m) / a;
      const double env = norm * std::exp(-0.5 * u * u) / std::sqrt(a);
      re[static_cast<std::size_t>(m + half)] = static_cast<Scalar>(env * std::cos(morlet.f0 * u));
      im[static_cast<std::size_t>(m + half)] = static_cast<Scalar>(-env * std::sin(morlet.f0 * u));
    }
    auto dst = out.coefficients.row(static_cast<Eigen::Index>(row));
    for (std::ptrdiff_t b = 0; b < n; ++b) {
      const std::ptrdiff_t lo = std::max(-half, -b);
      const std::ptrdiff_t hi = std::min(half, n - 1 - b);
      Scalar acc_re = 0, acc_im = 0;
      const Scalar* xs = samples.data() + b;
      for (std::ptrdiff_t m = lo; m <= hi; ++m) {
        const Scalar v = xs[m];
        acc_re += v * re[static_cast<std::size_t>(m + half)];
        acc_im += v * im[static_cast<std::size_t>(m + half)];
      }
      dst[b] = std::complex<Scalar>(acc_re, acc_im);
    }
  });
  return out;
}

/// Analytic Morlet spectra for every scale of a grid at one padded length.
/// Band k covers signed DFT indices [first, first + values.size()), taken
/// modulo the padded length.
template <typename Scalar>
struct WaveletBank {
  struct Band {
    std::ptrdiff_t first = 0;
    std::vector<Scalar> values;
  };
  std::size_t padded_length = 0;
  std::vector<Band> bands;
};

namespace detail {
template <typename Scalar>
WaveletBank<Scalar> build_wavelet_bank(const ScaleGrid& grid, double f0, std::size_t padded) {
  // Keep exp(-(a w - f0)^2 / 2) above ~1e-16 of its peak.
  constexpr double kReach = 8.6;
  WaveletBank<Scalar> bank;
  bank.padded_length = padded;
  bank.bands.resize(static_cast<std::size_t>(grid.count()));
  const double bin = 2.0 * std::numbers::pi / static_cast<double>(padded);
  const double amp = std::pow(std::numbers::pi, -0.25) * std::sqrt(2.0 * std::numbers::pi);
  for (Eigen::Index i = 0; i < grid.count(); ++i) {
    const double a = grid.scales[i];
    // Not clamped to +-N/2: a sampled wavelet's spectrum is periodic, so
    // indices past Nyquist fold back onto the grid in cwt_fft.
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil((f0 - kReach) / a / bin));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor((f0 + kReach) / a / bin));
    auto& band = bank.bands[static_cast<std::size_t>(i)];
    band.first = lo;
    band.values.reserve(static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, hi - lo + 1)));
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      const double d = a * bin * static_cast<double>(k) - f0;
      band.values.push_back(static_cast<Scalar>(std::sqrt(a) * amp * std::exp(-0.5 * d * d)));
    }
  }
  return bank;
}
}  // namespace detail

/// Cached bank for (grid, f0, padded length). Entries are immutable and
/// shared; the cache keeps a bounded number of recent banks.
template <typename Scalar>
std::shared_ptr<const WaveletBank<Scalar>> wavelet_bank(const ScaleGrid& grid, double f0, std::size_t padded) {
  struct Entry {
    ScaleGrid grid;
    double f0;
    std::size_t padded;
    std::shared_ptr<const WaveletBank<Scalar>> bank;
  };
  static std::mutex mutex;
  static std::vector<Entry> entries;
  constexpr std::size_t kCapacity = 12;
  {
    std::lock_guard lock(mutex);
    for (const auto& e : entries) {
      if (e.padded == padded && e.f0 == f0 && e.grid.scales.size() == grid.scales.size() && e.grid.scales == grid.scales)
        return e.bank;
    }
  }
  auto bank = std::make_shared<const WaveletBank<Scalar>>(detail::build_wavelet_bank<Scalar>(grid, f0, padded));
  std::lock_guard lock(mutex);
  if (entries.size() >= kCapacity) entries.erase(entries.begin());
  entries.push_back({grid, f0, padded, bank});
  return bank;
}

/// FFT-accelerated CWT, O(S * N log N): one forward FFT of the signal, then
/// per scale a product with the cached analytic wavelet spectrum and one
/// inverse FFT. Padding is to the next power of two, so columns within a
/// wavelet support of either edge see circular wrap instead of zeros.
template <typename Scalar = double>
Scalogram<Scalar> cwt_fft(const Signal& x, const ScaleGrid& grid, const MorletParams& morlet = {},
                          const TransformOptions& options = {}) {
  detail::check_cwt_inputs(x, grid, morlet);
  detail::count_cwt_call();
  using Complex = std::complex<Scalar>;
  const auto n = static_cast<Eigen::Index>(x.size());
  const Spectrum<Scalar> spectrum = fft(x.samples.cast<Scalar>(), x.sample_rate);
  const std::size_t padded = spectrum.size();
  const auto bank = wavelet_bank<Scalar>(grid, morlet.f0, padded);
  const auto plan = FftPlan<Scalar>::get(padded);

  Scalogram<Scalar> out;
  out.grid = grid;
  out.sample_rate = x.sample_rate;
  out.coefficients.resize(grid.count(), n);
  out.coi = cone_of_influence(x.size(), grid);

  const auto np = static_cast<std::ptrdiff_t>(padded);
  parallel_for(static_cast<std::size_t>(grid.count()), options.threads, [&](std::size_t row) {
    std::vector<Complex> buffer(padded, Complex(0));
    const auto& band = bank->bands[row];
    for (std::size_t j = 0; j < band.values.size(); ++j) {
      const std::ptrdiff_t k = ((band.first + static_cast<std::ptrdiff_t>(j)) % np + np) % np;
      buffer[static_cast<std::size_t>(k)] += spectrum.coefficients[k] * band.values[j];
    }
    plan->inverse(buffer.data());
    out.coefficients.row(static_cast<Eigen::Index>(row)) =
        Eigen::Map<const Eigen::Matrix<Complex, 1, Eigen::Dynamic>>(buffer.data(), n);
  });
  return out;
}

extern template Scalogram<double> cwt_naive<double>(const Signal&, const ScaleGrid&, const MorletParams&,
                                                    const TransformOptions&);
extern template Scalogram<float> cwt_naive<float>(const Signal&, const ScaleGrid&, const MorletParams&,
                                                  const TransformOptions&);
extern template Scalogram<double> cwt_fft<double>(const Signal&, const ScaleGrid&, const MorletParams&,
                                                  const TransformOptions&);
extern template Scalogram<float> cwt_fft<float>(const Signal&, const ScaleGrid&, const MorletParams&,
                                                const TransformOptions&);

/// g[n] = exp(-((n - N/2) / sigma)^2 / 2), 0 <= n < N.
Eigen::VectorXd gaussian_window(std::size_t length, double sigma);

struct GaborResult {
  RealMatrix magnitudes;         ///< [freq_bins x frames], row 0 = 0 Hz
  Eigen::VectorXd frequencies;   ///< 0 .. sample_rate / 2
  Eigen::VectorXd frame_starts;  ///< seconds
};

/// Gaussian-windowed STFT magnitudes at `freq_bins` uniformly spaced
/// frequencies from 0 to Nyquist, one frame every `hop` samples.
GaborResult gabor_transform(const Signal& x, std::size_t window, double sigma, std::size_t hop,
                            std::size_t freq_bins);

}  // namespace reelprint
