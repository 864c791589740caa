#include "reelprint/timefreq.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace reelprint {

namespace {
std::atomic<std::uint64_t> g_cwt_calls{0};
}

std::uint64_t cwt_call_count() { return g_cwt_calls.load(); }

namespace detail {

void count_cwt_call() { g_cwt_calls.fetch_add(1); }

void check_cwt_inputs(const Signal& x, const ScaleGrid& grid, const MorletParams& morlet) {
  morlet.validate();
  if (x.size() == 0) throw TimeFreqError(TimeFreqErrc::InvalidArgument, "CWT input signal is empty");
  if (grid.count() == 0) throw TimeFreqError(TimeFreqErrc::InvalidArgument, "scale grid is empty");
  if (x.sample_rate != grid.sample_rate)
    throw TimeFreqError(TimeFreqErrc::InvalidArgument, "signal sample rate does not match the scale grid");
  if (morlet.f0 != grid.f0)
    throw TimeFreqError(TimeFreqErrc::InvalidArgument, "Morlet f0 does not match the scale grid");
}

}  // namespace detail

template Scalogram<double> cwt_naive<double>(const Signal&, const ScaleGrid&, const MorletParams&,
                                             const TransformOptions&);
template Scalogram<float> cwt_naive<float>(const Signal&, const ScaleGrid&, const MorletParams&,
                                           const TransformOptions&);
template Scalogram<double> cwt_fft<double>(const Signal&, const ScaleGrid&, const MorletParams&,
                                           const TransformOptions&);
template Scalogram<float> cwt_fft<float>(const Signal&, const ScaleGrid&, const MorletParams&,
                                         const TransformOptions&);

ScaleGrid make_scale_grid(double f_min, double f_max, Eigen::Index count, double sample_rate,
                          const MorletParams& morlet, Spacing spacing, bool include_max) {
  morlet.validate();
  if (!(sample_rate > 0.0)) throw TimeFreqError(TimeFreqErrc::InvalidArgument, "sample rate must be positive");
  if (count < 2) throw TimeFreqError(TimeFreqErrc::InvalidArgument, "scale grid needs at least 2 scales");
  if (!(f_min > 0.0) || !(f_min < f_max))
    throw TimeFreqError(TimeFreqErrc::InvalidRange, "frequency range must satisfy 0 < f_min < f_max");
  if (f_max > sample_rate / 2.0)
    throw TimeFreqError(TimeFreqErrc::InvalidRange,
                        "f_max " + std::to_string(f_max) + " Hz is above the Nyquist frequency");

  ScaleGrid grid;
  grid.sample_rate = sample_rate;
  grid.f0 = morlet.f0;
  grid.spacing = spacing;
  grid.frequencies.resize(count);
  grid.scales.resize(count);
  // Position of row i measured from f_min (0) towards f_max (steps).
  const double steps = include_max ? static_cast<double>(count - 1) : static_cast<double>(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double from_min = static_cast<double>(count - 1 - i) / steps;
    double f = spacing == Spacing::Log ? f_min * std::pow(f_max / f_min, from_min)
                                       : f_min + (f_max - f_min) * from_min;
    if (i == count - 1) f = f_min;
    if (i == 0 && include_max) f = f_max;
    grid.frequencies[i] = f;
    grid.scales[i] = scale_for_frequency(f, sample_rate, morlet.f0);
  }
  return grid;
}

Eigen::VectorXd cone_of_influence(std::size_t signal_length, const ScaleGrid&) {
  Eigen::VectorXd coi(static_cast<Eigen::Index>(signal_length));
  for (std::size_t t = 0; t < signal_length; ++t) {
    const std::size_t edge = std::min(t, signal_length - 1 - t);
    coi[static_cast<Eigen::Index>(t)] = static_cast<double>(edge) / std::numbers::sqrt2;
  }
  return coi;
}

BoolMatrix coi_mask(const Eigen::VectorXd& coi, const ScaleGrid& grid) {
  BoolMatrix mask(grid.count(), coi.size());
  for (Eigen::Index i = 0; i < grid.count(); ++i)
    for (Eigen::Index t = 0; t < coi.size(); ++t) mask(i, t) = grid.scales[i] <= coi[t];
  return mask;
}

Eigen::VectorXd gaussian_window(std::size_t length, double sigma) {
  if (length == 0 || !(sigma > 0.0))
    throw TimeFreqError(TimeFreqErrc::InvalidArgument, "window needs N >= 1 and sigma > 0");
  Eigen::VectorXd g(static_cast<Eigen::Index>(length));
  const double center = static_cast<double>(length) / 2.0;
  for (std::size_t n = 0; n < length; ++n) {
    const double u = (static_cast<double>(n) - center) / sigma;
    g[static_cast<Eigen::Index>(n)] = std::exp(-0.5 * u * u);
  }
  return g;
}

GaborResult gabor_transform(const Signal& x, std::size_t window, double sigma, std::size_t hop,
                            std::size_t freq_bins) {
  if (window > x.size())
    throw TimeFreqError(TimeFreqErrc::WindowTooLong, "Gabor window is longer than the signal");
  if (hop == 0 || freq_bins == 0)
    throw TimeFreqError(TimeFreqErrc::InvalidArgument, "hop and freq_bins must be at least 1");
  const Eigen::VectorXd g = gaussian_window(window, sigma);
  const std::size_t frames = (x.size() - window) / hop + 1;

  GaborResult out;
  out.magnitudes = RealMatrix::Zero(static_cast<Eigen::Index>(freq_bins), static_cast<Eigen::Index>(frames));
  out.frequencies.resize(static_cast<Eigen::Index>(freq_bins));
  for (std::size_t j = 0; j < freq_bins; ++j) {
    out.frequencies[static_cast<Eigen::Index>(j)] =
        freq_bins == 1 ? 0.0 : x.sample_rate / 2.0 * static_cast<double>(j) / static_cast<double>(freq_bins - 1);
  }
  out.frame_starts.resize(static_cast<Eigen::Index>(frames));

  // Frequencies j * pi / (freq_bins - 1) rad/sample are exactly the bins of
  // a length-2(freq_bins - 1) DFT; fold the windowed frame onto that length
  // when it is a power of two, otherwise evaluate the sums directly.
  const std::size_t dft_len = freq_bins > 1 ? 2 * (freq_bins - 1) : 1;
  const bool use_fft = is_pow2(dft_len);
  std::shared_ptr<const FftPlan<double>> plan = use_fft ? FftPlan<double>::get(dft_len) : nullptr;
  std::vector<std::complex<double>> buffer(dft_len);

  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    out.frame_starts[static_cast<Eigen::Index>(f)] = static_cast<double>(start) / x.sample_rate;
    if (use_fft) {
      std::fill(buffer.begin(), buffer.end(), std::complex<double>(0));
      for (std::size_t n = 0; n < window; ++n)
        buffer[n % dft_len] += x.samples[static_cast<Eigen::Index>(start + n)] * g[static_cast<Eigen::Index>(n)];
      plan->forward(buffer.data());
      for (std::size_t j = 0; j < freq_bins; ++j)
        out.magnitudes(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(f)) = std::abs(buffer[j]);
    } else {
      for (std::size_t j = 0; j < freq_bins; ++j) {
        const double omega = std::numbers::pi * static_cast<double>(j) / static_cast<double>(freq_bins - 1);
        std::complex<double> acc(0);
        for (std::size_t n = 0; n < window; ++n) {
          const double v = x.samples[static_cast<Eigen::Index>(start + n)] * g[static_cast<Eigen::Index>(n)];
          acc += v * std::polar(1.0, -omega * static_cast<double>(n));
        }
        out.magnitudes(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(f)) = std::abs(acc);
      }
    }
  }
  return out;
}

}  // namespace reelprint
