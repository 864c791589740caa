#include "reelprint/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace reelprint {

std::vector<double> gaussian_kernel(double sigma, double truncate) {
  if (!(sigma > 0.0) || !(truncate > 0.0))
    throw CoherenceError(CoherenceErrc::InvalidArgument, "kernel sigma must be positive");
  const int radius = static_cast<int>(truncate * sigma + 0.5);
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double v = std::exp(-0.5 * (j * j) / (sigma * sigma));
    w[static_cast<std::size_t>(j + radius)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

RealMatrix smoothed_power(const ComplexMatrix<double>& w, const SmoothingConfig& smoothing) {
  return smooth(w.cwiseAbs2(), smoothing);
}

RealMatrix coherence_matrix(const ComplexMatrix<double>& wx, const ComplexMatrix<double>& wy,
                            const RealMatrix& smoothed_power_x, const RealMatrix& smoothed_power_y,
                            const SmoothingConfig& smoothing) {
  if (wx.rows() != wy.rows() || wx.cols() != wy.cols() || smoothed_power_x.rows() != wx.rows() ||
      smoothed_power_x.cols() != wx.cols() || smoothed_power_y.rows() != wx.rows() ||
      smoothed_power_y.cols() != wx.cols())
    throw CoherenceError(CoherenceErrc::GridMismatch, "coherence inputs differ in dimensions");
  RealMatrix out(wx.rows(), wx.cols());
  if (out.size() == 0) return out;
  detail::smooth_blocks<std::complex<double>>(
      wx.rows(), wx.cols(), smoothing,
      [&](Eigen::Index c0, Eigen::Index c1) {
        return ComplexMatrix<double>(
            wx.middleCols(c0, c1 - c0).cwiseProduct(wy.middleCols(c0, c1 - c0).conjugate()));
      },
      [&](Eigen::Index b0, Eigen::Index width, const ComplexMatrix<double>& cross) {
        for (Eigen::Index i = 0; i < out.rows(); ++i)
          for (Eigen::Index k = 0; k < width; ++k) {
            const double den = smoothed_power_x(i, b0 + k) * smoothed_power_y(i, b0 + k);
            out(i, b0 + k) = den > kDenominatorFloor ? std::clamp(std::norm(cross(i, k)) / den, 0.0, 1.0) : 0.0;
          }
      });
  return out;
}

CoherenceResult wavelet_coherence(const Scalogram<double>& wx, const Scalogram<double>& wy,
                                  const SmoothingConfig& smoothing, bool with_phase) {
  smoothing.validate();
  const ComplexMatrix<double> cross = xwt(wx, wy);
  CoherenceResult r;
  r.coherence = coherence_matrix(wx.coefficients, wy.coefficients, smoothed_power(wx.coefficients, smoothing),
                                 smoothed_power(wy.coefficients, smoothing), smoothing);
  if (with_phase) r.phase = phase_of(cross);
  r.grid = wx.grid;
  r.coi = wx.coi;
  return r;
}

CoherenceResult wavelet_coherence(const Signal& x, const Signal& y, const GridConfig& grid,
                                  const MorletParams& morlet, const SmoothingConfig& smoothing,
                                  const TransformOptions& options) {
  if (x.size() != y.size()) throw CoherenceError(CoherenceErrc::LengthMismatch, "signals differ in length");
  if (x.sample_rate != y.sample_rate)
    throw CoherenceError(CoherenceErrc::SampleRateMismatch, "signals differ in sample rate");
  const ScaleGrid g = make_scale_grid(grid, x.sample_rate, morlet);
  auto wy_future = std::async(std::launch::async, [&] { return cwt_fft<double>(y, g, morlet, options); });
  const Scalogram<double> wx = cwt_fft<double>(x, g, morlet, options);
  const Scalogram<double> wy = wy_future.get();
  return wavelet_coherence(wx, wy, smoothing);
}

double gross_coherence(const CoherenceResult& result, bool restrict_to_coi) {
  if (!restrict_to_coi) return result.coherence.sum();
  const BoolMatrix inside = coi_mask(result.coi, result.grid);
  return inside.select(result.coherence, 0.0).sum();
}

TuneScores calibrate(const TuneScores& scores) {
  if (scores.empty()) return {};
  double lowest = scores.front().second;
  for (const auto& s : scores) lowest = std::min(lowest, s.second);
  TuneScores out = scores;
  for (auto& s : out) s.second -= lowest;
  return out;
}

}  // namespace reelprint
