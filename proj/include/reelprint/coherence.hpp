#pragma once

// Cross-wavelet transform and smoothed wavelet coherence
//
//   C(a, b) = |S(Wxy)|^2 / (S(|Wx|^2) S(|Wy|^2)),   Wxy = Wx conj(Wy),
//
// where S is a fixed separable Gaussian (sigma in scale-index and timestep
// units, edges replicated).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "reelprint/core.hpp"
#include "reelprint/timefreq.hpp"

namespace reelprint {

enum class CoherenceErrc { GridMismatch, LengthMismatch, SampleRateMismatch, InvalidArgument };
using CoherenceError = CodedError<CoherenceErrc>;

struct SmoothingConfig {
  double sigma_scale = 2.0;
  double sigma_time = 2.0;
  double truncate = 4.0;  ///< kernel radius in standard deviations

  void validate() const {
    if (!(sigma_scale > 0.0) || !(sigma_time > 0.0) || !(truncate > 0.0))
      throw CoherenceError(CoherenceErrc::InvalidArgument, "smoothing sigmas must be positive");
  }
  bool operator==(const SmoothingConfig&) const = default;
};

/// Normalized taps for offsets -r..r, r = int(truncate * sigma + 0.5).
std::vector<double> gaussian_kernel(double sigma, double truncate = 4.0);

namespace detail {

// out(i, :) = sum_j w_j in(clamp(i + j), :)
template <typename Src, typename Dst>
void smooth_rows(const Src& in, Dst& out, const std::vector<double>& w) {
  const Eigen::Index rows = in.rows();
  const auto radius = static_cast<Eigen::Index>(w.size() / 2);
  out.setZero(in.rows(), in.cols());
  for (Eigen::Index j = -radius; j <= radius; ++j) {
    const double wj = w[static_cast<std::size_t>(j + radius)];
    const Eigen::Index head = std::min(rows, std::max<Eigen::Index>(0, -j));
    const Eigen::Index tail = std::min(rows, std::max<Eigen::Index>(0, j));
    const Eigen::Index mid = rows - head - tail;
    if (mid > 0) out.middleRows(head, mid) += wj * in.middleRows(head + j, mid);
    for (Eigen::Index i = 0; i < head; ++i) out.row(i) += wj * in.row(0);
    for (Eigen::Index i = rows - tail; i < rows; ++i) out.row(i) += wj * in.row(rows - 1);
  }
}

// Time-axis pass over a window of columns. `in` holds global columns
// [in_first, in_first + in.cols()), `out` receives global columns
// [out_first, out_first + out.cols()), `total` is the full column count:
// out(:, t) = sum_j w_j in(:, clamp(out_first + t + j, 0, total - 1)).
template <typename Src, typename Dst>
void smooth_cols(const Src& in, Eigen::Index in_first, Eigen::Index total, Eigen::Index out_first, Dst& out,
                 const std::vector<double>& w) {
  const Eigen::Index width = out.cols();
  const auto radius = static_cast<Eigen::Index>(w.size() / 2);
  out.setZero();
  for (Eigen::Index j = -radius; j <= radius; ++j) {
    const double wj = w[static_cast<std::size_t>(j + radius)];
    const Eigen::Index lo = std::clamp<Eigen::Index>(-out_first - j, 0, width);
    const Eigen::Index hi = std::clamp<Eigen::Index>(total - out_first - j, lo, width);
    if (hi > lo) out.middleCols(lo, hi - lo) += wj * in.middleCols(out_first + lo + j - in_first, hi - lo);
    if (lo > 0) out.leftCols(lo) += (wj * in.col(-in_first)).replicate(1, lo);
    if (hi < width) out.rightCols(width - hi) += (wj * in.col(total - 1 - in_first)).replicate(1, width - hi);
  }
}

/// Columns per block; a block plus its halo stays in cache.
inline constexpr Eigen::Index kSmoothBlock = 256;

/// Calls fn(b0, width, block) for consecutive column blocks, where `block`
/// is the 2-D smoothing of columns [b0, b0 + width) of the matrix whose
/// columns [c0, c1) are returned by slab(c0, c1).
template <typename Scalar, typename SlabFn, typename BlockFn>
void smooth_blocks(Eigen::Index rows, Eigen::Index cols, const SmoothingConfig& cfg, SlabFn&& slab, BlockFn&& fn) {
  cfg.validate();
  const std::vector<double> ws = gaussian_kernel(cfg.sigma_scale, cfg.truncate);
  const std::vector<double> wt = gaussian_kernel(cfg.sigma_time, cfg.truncate);
  const auto radius = static_cast<Eigen::Index>(wt.size() / 2);
  RowMatrix<Scalar> along_scale, block;
  for (Eigen::Index b0 = 0; b0 < cols; b0 += kSmoothBlock) {
    const Eigen::Index width = std::min(kSmoothBlock, cols - b0);
    const Eigen::Index c0 = std::max<Eigen::Index>(0, b0 - radius);
    const Eigen::Index c1 = std::min(cols, b0 + width + radius);
    smooth_rows(slab(c0, c1), along_scale, ws);
    block.resize(rows, width);
    smooth_cols(along_scale, c0, cols, b0, block, wt);
    fn(b0, width, static_cast<const RowMatrix<Scalar>&>(block));
  }
}

}  // namespace detail

/// Separable 2-D Gaussian: scale axis (rows) first, then time axis.
/// Works for real and complex matrices.
template <typename Derived>
RowMatrix<typename Derived::Scalar> smooth(const Eigen::MatrixBase<Derived>& m, const SmoothingConfig& cfg = {}) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  RowMatrix<Scalar> out(m.rows(), m.cols());
  if (m.size() == 0) return out;
  detail::smooth_blocks<Scalar>(
      m.rows(), m.cols(), cfg,
      [&](Eigen::Index c0, Eigen::Index c1) { return RowMatrix<Scalar>(m.middleCols(c0, c1 - c0)); },
      [&](Eigen::Index b0, Eigen::Index width, const RowMatrix<Scalar>& block) {
        out.middleCols(b0, width) = block;
      });
  return out;
}

/// Wx .* conj(Wy). The argument of each entry is the local phase of x
/// relative to y (positive when x leads).
template <typename Scalar>
ComplexMatrix<Scalar> xwt(const Scalogram<Scalar>& wx, const Scalogram<Scalar>& wy) {
  if (!(wx.grid == wy.grid) || wx.coefficients.rows() != wy.coefficients.rows() ||
      wx.coefficients.cols() != wy.coefficients.cols())
    throw CoherenceError(CoherenceErrc::GridMismatch, "scalograms differ in grid or dimensions");
  return wx.coefficients.cwiseProduct(wy.coefficients.conjugate());
}

/// Argument in (-pi, pi].
template <typename Derived>
RealMatrix phase_of(const Eigen::MatrixBase<Derived>& m) {
  RealMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
      const double a = std::arg(std::complex<double>(m(i, t)));
      out(i, t) = a <= -std::numbers::pi ? std::numbers::pi : a;
    }
  return out;
}

struct CoherenceResult {
  RealMatrix coherence;  ///< in [0, 1]
  RealMatrix phase;      ///< arg of the cross-wavelet transform; empty when not requested
  ScaleGrid grid;
  Eigen::VectorXd coi;
};

/// Cells whose smoothed-power product is at or below this are set to 0.
inline constexpr double kDenominatorFloor = 1e-12;

/// Coherence from coefficients and precomputed smoothed powers
/// S(|Wx|^2), S(|Wy|^2).
RealMatrix coherence_matrix(const ComplexMatrix<double>& wx, const ComplexMatrix<double>& wy,
                            const RealMatrix& smoothed_power_x, const RealMatrix& smoothed_power_y,
                            const SmoothingConfig& smoothing);

/// S(|W|^2)
RealMatrix smoothed_power(const ComplexMatrix<double>& w, const SmoothingConfig& smoothing);

CoherenceResult wavelet_coherence(const Scalogram<double>& wx, const Scalogram<double>& wy,
                                  const SmoothingConfig& smoothing = {}, bool with_phase = true);

/// Computes both scalograms with the FFT transform and their coherence.
CoherenceResult wavelet_coherence(const Signal& x, const Signal& y, const GridConfig& grid,
                                  const MorletParams& morlet = {}, const SmoothingConfig& smoothing = {},
                                  const TransformOptions& options = {});

/// Sum of all entries, or of the entries inside the cone of influence.
double gross_coherence(const CoherenceResult& result, bool restrict_to_coi = false);

using TuneScores = std::vector<std::pair<std::string, double>>;

/// Subtracts the minimum score from every score.
TuneScores calibrate(const TuneScores& scores);

}  // namespace reelprint
