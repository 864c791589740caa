#pragma once

// Grayscale raster output for time-frequency matrices: binary PGM (P5)
// images with an optional cone-of-influence boundary, and a decimated CSV
// of phase angles.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "reelprint/core.hpp"
#include "reelprint/timefreq.hpp"

namespace reelprint {

enum class HeatmapErrc { EmptyMatrix, IoError, InvalidArgument };
using HeatmapError = CodedError<HeatmapErrc>;

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, top row first

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

struct HeatmapOptions {
  std::size_t decimate = 1;                           ///< keep every k-th column
  std::optional<std::pair<double, double>> range;     ///< fixed [lo, hi]; default min..max of the matrix
  bool flip_vertical = false;                         ///< for matrices whose row 0 is the lowest frequency
};

/// Linear value -> gray mapping. A constant matrix maps to 128 everywhere.
GrayImage render_heatmap(const RealMatrix& m, const HeatmapOptions& options = {});

/// Marks with 255, in each kept column, the first row whose scale lies
/// outside the cone of influence.
void draw_coi(GrayImage& image, const Eigen::VectorXd& coi, const ScaleGrid& grid, std::size_t decimate = 1);

void write_pgm(std::ostream& out, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// One "time_s,freq_hz,angle_rad" row per sampled cell.
void write_phase_csv(std::ostream& out, const RealMatrix& phase, const ScaleGrid& grid, double sample_rate,
                     std::size_t scale_stride = 16, std::size_t time_stride = 512);
void write_phase_csv(const std::filesystem::path& path, const RealMatrix& phase, const ScaleGrid& grid,
                     double sample_rate, std::size_t scale_stride = 16, std::size_t time_stride = 512);

}  // namespace reelprint
