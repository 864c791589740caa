#include "reelprint/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

namespace reelprint {

GrayImage render_heatmap(const RealMatrix& m, const HeatmapOptions& options) {
  if (m.size() == 0) throw HeatmapError(HeatmapErrc::EmptyMatrix, "cannot render an empty matrix");
  if (options.decimate == 0) throw HeatmapError(HeatmapErrc::InvalidArgument, "decimation must be at least 1");
  const double lo = options.range ? options.range->first : m.minCoeff();
  const double hi = options.range ? options.range->second : m.maxCoeff();

  GrayImage img;
  img.height = static_cast<std::size_t>(m.rows());
  img.width = (static_cast<std::size_t>(m.cols()) + options.decimate - 1) / options.decimate;
  img.pixels.resize(img.width * img.height);
  for (std::size_t r = 0; r < img.height; ++r) {
    const auto src = static_cast<Eigen::Index>(options.flip_vertical ? img.height - 1 - r : r);
    for (std::size_t c = 0; c < img.width; ++c) {
      const double v = m(src, static_cast<Eigen::Index>(c * options.decimate));
      double g = 128.0;
      if (hi > lo) g = std::clamp(std::round(255.0 * (v - lo) / (hi - lo)), 0.0, 255.0);
      img.pixels[r * img.width + c] = static_cast<std::uint8_t>(g);
    }
  }
  return img;
}

void draw_coi(GrayImage& image, const Eigen::VectorXd& coi, const ScaleGrid& grid, std::size_t decimate) {
  if (decimate == 0) throw HeatmapError(HeatmapErrc::InvalidArgument, "decimation must be at least 1");
  const std::size_t rows = std::min<std::size_t>(image.height, static_cast<std::size_t>(grid.count()));
  for (std::size_t c = 0; c < image.width; ++c) {
    const auto t = static_cast<Eigen::Index>(c * decimate);
    if (t >= coi.size()) break;
    for (std::size_t r = 0; r < rows; ++r) {
      if (grid.scales[static_cast<Eigen::Index>(r)] > coi[t]) {
        image.pixels[r * image.width + c] = 255;
        break;
      }
    }
  }
}

void write_pgm(std::ostream& out, const GrayImage& image) {
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw HeatmapError(HeatmapErrc::IoError, "image write failed");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeatmapError(HeatmapErrc::IoError, "cannot write " + path.string());
  write_pgm(out, image);
}

void write_phase_csv(std::ostream& out, const RealMatrix& phase, const ScaleGrid& grid, double sample_rate,
                     std::size_t scale_stride, std::size_t time_stride) {
  if (scale_stride == 0 || time_stride == 0)
    throw HeatmapError(HeatmapErrc::InvalidArgument, "strides must be at least 1");
  out << "time_s,freq_hz,angle_rad\n" << std::setprecision(10);
  for (Eigen::Index i = 0; i < phase.rows(); i += static_cast<Eigen::Index>(scale_stride))
    for (Eigen::Index t = 0; t < phase.cols(); t += static_cast<Eigen::Index>(time_stride))
      out << static_cast<double>(t) / sample_rate << ',' << grid.frequencies[i] << ',' << phase(i, t) << '\n';
  if (!out) throw HeatmapError(HeatmapErrc::IoError, "csv write failed");
}

void write_phase_csv(const std::filesystem::path& path, const RealMatrix& phase, const ScaleGrid& grid,
                     double sample_rate, std::size_t scale_stride, std::size_t time_stride) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HeatmapError(HeatmapErrc::IoError, "cannot write " + path.string());
  write_phase_csv(out, phase, grid, sample_rate, scale_stride, time_stride);
}

}  // namespace reelprint
