#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace reelprint {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexVector = Vector<std::complex<Scalar>>;

// Row-major so that one scale (one row) is contiguous in time.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexMatrix = RowMatrix<std::complex<Scalar>>;

using RealMatrix = RowMatrix<double>;
using BoolMatrix = RowMatrix<bool>;

/// A mono, real-valued sampled waveform.
struct Signal {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
  double duration() const { return sample_rate > 0.0 ? static_cast<double>(size()) / sample_rate : 0.0; }
};

/// Interleaving-free multichannel audio: one column per channel.
struct AudioBuffer {
  Eigen::MatrixXd channels;  ///< [frames x channels]
  double sample_rate = 0.0;

  Eigen::Index frames() const { return channels.rows(); }
  Eigen::Index channel_count() const { return channels.cols(); }

  /// Average of all channels.
  Signal to_mono() const {
    Signal s;
    s.sample_rate = sample_rate;
    s.samples = channels.cols() ? Eigen::VectorXd(channels.rowwise().mean()) : Eigen::VectorXd();
    return s;
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error carrying a module-specific code enum.
template <typename Code>
class CodedError : public Error {
 public:
  CodedError(Code code, const std::string& what) : Error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace reelprint
