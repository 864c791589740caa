#pragma once

// RIFF/WAVE reading (16-bit PCM, 32-bit float, 1-2 channels) and 16-bit
// mono writing.

#include <filesystem>
#include <istream>
#include <ostream>

#include "reelprint/core.hpp"

namespace reelprint {

enum class WavErrc { UnsupportedEncoding, CorruptHeader, IoError };
using WavError = CodedError<WavErrc>;

/// Samples scaled to [-1, 1].
AudioBuffer read_wav(std::istream& in);
AudioBuffer read_wav(const std::filesystem::path& path);

/// 16-bit PCM mono at the signal's rate; samples are clamped to [-1, 1).
void write_wav(std::ostream& out, const Signal& signal);
void write_wav(const std::filesystem::path& path, const Signal& signal);

}  // namespace reelprint
