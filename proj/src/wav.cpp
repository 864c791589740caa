#include "reelprint/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace reelprint {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

bool read_exact(std::istream& in, void* dst, std::size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace

AudioBuffer read_wav(std::istream& in) {
  unsigned char riff[12];
  if (!read_exact(in, riff, 12)) throw WavError(WavErrc::CorruptHeader, "file shorter than a RIFF header");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
    throw WavError(WavErrc::CorruptHeader, "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  for (;;) {
    unsigned char chunk[8];
    if (!read_exact(in, chunk, 8))
      throw WavError(WavErrc::CorruptHeader, have_fmt ? "missing data chunk" : "missing fmt chunk");
    const std::uint32_t size = le32(chunk + 4);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw WavError(WavErrc::CorruptHeader, "fmt chunk too short");
      std::vector<unsigned char> fmt(size + (size & 1));
      if (!read_exact(in, fmt.data(), fmt.size())) throw WavError(WavErrc::CorruptHeader, "truncated fmt chunk");
      format = le16(fmt.data());
      channels = le16(fmt.data() + 2);
      rate = le32(fmt.data() + 4);
      bits = le16(fmt.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw WavError(WavErrc::CorruptHeader, "extensible fmt chunk too short");
        format = le16(fmt.data() + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw WavError(WavErrc::CorruptHeader, "data chunk before fmt chunk");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool float32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !float32)
        throw WavError(WavErrc::UnsupportedEncoding,
                       "encoding " + std::to_string(format) + "/" + std::to_string(bits) + " bits is not supported");
      if (channels < 1 || channels > 2)
        throw WavError(WavErrc::UnsupportedEncoding, std::to_string(channels) + " channels is not supported");
      if (rate == 0) throw WavError(WavErrc::CorruptHeader, "zero sample rate");

      const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
      std::vector<unsigned char> data(size);
      in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
      const auto got = static_cast<std::size_t>(in.gcount());
      if (got < size && got % frame_bytes != 0) throw WavError(WavErrc::CorruptHeader, "truncated data chunk");
      const std::size_t frames = got / frame_bytes;

      AudioBuffer out;
      out.sample_rate = rate;
      out.channels.resize(static_cast<Eigen::Index>(frames), channels);
      for (std::size_t f = 0; f < frames; ++f)
        for (std::uint16_t c = 0; c < channels; ++c) {
          const unsigned char* p = data.data() + f * frame_bytes + c * (bits / 8);
          out.channels(static_cast<Eigen::Index>(f), c) =
              pcm16 ? static_cast<std::int16_t>(le16(p)) / 32768.0 : std::bit_cast<float>(le32(p));
        }
      return out;
    } else {
      in.ignore(static_cast<std::streamsize>(size + (size & 1)));
      if (!in) throw WavError(WavErrc::CorruptHeader, "truncated chunk");
    }
  }
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrc::IoError, "cannot open " + path.string());
  return read_wav(in);
}

void write_wav(std::ostream& out, const Signal& signal) {
  if (!(signal.sample_rate > 0.0)) throw WavError(WavErrc::UnsupportedEncoding, "sample rate must be positive");
  const auto rate = static_cast<std::uint32_t>(std::lround(signal.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(signal.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, rate);
  put32(out, rate * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  for (double x : signal.samples) {
    const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) throw WavError(WavErrc::IoError, "write failed");
}

void write_wav(const std::filesystem::path& path, const Signal& signal) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError(WavErrc::IoError, "cannot write " + path.string());
  write_wav(out, signal);
}

}  // namespace reelprint
