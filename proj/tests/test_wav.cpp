#include <doctest.h>

#include <cstring>
#include <sstream>

#include "reelprint/wav.hpp"
#include "support.hpp"

using namespace reelprint;

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

// Hand-assembled RIFF file with an extra chunk before the data.
std::string float_stereo_wav(const std::vector<float>& interleaved, std::uint32_t rate) {
  std::string fmt;
  put_u16(fmt, 3);
  put_u16(fmt, 2);
  put_u32(fmt, rate);
  put_u32(fmt, rate * 8);
  put_u16(fmt, 8);
  put_u16(fmt, 32);
  std::string data(interleaved.size() * 4, '\0');
  std::memcpy(data.data(), interleaved.data(), data.size());
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "LIST";
  put_u32(body, 3);
  body += "abc";
  body.push_back('\0');  // pad byte for the odd-sized chunk
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

}  // namespace

TEST_SUITE("wav") {
  TEST_CASE("16-bit round trip") {
    Signal x = testing::random_signal(153600, 2);
    x.samples /= x.samples.cwiseAbs().maxCoeff() * 1.01;
    std::stringstream buf;
    write_wav(buf, x);
    CHECK(buf.str().size() == 44 + 2 * 153600);
    const AudioBuffer a = read_wav(buf);
    CHECK(a.sample_rate == 8000.0);
    CHECK(a.channel_count() == 1);
    REQUIRE(a.frames() == 153600);
    CHECK((a.to_mono().samples - x.samples).cwiseAbs().maxCoeff() <= std::ldexp(1.0, -15));
  }

  TEST_CASE("full-scale samples are clamped") {
    Signal x{Eigen::VectorXd(3), 8000.0};
    x.samples << 1.0, -1.0, 2.0;
    std::stringstream buf;
    write_wav(buf, x);
    const Eigen::VectorXd y = read_wav(buf).to_mono().samples;
    CHECK(y[0] == 32767.0 / 32768.0);
    CHECK(y[1] == -1.0);
    CHECK(y[2] == 32767.0 / 32768.0);
  }

  TEST_CASE("float stereo with extra chunks") {
    std::stringstream in(float_stereo_wav({0.5f, -0.5f, 0.25f, 0.75f}, 44100));
    const AudioBuffer a = read_wav(in);
    CHECK(a.sample_rate == 44100.0);
    REQUIRE(a.channel_count() == 2);
    REQUIRE(a.frames() == 2);
    CHECK(a.channels(0, 0) == 0.5);
    CHECK(a.channels(0, 1) == -0.5);
    CHECK(a.channels(1, 1) == 0.75);
    CHECK(a.to_mono().samples[1] == 0.5);
  }

  TEST_CASE("corrupt and unsupported files") {
    const auto code_of = [](const std::string& bytes) {
      std::stringstream in(bytes);
      try {
        read_wav(in);
      } catch (const WavError& e) {
        return e.code();
      }
      return WavErrc::IoError;
    };
    std::stringstream buf;
    write_wav(buf, testing::random_signal(10, 1));
    const std::string good = buf.str();
    CHECK(code_of(good.substr(0, 20)) == WavErrc::CorruptHeader);
    CHECK(code_of("RIFX" + good.substr(4)) == WavErrc::CorruptHeader);
    std::string eight_bit = good;
    eight_bit[34] = 8;  // bits per sample
    CHECK(code_of(eight_bit) == WavErrc::UnsupportedEncoding);
    CHECK_THROWS_AS(read_wav(std::filesystem::path("/nonexistent.wav")), WavError);
  }
}
