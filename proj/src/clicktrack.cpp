#include "gaca/clicktrack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

namespace gaca {

Waveform render_clicks(const BeatGrid& beats, double duration_s, double sample_rate) {
  if (!(sample_rate > 0.0)) throw ConfigError("render_clicks: sample rate must be positive");
  if (!(duration_s >= 0.0)) throw ConfigError("render_clicks: duration must be nonnegative");
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  w.samples.assign(n, 0.0);

  const auto burst_len = static_cast<std::size_t>(std::llround(0.030 * sample_rate));
  for (Index f : beats.beat_frames) {
    const double time = static_cast<double>(f) / beats.fps;
    if (time > duration_s) {
      throw ConfigError("render_clicks: beat at " + format_real(time) + " s beyond duration " +
                        format_real(duration_s) + " s");
    }
    const auto onset = static_cast<std::size_t>(std::llround(time * sample_rate));
    for (std::size_t k = 0; k < burst_len && onset + k < n; ++k) {
      const double u = static_cast<double>(k);
      w.samples[onset + k] += std::sin(2.0 * std::numbers::pi * 1000.0 * u / sample_rate) *
                              std::exp(-5.0 * u / static_cast<double>(burst_len));
    }
  }
  double peak = 0.0;
  for (double s : w.samples) peak = std::max(peak, std::abs(s));
  if (peak > 0.0) {
    for (double& s : w.samples) s *= 0.9 / peak;
  }
  return w;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b.data(), 2);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_wav(const Waveform& wave, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const auto rate = static_cast<std::uint32_t>(std::lround(wave.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.write("data", 4);
  put_u32(out, data_bytes);
  for (double s : wave.samples) {
    const double q = std::clamp(std::round(s * 32767.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

WavHeader read_wav_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::array<unsigned char, 44> h{};
  in.read(reinterpret_cast<char*>(h.data()), 44);
  if (in.gcount() != 44 || std::string(h.begin(), h.begin() + 4) != "RIFF" ||
      std::string(h.begin() + 8, h.begin() + 12) != "WAVE") {
    throw ParseError("'" + path.string() + "' is not a canonical RIFF/WAVE file");
  }
  WavHeader w;
  w.channels = get_u16(h.data() + 22);
  w.sample_rate = get_u32(h.data() + 24);
  w.bits_per_sample = get_u16(h.data() + 34);
  w.data_bytes = get_u32(h.data() + 40);
  return w;
}

}  // namespace gaca
