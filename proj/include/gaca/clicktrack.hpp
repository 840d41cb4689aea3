#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gaca/pose.hpp"

namespace gaca {

struct Waveform {
  double sample_rate = 44100.0;
  std::vector<double> samples;  // mono, |x| <= 1
};

/// 30 ms exponentially decaying 1 kHz burst at every beat, peak-normalized to 0.9.
Waveform render_clicks(const BeatGrid& beats, double duration_s, double sample_rate = 44100.0);

/// 16-bit PCM mono RIFF/WAVE; samples stored as round(x * 32767), clamped.
void write_wav(const Waveform& wave, const std::filesystem::path& path);

struct WavHeader {
  std::uint32_t sample_rate = 0;
  std::uint16_t channels = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint32_t data_bytes = 0;
};

WavHeader read_wav_header(const std::filesystem::path& path);

}  // namespace gaca
