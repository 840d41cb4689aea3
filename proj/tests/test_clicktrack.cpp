#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "gaca/clicktrack.hpp"

using namespace gaca;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gaca_clicktrack_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> bytes_of(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double peak(const Waveform& w) {
  double m = 0.0;
  for (double s : w.samples) m = std::max(m, std::abs(s));
  return m;
}

// first sample index at or after `from` that is nonzero
std::size_t first_nonzero(const Waveform& w, std::size_t from) {
  for (std::size_t i = from; i < w.samples.size(); ++i) {
    if (w.samples[i] != 0.0) return i;
  }
  return w.samples.size();
}

}  // namespace

TEST_CASE("empty grid renders silence of the exact length") {
  const Waveform w = render_clicks({{}, 60, 30.0}, 2.0);
  CHECK(w.samples.size() == 88200);
  CHECK(peak(w) == 0.0);
}

TEST_CASE("a beat at frame 0 starts a burst at sample 0, peak-normalized to 0.9") {
  const Waveform w = render_clicks({{0}, 30, 30.0}, 1.0);
  CHECK(w.samples[0] == 0.0);  // sine phase starts at zero
  CHECK(first_nonzero(w, 0) == 1);
  CHECK(std::abs(peak(w) - 0.9) < 1e-12);
  // the burst is 30 ms long and nothing follows it
  CHECK(first_nonzero(w, 1323) == w.samples.size());
}

TEST_CASE("onsets land on the rounded sample of each beat time") {
  const Waveform w = render_clicks({{15, 30}, 31, 30.0}, 1.1);
  CHECK(first_nonzero(w, 0) == 22051);
  CHECK(first_nonzero(w, 22050 + 1323) == 44101);
  for (std::size_t i = 0; i < 22050; ++i) REQUIRE(w.samples[i] == 0.0);
  for (std::size_t i = 22050 + 1323; i < 44100; ++i) REQUIRE(w.samples[i] == 0.0);
}

TEST_CASE("beats past the duration and bad rates are rejected") {
  CHECK_THROWS_AS(render_clicks({{40}, 60, 30.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(render_clicks({{}, 60, 30.0}, 1.0, 0.0), ConfigError);
  CHECK_NOTHROW(render_clicks({{30}, 60, 30.0}, 1.0));
}

TEST_CASE("WAV layout: 44-byte header, 16-bit mono, clamped rounding") {
  Waveform w;
  w.samples = {1.0};
  const fs::path one = scratch("one.wav");
  write_wav(w, one);
  const auto b = bytes_of(one);
  REQUIRE(b.size() == 46);
  CHECK(std::string(b.begin(), b.begin() + 4) == "RIFF");
  CHECK(std::string(b.begin() + 36, b.begin() + 40) == "data");
  CHECK((b[44] | (b[45] << 8)) == 32767);

  w.samples = {-2.0, 0.5, 0.0};
  const fs::path three = scratch("three.wav");
  write_wav(w, three);
  const auto c = bytes_of(three);
  REQUIRE(c.size() == 50);
  auto sample = [&](std::size_t i) { return static_cast<std::int16_t>(c[44 + 2 * i] | (c[45 + 2 * i] << 8)); };
  CHECK(sample(0) == -32768);
  CHECK(sample(1) == 16384);
  CHECK(sample(2) == 0);

  const WavHeader h = read_wav_header(three);
  CHECK(h.sample_rate == 44100);
  CHECK(h.channels == 1);
  CHECK(h.bits_per_sample == 16);
  CHECK(h.data_bytes == 6);

  const Waveform full = render_clicks({{0, 15}, 30, 30.0}, 1.0);
  const fs::path track = scratch("track.wav");
  write_wav(full, track);
  CHECK(read_wav_header(track).data_bytes == 2 * full.samples.size());
  CHECK(fs::file_size(track) == 44 + 2 * full.samples.size());

  const fs::path junk = scratch("junk.wav");
  std::ofstream(junk) << "not a wave file at all, clearly not";
  CHECK_THROWS_AS(read_wav_header(junk), ParseError);
}
