#include "gaca/pose.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "gaca/nn.hpp"

namespace gaca {

namespace {

/// Line-oriented tokenizer that remembers line numbers for diagnostics.
class LineReader {
 public:
  LineReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  /// Next line's tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    tokens.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(what_ + ": line " + std::to_string(line_) + ": " + msg);
  }

  double real(const std::string& tok) const {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end) fail("not a number: '" + tok + "'");
    if (!std::isfinite(v)) fail("non-finite value '" + tok + "'");
    return v;
  }

  Index count(const std::string& tok) const {
    long long v = 0;
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || ptr != end || v < 0) fail("not a count: '" + tok + "'");
    return static_cast<Index>(v);
  }

  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string what_;
  int line_ = 0;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

RowMatrix parse_table(LineReader& r, Index rows, Index cols) {
  RowMatrix m(rows, cols);
  std::vector<std::string> tok;
  for (Index i = 0; i < rows; ++i) {
    if (!r.next(tok)) r.fail("expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    if (static_cast<Index>(tok.size()) != cols) {
      r.fail("row " + std::to_string(i) + " has " + std::to_string(tok.size()) +
             " values, expected " + std::to_string(cols));
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = r.real(tok[c]);
  }
  while (r.next(tok)) {
    if (!tok.empty()) r.fail("unexpected trailing data");
  }
  return m;
}

void write_rows(std::ostream& out, const RowMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_real(m(i, c));
    out << '\n';
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void validate(const PoseSequence& pose) {
  if (pose.frames < 2) throw ConfigError("pose needs at least 2 frames, got " + std::to_string(pose.frames));
  if (pose.joints < 1) throw ConfigError("pose needs at least 1 joint");
  if (pose.coords != 2 && pose.coords != 3) {
    throw ConfigError("pose coordinates must be 2 or 3, got " + std::to_string(pose.coords));
  }
  if (!(pose.fps > 0.0)) throw ConfigError("pose fps must be positive");
  if (pose.data.size() != pose.frames * pose.joints * pose.coords) {
    throw DimensionError("pose data holds " + std::to_string(pose.data.size()) + " values, expected " +
                         std::to_string(pose.frames * pose.joints * pose.coords));
  }
  if (!pose.data.allFinite()) throw ConfigError("pose contains non-finite values");
}

void validate(const BeatGrid& grid) {
  for (std::size_t i = 0; i < grid.beat_frames.size(); ++i) {
    const Index b = grid.beat_frames[i];
    if (b < 0 || b >= grid.timeline_len) {
      throw ConfigError("beat frame " + std::to_string(b) + " outside timeline of " +
                        std::to_string(grid.timeline_len));
    }
    if (i > 0 && b <= grid.beat_frames[i - 1]) throw ConfigError("beat frames not strictly increasing");
  }
  if (!(grid.fps > 0.0)) throw ConfigError("beat grid fps must be positive");
}

RowMatrix MotionField::component(Index c) const {
  RowMatrix m(steps, joints);
  for (Index t = 0; t < steps; ++t) {
    for (Index j = 0; j < joints; ++j) m(t, j) = diff(t, j, c);
  }
  return m;
}

MotionField motion_diff(const PoseSequence& pose) {
  validate(pose);
  MotionField m;
  m.steps = pose.frames - 1;
  m.joints = pose.joints;
  m.coords = pose.coords;
  const Index stride = pose.joints * pose.coords;
  m.diffs = pose.data.segment(stride, m.steps * stride) - pose.data.head(m.steps * stride);
  m.magnitude.resize(m.steps, m.joints);
  for (Index t = 0; t < m.steps; ++t) {
    for (Index j = 0; j < m.joints; ++j) {
      m.magnitude(t, j) = m.diffs.segment((t * m.joints + j) * m.coords, m.coords).matrix().norm();
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark

std::vector<Index> synth_beat_frames(double tempo_bpm, double fps, Index frames) {
  if (!(tempo_bpm > 0.0)) throw ConfigError("tempo must be positive");
  const double period = 60.0 * fps / tempo_bpm;
  if (period < 2.0) {
    throw ConfigError("tempo " + format_real(tempo_bpm) + " BPM leaves fewer than 2 frames per beat");
  }
  std::vector<Index> beats;
  // Reversal at b + 0.5 zeroes motion step b; steps 0 and T-2 are boundaries.
  for (Index k = 0;; ++k) {
    const Index b = std::max<Index>(1, std::lround(period / 2.0 + static_cast<double>(k) * period));
    if (b > frames - 3) break;
    if (beats.empty() || b > beats.back()) beats.push_back(b);
  }
  return beats;
}

namespace {

/// Piecewise-linear swing phase with theta(b_k + 0.5) = k * pi.
double swing_phase(double f, const std::vector<Index>& beats, double period) {
  if (beats.empty()) return std::numbers::pi * (f - period / 2.0 - 0.5) / period;
  const auto n = beats.size();
  auto reversal = [&](std::size_t k) { return static_cast<double>(beats[k]) + 0.5; };
  if (f <= reversal(0)) {
    const double span = n > 1 ? reversal(1) - reversal(0) : period;
    return std::numbers::pi * (f - reversal(0)) / span;
  }
  if (f >= reversal(n - 1)) {
    const double span = n > 1 ? reversal(n - 1) - reversal(n - 2) : period;
    return std::numbers::pi * (static_cast<double>(n - 1) + (f - reversal(n - 1)) / span);
  }
  const auto it = std::upper_bound(beats.begin(), beats.end(), f - 0.5,
                                   [](double v, Index b) { return v < static_cast<double>(b); });
  const std::size_t k = static_cast<std::size_t>(it - beats.begin()) - 1;
  const double u = (f - reversal(k)) / (reversal(k + 1) - reversal(k));
  return std::numbers::pi * (static_cast<double>(k) + u);
}

}  // namespace

std::pair<PoseSequence, BeatGrid> synth_dance(const SynthDanceConfig& cfg) {
  if (!(cfg.tempo_bpm > 0.0)) throw ConfigError("synth_dance: tempo must be positive");
  if (!(cfg.fps > 0.0)) throw ConfigError("synth_dance: fps must be positive");
  const Index frames = std::lround(cfg.duration_s * cfg.fps);
  if (frames < 2) throw ConfigError("synth_dance: duration * fps must cover at least 2 frames");
  if (cfg.joints < 1 || cfg.beat_joints < 0 || cfg.beat_joints > cfg.joints) {
    throw ConfigError("synth_dance: need 0 <= beat_joints <= joints and joints >= 1");
  }
  if (cfg.coords != 2 && cfg.coords != 3) throw ConfigError("synth_dance: coords must be 2 or 3");
  if (cfg.noise_std < 0.0) throw ConfigError("synth_dance: noise_std must be nonnegative");

  const double period = 60.0 * cfg.fps / cfg.tempo_bpm;
  BeatGrid grid{synth_beat_frames(cfg.tempo_bpm, cfg.fps, frames), frames, cfg.fps};

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct JointMotion {
    Eigen::Vector3d base, direction;
    double amplitude;
  };
  std::vector<JointMotion> motion(static_cast<std::size_t>(cfg.joints));
  for (Index j = 0; j < cfg.joints; ++j) {
    auto& m = motion[static_cast<std::size_t>(j)];
    m.base = Eigen::Vector3d(0.3 + 0.4 * unit(rng), 0.3 + 0.4 * unit(rng), 0.3 + 0.4 * unit(rng));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    m.direction = Eigen::Vector3d(std::cos(angle), std::sin(angle), 0.0);
    m.amplitude = cfg.amplitude * (0.5 + 0.5 * unit(rng));
  }

  PoseSequence pose{frames, cfg.joints, cfg.coords, cfg.fps, Array::Zero(frames * cfg.joints * cfg.coords)};
  std::normal_distribution<double> jitter(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);
  for (Index t = 0; t < frames; ++t) {
    const double theta = swing_phase(static_cast<double>(t), grid.beat_frames, period);
    for (Index j = 0; j < cfg.joints; ++j) {
      const auto& m = motion[static_cast<std::size_t>(j)];
      Eigen::Vector3d p = m.base;
      if (j < cfg.beat_joints) {
        p += m.amplitude * std::cos(theta) * m.direction;
      } else {
        // Constant-velocity drift: speed stays flat so beat minima are untouched.
        p += 0.1 * m.amplitude / period * static_cast<double>(t) * m.direction;
      }
      for (Index c = 0; c < cfg.coords; ++c) {
        pose.at(t, j, c) = p[c] + (cfg.noise_std > 0.0 ? jitter(rng) : 0.0);
      }
    }
  }
  return {std::move(pose), std::move(grid)};
}

Index latent_index(Index frame, Index timeline_len, Index latent_len) {
  const double pos = static_cast<double>(frame) * static_cast<double>(latent_len) /
                     static_cast<double>(timeline_len);
  return std::min<Index>(latent_len - 1, std::lround(pos));
}

MusicLatent synth_latent(const BeatGrid& beats, Index latent_len, Index dim, std::uint64_t seed,
                         const SynthLatentConfig& config) {
  if (latent_len < 1 || dim < 1) throw ConfigError("synth_latent: T_m and d must be >= 1");
  validate(beats);
  std::vector<Index> centers;
  for (Index f : beats.beat_frames) {
    const Index i = latent_index(f, beats.timeline_len, latent_len);
    if (centers.empty() || centers.back() != i) centers.push_back(i);
  }
  MusicLatent z{RowMatrix::Zero(latent_len, dim)};
  const double two_var = 2.0 * config.pulse_width * config.pulse_width;
  for (Index i = 0; i < latent_len; ++i) {
    double v = 0.0;
    for (Index c : centers) {
      const double d = static_cast<double>(i - c);
      v = std::max(v, std::exp(-d * d / two_var));
    }
    z.data(i, 0) = v;
  }
  if (dim > 1) {
    Rng rng(seed);
    z.data.rightCols(dim - 1) = normal_matrix(latent_len, dim - 1, config.noise_std, rng);
  }
  return z;
}

ConditioningFeatures synth_conditioning(Index length, Index dim, std::uint64_t seed) {
  if (length < 1 || dim < 1) throw ConfigError("synth_conditioning: T_v and D_v must be >= 1");
  Rng rng(seed);
  return {normal_matrix(length, dim, 1.0, rng)};
}

// ---------------------------------------------------------------------------
// Text formats

PoseSequence parse_pose_sequence(std::istream& in, std::optional<double> fps) {
  LineReader r(in, "pose");
  std::vector<std::string> tok;
  if (!r.next(tok)) r.fail("empty file");
  if (tok.size() != 4) r.fail("header must be 'T J C fps'");
  PoseSequence p;
  p.frames = r.count(tok[0]);
  p.joints = r.count(tok[1]);
  p.coords = r.count(tok[2]);
  p.fps = r.real(tok[3]);
  if (fps) p.fps = *fps;
  if (p.frames < 2) r.fail("need at least 2 frames, header says " + std::to_string(p.frames));
  if (p.joints < 1) r.fail("need at least 1 joint");
  if (p.coords != 2 && p.coords != 3) r.fail("C must be 2 or 3");
  if (!(p.fps > 0.0)) r.fail("fps must be positive");
  const Index width = p.joints * p.coords;
  p.data.resize(p.frames * width);
  for (Index t = 0; t < p.frames; ++t) {
    if (!r.next(tok)) r.fail("expected " + std::to_string(p.frames) + " frames, found " + std::to_string(t));
    if (static_cast<Index>(tok.size()) != width) {
      r.fail("frame " + std::to_string(t) + " has " + std::to_string(tok.size()) + " values, expected " +
             std::to_string(width) + " (" + std::to_string(p.joints) + " joints x " +
             std::to_string(p.coords) + " coords)");
    }
    for (Index k = 0; k < width; ++k) p.data[t * width + k] = r.real(tok[k]);
  }
  while (r.next(tok)) {
    if (!tok.empty()) r.fail("more frames than the header declares");
  }
  return p;
}

PoseSequence load_pose_sequence(const std::filesystem::path& path, std::optional<double> fps) {
  auto in = open_in(path);
  try {
    return parse_pose_sequence(in, fps);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_pose_sequence(const PoseSequence& pose, const std::filesystem::path& path) {
  validate(pose);
  auto out = open_out(path);
  out << pose.frames << ' ' << pose.joints << ' ' << pose.coords << ' ' << format_real(pose.fps) << '\n';
  const Index width = pose.joints * pose.coords;
  for (Index t = 0; t < pose.frames; ++t) {
    for (Index k = 0; k < width; ++k) out << (k ? " " : "") << format_real(pose.data[t * width + k]);
    out << '\n';
  }
}

ConditioningFeatures parse_conditioning(std::istream& in) {
  LineReader r(in, "conditioning");
  std::vector<std::string> tok;
  if (!r.next(tok) || tok.size() != 2) r.fail("header must be 'T_v D_v'");
  const Index rows = r.count(tok[0]), cols = r.count(tok[1]);
  if (rows < 1 || cols < 1) r.fail("dimensions must be positive");
  return {parse_table(r, rows, cols)};
}

ConditioningFeatures load_conditioning(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return parse_conditioning(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_conditioning(const ConditioningFeatures& cond, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << cond.data.rows() << ' ' << cond.data.cols() << '\n';
  write_rows(out, cond.data);
}

BeatGrid parse_beat_grid(std::istream& in) {
  LineReader r(in, "beats");
  std::vector<std::string> tok;
  if (!r.next(tok) || tok.size() != 2) r.fail("header must be 'timeline_len fps'");
  BeatGrid g;
  g.timeline_len = r.count(tok[0]);
  g.fps = r.real(tok[1]);
  if (r.next(tok)) {
    for (const auto& t : tok) g.beat_frames.push_back(r.count(t));
  }
  try {
    validate(g);
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  return g;
}

BeatGrid load_beat_grid(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return parse_beat_grid(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_beat_grid(const BeatGrid& grid, const std::filesystem::path& path) {
  validate(grid);
  auto out = open_out(path);
  out << grid.timeline_len << ' ' << format_real(grid.fps) << '\n';
  for (std::size_t i = 0; i < grid.beat_frames.size(); ++i) out << (i ? " " : "") << grid.beat_frames[i];
  out << '\n';
}

MusicLatent parse_latent(std::istream& in) {
  LineReader r(in, "latent");
  std::vector<std::string> tok;
  if (!r.next(tok) || tok.size() != 2) r.fail("header must be 'T_m d'");
  const Index rows = r.count(tok[0]), cols = r.count(tok[1]);
  if (rows < 1 || cols < 1) r.fail("dimensions must be positive");
  return {parse_table(r, rows, cols)};
}

MusicLatent load_latent(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return parse_latent(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_latent(const MusicLatent& latent, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << latent.data.rows() << ' ' << latent.data.cols() << '\n';
  write_rows(out, latent.data);
}

void save_feature_table(const RowMatrix& m, double fps, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << m.rows() << ' ' << m.cols() << ' ' << format_real(fps) << '\n';
  write_rows(out, m);
}

std::pair<RowMatrix, double> load_feature_table(const std::filesystem::path& path) {
  auto in = open_in(path);
  LineReader r(in, path.string());
  std::vector<std::string> tok;
  if (!r.next(tok) || tok.size() != 3) r.fail("header must be 'T D fps'");
  const Index rows = r.count(tok[0]), cols = r.count(tok[1]);
  const double fps = r.real(tok[2]);
  if (rows < 1 || cols < 1) r.fail("dimensions must be positive");
  return {parse_table(r, rows, cols), fps};
}

}  // namespace gaca
