#include "gaca/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace gaca {

namespace {

struct Field {
  std::string key;
  std::string note;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config: " + key + " expects a real number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + " expects true|false, got '" + v + "'");
}

template <typename Get>
Field real_field(std::string key, std::string note, Get get) {
  return {key, std::move(note),
          [get](const RunConfig& c) { return format_real(get(const_cast<RunConfig&>(c))); },
          [get, key](RunConfig& c, const std::string& v) { get(c) = to_real(key, v); }};
}

template <typename Get>
Field int_field(std::string key, std::string note, Get get) {
  return {key, std::move(note),
          [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); },
          [get, key](RunConfig& c, const std::string& v) { get(c) = static_cast<Index>(to_int(key, v)); }};
}

#define GACA_REAL(key, member, note) \
  real_field(key, note, [](RunConfig& c) -> double& { return c.member; })
#define GACA_INT(key, member, note) \
  int_field(key, note, [](RunConfig& c) -> Index& { return c.member; })

const std::string kPublished = "published value";
const std::string kDesk = "desk-scale default";

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      GACA_REAL("tempo_min", tempo_min, kDesk),
      GACA_REAL("tempo_max", tempo_max, kDesk),
      GACA_REAL("duration_s", duration_s, "published clip length (5 s)"),
      GACA_REAL("fps", fps, kDesk),
      GACA_INT("joints", joints, kDesk),
      GACA_INT("beat_joints", beat_joints, kDesk),
      GACA_REAL("amplitude", amplitude, kDesk),
      GACA_REAL("noise_std", noise_std, kDesk),
      GACA_INT("cond_len", cond_len, kDesk),
      GACA_INT("cond_dim", cond_dim, kDesk),
      GACA_INT("latent_len", latent_len, kDesk),
      GACA_INT("latent_dim", latent_dim, kDesk),
      GACA_REAL("latent_noise", latent_noise, kDesk),
      GACA_REAL("pulse_width", pulse_width, kDesk),
      GACA_INT("scales", scales, kDesk),
      GACA_REAL("base_period", base_period, kDesk),
      GACA_INT("bins", bins, kDesk),
      GACA_INT("rhythm_dim", rhythm_dim, kDesk),
      GACA_INT("weight_hidden", weight_hidden, kDesk),
      GACA_INT("attn_hidden", attn_hidden, kDesk),
      {"rhythm", kDesk, [](const RunConfig& c) { return to_string(c.rhythm); },
       [](RunConfig& c, const std::string& v) { c.rhythm = parse_rhythm_source(v); }},
      {"alignment", kDesk, [](const RunConfig& c) { return to_string(c.alignment); },
       [](RunConfig& c, const std::string& v) { c.alignment = parse_alignment(v); }},
      {"use_features", kDesk, [](const RunConfig& c) { return std::string(c.use_features ? "true" : "false"); },
       [](RunConfig& c, const std::string& v) { c.use_features = to_bool("use_features", v); }},
      GACA_INT("blocks", blocks, "desk-scale default (published: 8)"),
      GACA_INT("hidden", hidden, "desk-scale default (published: 512)"),
      GACA_INT("heads", heads, "desk-scale default (published: 10)"),
      GACA_INT("ffn_mult", ffn_mult, kDesk),
      GACA_INT("batch_size", train.batch_size, kPublished),
      GACA_INT("epochs", train.epochs, "desk-scale default (published: 100)"),
      GACA_REAL("learning_rate", train.learning_rate, "desk-scale default (published: 1e-4)"),
      GACA_REAL("adam_beta1", train.adam_beta1, kPublished),
      GACA_REAL("adam_beta2", train.adam_beta2, kPublished),
      GACA_REAL("cond_drop_prob", train.cond_drop_prob, kDesk),
      GACA_INT("draws_per_clip", train.draws_per_clip, "desk-scale default (published setup: 1)"),
      GACA_REAL("clip_norm", train.clip_norm, kDesk),
      GACA_INT("sample_steps", sample.steps, kPublished),
      GACA_REAL("cfg_scale", sample.cfg_scale, kPublished),
      GACA_INT("window_frames", window_frames, kDesk),
      GACA_REAL("smooth_sigma", smooth_sigma, kDesk),
      GACA_INT("min_separation", min_separation, kDesk),
      GACA_REAL("rel_threshold", rel_threshold, kDesk),
      {"seed", kDesk, [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& v) { c.seed = to_seed("seed", v); }},
      GACA_INT("jobs", jobs, kDesk),
  };
  return table;
}

#undef GACA_REAL
#undef GACA_INT

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.gare = {scales, base_period, bins, rhythm_dim, weight_hidden, attn_hidden};
  m.field.blocks = blocks;
  m.field.hidden = hidden;
  m.field.heads = heads;
  m.field.ffn_mult = ffn_mult;
  m.field.latent_len = latent_len;
  m.field.latent_dim = latent_dim;
  m.field.rhythm_dim = rhythm_dim;
  m.field.cond_dim = cond_dim;
  m.rhythm = rhythm;
  m.alignment = alignment;
  m.use_features = use_features;
  m.joints = joints;
  return m;
}

Index RunConfig::latent_window() const {
  return std::max<Index>(1, std::lround(static_cast<double>(window_frames) * latent_fps() / fps));
}

void validate(const RunConfig& c) {
  if (!(c.tempo_min > 0.0 && c.tempo_max >= c.tempo_min)) {
    throw ConfigError("config: need 0 < tempo_min <= tempo_max");
  }
  if (!(c.duration_s > 0.0 && c.fps > 0.0)) throw ConfigError("config: duration_s and fps must be positive");
  if (std::lround(c.duration_s * c.fps) < 3) throw ConfigError("config: clips need at least 3 frames");
  if (c.beat_joints < 0 || c.beat_joints > c.joints) throw ConfigError("config: need 0 <= beat_joints <= joints");
  if (c.amplitude < 0.0 || c.noise_std < 0.0 || c.latent_noise < 0.0 || !(c.pulse_width > 0.0)) {
    throw ConfigError("config: amplitude, noise levels must be >= 0 and pulse_width > 0");
  }
  if (c.cond_len < 1) throw ConfigError("config: cond_len must be >= 1");
  if (c.latent_len > std::lround(c.duration_s * c.fps)) {
    throw ConfigError("config: latent_len exceeds the pose frame count");
  }
  validate(c.model_config());
  validate(c.train);
  validate(c.sample);
  if (c.window_frames < 0 || c.min_separation < 1 || c.smooth_sigma < 0.0) {
    throw ConfigError("config: window_frames >= 0, min_separation >= 1, smooth_sigma >= 0 required");
  }
  if (!(c.rel_threshold > 0.0 && c.rel_threshold <= 1.0)) {
    throw ConfigError("config: rel_threshold must lie in (0, 1]");
  }
  if (c.jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_run_config(std::istream& in, RunConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    }
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  validate(base);
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_run_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

std::string describe(const RunConfig& config) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << '=' << f.get(config) << "  # " << f.note << '\n';
  return os.str();
}

}  // namespace gaca
