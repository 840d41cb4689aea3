#include "gaca/benchmark.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gaca/parallel.hpp"

namespace gaca {

namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t z = master ^ (stream * 0x9E3779B97F4A7C15ULL) ^ (index * 0xD1B54A32D192ED03ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::string clip_id(Index i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%03ld", static_cast<long>(i));
  return buf;
}

std::string two_decimals(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace

std::vector<BenchmarkClip> synth_benchmark(const RunConfig& config, Index clips, std::uint64_t master_seed) {
  validate(config);
  if (clips < 1) throw ConfigError("synth: need at least one clip");
  Rng tempo_rng(derive_seed(master_seed, seed_stream::tempo, 0));
  std::uniform_real_distribution<double> tempo(config.tempo_min, config.tempo_max);
  std::vector<BenchmarkClip> out;
  for (Index i = 0; i < clips; ++i) {
    BenchmarkClip c;
    c.id = clip_id(i);
    c.tempo_bpm = config.tempo_min == config.tempo_max ? config.tempo_min : tempo(tempo_rng);
    c.seed = derive_seed(master_seed, seed_stream::dance, static_cast<std::uint64_t>(i));
    SynthDanceConfig dance;
    dance.tempo_bpm = c.tempo_bpm;
    dance.duration_s = config.duration_s;
    dance.fps = config.fps;
    dance.joints = config.joints;
    dance.beat_joints = config.beat_joints;
    dance.amplitude = config.amplitude;
    dance.noise_std = config.noise_std;
    dance.seed = c.seed;
    auto [pose, beats] = synth_dance(dance);
    c.pose = std::move(pose);
    c.beats = std::move(beats);
    c.latent = synth_latent(c.beats, config.latent_len, config.latent_dim,
                            derive_seed(c.seed, seed_stream::latent, 0),
                            {config.pulse_width, config.latent_noise});
    c.features = synth_conditioning(config.cond_len, config.cond_dim,
                                    derive_seed(c.seed, seed_stream::features, 0));
    out.push_back(std::move(c));
  }
  return out;
}

void write_benchmark(const std::vector<BenchmarkClip>& clips, const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw IoError("output directory '" + dir.string() + "' is not empty (use --force)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) throw IoError("cannot write manifest in '" + dir.string() + "'");
  manifest << "# id tempo_bpm seed\n";
  for (const auto& c : clips) {
    save_pose_sequence(c.pose, dir / (c.id + ".pose"));
    save_latent(c.latent, dir / (c.id + ".latent"));
    save_beat_grid(c.beats, dir / (c.id + ".beats"));
    save_conditioning(c.features, dir / (c.id + ".cond"));
    manifest << c.id << ' ' << format_real(c.tempo_bpm) << ' ' << c.seed << '\n';
  }
}

std::vector<BenchmarkClip> load_benchmark(const fs::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("no manifest.txt in '" + dir.string() + "'");
  std::vector<BenchmarkClip> out;
  std::string line;
  int number = 0;
  while (std::getline(manifest, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    BenchmarkClip c;
    std::string tempo;
    if (!(ss >> c.id >> tempo >> c.seed)) {
      throw ParseError((dir / "manifest.txt").string() + ": line " + std::to_string(number) +
                       ": expected 'id tempo_bpm seed'");
    }
    c.tempo_bpm = std::stod(tempo);
    c.pose = load_pose_sequence(dir / (c.id + ".pose"));
    c.latent = load_latent(dir / (c.id + ".latent"));
    c.beats = load_beat_grid(dir / (c.id + ".beats"));
    c.features = load_conditioning(dir / (c.id + ".cond"));
    if (c.beats.timeline_len != c.pose.frames) {
      throw ConfigError(c.id + ": beat timeline " + std::to_string(c.beats.timeline_len) +
                        " differs from pose frame count " + std::to_string(c.pose.frames));
    }
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (out.empty()) throw ConfigError("benchmark '" + dir.string() + "' lists no clips");
  return out;
}

std::vector<ClipData> prepare_clips(const std::vector<BenchmarkClip>& clips, const WaveletBank& bank,
                                    Index jobs) {
  std::vector<ClipData> out(clips.size());
  parallel_for(clips.size(), static_cast<std::size_t>(jobs), [&](std::size_t i) {
    out[i] = prepare_clip(clips[i].id, clips[i].pose, clips[i].features, clips[i].latent, bank);
  });
  return out;
}

BeatGrid latent_beat_grid(const BeatGrid& beats, const RunConfig& config) {
  BeatGrid g{{}, config.latent_len, config.latent_fps()};
  for (Index f : beats.beat_frames) {
    const Index i = latent_index(f, beats.timeline_len, config.latent_len);
    if (g.beat_frames.empty() || g.beat_frames.back() != i) g.beat_frames.push_back(i);
  }
  return g;
}

std::vector<ClipEvaluation> evaluate_latents(const std::vector<BenchmarkClip>& clips,
                                             const std::vector<MusicLatent>& generated,
                                             const RunConfig& config) {
  if (clips.size() != generated.size()) {
    throw ConfigError("evaluate: " + std::to_string(generated.size()) + " generated latents for " +
                      std::to_string(clips.size()) + " clips");
  }
  std::vector<ClipEvaluation> out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (generated[i].length() != config.latent_len) {
      throw ConfigError("evaluate: generated latent for " + clips[i].id + " has length " +
                        std::to_string(generated[i].length()) + ", expected " +
                        std::to_string(config.latent_len));
    }
    const BeatGrid detected = detect_latent_beats(generated[i], config.latent_fps(), config.rel_threshold);
    out.push_back({clips[i].id, beat_scores(detected, latent_beat_grid(clips[i].beats, config),
                                            config.latent_window())});
  }
  return out;
}

ScoreAggregate aggregate(const std::vector<ClipEvaluation>& evals) {
  std::vector<BeatScores> s;
  for (const auto& e : evals) s.push_back(e.scores);
  return aggregate(s);
}

std::string format_aggregate_row(const std::string& label, const ScoreAggregate& a) {
  std::ostringstream os;
  os << std::left << std::setw(28) << label << std::right << std::setw(8) << two_decimals(a.mean_bcs)
     << std::setw(8) << two_decimals(a.csd) << std::setw(8) << two_decimals(a.mean_bhs) << std::setw(8)
     << two_decimals(a.hsd) << std::setw(8) << two_decimals(a.mean_f1) << '\n';
  return os.str();
}

std::string format_report(const std::vector<ClipEvaluation>& evals) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "clip" << std::right << std::setw(5) << "B_g" << std::setw(5) << "B_t"
     << std::setw(5) << "B_a" << std::setw(9) << "BCS" << std::setw(9) << "BHS" << std::setw(9) << "F1" << '\n';
  for (const auto& e : evals) {
    os << std::left << std::setw(12) << e.id << std::right << std::setw(5) << e.scores.generated
       << std::setw(5) << e.scores.truth << std::setw(5) << e.scores.aligned << std::setw(9)
       << two_decimals(e.scores.bcs) << std::setw(9) << two_decimals(e.scores.bhs) << std::setw(9)
       << two_decimals(e.scores.f1) << '\n';
  }
  os << '\n'
     << std::left << std::setw(28) << "aggregate" << std::right << std::setw(8) << "BCS" << std::setw(8)
     << "CSD" << std::setw(8) << "BHS" << std::setw(8) << "HSD" << std::setw(8) << "F1" << '\n';
  os << format_aggregate_row("all clips (n=" + std::to_string(evals.size()) + ")", aggregate(evals));
  return os.str();
}

std::string format_report_csv(const std::vector<ClipEvaluation>& evals) {
  std::ostringstream os;
  os << "clip,generated_beats,truth_beats,aligned_beats,bcs,bhs,f1\n";
  for (const auto& e : evals) {
    os << e.id << ',' << e.scores.generated << ',' << e.scores.truth << ',' << e.scores.aligned << ','
       << two_decimals(e.scores.bcs) << ',' << two_decimals(e.scores.bhs) << ',' << two_decimals(e.scores.f1)
       << '\n';
  }
  return os.str();
}

std::vector<MusicLatent> generate_all(const GacaModel& model, const std::vector<ClipData>& clips,
                                      const RunConfig& config, GenerationMode mode) {
  std::vector<MusicLatent> out(clips.size());
  parallel_for(clips.size(), static_cast<std::size_t>(config.jobs), [&](std::size_t i) {
    SampleConfig sc = config.sample;
    sc.seed = derive_seed(config.seed, seed_stream::sample, static_cast<std::uint64_t>(i));
    out[i] = generate(model, clips[i], sc, mode);
  });
  return out;
}

GacaModel train_model(const RunConfig& config, const std::vector<ClipData>& train_clips, TrainResult* history) {
  GacaModel model = init_model(config.model_config(), derive_seed(config.seed, seed_stream::init, 0));
  TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, seed_stream::train, 0);
  tc.jobs = config.jobs;
  TrainResult r = train(model, train_clips, tc);
  if (history) *history = std::move(r);
  return model;
}

AblationReport run_ablation(const RunConfig& config, const std::vector<BenchmarkClip>& train_clips,
                            const std::vector<BenchmarkClip>& eval_clips) {
  const WaveletBank bank = build_wavelet_bank(config.scales, config.base_period);
  const auto train_data = prepare_clips(train_clips, bank, config.jobs);
  const auto eval_data = prepare_clips(eval_clips, bank, config.jobs);

  auto run = [&](RhythmSource source, Alignment alignment, GenerationMode mode, GacaModel* keep) {
    RunConfig variant = config;
    variant.rhythm = source;
    variant.alignment = alignment;
    GacaModel model = train_model(variant, train_data);
    const auto evals = evaluate_latents(eval_clips, generate_all(model, eval_data, variant, mode), variant);
    if (keep) *keep = std::move(model);
    return aggregate(evals);
  };

  AblationReport report;
  GacaModel full;
  const ScoreAggregate full_scores = run(RhythmSource::gare, Alignment::cata, GenerationMode::guided, &full);
  const RunConfig full_config = [&] {
    RunConfig c = config;
    c.rhythm = RhythmSource::gare;
    c.alignment = Alignment::cata;
    return c;
  }();
  const ScoreAggregate uncond = aggregate(evaluate_latents(
      eval_clips, generate_all(full, eval_data, full_config, GenerationMode::unconditional), full_config));

  report.components.push_back({"unconditional", uncond});
  report.components.push_back(
      {"conditioning only", run(RhythmSource::none, Alignment::cata, GenerationMode::guided, nullptr)});
  report.components.push_back(
      {"+ GARE", run(RhythmSource::gare, Alignment::mean_pool, GenerationMode::guided, nullptr)});
  report.components.push_back({"+ GARE + CATA", full_scores});

  report.features.push_back(
      {"global motion feature", run(RhythmSource::global_motion, Alignment::cata, GenerationMode::guided, nullptr)});
  report.features.push_back(
      {"binarized difference", run(RhythmSource::binary_diff, Alignment::cata, GenerationMode::guided, nullptr)});
  report.features.push_back({"GARE", full_scores});
  return report;
}

std::string format_ablation(const AblationReport& report) {
  std::ostringstream os;
  const auto header = [&](const std::string& title) {
    os << title << '\n'
       << std::left << std::setw(28) << "method" << std::right << std::setw(8) << "BCS" << std::setw(8) << "CSD"
       << std::setw(8) << "BHS" << std::setw(8) << "HSD" << std::setw(8) << "F1" << '\n';
  };
  header("component ablation");
  for (const auto& r : report.components) os << format_aggregate_row(r.label, r.scores);
  os << '\n';
  header("rhythm feature ablation");
  for (const auto& r : report.features) os << format_aggregate_row(r.label, r.scores);
  return os.str();
}

}  // namespace gaca
