// gaca: synthesize benchmarks, extract and align rhythm, train, generate, evaluate.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gaca/benchmark.hpp"
#include "gaca/checkpoint.hpp"
#include "gaca/clicktrack.hpp"
#include "gaca/config.hpp"
#include "gaca/errors.hpp"

namespace fs = std::filesystem;
using namespace gaca;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<Index> jobs;
  bool force = false;
  bool print_config = false;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  validate(c);
  return c;
}

// Run log: config echo, seed and wall time, plus command-specific lines.
class RunLog {
 public:
  RunLog(std::string command, const RunConfig& config) : command_(std::move(command)), config_(config) {}

  void note(const std::string& line) { notes_ << line << '\n'; }

  void write(const fs::path& path) const {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write run log '" + path.string() + "'");
    os << "command=" << command_ << '\n' << "seed=" << config_.seed << '\n';
    for (const auto& [k, v] : config_entries(config_)) os << "config." << k << '=' << v << '\n';
    os << notes_.str();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", secs);
    os << "wall_time_s=" << buf << '\n';
  }

 private:
  std::string command_;
  RunConfig config_;
  std::ostringstream notes_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!force) throw IoError("output directory '" + dir.string() + "' is not empty (use --force)");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << text;
}

// Model from a checkpoint, or freshly initialized from the config when no checkpoint is given.
LoadedModel model_for(const std::string& checkpoint, const RunConfig& config) {
  if (!checkpoint.empty()) return load_model(checkpoint);
  return {config, init_model(config.model_config(), derive_seed(config.seed, seed_stream::init, 0))};
}

void check_compatible(const RunConfig& model_config, const std::vector<BenchmarkClip>& clips) {
  for (const auto& c : clips) {
    if (c.pose.joints != model_config.joints) {
      throw ConfigError(c.id + ".pose: joints=" + std::to_string(c.pose.joints) + ", model expects " +
                        std::to_string(model_config.joints));
    }
    if (c.latent.length() != model_config.latent_len || c.latent.dim() != model_config.latent_dim) {
      throw ConfigError(c.id + ".latent: shape " + std::to_string(c.latent.length()) + "x" +
                        std::to_string(c.latent.dim()) + ", model expects latent_len=" +
                        std::to_string(model_config.latent_len) + " latent_dim=" +
                        std::to_string(model_config.latent_dim));
    }
    if (c.features.data.cols() != model_config.cond_dim) {
      throw ConfigError(c.id + ".cond: dim " + std::to_string(c.features.data.cols()) +
                        ", model expects cond_dim=" + std::to_string(model_config.cond_dim));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaca: rhythm-conditioned dance-to-music latent generation"};
  Globals g;
  app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides config)");
  app.add_option("--jobs", g.jobs, "parallel clip workers (overrides config)");
  app.add_flag("--force", g.force, "overwrite non-empty output directories");
  app.add_flag("--print-config", g.print_config, "print the resolved config with provenance notes and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string out, bench, model_path, generated, train_bench;
  Index clips = 16;
  bool unconditional = false, clicks = false, ablation = false;

  auto* synth = app.add_subcommand("synth", "write a synthetic dance/music benchmark");
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--clips", clips, "number of clips")->check(CLI::PositiveNumber);

  auto* extract = app.add_subcommand("extract", "rhythm embedding per clip");
  auto* align_cmd = app.add_subcommand("align", "latent-timeline rhythm per clip");
  for (auto* cmd : {extract, align_cmd}) {
    cmd->add_option("--benchmark", bench, "benchmark directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--model", model_path, "checkpoint prefix (default: config-seeded initialization)");
    cmd->add_option("--out", out, "output directory")->required();
  }

  auto* train_cmd = app.add_subcommand("train", "train the generator on a benchmark");
  train_cmd->add_option("--benchmark", bench, "benchmark directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", out, "checkpoint prefix")->required();

  auto* gen_cmd = app.add_subcommand("generate", "sample music latents for every clip");
  gen_cmd->add_option("--benchmark", bench, "benchmark directory")->required()->check(CLI::ExistingDirectory);
  gen_cmd->add_option("--model", model_path, "checkpoint prefix")->required();
  gen_cmd->add_option("--out", out, "output directory")->required();
  gen_cmd->add_flag("--unconditional", unconditional, "null conditions only");
  gen_cmd->add_flag("--clicks", clicks, "also render detected beats as a click-track WAV");

  auto* eval_cmd = app.add_subcommand("evaluate", "beat-alignment scores of generated latents");
  eval_cmd->add_option("--benchmark", bench, "benchmark with ground-truth beats")
      ->required()
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--generated", generated, "directory of <clip>.latent files")
      ->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--out", out, "report directory")->required();
  eval_cmd->add_flag("--ablation", ablation, "train and compare model variants");
  eval_cmd->add_option("--train", train_bench, "training benchmark for --ablation")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const RunConfig config = resolve_config(g);
    if (g.print_config) {
      std::cout << describe(config);
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }

    if (synth->parsed()) {
      RunLog log("synth", config);
      const auto set = synth_benchmark(config, clips, config.seed);
      write_benchmark(set, out, g.force);
      log.note("clips=" + std::to_string(set.size()));
      log.write(fs::path(out) / "run.log");
      std::cout << "wrote " << set.size() << " clips to " << out << '\n';
    } else if (extract->parsed() || align_cmd->parsed()) {
      const bool aligning = align_cmd->parsed();
      RunLog log(aligning ? "align" : "extract", config);
      const auto set = load_benchmark(bench);
      const LoadedModel lm = model_for(model_path, config);
      check_compatible(lm.config, set);
      if (lm.model.config.rhythm == RhythmSource::none) throw ConfigError("model has no rhythm source");
      const auto data = prepare_clips(set, lm.model.bank, config.jobs);
      prepare_output_dir(out, g.force);
      for (const auto& clip : data) {
        if (aligning) {
          save_feature_table(aligned_rhythm(lm.model, clip).matrix(), lm.config.latent_fps(),
                             fs::path(out) / (clip.id + ".aligned"));
        } else {
          const RhythmEmbedding r = rhythm_embedding(lm.model, clip);
          save_feature_table(r.data.matrix(), r.fps, fs::path(out) / (clip.id + ".rhythm"));
        }
      }
      log.note("model=" + (model_path.empty() ? std::string("init") : model_path));
      log.note("clips=" + std::to_string(data.size()));
      log.write(fs::path(out) / "run.log");
      std::cout << "wrote " << data.size() << (aligning ? " aligned rhythms" : " rhythm embeddings") << " to "
                << out << '\n';
    } else if (train_cmd->parsed()) {
      RunLog log("train", config);
      const auto set = load_benchmark(bench);
      check_compatible(config, set);
      const WaveletBank bank = build_wavelet_bank(config.scales, config.base_period);
      const auto data = prepare_clips(set, bank, config.jobs);
      TrainResult history;
      const GacaModel model = train_model(config, data, &history);
      const fs::path prefix(out);
      if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
      save_model(model, config, prefix);
      std::ostringstream losses;
      losses << "epoch,loss\n";
      for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
        losses << e + 1 << ',' << format_real(history.epoch_loss[e]) << '\n';
        log.note("epoch_loss." + std::to_string(e + 1) + '=' + format_real(history.epoch_loss[e]));
      }
      write_text(prefix.string() + ".loss.csv", losses.str());
      log.write(prefix.string() + ".log");
      std::cout << "trained " << history.epoch_loss.size() << " epochs, final loss "
                << format_real(history.epoch_loss.back()) << "; checkpoint " << manifest_path(prefix).string()
                << '\n';
    } else if (gen_cmd->parsed()) {
      LoadedModel lm = load_model(model_path);
      lm.config.seed = config.seed;
      lm.config.jobs = config.jobs;
      lm.config.sample = config.sample;
      RunLog log("generate", lm.config);
      const auto set = load_benchmark(bench);
      check_compatible(lm.config, set);
      const auto data = prepare_clips(set, lm.model.bank, config.jobs);
      const auto latents = generate_all(lm.model, data, lm.config,
                                        unconditional ? GenerationMode::unconditional : GenerationMode::guided);
      prepare_output_dir(out, g.force);
      for (std::size_t i = 0; i < latents.size(); ++i) {
        save_latent(latents[i], fs::path(out) / (set[i].id + ".latent"));
        if (clicks) {
          const BeatGrid beats = detect_latent_beats(latents[i], lm.config.latent_fps(), config.rel_threshold);
          write_wav(render_clicks(beats, lm.config.duration_s), fs::path(out) / (set[i].id + ".wav"));
        }
      }
      log.note("model=" + model_path);
      log.note(std::string("mode=") + (unconditional ? "unconditional" : "guided"));
      log.write(fs::path(out) / "run.log");
      std::cout << "wrote " << latents.size() << " latents to " << out << '\n';
    } else if (eval_cmd->parsed()) {
      RunLog log("evaluate", config);
      const auto set = load_benchmark(bench);
      if (ablation) {
        if (train_bench.empty()) throw ConfigError("evaluate --ablation needs --train <benchmark dir>");
        const auto train_set = load_benchmark(train_bench);
        check_compatible(config, train_set);
        check_compatible(config, set);
        const std::string table = format_ablation(run_ablation(config, train_set, set));
        prepare_output_dir(out, g.force);
        write_text(fs::path(out) / "ablation.txt", table);
        log.note("train_benchmark=" + train_bench);
        log.write(fs::path(out) / "run.log");
        std::cout << table;
      } else {
        if (generated.empty()) throw ConfigError("evaluate needs --generated <dir> (or --ablation)");
        std::vector<MusicLatent> latents;
        for (const auto& c : set) latents.push_back(load_latent(fs::path(generated) / (c.id + ".latent")));
        const auto evals = evaluate_latents(set, latents, config);
        prepare_output_dir(out, g.force);
        write_text(fs::path(out) / "report.txt", format_report(evals));
        write_text(fs::path(out) / "report.csv", format_report_csv(evals));
        log.note("generated=" + generated);
        log.write(fs::path(out) / "run.log");
        std::cout << std::left << std::setw(28) << "clip set" << std::right << std::setw(8) << "BCS"
                  << std::setw(8) << "CSD" << std::setw(8) << "BHS" << std::setw(8) << "HSD" << std::setw(8)
                  << "F1" << '\n'
                  << format_aggregate_row(bench + " (n=" + std::to_string(evals.size()) + ")", aggregate(evals));
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
