// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
// Usage: acceptance <path-to-gaca-binary> [scratch-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "gaca/benchmark.hpp"
#include "gaca/cata.hpp"
#include "gaca/cfm.hpp"
#include "gaca/gare.hpp"
#include "gaca/metrics.hpp"
#include "gaca/model.hpp"
#include "support.hpp"

using namespace gaca;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// 1. composite gradient on 4 frames, 2 joints, T_m = 2
Outcome gradient_integrity() {
  const auto start = Clock::now();
  ModelConfig c;
  c.gare.scales = 2;
  c.gare.bins = 4;
  c.gare.dim = 3;
  c.gare.weight_hidden = 4;
  c.gare.attn_hidden = 3;
  c.field.blocks = 1;
  c.field.hidden = 8;
  c.field.heads = 2;
  c.field.latent_len = 2;
  c.field.latent_dim = 2;
  c.field.rhythm_dim = 3;
  c.field.cond_dim = 4;
  c.joints = 2;
  const GacaModel model = init_model(c, 1);
  Rng rng(2);
  const PoseSequence pose = gaca::testing::random_pose(4, 2, 2, rng);
  const MusicLatent latent{gaca::testing::random_matrix(2, 2, rng)};
  const ConditioningFeatures features{gaca::testing::random_matrix(3, 4, rng)};
  const ClipData clip = prepare_clip("probe", pose, features, latent, model.bank);
  const RowMatrix z0 = normal_matrix(2, 2, 1.0, rng);

  std::vector<Tensor> leaves;
  bool has_gare = false, has_queries = false, has_field = false;
  for (const auto& e : model.params().entries()) {
    if (e.name.find(".null_") != std::string::npos) continue;
    has_gare |= e.name.rfind("gare.", 0) == 0;
    has_queries |= e.name == "cata.queries";
    has_field |= e.name.rfind("field.", 0) == 0;
    leaves.push_back(e.tensor);
  }
  const auto fd = gaca::testing::finite_difference_check([&] { return cfm_loss(model, clip, 0.4, z0); }, leaves, 1e-5);
  const double elapsed = seconds_since(start);
  const bool ok = has_gare && has_queries && has_field && fd.max_rel_error < 1e-4 && elapsed < 10.0;
  return {ok, fmt("max relative error %.2e over %.0f entries (< 1e-4), %.2f s (< 10 s)", fd.max_rel_error,
                  static_cast<double>(fd.checked), elapsed)};
}

PoseSequence permute_joints(const PoseSequence& p, const std::vector<Index>& perm) {
  PoseSequence q = p;
  for (Index t = 0; t < p.frames; ++t) {
    for (Index j = 0; j < p.joints; ++j) {
      for (Index k = 0; k < p.coords; ++k) q.at(t, j, k) = p.at(t, perm[j], k);
    }
  }
  return q;
}

// 2. GARE invariants on randomized instances
Outcome gare_invariants() {
  const auto start = Clock::now();
  Rng rng(3);
  Index violations = 0;
  const int instances = 1000;
  for (int trial = 0; trial < instances; ++trial) {
    const Index scales = 1 + static_cast<Index>(rng() % 3), bins = 2 + static_cast<Index>(rng() % 7);
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    const Index frames = 3 + static_cast<Index>(rng() % 30), joints = 1 + static_cast<Index>(rng() % 6);
    const WaveletBank bank = build_wavelet_bank(scales, 4.0);
    GareConfig gc;
    gc.scales = scales;
    gc.bins = bins;
    gc.dim = dim;
    gc.weight_hidden = 5;
    gc.attn_hidden = 4;
    Rng prng(rng());
    const GareParams params = init_gare_params(gc, prng);
    const PoseSequence pose = gaca::testing::random_pose(frames, joints, 2, rng);

    const GareInputs in = prepare_gare_inputs(pose, bank);
    RhythmIntermediates mid;
    const RhythmEmbedding r = extract_rhythm(in, params, &mid);
    bool ok = r.length() == frames && r.data.value().allFinite();
    ok &= (mid.weights.matrix().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9;
    for (Index t = 0; t < frames - 1; ++t) {
      for (Index s = 0; s < scales; ++s) {
        double mass = 0.0, expected = 0.0;
        for (Index k = 0; k < bins; ++k) mass += mid.histograms.at(t, s * bins + k);
        for (Index j = 0; j < joints; ++j) expected += mid.weights.at(t, j) * in.components.magnitude(t, j * scales + s);
        ok &= std::abs(mass - expected) <= 1e-9;
      }
    }
    ok &= (r.data.matrix().row(frames - 1) - r.data.matrix().row(frames - 2)).cwiseAbs().maxCoeff() == 0.0;

    std::vector<Index> perm(static_cast<std::size_t>(joints));
    for (Index j = 0; j < joints; ++j) perm[static_cast<std::size_t>(j)] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    const RhythmEmbedding rp = extract_rhythm(prepare_gare_inputs(permute_joints(pose, perm), bank), params);
    ok &= (r.data.matrix() - rp.data.matrix()).cwiseAbs().maxCoeff() <= 1e-9;
    if (!ok) ++violations;
  }
  const double elapsed = seconds_since(start);
  return {violations == 0 && elapsed < 30.0,
          fmt("%.0f violations in %.0f instances, %.2f s (< 30 s)", static_cast<double>(violations), instances, elapsed)};
}

// 3. CATA identity regime, convex hull, hand softmax
Outcome cata_oracle() {
  Rng rng(4);
  Index identity_failures = 0, hull_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index t = 1 + static_cast<Index>(rng() % 20), d = 1 + static_cast<Index>(rng() % 6);
    ContextQueries q = init_context_queries(t, d, rng);
    const RowMatrix r = gaca::testing::random_matrix(t, d, rng);
    const AlignedRhythm out = align({Tensor::constant(r), 30.0}, q);
    if ((out.data.matrix() - r).cwiseAbs().maxCoeff() != 0.0) ++identity_failures;
  }
  Index segments = 0;
  while (segments < 1000) {
    const Index t = 2 + static_cast<Index>(rng() % 40), m = 1 + static_cast<Index>(rng() % t);
    const Index d = 1 + static_cast<Index>(rng() % 5);
    ContextQueries q = init_context_queries(m, d, rng);
    q.data.mutable_value() *= 1.0 + 20.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const RowMatrix r = gaca::testing::random_matrix(t, d, rng);
    const AlignedRhythm out = align({Tensor::constant(r), 30.0}, q);
    for (Index i = 0; i < m && segments < 1000; ++i, ++segments) {
      const Span s = out.spans[static_cast<std::size_t>(i)];
      const auto block = r.middleRows(s.start, s.size());
      for (Index k = 0; k < d; ++k) {
        if (out.data.at(i, k) < block.col(k).minCoeff() - 1e-12 || out.data.at(i, k) > block.col(k).maxCoeff() + 1e-12) {
          ++hull_violations;
        }
      }
    }
  }
  const RowMatrix rows = (RowMatrix(2, 2) << 1, 0, 0, 1).finished();
  const Tensor hand = attention_pool(Tensor::constant(rows), Tensor::constant((RowMatrix(1, 2) << 10, 0).finished()));
  const double a = std::exp(10 / std::sqrt(2.0));
  const double hand_err = std::max(std::abs(hand.at(0, 0) - a / (a + 1)), std::abs(hand.at(0, 1) - 1 / (a + 1)));
  const bool ok = identity_failures == 0 && hull_violations == 0 && hand_err < 1e-6;
  return {ok, fmt("identity failures %.0f, hull violations %.0f in 1000 segments, hand softmax error %.1e (< 1e-6)",
                  static_cast<double>(identity_failures), static_cast<double>(hull_violations), hand_err)};
}

// 4. Euler on v = -z
Outcome sampler_accuracy() {
  SampleConfig sc;
  sc.seed = 5;
  const VelocityFn decay = [](const RowMatrix& z, double) { return RowMatrix(-z); };
  const RowMatrix z0 = [] {
    Rng rng(5);
    return normal_matrix(6, 4, 1.0, rng);
  }();
  auto gap = [&](Index steps) {
    sc.steps = steps;
    const MusicLatent z = euler_sample({}, decay, 6, 4, sc);
    return ((z.data - z0 * std::exp(-1.0)).array() / z0.array()).abs().maxCoeff();
  };
  const double g32 = gap(32), g64 = gap(64);
  const double ratio = g32 / g64;
  const bool ok = g32 < 0.006 && ratio >= 1.7 && ratio <= 2.3;
  return {ok, fmt("32-step per-component gap %.5f (< 0.006), gap ratio 32/64 steps %.3f (in [1.7, 2.3])", g32, ratio)};
}

Index optimal_matching(const std::vector<Index>& gen, const std::vector<Index>& truth, Index window) {
  const std::size_t n = gen.size(), m = truth.size();
  std::vector<std::vector<int>> memo(n + 1, std::vector<int>(std::size_t{1} << m, -1));
  std::function<int(std::size_t, unsigned)> best = [&](std::size_t i, unsigned used) -> int {
    if (i == n) return 0;
    int& slot = memo[i][used];
    if (slot >= 0) return slot;
    int value = best(i + 1, used);
    for (std::size_t j = 0; j < m; ++j) {
      if (!((used >> j) & 1U) && std::abs(gen[i] - truth[j]) <= window) {
        value = std::max(value, 1 + best(i + 1, used | (1U << j)));
      }
    }
    return slot = value;
  };
  return best(0, 0);
}

// 5. metric hand case and brute-force matching
Outcome metric_oracle() {
  const BeatScores hand = beat_scores({{10, 20, 30, 40}, 100, 30.0}, {{10, 20, 50}, 100, 30.0}, 2);
  const bool hand_ok = std::abs(hand.bcs - 50.00) < 5e-3 && std::abs(hand.bhs - 66.67) < 5e-3 &&
                       std::abs(hand.f1 - 57.14) < 5e-3;
  Rng rng(6);
  Index mismatches = 0;
  auto grid = [&] {
    std::set<Index> s;
    const auto count = static_cast<std::size_t>(rng() % 9);
    while (s.size() < count) s.insert(static_cast<Index>(rng() % 50));
    return std::vector<Index>(s.begin(), s.end());
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = grid(), t = grid();
    const Index w = static_cast<Index>(rng() % 5);
    if (match_beats(g, t, w) != optimal_matching(g, t, w)) ++mismatches;
  }
  return {hand_ok && mismatches == 0,
          fmt("hand case BCS %.2f BHS %.2f F1 %.2f, greedy vs optimal mismatches %.0f / 500", hand.bcs, hand.bhs,
              hand.f1, static_cast<double>(mismatches))};
}

// 6. beat recovery and dominant scale ordering
Outcome rhythm_recovery() {
  Index inexact = 0, clips = 0;
  for (double tempo = 60.0; tempo <= 180.0; tempo += 10.0) {
    SynthDanceConfig c;
    c.tempo_bpm = tempo;
    c.noise_std = 0.0;
    c.seed = static_cast<std::uint64_t>(tempo);
    const auto [pose, beats] = synth_dance(c);
    if (detect_dance_beats(pose).beat_frames != beats.beat_frames) ++inexact;
    ++clips;
  }
  const WaveletBank bank = build_wavelet_bank(4, 4.0);
  auto dominant = [&](double tempo) {
    SynthDanceConfig c;
    c.tempo_bpm = tempo;
    c.noise_std = 0.0;
    const auto [pose, beats] = synth_dance(c);
    Index arg = 0;
    wavelet_scale_energy(prepare_gare_inputs(pose, bank).wavelet, pose.joints, bank.scales()).maxCoeff(&arg);
    return bank.periods[static_cast<std::size_t>(arg)];
  };
  const double slow = dominant(60), fast = dominant(150);
  return {inexact == 0 && fast < slow,
          fmt("%.0f / %.0f noise-free clips recovered exactly, dominant period 150 BPM %.0f < 60 BPM %.0f frames",
              static_cast<double>(clips - inexact), static_cast<double>(clips), fast, slow)};
}

// 7. desk-scale conditioning experiment
Outcome conditioning_experiment() {
  const auto start = Clock::now();
  RunConfig config;  // desk defaults
  config.seed = 2024;
  const auto all = synth_benchmark(config, 24, config.seed);
  const std::vector<BenchmarkClip> train_clips(all.begin(), all.begin() + 16), held_out(all.begin() + 16, all.end());

  auto fit = [&](const RunConfig& rc) {
    return train_model(rc, prepare_clips(train_clips, build_wavelet_bank(rc.scales, rc.base_period), rc.jobs));
  };
  auto f1 = [&](const GacaModel& model, const RunConfig& rc, GenerationMode mode) {
    const auto eval = prepare_clips(held_out, model.bank, rc.jobs);
    return aggregate(evaluate_latents(held_out, generate_all(model, eval, rc, mode), rc)).mean_f1;
  };

  const GacaModel full = fit(config);
  const double full_f1 = f1(full, config, GenerationMode::guided);
  const double uncond_f1 = f1(full, config, GenerationMode::unconditional);
  RunConfig cond_only = config;
  cond_only.rhythm = RhythmSource::none;
  const double cond_f1 = f1(fit(cond_only), cond_only, GenerationMode::guided);
  const double elapsed = seconds_since(start);
  const bool ok = full_f1 >= uncond_f1 + 15.0 && full_f1 >= cond_f1 && elapsed < 900.0;
  return {ok, fmt("F1 +GARE+CATA %.2f, unconditional %.2f (gap >= 15), conditioning only %.2f, %.0f s (< 900 s)",
                  full_f1, uncond_f1, cond_f1, elapsed)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// File contents keyed by relative path; wall-clock lines in run logs are dropped.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string body = slurp(e.path());
    const std::string name = e.path().filename().string();
    if (name == "run.log" || e.path().extension() == ".log") {
      std::istringstream lines(body);
      std::string kept, line;
      while (std::getline(lines, line)) {
        if (line.rfind("wall_time_s=", 0) != 0) kept += line + "\n";
      }
      body = kept;
    }
    out[fs::relative(e.path(), root).string()] = body;
  }
  return out;
}

// 8. every CLI command twice, byte-compared
Outcome cli_determinism(const std::string& binary, const fs::path& scratch) {
  const fs::path work = scratch / "work";
  const fs::path cfg = scratch / "tiny.cfg";
  fs::create_directories(scratch);
  std::ofstream(cfg) << "duration_s=2\njoints=4\nbeat_joints=2\ncond_len=3\ncond_dim=4\nlatent_len=10\n"
                        "latent_dim=3\nscales=2\nbins=4\nrhythm_dim=6\nweight_hidden=4\nattn_hidden=4\n"
                        "blocks=1\nhidden=8\nheads=2\nepochs=2\ndraws_per_clip=2\nsample_steps=4\nseed=9\n";
  const std::string base = "\"" + binary + "\" --config \"" + cfg.string() + "\" ";
  const std::string w = work.string();
  const std::vector<std::string> commands{
      "synth --out " + w + "/bench --clips 4",
      "synth --out " + w + "/train_bench --clips 4 --seed 10",
      "extract --benchmark " + w + "/bench --out " + w + "/rhythm",
      "align --benchmark " + w + "/bench --out " + w + "/aligned",
      "train --benchmark " + w + "/train_bench --out " + w + "/model",
      "extract --benchmark " + w + "/bench --model " + w + "/model --out " + w + "/rhythm_trained",
      "generate --benchmark " + w + "/bench --model " + w + "/model --out " + w + "/gen --clicks",
      "generate --benchmark " + w + "/bench --model " + w + "/model --out " + w + "/gen_u --unconditional",
      "evaluate --benchmark " + w + "/bench --generated " + w + "/gen --out " + w + "/report",
      "evaluate --ablation --train " + w + "/train_bench --benchmark " + w + "/bench --out " + w + "/ablation",
  };
  std::map<std::string, std::string> runs[2];
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(work);
    fs::create_directories(work);
    for (const auto& c : commands) {
      const std::string full = base + c + " > \"" + (scratch / "stdout.txt").string() + "\" 2>&1";
      if (std::system(full.c_str()) != 0) return {false, "command failed: gaca " + c + "\n" + slurp(scratch / "stdout.txt")};
      runs[run]["stdout:" + c] = slurp(scratch / "stdout.txt");
    }
    for (auto& [k, v] : snapshot(work)) runs[run][k] = v;
  }
  Index differing = 0;
  std::string first;
  for (const auto& [k, v] : runs[0]) {
    const auto it = runs[1].find(k);
    if (it == runs[1].end() || it->second != v) {
      if (differing++ == 0) first = k;
    }
  }
  if (runs[0].size() != runs[1].size()) ++differing;
  Outcome o{differing == 0, fmt("%.0f commands, %.0f outputs compared, %.0f differ", static_cast<double>(commands.size()),
                                static_cast<double>(runs[0].size()), static_cast<double>(differing))};
  if (!first.empty()) o.detail += " (first: " + first + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <gaca binary> [scratch dir]\n";
    return 2;
  }
  const std::string binary = argv[1];
  const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "gaca_acceptance";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient integrity", gradient_integrity},
      {"rhythm extractor invariants", gare_invariants},
      {"alignment oracle", cata_oracle},
      {"sampler accuracy", sampler_accuracy},
      {"metric oracle", metric_oracle},
      {"rhythm recovery", rhythm_recovery},
      {"desk conditioning experiment", conditioning_experiment},
      {"CLI determinism", [&] { return cli_determinism(binary, scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
