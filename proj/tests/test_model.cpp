#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "gaca/model.hpp"
#include "support.hpp"

using namespace gaca;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.gare.scales = 2;
  c.gare.base_period = 4.0;
  c.gare.bins = 4;
  c.gare.dim = 3;
  c.gare.weight_hidden = 4;
  c.gare.attn_hidden = 3;
  c.field.blocks = 1;
  c.field.hidden = 8;
  c.field.heads = 2;
  c.field.latent_len = 4;
  c.field.latent_dim = 2;
  c.field.rhythm_dim = 3;
  c.field.cond_dim = 5;
  c.joints = 2;
  return c;
}

ClipData tiny_clip(const GacaModel& model, Index frames, std::uint64_t seed) {
  Rng rng(seed);
  const PoseSequence pose = gaca::testing::random_pose(frames, model.config.joints, 2, rng);
  MusicLatent latent{gaca::testing::random_matrix(model.config.field.latent_len, model.config.field.latent_dim, rng)};
  ConditioningFeatures features{gaca::testing::random_matrix(3, model.config.field.cond_dim, rng)};
  return prepare_clip("clip_" + std::to_string(seed), pose, features, latent, model.bank);
}

// Benchmark-like clips whose latent pulses sit on the dance beats.
std::vector<ClipData> beat_clips(const GacaModel& model, Index count) {
  std::vector<ClipData> out;
  for (Index i = 0; i < count; ++i) {
    SynthDanceConfig dc;
    dc.tempo_bpm = 60.0 + 30.0 * static_cast<double>(i);
    dc.duration_s = 2.0;
    dc.joints = model.config.joints;
    dc.beat_joints = 1;
    dc.seed = static_cast<std::uint64_t>(i);
    const auto [pose, beats] = synth_dance(dc);
    const MusicLatent latent =
        synth_latent(beats, model.config.field.latent_len, model.config.field.latent_dim, 100 + i);
    const ConditioningFeatures features = synth_conditioning(3, model.config.field.cond_dim, 200 + i);
    out.push_back(prepare_clip("clip_" + std::to_string(i), pose, features, latent, model.bank));
  }
  return out;
}

std::vector<Tensor> reachable_leaves(const GacaModel& model) {
  std::vector<Tensor> out;
  for (const auto& e : model.params().entries()) {
    if (e.name.find(".null_") == std::string::npos) out.push_back(e.tensor);
  }
  return out;
}

Array grad_of(const std::vector<Array>& grads, const ParamSet& set, const std::string& name) {
  const auto& entries = set.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return grads[i];
  }
  FAIL("no parameter named " << name);
  return {};
}

}  // namespace

TEST_CASE("composite loss gradient through field, queries and extractor matches finite differences") {
  const GacaModel model = init_model(tiny_config(), 1);
  const ClipData clip = tiny_clip(model, 8, 2);
  Rng rng(3);
  const RowMatrix z0 = normal_matrix(4, 2, 1.0, rng);
  const auto fd = gaca::testing::finite_difference_check(
      [&] { return cfm_loss(model, clip, 0.6, z0); }, reachable_leaves(model));
  CHECK(fd.max_rel_error < 1e-4);
  CHECK(fd.max_abs_numeric > 0.0);
}

TEST_CASE("baseline variants also differentiate correctly") {
  for (RhythmSource source : {RhythmSource::global_motion, RhythmSource::binary_diff}) {
    for (Alignment alignment : {Alignment::cata, Alignment::mean_pool}) {
      ModelConfig c = tiny_config();
      c.rhythm = source;
      c.alignment = alignment;
      const GacaModel model = init_model(c, 4);
      const ClipData clip = tiny_clip(model, 6, 5);
      Rng rng(6);
      const RowMatrix z0 = normal_matrix(4, 2, 1.0, rng);
      CAPTURE(to_string(source));
      CAPTURE(to_string(alignment));
      const auto fd = gaca::testing::finite_difference_check(
          [&] { return cfm_loss(model, clip, 0.3, z0); }, reachable_leaves(model));
      CHECK(fd.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("one sample with conditions gives nonzero gradient in every parameter group; null tokens get none") {
  const GacaModel model = init_model(tiny_config(), 7);
  const ClipData clip = tiny_clip(model, 10, 8);
  Rng rng(9);
  const RowMatrix z0 = normal_matrix(4, 2, 1.0, rng);
  const ParamSet set = model.params();
  Tape tape;
  TapeScope scope(tape);
  const Tensor loss = cfm_loss(model, clip, 0.5, z0);
  const auto grads = tape.gradients(loss, set.tensors());
  double gare = 0.0, field = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const std::string& name = set.entries()[i].name;
    if (name.rfind("gare.", 0) == 0) gare = std::max(gare, grads[i].abs().maxCoeff());
    if (name.rfind("field.", 0) == 0) field = std::max(field, grads[i].abs().maxCoeff());
  }
  CHECK(gare > 0.0);
  CHECK(grad_of(grads, set, "cata.queries").abs().maxCoeff() > 0.0);
  CHECK(field > 0.0);
  CHECK(grad_of(grads, set, "field.null_rhythm").abs().maxCoeff() == 0.0);
  CHECK(grad_of(grads, set, "field.null_cond").abs().maxCoeff() == 0.0);
}

TEST_CASE("training with cond_drop_prob = 0 never moves the null tokens") {
  GacaModel model = init_model(tiny_config(), 10);
  const Array rhythm_before = model.field.null_rhythm.value();
  const Array cond_before = model.field.null_cond.value();
  TrainConfig tc;
  tc.epochs = 3;
  tc.cond_drop_prob = 0.0;
  tc.learning_rate = 1e-2;
  train(model, {tiny_clip(model, 8, 11), tiny_clip(model, 8, 12)}, tc);
  CHECK((model.field.null_rhythm.value() - rhythm_before).abs().maxCoeff() == 0.0);
  CHECK((model.field.null_cond.value() - cond_before).abs().maxCoeff() == 0.0);
}

TEST_CASE("training: loss decreases, seeded runs repeat exactly, parallel equals sequential") {
  GacaModel a = init_model(tiny_config(), 13);
  GacaModel b = init_model(tiny_config(), 13);
  GacaModel c = init_model(tiny_config(), 13);
  const auto data = beat_clips(a, 4);
  TrainConfig tc;
  tc.epochs = 25;
  tc.learning_rate = 3e-3;
  tc.draws_per_clip = 4;
  tc.seed = 14;
  const TrainResult ra = train(a, data, tc);
  const TrainResult rb = train(b, data, tc);
  tc.jobs = 3;
  const TrainResult rc = train(c, data, tc);
  REQUIRE(ra.epoch_loss.size() == 25);
  for (double l : ra.epoch_loss) CHECK(std::isfinite(l));
  CHECK(ra.epoch_loss.back() < ra.epoch_loss.front());
  CHECK(ra.epoch_loss == rb.epoch_loss);
  CHECK(ra.epoch_loss == rc.epoch_loss);
  const auto pa = a.all_params().tensors(), pc = c.all_params().tensors();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK((pa[i].value() - pc[i].value()).abs().maxCoeff() == 0.0);

  // perturbing one rhythm row moves the trained field's output
  const Conditioning cond = make_conditioning(a, data[0], false);
  RowMatrix rhythm = cond.rhythm.matrix();
  const Tensor z = Tensor::constant(RowMatrix::Zero(4, 2));
  const Tensor base = velocity(a.field, z, 0.5, cond);
  rhythm.row(1).array() += 0.5;
  const Tensor moved = velocity(a.field, z, 0.5, {Tensor::constant(rhythm), cond.features});
  CHECK((base.value() - moved.value()).abs().maxCoeff() > 1e-6);
}

TEST_CASE("training: empty dataset, bad config and non-finite loss are reported") {
  GacaModel model = init_model(tiny_config(), 15);
  TrainConfig tc;
  CHECK_THROWS_AS(train(model, {}, tc), ConfigError);
  TrainConfig bad = tc;
  bad.cond_drop_prob = 1.0;
  CHECK_THROWS_AS(train(model, {tiny_clip(model, 8, 16)}, bad), ConfigError);

  model.field.head.bias.mutable_value()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(model, {tiny_clip(model, 8, 16)}, tc);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 1") != std::string::npos);
    CHECK(msg.find("batch 1") != std::string::npos);
  }
}

TEST_CASE("cfm_loss rejects bad t and shape mismatch") {
  const GacaModel model = init_model(tiny_config(), 17);
  const ClipData clip = tiny_clip(model, 8, 18);
  CHECK_THROWS_AS(cfm_loss(model, clip, 1.5, RowMatrix::Zero(4, 2)), ConfigError);
  CHECK_THROWS_AS(cfm_loss(model, clip, 0.5, RowMatrix::Zero(3, 2)), ConfigError);
}

TEST_CASE("generate: deterministic, shape-correct, unconditional ignores the clip") {
  const GacaModel model = init_model(tiny_config(), 19);
  const ClipData a = tiny_clip(model, 8, 20), b = tiny_clip(model, 8, 21);
  SampleConfig sc;
  sc.steps = 6;
  sc.seed = 22;
  const MusicLatent ga = generate(model, a, sc);
  CHECK(ga.length() == 4);
  CHECK(ga.dim() == 2);
  CHECK((generate(model, a, sc).data - ga.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((generate(model, b, sc).data - ga.data).cwiseAbs().maxCoeff() > 0.0);
  const MusicLatent ua = generate(model, a, sc, GenerationMode::unconditional);
  const MusicLatent ub = generate(model, b, sc, GenerationMode::unconditional);
  CHECK((ua.data - ub.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("variant parameter sets and config validation") {
  ModelConfig c = tiny_config();
  c.rhythm = RhythmSource::none;
  for (const auto& e : init_model(c, 1).params().entries()) CHECK(e.name.rfind("field.", 0) == 0);
  c.rhythm = RhythmSource::gare;
  c.alignment = Alignment::mean_pool;
  bool has_queries = false;
  for (const auto& e : init_model(c, 1).params().entries()) has_queries |= e.name == "cata.queries";
  CHECK_FALSE(has_queries);
  c.field.rhythm_dim = 4;
  CHECK_THROWS_AS(init_model(c, 1), ConfigError);
  CHECK(parse_rhythm_source("binary") == RhythmSource::binary_diff);
  CHECK_THROWS_AS(parse_alignment("global"), ConfigError);
}
