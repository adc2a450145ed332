#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

#include "seld3d/errors.hpp"
#include "seld3d/scenegen.hpp"
#include "seld3d/toynet.hpp"
#include "seld3d/training.hpp"

using namespace seld3d;

namespace {

// Central differences at h = 1e-6 cannot resolve below ulp(loss) / 2h, about
// 1e-9 for this loss, so gradients under the 1e-4 floor are compared absolutely.
double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1e-4, std::abs(a), std::abs(b)});
}

ToyNetConfig micro_config() {
  ToyNetConfig cfg;
  cfg.n_classes = 1;
  cfg.stage_channels = {4, 4, 4, 4};
  cfg.n_mels = 16;
  cfg.attention_dim = 8;
  cfg.context_width = 8;
  cfg.head_hidden = 8;
  cfg.seed = 3;
  return cfg;
}

void random_inputs(std::uint64_t seed, int n_mels, std::size_t t_audio, int n_classes,
                   TensorD& audio, TensorD& visual, TensorD& activity, TensorD& targets) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  const std::size_t tv = t_audio / 5;
  const std::size_t c = static_cast<std::size_t>(n_classes);

  audio = TensorD({7, t_audio, static_cast<std::size_t>(n_mels)});
  visual = TensorD({tv, 49});
  activity = TensorD({tv, c});
  targets = TensorD({tv, c, 3});
  for (double& x : audio) x = u(rng);
  for (double& x : visual) x = u(rng);
  for (double& x : activity) x = bit(rng);
  for (double& x : targets) x = 2.0 * u(rng);
}

}  // namespace

TEST_SUITE_BEGIN("toynet");

TEST_CASE("construction is seeded and bounded by fan-in") {
  ToyNetConfig cfg = micro_config();
  ToyNet a = make_toynet(cfg);
  ToyNet b = make_toynet(cfg);
  cfg.seed = 4;
  ToyNet c = make_toynet(cfg);

  auto fa = toynet_fields(a.params);
  auto fb = toynet_fields(b.params);
  auto fc = toynet_fields(c.params);
  REQUIRE(fa.size() == fb.size());

  bool any_diff = false;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].name == fb[i].name);
    CHECK(fa[i].tensor->values() == fb[i].tensor->values());
    REQUIRE(fa[i].fan_in > 0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fa[i].fan_in));
    for (double w : *fa[i].tensor) CHECK(std::abs(w) <= bound);
    if (fa[i].tensor->values() != fc[i].tensor->values()) any_diff = true;
  }
  CHECK(any_diff);

  // First conv mixes the 7 input channels over a 3x3 patch.
  CHECK(fa[0].name == "conv0.weight");
  CHECK(fa[0].fan_in == 7 * 9);
}

TEST_CASE("invalid configurations are rejected") {
  ToyNetConfig cfg = micro_config();
  cfg.n_mels = 24;  // four halvings need a multiple of 16
  CHECK_THROWS_AS(make_toynet(cfg), ConfigError);

  cfg = micro_config();
  cfg.n_classes = 0;
  CHECK_THROWS_AS(make_toynet(cfg), ConfigError);

  cfg = micro_config();
  cfg.stage_channels[2] = 0;
  CHECK_THROWS_AS(make_toynet(cfg), ConfigError);
}

TEST_CASE("forward yields per-video-frame heads with sigmoid detection") {
  const ToyNet net = make_toynet(micro_config());
  TensorD audio, visual, activity, targets;
  random_inputs(11, 16, 20, 1, audio, visual, activity, targets);

  const ToyNetOutput out = toynet_forward(net, audio, visual);
  REQUIRE(out.sed.shape() == std::vector<std::size_t>{4, 1});
  REQUIRE(out.sce.shape() == std::vector<std::size_t>{4, 1, 3});
  for (double p : out.sed) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  for (double v : out.sce) CHECK(std::isfinite(v));

  const ToyNetOutput again = toynet_forward(net, audio, visual);
  CHECK(again.sed.values() == out.sed.values());
  CHECK(again.sce.values() == out.sce.values());
}

TEST_CASE("forward rejects mismatched shapes") {
  const ToyNet net = make_toynet(micro_config());
  CHECK_THROWS_AS(toynet_forward(net, TensorD({7, 21, 16}), TensorD({4, 49})),
                  ShapeMismatchError);  // 21 % 5 != 0
  CHECK_THROWS_AS(toynet_forward(net, TensorD({7, 20, 16}), TensorD({5, 49})),
                  ShapeMismatchError);
  CHECK_THROWS_AS(toynet_forward(net, TensorD({7, 20, 32}), TensorD({4, 49})),
                  ShapeMismatchError);
  CHECK_THROWS_AS(toynet_forward(net, TensorD({6, 20, 16}), TensorD({4, 49})),
                  ShapeMismatchError);
}

TEST_CASE("disabling attention bypasses the gate parameters") {
  ToyNetConfig cfg = micro_config();
  cfg.use_attention = false;
  ToyNet net = make_toynet(cfg);
  TensorD audio, visual, activity, targets;
  random_inputs(13, 16, 20, 1, audio, visual, activity, targets);

  const ToyNetOutput before = toynet_forward(net, audio, visual);
  for (auto& a : net.params.att) {
    for (auto& [name, t] : attention_fields(a)) t->fill(123.0);
  }
  const ToyNetOutput after = toynet_forward(net, audio, visual);
  CHECK(before.sed.values() == after.sed.values());
  CHECK(before.sce.values() == after.sce.values());

  // With the gate active the same parameter change must matter.
  cfg.use_attention = true;
  ToyNet gated = make_toynet(cfg);
  const ToyNetOutput g1 = toynet_forward(gated, audio, visual);
  gated.params.att[0].b_wav.fill(5.0);
  const ToyNetOutput g2 = toynet_forward(gated, audio, visual);
  CHECK(g1.sed.values() != g2.sed.values());
}

TEST_CASE("analytic gradients match central differences on a micro net") {
  ToyNetConfig cfg = micro_config();
  cfg.stage_channels = {2, 2, 2, 2};
  cfg.attention_dim = 4;
  cfg.context_width = 4;
  cfg.head_hidden = 4;
  ToyNet net = make_toynet(cfg);

  TensorD audio, visual, activity, targets;
  random_inputs(17, 16, 10, 1, audio, visual, activity, targets);

  const ToyNetBackward bw = toynet_forward_backward(net, audio, visual, activity, targets);
  CHECK(std::isfinite(bw.loss.total));

  auto loss_at = [&]() {
    const ToyNetOutput out = toynet_forward(net, audio, visual);
    const SeldLoss l = seld_loss(out.sed, out.sce, activity, targets);
    return l.breakdown.total;
  };

  // Probe a spread of parameters rather than every one; the full sweep
  // lives in the acceptance suite.
  std::mt19937_64 rng(23);
  auto fields = toynet_fields(net.params);
  auto grad_fields = toynet_fields(const_cast<ToyNetParams&>(bw.grads));
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    TensorD& w = *fields[fi].tensor;
    const TensorD& g = *grad_fields[fi].tensor;
    std::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
    for (int probe = 0; probe < 3; ++probe) {
      const std::size_t i = pick(rng);
      const double keep = w[i];
      w[i] = keep + h;
      const double up = loss_at();
      w[i] = keep - h;
      const double down = loss_at();
      w[i] = keep;
      worst = std::max(worst, rel_gap(g[i], (up - down) / (2.0 * h)));
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("adam first step moves by almost exactly minus the rate") {
  TensorD p({1}, {0.0});
  TensorD g({1}, {1.0});
  TensorD m({1}), v({1});
  adam_update_tensor(p, g, m, v, 1, 1e-3);
  // Bias corrections cancel on step one, leaving -lr / (1 + epsilon).
  CHECK(p[0] == -0.0009999999900000003);

  // Same gradient twice: the step size stays near lr while m, v accumulate.
  adam_update_tensor(p, g, m, v, 2, 1e-3);
  CHECK(p[0] == doctest::Approx(-2e-3).epsilon(1e-6));
}

TEST_CASE("adam_step walks every field and counts steps") {
  ToyNet net = make_toynet(micro_config());
  AdamState state = make_adam_state(net);
  CHECK(state.step == 0);

  ToyNetParams grads = net.params;  // any same-shaped values
  for (auto& f : toynet_fields(grads)) f.tensor->fill(0.5);

  const ToyNetParams before = net.params;
  adam_step(net.params, grads, state, 1e-3);
  CHECK(state.step == 1);

  auto pb = toynet_fields(const_cast<ToyNetParams&>(before));
  auto pa = toynet_fields(net.params);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pa[i].tensor->size(); ++j) {
      CHECK((*pa[i].tensor)[j] != (*pb[i].tensor)[j]);
    }
  }
}

TEST_CASE("tri-stage schedule ramps, holds and decays") {
  const double peak = 5e-4;
  const double floor = peak * 0.01;
  const long long total = 1000;

  CHECK(tri_stage_lr(0, total) == doctest::Approx(floor).epsilon(1e-12));
  CHECK(tri_stage_lr(50, total) ==
        doctest::Approx(floor + (peak - floor) * 0.5).epsilon(1e-12));
  CHECK(tri_stage_lr(100, total) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(tri_stage_lr(300, total) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(tri_stage_lr(500, total) == doctest::Approx(peak).epsilon(1e-12));
  CHECK(tri_stage_lr(750, total) ==
        doctest::Approx(peak * std::pow(0.01, 0.5)).epsilon(1e-12));
  CHECK(tri_stage_lr(1000, total) == doctest::Approx(floor).epsilon(1e-12));
  // Out-of-range steps clamp instead of extrapolating.
  CHECK(tri_stage_lr(2000, total) == doctest::Approx(floor).epsilon(1e-12));
  CHECK(tri_stage_lr(-5, total) == doctest::Approx(floor).epsilon(1e-12));

  for (long long s = 0; s <= total; ++s) {
    const double lr = tri_stage_lr(s, total);
    CHECK(lr <= peak + 1e-18);
    CHECK(lr >= floor - 1e-18);
  }
}

TEST_CASE("checkpoints round-trip bitwise") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "seld3d_test_ckpt";
  fs::remove_all(dir);

  ToyNetConfig cfg = micro_config();
  cfg.n_classes = 2;
  cfg.use_attention = false;
  ToyNet net = make_toynet(cfg);
  save_checkpoint(dir, net);
  ToyNet back = load_checkpoint(dir);

  CHECK(back.config.n_classes == 2);
  CHECK(back.config.n_mels == cfg.n_mels);
  CHECK(back.config.use_attention == false);
  CHECK(back.config.stage_channels == cfg.stage_channels);

  auto fa = toynet_fields(net.params);
  auto fb = toynet_fields(back.params);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].tensor->values() == fb[i].tensor->values());
  }

  CHECK_THROWS_AS(load_checkpoint(dir / "nope"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("train_step aborts on a non-finite loss") {
  ToyNet net = make_toynet(micro_config());
  AdamState state = make_adam_state(net);
  TensorD audio, visual, activity, targets;
  random_inputs(29, 16, 10, 1, audio, visual, activity, targets);
  activity.fill(1.0);  // keep the poisoned coordinates in the loss

  net.params.sce2.bias.fill(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(train_step(net, state, audio, visual, activity, targets, 1e-3),
                  NonFiniteLossError);
}

TEST_CASE("training on one clip drives the loss down") {
  ToyNet net = make_toynet(micro_config());
  AdamState state = make_adam_state(net);
  TensorD audio, visual, activity, targets;
  random_inputs(31, 16, 20, 1, audio, visual, activity, targets);

  const LossBreakdown first = train_step(net, state, audio, visual, activity, targets, 1e-3);
  LossBreakdown last = first;
  for (int i = 0; i < 60; ++i) {
    last = train_step(net, state, audio, visual, activity, targets, 1e-3);
  }
  CHECK(last.total < first.total);
  CHECK(std::isfinite(last.total));
}

TEST_CASE("encode_labels places activity and coordinates per frame") {
  LabelSequence labels;
  FrameEvents fr;
  fr.frame_index = 1;
  fr.entries.push_back({1, {0.0, 0.0}, 2.0});
  labels.push_back(fr);

  TensorD activity, targets;
  encode_labels(labels, 3, 2, activity, targets);
  REQUIRE(activity.shape() == std::vector<std::size_t>{3, 2});
  REQUIRE(targets.shape() == std::vector<std::size_t>{3, 2, 3});
  CHECK(activity(1, 1) == 1.0);
  CHECK(activity(0, 1) == 0.0);
  CHECK(targets(1, 1, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(targets(1, 1, 1)) <= 1e-14);

  FrameEvents beyond;
  beyond.frame_index = 9;
  labels.push_back(beyond);
  CHECK_THROWS_AS(encode_labels(labels, 3, 2, activity, targets), OutOfBoundsError);
}

TEST_CASE("clip samples wire the generator into the network") {
  SceneGenConfig gen;
  gen.n_classes = 2;
  gen.duration_s = 2.0;
  gen.n_events = 2;
  const SceneSpec spec = random_scene(5, gen);

  MelConfig mel;
  mel.n_mels = 32;
  const ClipSample clip = make_clip_sample(spec, 2, mel);
  REQUIRE(clip.audio_feats.shape() == std::vector<std::size_t>{7, 100, 32});
  REQUIRE(clip.visual_feats.shape() == std::vector<std::size_t>{20, 49});
  REQUIRE(clip.activity.shape() == std::vector<std::size_t>{20, 2});
  REQUIRE(clip.targets.shape() == std::vector<std::size_t>{20, 2, 3});

  ToyNetConfig cfg = micro_config();
  cfg.n_classes = 2;
  cfg.n_mels = 32;
  ToyNet net = make_toynet(cfg);

  TrainConfig tc;
  tc.epochs = 3;
  const std::vector<StepLog> log = train_on_clips(net, {clip}, tc);
  REQUIRE(log.size() == 3);
  CHECK(log[0].step == 0);
  CHECK(log[0].lr == doctest::Approx(tri_stage_lr(0, 3, tc.peak_lr)).epsilon(1e-15));
  for (const StepLog& s : log) CHECK(std::isfinite(s.loss.total));

  const SeldScores scores = evaluate_on_clips(net, {clip});
  CHECK(scores.per_class.size() == 2);

  const LabelSequence pred = predict_labels(net, clip.audio_feats, clip.visual_feats);
  for (const FrameEvents& fr : pred) {
    CHECK(fr.frame_index < 20);
    CHECK_FALSE(fr.entries.empty());
  }
}

TEST_SUITE_END();
