#include <benchmark/benchmark.h>

#include <random>

#include "seld3d/attention.hpp"
#include "seld3d/augment.hpp"
#include "seld3d/features.hpp"
#include "seld3d/metrics.hpp"
#include "seld3d/scenegen.hpp"
#include "seld3d/toynet.hpp"
#include "seld3d/training.hpp"

using namespace seld3d;

namespace {

SceneSpec bench_scene(double duration_s) {
  SceneGenConfig gen;
  gen.duration_s = duration_s;
  return random_scene(1234, gen);
}

void BM_RenderAudio(benchmark::State& state) {
  const SceneSpec spec = bench_scene(static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_audio(spec));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(spec.n_samples()));
}
BENCHMARK(BM_RenderAudio)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& state) {
  const FoaClip clip = render_audio(bench_scene(static_cast<double>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stft(clip));
  }
}
BENCHMARK(BM_Stft)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_AudioFeatures(benchmark::State& state) {
  const FoaClip clip = render_audio(bench_scene(10.0));
  MelConfig mel;
  mel.n_mels = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_audio_features(clip, {}, mel));
  }
}
BENCHMARK(BM_AudioFeatures)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AcsAudio(benchmark::State& state) {
  const FoaClip clip = render_audio(bench_scene(10.0));
  const SpatialTransform t = canonical_transform(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(acs_audio(clip, t));
  }
}
BENCHMARK(BM_AcsAudio)->Unit(benchmark::kMillisecond);

void BM_AttentionForward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const AttentionParams p = attention_init({n, 49, 16}, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorD a({n}), v({49});
  for (double& x : a) x = u(rng);
  for (double& x : v) x = u(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(att_forward(v, a, p));
  }
}
BENCHMARK(BM_AttentionForward)->Arg(32)->Arg(128)->Arg(512);

void BM_AttentionBackward(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const AttentionParams p = attention_init({n, 49, 16}, 3);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorD a({n}), v({49}), d({49});
  for (double& x : a) x = u(rng);
  for (double& x : v) x = u(rng);
  for (double& x : d) x = u(rng);
  const AttentionForward fwd = att_forward(v, a, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(att_backward(d, fwd.cache, p));
  }
}
BENCHMARK(BM_AttentionBackward)->Arg(32)->Arg(128)->Arg(512);

void BM_TrainStep(benchmark::State& state) {
  SceneGenConfig gen;
  gen.duration_s = 5.0;
  const SceneSpec spec = random_scene(77, gen);
  MelConfig mel;
  mel.n_mels = 32;
  const ClipSample clip = make_clip_sample(spec, gen.n_classes, mel);

  ToyNetConfig cfg;
  cfg.n_classes = gen.n_classes;
  const int w = static_cast<int>(state.range(0));
  cfg.stage_channels = {w, w, w, w};
  cfg.n_mels = 32;
  cfg.attention_dim = 16;
  ToyNet net = make_toynet(cfg);
  AdamState adam = make_adam_state(net);

  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(net, adam, clip.audio_feats, clip.visual_feats,
                                        clip.activity, clip.targets, 1e-4));
  }
}
BENCHMARK(BM_TrainStep)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_EvaluatorAddFrame(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> az(-180.0, 180.0);
  std::uniform_real_distribution<double> el(-90.0, 90.0);
  std::uniform_real_distribution<double> dist(0.5, 5.0);

  FrameEvents pred, ref;
  for (int c = 0; c < 3; ++c) {
    pred.entries.push_back({c, {az(rng), el(rng)}, dist(rng)});
    ref.entries.push_back({c, {az(rng), el(rng)}, dist(rng)});
  }

  SeldEvaluator ev(3);
  for (auto _ : state) {
    ev.add_frame(pred, ref);
  }
  state.SetItemsProcessed(state.iterations() * 3);
}
BENCHMARK(BM_EvaluatorAddFrame);

}  // namespace

BENCHMARK_MAIN();
