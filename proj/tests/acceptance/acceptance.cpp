// End-to-end acceptance checks, one per release gate. Each check prints a
// single PASS/FAIL line; the exit code is the number of failures. Run with
// check names as arguments, or with none to run everything.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "seld3d/attention.hpp"
#include "seld3d/augment.hpp"
#include "seld3d/codec.hpp"
#include "seld3d/features.hpp"
#include "seld3d/geom.hpp"
#include "seld3d/losses.hpp"
#include "seld3d/metrics.hpp"
#include "seld3d/scenegen.hpp"
#include "seld3d/toynet.hpp"
#include "seld3d/training.hpp"

using namespace seld3d;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Central differences at h = 1e-6 carry rounding noise near ulp(loss) / 2h,
// about 1e-10 to 1e-9, so gradients under the floor are compared absolutely.
double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1e-3, std::abs(a), std::abs(b)});
}

struct CheckResult {
  bool ok = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Output coding round-trip: random events must survive encode -> decode.

CheckResult check_codec_roundtrip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> az(-180.0, 180.0);
  std::uniform_real_distribution<double> el(-90.0, 90.0);
  std::uniform_real_distribution<double> dist(0.1, 10.0);
  std::uniform_int_distribution<int> n_active(0, 3);

  const std::size_t n_classes = 3;
  int bad = 0;
  double worst_ang = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    FrameEvents fr;
    fr.frame_index = static_cast<std::size_t>(trial);
    const int k = n_active(rng);
    for (int c = 0; c < k; ++c) fr.entries.push_back({c, {az(rng), el(rng)}, dist(rng)});

    const EncodedFrame enc = encode(fr, n_classes);
    ModelFrameOutput out;
    out.sed = enc.activity;
    out.sce = enc.targets;
    const FrameEvents back = decode(out, fr.frame_index);

    if (back.entries.size() != fr.entries.size()) {
      ++bad;
      continue;
    }
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
      const LabeledEvent& a = fr.entries[i];
      const LabeledEvent& b = back.entries[i];
      const double ang =
          angular_distance_deg(sph_to_cart(a.direction), sph_to_cart(b.direction));
      const double rel = std::abs(b.distance_m - a.distance_m) / a.distance_m;
      worst_ang = std::max(worst_ang, ang);
      worst_rel = std::max(worst_rel, rel);
      if (a.class_id != b.class_id || ang > 1e-9 || rel > 1e-12) ++bad;
    }
  }
  const double secs = seconds_since(t0);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "10^4 frames, %d violations, worst dir %.2e deg, worst dist %.2e rel, "
                "%.2f s (limit 1 s)",
                bad, worst_ang, worst_rel, secs);
  return {bad == 0 && secs < 1.0, buf};
}

// ---------------------------------------------------------------------------
// Attention backward vs central differences over parameters and inputs.

CheckResult check_attention_gradcheck() {
  const auto t0 = Clock::now();
  const AttentionDims dims{8, 8, 8};
  const double h = 1e-6;
  std::mt19937_64 rng(4096);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  auto gated_sum = [](const TensorD& v, const TensorD& a, const AttentionParams& p,
                      const TensorD& c) {
    const AttentionForward fwd = att_forward(v, a, p);
    const TensorD out = apply_gate(v, fwd.v_att);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += c[i] * out[i];
    return s;
  };

  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    AttentionParams p = attention_init(dims, 7000 + static_cast<std::uint64_t>(inst));
    TensorD a({dims.n}), v({dims.k}), c({dims.k});
    for (double& x : a) x = u(rng);
    for (double& x : v) x = u(rng);
    for (double& x : c) x = u(rng);

    const AttentionForward fwd = att_forward(v, a, p);
    const AttentionGrad grad = att_backward(c, fwd.cache, p);

    auto fields = attention_fields(p);
    auto grad_fields = attention_fields(grad.params);
    for (std::size_t fi = 0; fi < fields.size(); ++fi) {
      TensorD& w = *fields[fi].second;
      const TensorD& g = *grad_fields[fi].second;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + h;
        const double up = gated_sum(v, a, p, c);
        w[i] = keep - h;
        const double down = gated_sum(v, a, p, c);
        w[i] = keep;
        worst = std::max(worst, rel_gap(g[i], (up - down) / (2.0 * h)));
      }
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double keep = a[i];
      a[i] = keep + h;
      const double up = gated_sum(v, a, p, c);
      a[i] = keep - h;
      const double down = gated_sum(v, a, p, c);
      a[i] = keep;
      worst = std::max(worst, rel_gap(grad.d_a[i], (up - down) / (2.0 * h)));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = gated_sum(v, a, p, c);
      v[i] = keep - h;
      const double down = gated_sum(v, a, p, c);
      v[i] = keep;
      worst = std::max(worst, rel_gap(grad.d_v[i], (up - down) / (2.0 * h)));
    }
  }
  const double secs = seconds_since(t0);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "20 instances (8x8x8), max rel err %.2e (limit 1e-5), %.2f s (limit 10 s)",
                worst, secs);
  return {worst <= 1e-5 && secs < 10.0, buf};
}

// ---------------------------------------------------------------------------
// Loss values against closed forms plus finite-difference gradients.

CheckResult check_loss_values() {
  bool ok = true;
  std::string detail;

  {
    TensorD pred({1, 1}, {0.5});
    TensorD truth({1, 1}, {1.0});
    const double gap = std::abs(sed_bce(pred, truth).value - 0.69314718055994530942);
    ok = ok && gap <= 1e-9;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "bce(0.5|1) off ln2 by %.1e", gap);
    detail += buf;
  }
  {
    TensorD pred({2, 2, 3});
    TensorD truth({2, 2, 3});
    TensorD activity({2, 2});
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = 3.0 + static_cast<double>(i);
    const LossValueGrad r = sce_masked_mse(pred, truth, activity);
    double gsum = 0.0;
    for (double g : r.grad) gsum += std::abs(g);
    ok = ok && r.value == 0.0 && gsum == 0.0;
    detail += ", inactive mse exactly zero";
  }
  {
    const LossBreakdown b = total_loss(0.37, 0.81);
    const double gap = std::abs(b.total - (0.37 + 2.0 * 0.81));
    ok = ok && gap <= 1e-12;
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", total off by %.1e", gap);
    detail += buf;
  }
  {
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> p(0.05, 0.95);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_int_distribution<int> bit(0, 1);
    TensorD sed({5, 3}), act({5, 3});
    TensorD sce({5, 3, 3}), tgt({5, 3, 3});
    for (double& x : sed) x = p(rng);
    for (double& x : act) x = bit(rng);
    for (double& x : sce) x = u(rng);
    for (double& x : tgt) x = u(rng);

    const SeldLoss full = seld_loss(sed, sce, act, tgt);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i = 0; i < sed.size(); ++i) {
      const double keep = sed[i];
      sed[i] = keep + h;
      const double up = seld_loss(sed, sce, act, tgt).breakdown.total;
      sed[i] = keep - h;
      const double down = seld_loss(sed, sce, act, tgt).breakdown.total;
      sed[i] = keep;
      worst = std::max(worst, rel_gap(full.sed_grad[i], (up - down) / (2.0 * h)));
    }
    for (std::size_t i = 0; i < sce.size(); ++i) {
      const double keep = sce[i];
      sce[i] = keep + h;
      const double up = seld_loss(sed, sce, act, tgt).breakdown.total;
      sce[i] = keep - h;
      const double down = seld_loss(sed, sce, act, tgt).breakdown.total;
      sce[i] = keep;
      worst = std::max(worst, rel_gap(full.sce_grad[i], (up - down) / (2.0 * h)));
    }
    ok = ok && worst <= 1e-6;
    char buf[64];
    std::snprintf(buf, sizeof(buf), ", fd err %.1e (limit 1e-6)", worst);
    detail += buf;
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// Full-network finite-difference check on every parameter of a micro net.

CheckResult check_toynet_gradcheck() {
  const auto t0 = Clock::now();
  ToyNetConfig cfg;
  cfg.n_classes = 2;
  cfg.stage_channels = {8, 8, 8, 8};
  cfg.n_mels = 16;
  cfg.attention_dim = 8;
  cfg.context_width = 16;
  cfg.head_hidden = 16;
  cfg.seed = 12;
  ToyNet net = make_toynet(cfg);

  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  TensorD audio({7, 10, 16}), visual({2, 49}), activity({2, 2}), targets({2, 2, 3});
  for (double& x : audio) x = u(rng);
  for (double& x : visual) x = u(rng);
  for (double& x : activity) x = bit(rng);
  for (double& x : targets) x = 2.0 * u(rng);
  activity(0, 0) = 1.0;  // keep at least one coordinate in play

  const ToyNetBackward bw = toynet_forward_backward(net, audio, visual, activity, targets);

  auto loss_at = [&]() {
    const ToyNetOutput out = toynet_forward(net, audio, visual);
    return seld_loss(out.sed, out.sce, activity, targets).breakdown.total;
  };

  const double h = 1e-6;
  double worst = 0.0;
  std::size_t n_params = 0;
  auto fields = toynet_fields(net.params);
  auto grad_fields = toynet_fields(const_cast<ToyNetParams&>(bw.grads));
  for (std::size_t fi = 0; fi < fields.size(); ++fi) {
    TensorD& w = *fields[fi].tensor;
    const TensorD& g = *grad_fields[fi].tensor;
    n_params += w.size();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + h;
      const double up = loss_at();
      w[i] = keep - h;
      const double down = loss_at();
      w[i] = keep;
      worst = std::max(worst, rel_gap(g[i], (up - down) / (2.0 * h)));
    }
  }
  const double secs = seconds_since(t0);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%zu parameters, max rel err %.2e (limit 1e-4), %.1f s (limit 120 s)",
                n_params, worst, secs);
  return {worst <= 1e-4 && secs < 120.0, buf};
}

// ---------------------------------------------------------------------------
// Spatial transforms: the intensity-vector DOA of transformed audio must
// land on the transformed labels, and composition must be bitwise exact.

CheckResult check_augment_consistency() {
  const auto t0 = Clock::now();

  SceneGenConfig gen;
  gen.n_classes = 3;
  gen.n_events = 3;
  gen.duration_s = 4.0;

  double err_sum[kNumCanonicalTransforms] = {};
  int err_count[kNumCanonicalTransforms] = {};

  for (std::uint64_t clip_seed = 0; clip_seed < 20; ++clip_seed) {
    const SceneSpec spec = random_scene(900 + clip_seed, gen);
    const FoaClip clip = render_audio(spec);

    for (int id = 0; id < kNumCanonicalTransforms; ++id) {
      const SpatialTransform t = canonical_transform(id);
      const Spectrogram spec_t = stft(acs_audio(clip, t));

      for (const SceneEvent& ev : spec.events) {
        // Interior STFT frames of the event, away from the fades.
        const std::size_t f0 = ev.onset_frame * 5 + 2;
        const std::size_t f1 = ev.offset_frame * 5 - 2;
        if (f1 <= f0 || f1 > spec_t.frames) continue;
        const auto band = class_band_hz(ev.class_id, spec.n_classes);
        const Vec3 doa = mean_intensity_direction(spec_t, f0, f1, spec.sample_rate,
                                                  band.first, band.second);
        const Direction want = transform_direction(ev.direction, t);
        err_sum[id] += angular_distance_deg(doa, sph_to_cart(want));
        err_count[id] += 1;
      }
    }
  }

  double worst_mean = 0.0;
  bool have_all = true;
  for (int id = 0; id < kNumCanonicalTransforms; ++id) {
    if (err_count[id] == 0) {
      have_all = false;
      continue;
    }
    worst_mean = std::max(worst_mean, err_sum[id] / err_count[id]);
  }

  // Group law: two transforms applied in sequence must equal the composite
  // with no tolerance at all.
  FoaClip small;
  small.samples = TensorD({kFoaChannels, 4096});
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& s : small.samples) s = u(rng);

  std::vector<SpatialTransform> pool;
  for (int id = 0; id < kNumCanonicalTransforms; ++id) pool.push_back(canonical_transform(id));
  pool.push_back({90, false, true});
  pool.push_back({270, true, true});

  bool bitwise = true;
  for (const SpatialTransform& t1 : pool) {
    for (const SpatialTransform& t2 : pool) {
      const FoaClip seq = acs_audio(acs_audio(small, t1), t2);
      const FoaClip once = acs_audio(small, compose(t1, t2));
      bitwise = bitwise && seq.samples.values() == once.samples.values();
    }
  }
  const double secs = seconds_since(t0);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "8 transforms x 20 clips, worst mean DOA err %.3f deg (limit 2), "
                "group law %s, %.1f s (limit 60 s)",
                worst_mean, bitwise ? "bitwise" : "BROKEN", secs);
  return {have_all && worst_mean <= 2.0 && bitwise && secs < 60.0, buf};
}

// ---------------------------------------------------------------------------
// Metrics vs a from-scratch rescore of the same frames.

struct BruteScores {
  double f = 0.0;
  std::optional<double> doae;
  std::optional<double> rde;
};

BruteScores brute_force_scores(const std::vector<std::pair<FrameEvents, FrameEvents>>& frames,
                               std::size_t n_classes) {
  std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  double ang_sum = 0.0, rel_sum = 0.0;
  std::size_t matched = 0;

  for (const auto& [pred, ref] : frames) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      const LabeledEvent* p = nullptr;
      const LabeledEvent* r = nullptr;
      for (const LabeledEvent& e : pred.entries)
        if (static_cast<std::size_t>(e.class_id) == c) p = &e;
      for (const LabeledEvent& e : ref.entries)
        if (static_cast<std::size_t>(e.class_id) == c) r = &e;

      if (p && r) {
        // Angle via the dot product; independent of the library's formula.
        const Vec3 a = sph_to_cart(p->direction);
        const Vec3 b = sph_to_cart(r->direction);
        const double cosang = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
        const double ang = std::acos(cosang) * 180.0 / M_PI;
        const double rel = std::abs(p->distance_m - r->distance_m) / r->distance_m;
        ang_sum += ang;
        rel_sum += rel;
        ++matched;
        if (ang <= 20.0 && rel <= 1.0) {
          ++tp[c];
        } else {
          ++fp[c];
          ++fn[c];
        }
      } else if (p) {
        ++fp[c];
      } else if (r) {
        ++fn[c];
      }
    }
  }

  BruteScores out;
  double f_sum = 0.0;
  std::size_t f_cnt = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    f_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    ++f_cnt;
  }
  out.f = f_cnt == 0 ? 0.0 : f_sum / static_cast<double>(f_cnt);
  if (matched > 0) {
    out.doae = ang_sum / static_cast<double>(matched);
    out.rde = rel_sum / static_cast<double>(matched);
  }
  return out;
}

CheckResult check_metrics_oracle() {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> az(-180.0, 180.0);
  std::uniform_real_distribution<double> el(-90.0, 90.0);
  std::uniform_real_distribution<double> dist(0.2, 6.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> n_cls(1, 3);
  std::uniform_int_distribution<int> n_frm(1, 20);

  // Half the reference events are near-duplicated into the prediction so
  // both threshold branches get exercised.
  std::uniform_real_distribution<double> jitter_ang(-30.0, 30.0);
  std::uniform_real_distribution<double> jitter_rel(0.0, 2.0);

  int bad = 0;
  double worst_gap = 0.0;
  for (int set = 0; set < 50; ++set) {
    const std::size_t n_classes = static_cast<std::size_t>(n_cls(rng));
    const std::size_t n_frames = static_cast<std::size_t>(n_frm(rng));

    std::vector<std::pair<FrameEvents, FrameEvents>> frames;
    SeldEvaluator ev(n_classes);
    for (std::size_t t = 0; t < n_frames; ++t) {
      FrameEvents pred, ref;
      pred.frame_index = t;
      ref.frame_index = t;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const bool in_ref = coin(rng) == 1;
        if (in_ref) {
          ref.entries.push_back(
              {static_cast<int>(c), {az(rng), el(rng)}, dist(rng)});
        }
        const int mode = coin(rng) + coin(rng);  // skip, fresh, or perturbed
        if (mode == 0) continue;
        if (in_ref && mode == 2) {
          LabeledEvent e = ref.entries.back();
          e.direction.azimuth_deg = wrap_azimuth_deg(e.direction.azimuth_deg + jitter_ang(rng));
          e.distance_m *= 1.0 + jitter_rel(rng) * 0.5;
          pred.entries.push_back(e);
        } else {
          pred.entries.push_back(
              {static_cast<int>(c), {az(rng), el(rng)}, dist(rng)});
        }
      }
      ev.add_frame(pred, ref);
      frames.emplace_back(pred, ref);
    }

    const SeldScores got = ev.scores();
    const BruteScores want = brute_force_scores(frames, n_classes);

    if (got.f != want.f) ++bad;
    if (got.doae_deg.has_value() != want.doae.has_value()) ++bad;
    if (got.rde.has_value() != want.rde.has_value()) ++bad;
    if (got.doae_deg && want.doae) {
      const double gap = std::abs(*got.doae_deg - *want.doae);
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-9) ++bad;
    }
    if (got.rde && want.rde) {
      const double gap = std::abs(*got.rde - *want.rde);
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-9) ++bad;
    }
  }

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "50 random sets, %d disagreements, worst DOAE/RDE gap %.2e (limit 1e-9)",
                bad, worst_gap);
  return {bad == 0, buf};
}

// ---------------------------------------------------------------------------
// Joint training run: the full stack must overfit 20 synthetic clips, and
// forcing the visual gate open must not do better on the same budget.

std::vector<ClipSample> overfit_clips(int n_classes, MelConfig mel) {
  SceneGenConfig gen;
  gen.n_classes = n_classes;
  gen.n_events = 4;
  gen.duration_s = 5.0;

  std::mt19937_64 seed_rng(42);
  std::vector<ClipSample> clips;
  for (int i = 0; i < 20; ++i) {
    const SceneSpec spec = random_scene(seed_rng(), gen);
    clips.push_back(make_clip_sample(spec, n_classes, mel));
  }
  return clips;
}

CheckResult check_overfit() {
  const auto t0 = Clock::now();

  MelConfig mel;
  mel.n_mels = 32;
  const std::vector<ClipSample> clips = overfit_clips(3, mel);

  ToyNetConfig cfg;
  cfg.n_classes = 3;
  cfg.stage_channels = {16, 16, 16, 16};
  cfg.n_mels = 32;
  cfg.attention_dim = 16;
  cfg.context_width = 32;
  cfg.head_hidden = 32;
  cfg.seed = 1;

  TrainConfig tc;
  tc.epochs = 200;
  tc.peak_lr = 5e-4;

  ToyNet net = make_toynet(cfg);
  train_on_clips(net, clips, tc);
  const SeldScores with_att = evaluate_on_clips(net, clips);

  cfg.use_attention = false;
  ToyNet plain = make_toynet(cfg);
  train_on_clips(plain, clips, tc);
  const SeldScores no_att = evaluate_on_clips(plain, clips);

  const double secs = seconds_since(t0);
  const double doae = with_att.doae_deg.value_or(1e9);
  const double rde = with_att.rde.value_or(1e9);

  const bool ok = with_att.f >= 0.8 && doae <= 10.0 && rde <= 0.3 &&
                  no_att.f <= with_att.f && secs < 600.0;

  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "20 clips x 200 epochs: F %.3f (floor 0.8), DOAE %.2f deg (cap 10), "
                "RDE %.3f (cap 0.3); gate-forced-open F %.3f (must not exceed); "
                "%.0f s (limit 600 s)",
                with_att.f, doae, rde, no_att.f, secs);
  return {ok, buf};
}

// ---------------------------------------------------------------------------
// Feature tensor shapes for the reference 10 s clip.

CheckResult check_feature_shapes() {
  FoaClip clip;
  clip.samples = TensorD({kFoaChannels, 240000});
  for (std::size_t i = 0; i < 240000; ++i) {
    clip.samples(kChanW, i) = 0.1 * std::sin(0.07 * static_cast<double>(i));
  }

  const TensorD feats = compute_audio_features(clip);
  const bool audio_ok = feats.shape() == std::vector<std::size_t>{7, 500, 64};

  TensorD visual({100, 49});
  const TensorD repeated = repeat_visual(visual);
  const bool visual_ok = repeated.shape() == std::vector<std::size_t>{500, 49};

  TensorD time_major({500, 8});
  const TensorD pooled = pool_audio_to_video_rate(time_major);
  const bool pooled_ok = pooled.shape() == std::vector<std::size_t>{100, 8};

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "audio stack %zux%zux%zu (want 7x500x64), visual repeat %zux%zu "
                "(want 500x49), pooled rows %zu (want 100)",
                feats.dim(0), feats.dim(1), feats.dim(2), repeated.dim(0),
                repeated.dim(1), pooled.dim(0));
  return {audio_ok && visual_ok && pooled_ok, buf};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
      {"codec_roundtrip", check_codec_roundtrip},
      {"attention_gradcheck", check_attention_gradcheck},
      {"loss_values", check_loss_values},
      {"toynet_gradcheck", check_toynet_gradcheck},
      {"augment_consistency", check_augment_consistency},
      {"metrics_oracle", check_metrics_oracle},
      {"overfit", check_overfit},
      {"feature_shapes", check_feature_shapes},
  };

  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) wanted.emplace_back(argv[i]);

  int failures = 0;
  int ran = 0;
  for (const auto& [name, fn] : checks) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), name) == wanted.end()) {
      continue;
    }
    ++ran;
    CheckResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", r.ok ? "PASS" : "FAIL", name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.ok) ++failures;
  }

  if (ran == 0) {
    std::fprintf(stderr, "no matching checks; known names:\n");
    for (const auto& [name, fn] : checks) std::fprintf(stderr, "  %s\n", name.c_str());
    return 2;
  }
  return failures;
}
