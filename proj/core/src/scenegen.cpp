#include "seld3d/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "seld3d/errors.hpp"
#include "seld3d/keyvalue.hpp"

namespace seld3d {

namespace {

constexpr double kBandLoHz = 200.0;
constexpr double kBandHiHz = 10000.0;
constexpr std::size_t kNoisePartials = 12;
constexpr std::size_t kSamplesPerFrame = 2400;  // 100 ms at 24 kHz
constexpr std::size_t kFadeSamples = 240;       // 10 ms ramps against clicks

// Mono event signal with RMS kSourceRms, band-limited to the class band.
std::vector<double> render_signal(const SceneEvent& e, int n_classes,
                                  std::size_t n_samples, int sample_rate) {
  const auto [lo, hi] = class_band_hz(e.class_id, n_classes);
  std::mt19937_64 rng(e.signal_seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  std::vector<std::pair<double, double>> partials;  // (omega, phase)
  if (e.kind == SignalKind::Tone) {
    partials.emplace_back(2.0 * std::numbers::pi * std::sqrt(lo * hi) / sample_rate,
                          phase_dist(rng));
  } else {
    std::uniform_real_distribution<double> freq_dist(lo, hi);
    for (std::size_t i = 0; i < kNoisePartials; ++i) {
      const double f = freq_dist(rng);
      partials.emplace_back(2.0 * std::numbers::pi * f / sample_rate, phase_dist(rng));
    }
  }
  const double amp = kSourceRms * std::sqrt(2.0 / static_cast<double>(partials.size()));

  std::vector<double> out(n_samples, 0.0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    double v = 0.0;
    for (const auto& [omega, phase] : partials) {
      v += std::sin(omega * static_cast<double>(i) + phase);
    }
    out[i] = amp * v;
  }

  const std::size_t fade = std::min(kFadeSamples, n_samples / 2);
  for (std::size_t i = 0; i < fade; ++i) {
    const double w =
        0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    out[i] *= w;
    out[n_samples - 1 - i] *= w;
  }
  return out;
}

bool placement_ok(const std::vector<SceneEvent>& events, const SceneEvent& cand,
                  std::size_t n_frames) {
  if (cand.offset_frame > n_frames || cand.onset_frame >= cand.offset_frame) {
    return false;
  }
  for (std::size_t f = cand.onset_frame; f < cand.offset_frame; ++f) {
    int concurrent = 1;
    for (const SceneEvent& e : events) {
      if (f < e.onset_frame || f >= e.offset_frame) continue;
      if (e.class_id == cand.class_id) return false;
      ++concurrent;
    }
    if (concurrent > 2) return false;
  }
  return true;
}

}  // namespace

std::pair<double, double> class_band_hz(int class_id, int n_classes) {
  if (n_classes <= 0 || class_id < 0 || class_id >= n_classes) {
    throw OutOfBoundsError("class_band_hz: class_id outside [0, n_classes)");
  }
  const double ratio = kBandHiHz / kBandLoHz;
  const double lo = kBandLoHz * std::pow(ratio, static_cast<double>(class_id) / n_classes);
  const double hi =
      kBandLoHz * std::pow(ratio, static_cast<double>(class_id + 1) / n_classes);
  return {lo, hi};
}

SceneSpec random_scene(std::uint64_t seed, const SceneGenConfig& cfg) {
  if (cfg.n_classes <= 0 || cfg.duration_s <= 0.0 ||
      cfg.min_duration_frames == 0 || cfg.max_duration_frames < cfg.min_duration_frames) {
    throw ConfigError("random_scene: bad generator configuration");
  }
  SceneSpec spec;
  spec.seed = seed;
  spec.n_classes = cfg.n_classes;
  spec.duration_s = cfg.duration_s;
  spec.diffuse_noise = cfg.diffuse_noise;
  const std::size_t n_frames = spec.n_label_frames();

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> class_dist(0, cfg.n_classes - 1);
  std::uniform_int_distribution<std::size_t> dur_dist(
      cfg.min_duration_frames, std::min(cfg.max_duration_frames, n_frames));
  std::uniform_real_distribution<double> az_dist(-180.0, 180.0);
  std::uniform_real_distribution<double> el_dist(-cfg.max_abs_elevation_deg,
                                                 cfg.max_abs_elevation_deg);
  std::uniform_real_distribution<double> dist_dist(cfg.min_distance_m,
                                                   cfg.max_distance_m);
  std::uniform_int_distribution<int> kind_dist(0, 1);

  for (std::size_t i = 0; i < cfg.n_events; ++i) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      SceneEvent e;
      e.class_id = class_dist(rng);
      const std::size_t dur = dur_dist(rng);
      std::uniform_int_distribution<std::size_t> onset_dist(0, n_frames - dur);
      e.onset_frame = onset_dist(rng);
      e.offset_frame = e.onset_frame + dur;
      e.direction.azimuth_deg = wrap_azimuth_deg(az_dist(rng));
      e.direction.elevation_deg = el_dist(rng);
      e.distance_m = dist_dist(rng);
      e.kind = kind_dist(rng) == 0 ? SignalKind::Tone : SignalKind::NoiseBand;
      e.signal_seed = rng();
      if (placement_ok(spec.events, e, n_frames)) {
        spec.events.push_back(e);
        break;
      }
    }
  }
  std::sort(spec.events.begin(), spec.events.end(),
            [](const SceneEvent& a, const SceneEvent& b) {
              return a.onset_frame != b.onset_frame ? a.onset_frame < b.onset_frame
                                                    : a.class_id < b.class_id;
            });
  return spec;
}

FoaClip render_audio(const SceneSpec& spec) {
  const std::size_t n = spec.n_samples();
  if (n == 0) throw EmptyClipError("render_audio: zero-length scene");

  FoaClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.samples = TensorD({kFoaChannels, n});
  double* w = clip.samples.data() + kChanW * n;
  double* y = clip.samples.data() + kChanY * n;
  double* z = clip.samples.data() + kChanZ * n;
  double* x = clip.samples.data() + kChanX * n;

  for (const SceneEvent& e : spec.events) {
    const std::size_t begin = e.onset_frame * kSamplesPerFrame;
    const std::size_t end = std::min(e.offset_frame * kSamplesPerFrame, n);
    if (begin >= end) continue;
    const std::vector<double> sig =
        render_signal(e, spec.n_classes, end - begin, spec.sample_rate);

    const Vec3 u = sph_to_cart(e.direction);
    const double g = 1.0 / std::max(e.distance_m, 0.5);
    for (std::size_t i = 0; i < sig.size(); ++i) {
      const double s = g * sig[i];
      w[begin + i] += s;
      y[begin + i] += u.y * s;
      z[begin + i] += u.z * s;
      x[begin + i] += u.x * s;
    }
  }

  if (spec.diffuse_noise) {
    std::mt19937_64 rng(spec.seed ^ 0x6e6f697365ULL);
    const double sigma = kSourceRms * std::pow(10.0, -30.0 / 20.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t c = 0; c < kFoaChannels; ++c) {
      double* ch = clip.samples.data() + c * n;
      for (std::size_t i = 0; i < n; ++i) ch[i] += noise(rng);
    }
  }
  return clip;
}

TensorD render_visual(const SceneSpec& spec) {
  constexpr std::size_t kGrid = 7;
  const std::size_t frames = spec.n_label_frames();
  TensorD out({frames, kGrid * kGrid});
  for (const SceneEvent& e : spec.events) {
    const Pixel cell = angle_to_pixel(e.direction, kGrid, kGrid);
    for (std::size_t f = e.onset_frame; f < std::min(e.offset_frame, frames); ++f) {
      for (std::size_t row = 0; row < kGrid; ++row) {
        const double dr = static_cast<double>(row) - cell.row;
        for (std::size_t col = 0; col < kGrid; ++col) {
          double dc = std::abs(static_cast<double>(col) - cell.col);
          dc = std::min(dc, static_cast<double>(kGrid) - dc);
          out(f, row * kGrid + col) += std::exp(-0.5 * (dr * dr + dc * dc));
        }
      }
    }
  }
  return out;
}

LabelSequence render_labels(const SceneSpec& spec) {
  LabelSequence labels;
  const std::size_t frames = spec.n_label_frames();
  for (std::size_t f = 0; f < frames; ++f) {
    FrameEvents frame;
    frame.frame_index = f;
    for (const SceneEvent& e : spec.events) {
      if (f >= e.onset_frame && f < e.offset_frame) {
        frame.entries.push_back({e.class_id, e.direction, e.distance_m});
      }
    }
    if (!frame.entries.empty()) {
      std::sort(frame.entries.begin(), frame.entries.end(),
                [](const LabeledEvent& a, const LabeledEvent& b) {
                  return a.class_id < b.class_id;
                });
      labels.push_back(std::move(frame));
    }
  }
  return labels;
}

void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
  KeyValueFile kv;
  kv.set_uint64("seed", spec.seed);
  kv.set_int("n_classes", spec.n_classes);
  kv.set_int("sample_rate", spec.sample_rate);
  kv.set_double("duration_s", spec.duration_s);
  kv.set_bool("diffuse_noise", spec.diffuse_noise);
  kv.set_int("n_events", static_cast<long long>(spec.events.size()));
  for (std::size_t i = 0; i < spec.events.size(); ++i) {
    const SceneEvent& e = spec.events[i];
    const std::string p = "event" + std::to_string(i) + ".";
    kv.set_int(p + "class", e.class_id);
    kv.set_int(p + "onset", static_cast<long long>(e.onset_frame));
    kv.set_int(p + "offset", static_cast<long long>(e.offset_frame));
    kv.set_double(p + "azimuth", e.direction.azimuth_deg);
    kv.set_double(p + "elevation", e.direction.elevation_deg);
    kv.set_double(p + "distance", e.distance_m);
    kv.set(p + "kind", e.kind == SignalKind::Tone ? "tone" : "noise");
    kv.set_uint64(p + "signal_seed", e.signal_seed);
  }
  kv.save(path);
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::parse_file(path);
  SceneSpec spec;
  spec.seed = kv.get_uint64("seed");
  spec.n_classes = static_cast<int>(kv.get_int("n_classes"));
  spec.sample_rate = static_cast<int>(kv.get_int("sample_rate"));
  spec.duration_s = kv.get_double("duration_s");
  spec.diffuse_noise = kv.get_bool("diffuse_noise");
  const long long n_events = kv.get_int("n_events");
  for (long long i = 0; i < n_events; ++i) {
    const std::string p = "event" + std::to_string(i) + ".";
    SceneEvent e;
    e.class_id = static_cast<int>(kv.get_int(p + "class"));
    e.onset_frame = static_cast<std::size_t>(kv.get_int(p + "onset"));
    e.offset_frame = static_cast<std::size_t>(kv.get_int(p + "offset"));
    e.direction.azimuth_deg = kv.get_double(p + "azimuth");
    e.direction.elevation_deg = kv.get_double(p + "elevation");
    e.distance_m = kv.get_double(p + "distance");
    const std::string kind = kv.get(p + "kind");
    if (kind == "tone") {
      e.kind = SignalKind::Tone;
    } else if (kind == "noise") {
      e.kind = SignalKind::NoiseBand;
    } else {
      throw ConfigError("scene spec: unknown signal kind '" + kind + "'");
    }
    e.signal_seed = kv.get_uint64(p + "signal_seed");
    spec.events.push_back(e);
  }
  return spec;
}

}  // namespace seld3d
