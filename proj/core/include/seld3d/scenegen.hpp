#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "seld3d/codec.hpp"
#include "seld3d/features.hpp"
#include "seld3d/geom.hpp"
#include "seld3d/tensor.hpp"

namespace seld3d {

enum class SignalKind { Tone, NoiseBand };

/// One static free-field source. Frames are 100 ms units and the event is
/// active over [onset_frame, offset_frame).
struct SceneEvent {
  int class_id = 0;
  std::size_t onset_frame = 0;
  std::size_t offset_frame = 0;
  Direction direction;
  double distance_m = 1.0;
  SignalKind kind = SignalKind::Tone;
  std::uint64_t signal_seed = 0;
};

/// Full description of a synthetic scene; rendering is deterministic.
struct SceneSpec {
  std::uint64_t seed = 0;
  int n_classes = 3;
  int sample_rate = 24000;
  double duration_s = 10.0;
  bool diffuse_noise = false;
  std::vector<SceneEvent> events;

  std::size_t n_label_frames() const {
    return static_cast<std::size_t>(duration_s * 10.0 + 0.5);
  }
  std::size_t n_samples() const {
    return static_cast<std::size_t>(duration_s * sample_rate + 0.5);
  }
};

struct SceneGenConfig {
  int n_classes = 3;
  std::size_t n_events = 4;
  double duration_s = 10.0;
  double min_distance_m = 0.5;
  double max_distance_m = 5.0;
  double max_abs_elevation_deg = 60.0;
  std::size_t min_duration_frames = 10;
  std::size_t max_duration_frames = 30;
  bool diffuse_noise = false;
};

/// Each class occupies its own geometric slice of [200, 10000] Hz so that
/// classes stay spectrally identifiable.
std::pair<double, double> class_band_hz(int class_id, int n_classes);

/// Nominal per-source RMS on the W channel at 1 m.
inline constexpr double kSourceRms = 0.05;

/// Samples a valid scene: at most 2 concurrent events and at most one
/// event per class at any frame. Events that cannot be placed after a
/// bounded number of tries are dropped, so the result may hold fewer than
/// cfg.n_events events.
SceneSpec random_scene(std::uint64_t seed, const SceneGenConfig& cfg = {});

/// Sums every event's mono signal through the first-order SN3D gains
/// (W = 1, Y = cos el sin az, Z = sin el, X = cos el cos az), scaled by
/// 1 / max(distance, 0.5); optionally adds -30 dB diffuse noise.
FoaClip render_audio(const SceneSpec& spec);

/// One 7x7 map per 100 ms video frame: a unit-height Gaussian bump
/// (sigma = 1 cell, circular in azimuth) at each active source's cell,
/// summed over sources; silent frames are all zero. Shape {frames, 49}.
TensorD render_visual(const SceneSpec& spec);

/// Exact 100 ms-grid labels; frames without active events are omitted.
LabelSequence render_labels(const SceneSpec& spec);

/// Scene specs serialize as flat key=value text.
void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);
SceneSpec load_scene_spec(const std::filesystem::path& path);

}  // namespace seld3d
