#pragma once

#include <vector>

#include "seld3d/codec.hpp"
#include "seld3d/metrics.hpp"
#include "seld3d/scenegen.hpp"
#include "seld3d/toynet.hpp"

namespace seld3d {

/// Network-ready sample: input features plus frame-aligned targets.
struct ClipSample {
  TensorD audio_feats;   // {7, T, n_mels}
  TensorD visual_feats;  // {T/5, 49}
  TensorD activity;      // {T/5, C}
  TensorD targets;       // {T/5, C, 3}
  LabelSequence labels;
};

/// Binary activity and coordinate targets over n_frames 100 ms frames.
void encode_labels(const LabelSequence& labels, std::size_t n_frames, int n_classes,
                   TensorD& activity, TensorD& targets);

/// Renders a scene and packages features and targets.
ClipSample make_clip_sample(const SceneSpec& spec, int n_classes,
                            const MelConfig& mel_cfg = {});

/// Runs the net and decodes per-frame events; silent frames are omitted.
LabelSequence predict_labels(const ToyNet& net, const TensorD& audio_feats,
                             const TensorD& visual_feats, double sed_threshold = 0.5);

struct TrainConfig {
  int epochs = 200;
  double peak_lr = 5e-4;
};

struct StepLog {
  long long step = 0;
  double lr = 0.0;
  LossBreakdown loss;
};

/// One Adam step per clip per epoch under the tri-stage schedule, clips
/// visited in order. Deterministic given the net's initial state.
std::vector<StepLog> train_on_clips(ToyNet& net, const std::vector<ClipSample>& clips,
                                    const TrainConfig& cfg);

/// Scores the net's predictions against each clip's reference labels.
SeldScores evaluate_on_clips(const ToyNet& net, const std::vector<ClipSample>& clips,
                             double sed_threshold = 0.5);

}  // namespace seld3d
