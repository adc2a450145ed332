#include "seld3d/training.hpp"

#include <algorithm>

#include "seld3d/errors.hpp"
#include "seld3d/features.hpp"

namespace seld3d {

void encode_labels(const LabelSequence& labels, std::size_t n_frames, int n_classes,
                   TensorD& activity, TensorD& targets) {
  const auto c = static_cast<std::size_t>(n_classes);
  activity = TensorD({n_frames, c});
  targets = TensorD({n_frames, c, 3});
  for (const FrameEvents& frame : labels) {
    if (frame.frame_index >= n_frames) {
      throw OutOfBoundsError("encode_labels: frame index beyond the clip");
    }
    const EncodedFrame enc = encode(frame, c);
    for (std::size_t i = 0; i < c; ++i) {
      activity(frame.frame_index, i) = enc.activity[i];
      targets(frame.frame_index, i, 0) = enc.targets[i].x;
      targets(frame.frame_index, i, 1) = enc.targets[i].y;
      targets(frame.frame_index, i, 2) = enc.targets[i].z;
    }
  }
}

ClipSample make_clip_sample(const SceneSpec& spec, int n_classes,
                            const MelConfig& mel_cfg) {
  ClipSample s;
  const FoaClip clip = render_audio(spec);
  s.audio_feats = compute_audio_features(clip, StftConfig{}, mel_cfg);
  s.visual_feats = render_visual(spec);
  s.labels = render_labels(spec);
  const std::size_t tv = spec.n_label_frames();
  if (s.audio_feats.dim(1) != tv * 5) {
    throw ShapeMismatchError("make_clip_sample: audio frames do not align with labels");
  }
  encode_labels(s.labels, tv, n_classes, s.activity, s.targets);
  return s;
}

LabelSequence predict_labels(const ToyNet& net, const TensorD& audio_feats,
                             const TensorD& visual_feats, double sed_threshold) {
  const ToyNetOutput out = toynet_forward(net, audio_feats, visual_feats);
  const std::size_t tv = out.sed.dim(0);
  const std::size_t c = out.sed.dim(1);
  LabelSequence labels;
  ModelFrameOutput frame;
  frame.sed.resize(c);
  frame.sce.resize(c);
  for (std::size_t t = 0; t < tv; ++t) {
    for (std::size_t i = 0; i < c; ++i) {
      frame.sed[i] = out.sed(t, i);
      frame.sce[i] = {out.sce(t, i, 0), out.sce(t, i, 1), out.sce(t, i, 2)};
    }
    FrameEvents events = decode(frame, t, sed_threshold);
    if (!events.entries.empty()) labels.push_back(std::move(events));
  }
  return labels;
}

std::vector<StepLog> train_on_clips(ToyNet& net, const std::vector<ClipSample>& clips,
                                    const TrainConfig& cfg) {
  if (clips.empty() || cfg.epochs <= 0) {
    throw ConfigError("train_on_clips: need at least one clip and one epoch");
  }
  AdamState state = make_adam_state(net);
  const long long total = static_cast<long long>(cfg.epochs) *
                          static_cast<long long>(clips.size());
  std::vector<StepLog> log;
  log.reserve(static_cast<std::size_t>(total));
  long long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const ClipSample& clip : clips) {
      const double lr = tri_stage_lr(step, total, cfg.peak_lr);
      const LossBreakdown loss = train_step(net, state, clip.audio_feats,
                                            clip.visual_feats, clip.activity,
                                            clip.targets, lr);
      log.push_back({step, lr, loss});
      ++step;
    }
  }
  return log;
}

SeldScores evaluate_on_clips(const ToyNet& net, const std::vector<ClipSample>& clips,
                             double sed_threshold) {
  SeldEvaluator eval(static_cast<std::size_t>(net.config.n_classes));
  for (const ClipSample& clip : clips) {
    const LabelSequence pred =
        predict_labels(net, clip.audio_feats, clip.visual_feats, sed_threshold);
    eval.add_labels(pred, clip.labels);
  }
  return eval.scores();
}

}  // namespace seld3d
