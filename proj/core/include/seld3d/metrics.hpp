#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "seld3d/codec.hpp"

namespace seld3d {

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Location-and-distance-dependent scores. doae_deg and rde are averaged
/// over all class-matched pairs and absent when nothing matched.
struct SeldScores {
  double f = 0.0;
  std::optional<double> doae_deg;
  std::optional<double> rde;
  std::vector<ClassCounts> per_class;
  std::size_t n_matched = 0;
};

/// Accumulates per-frame detection counts and localization errors.
///
/// A same-class prediction/reference pair in a frame always matches (the
/// class-wise format holds at most one of each); the pair is a true
/// positive iff its angular error is within the angular threshold and its
/// relative distance error within the distance threshold, and otherwise
/// counts one false positive and one false negative. Matched pairs feed the
/// DOA and relative distance errors regardless of the thresholds. The
/// F-score is the macro average of 2TP/(2TP+FP+FN) over classes that have
/// any counts.
class SeldEvaluator {
public:
  explicit SeldEvaluator(std::size_t n_classes, double angular_threshold_deg = 20.0,
                         double relative_distance_threshold = 1.0);

  /// Accumulates one frame. Throws DuplicateClassError when either side
  /// repeats a class and OutOfBoundsError on class ids outside the range.
  void add_frame(const FrameEvents& pred, const FrameEvents& ref);

  /// Aligns the two sequences by frame_index and accumulates the union of
  /// their frames.
  void add_labels(const LabelSequence& pred, const LabelSequence& ref);

  std::size_t frames_seen() const { return frames_seen_; }

  /// Throws EmptyEvalError when no frame was ever added.
  SeldScores scores() const;

private:
  double angular_threshold_deg_;
  double relative_distance_threshold_;
  std::vector<ClassCounts> counts_;
  double angular_error_sum_ = 0.0;
  double relative_error_sum_ = 0.0;
  std::size_t n_matched_ = 0;
  std::size_t frames_seen_ = 0;
};

/// One-shot evaluation. n_classes 0 infers 1 + the largest class id seen.
SeldScores evaluate_labels(const LabelSequence& pred, const LabelSequence& ref,
                           std::size_t n_classes = 0);

/// key=value form of the scores (f, doae_deg, rde, n_matched, per-class
/// counts); localization fields read "none" when nothing matched.
std::string format_score_report(const SeldScores& s);

/// Per-class counts as CSV rows "class,tp,fp,fn,f" with a header line.
std::string format_score_csv(const SeldScores& s);

}  // namespace seld3d
