#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "seld3d/geom.hpp"

namespace seld3d {

/// One active source: class plus where it is.
struct LabeledEvent {
  int class_id = 0;
  Direction direction;
  double distance_m = 0.0;
};

/// All active sources in one 100 ms frame. The class-wise single-track
/// format allows at most one entry per class.
struct FrameEvents {
  std::size_t frame_index = 0;
  std::vector<LabeledEvent> entries;
};

/// Frames sorted by frame_index; silent frames are omitted.
using LabelSequence = std::vector<FrameEvents>;

/// Per-frame network output: C activity probabilities plus C source
/// coordinate vectors whose direction is the DOA and whose length is the
/// distance in meters.
struct ModelFrameOutput {
  std::vector<double> sed;
  std::vector<Vec3> sce;

  std::size_t num_classes() const { return sed.size(); }
};

/// Training target for one frame: binary activity plus coordinate vectors.
struct EncodedFrame {
  std::vector<double> activity;
  std::vector<Vec3> targets;

  std::size_t num_classes() const { return activity.size(); }
};

/// Active class c gets activity 1 and targets[c] = sph_to_cart(direction)
/// * distance; inactive classes are all zero. Throws DuplicateClassError
/// when two entries share a class and OutOfBoundsError when a class_id
/// falls outside [0, num_classes).
EncodedFrame encode(const FrameEvents& events, std::size_t num_classes);

/// A class is active iff sed[c] >= sed_threshold and ||sce[c]|| >= 1e-6;
/// the distance is then ||sce[c]|| and the DOA its direction. Degenerate
/// vectors decode as inactive rather than erroring.
FrameEvents decode(const ModelFrameOutput& out, std::size_t frame_index = 0,
                   double sed_threshold = 0.5);

inline constexpr double kDecodeNormFloor = 1e-6;

/// Label CSV rows are "frame,class,source,azimuth,elevation,distance" with
/// source fixed at 0, one row per active event, frames in 100 ms units.
/// Values print with round-trip precision; no header row.
std::string format_label_csv(const LabelSequence& labels);

/// Inverse of format_label_csv. Rows may arrive in any order; the result is
/// sorted by frame then class. Throws FormatError on malformed rows or
/// non-positive distances and DuplicateClassError on same-frame same-class
/// duplicates.
LabelSequence parse_label_csv(const std::string& text);

LabelSequence read_label_csv(const std::filesystem::path& path);
void write_label_csv(const std::filesystem::path& path, const LabelSequence& labels);

}  // namespace seld3d
