#pragma once

#include "seld3d/codec.hpp"
#include "seld3d/features.hpp"
#include "seld3d/geom.hpp"
#include "seld3d/image.hpp"
#include "seld3d/tensor.hpp"

namespace seld3d {

/// A scene-level rigid transform realizable by exact FOA channel operations:
/// optional azimuth reflection (the extension beyond the canonical set),
/// then a quarter-turn azimuth rotation, then an optional elevation flip.
struct SpatialTransform {
  int az_rotation_deg = 0;    // 0, 90, 180 or 270
  bool elevation_flip = false;
  bool az_reflection = false;

  bool operator==(const SpatialTransform& o) const = default;
};

inline constexpr int kNumCanonicalTransforms = 8;

/// The canonical 8 transforms: ids 0-3 are rotations 0/90/180/270, ids 4-7
/// the same rotations with the elevation flip. Reflections are not part of
/// the canonical set. Throws OutOfBoundsError outside [0, 8).
SpatialTransform canonical_transform(int id);

/// Applying `first` then `second` equals applying the returned transform.
SpatialTransform compose(const SpatialTransform& first,
                         const SpatialTransform& second);

/// Direction image of the transform: azimuth reflected, rotated and wrapped
/// to (-180, 180]; elevation negated when flipped.
Direction transform_direction(const Direction& d, const SpatialTransform& t);

/// Exact channel operations on an ACN-ordered FOA clip: W untouched,
/// quarter-turn rotations permute/negate X and Y, the elevation flip negates
/// Z, the reflection negates Y. No arithmetic beyond negation, so composed
/// applications are bitwise equal to applying the composed transform.
FoaClip acs_audio(const FoaClip& clip, const SpatialTransform& t);

/// Label counterpart of acs_audio; distances are untouched.
FrameEvents acs_labels(const FrameEvents& events, const SpatialTransform& t);
LabelSequence acs_labels(const LabelSequence& labels, const SpatialTransform& t);

/// Equirectangular pixel counterpart: azimuth rotation is a circular
/// horizontal shift by width * rot / 360 columns, the elevation flip a
/// vertical mirror, the reflection a horizontal mirror. Throws
/// BadAspectError unless width == 2 * height.
Image avps_frame(const Image& img, const SpatialTransform& t);

/// Same operations on 7x7 visual feature maps (row = elevation band,
/// column = azimuth band). Rotation shifts round half up: 90 deg -> 2
/// columns, 180 -> 4, 270 -> 5. Accepts one {49} map or a {T, 49} sequence.
TensorD avps_visual_features(const TensorD& features, const SpatialTransform& t);

}  // namespace seld3d
