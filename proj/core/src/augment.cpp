#include "seld3d/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "seld3d/errors.hpp"

namespace seld3d {

namespace {

int normalize_rotation(int deg) {
  int r = deg % 360;
  if (r < 0) r += 360;
  if (r % 90 != 0) {
    throw OutOfBoundsError("transform rotation must be a multiple of 90 degrees");
  }
  return r;
}

// Shift that moves content left by `rot` degrees on a grid of `width`
// columns, rounded half up.
std::size_t rotation_shift(int rot, std::size_t width) {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(width) * rot / 360.0 + 0.5));
}

}  // namespace

SpatialTransform canonical_transform(int id) {
  if (id < 0 || id >= kNumCanonicalTransforms) {
    throw OutOfBoundsError("canonical transform id must be in [0, 8): " +
                           std::to_string(id));
  }
  SpatialTransform t;
  t.az_rotation_deg = (id % 4) * 90;
  t.elevation_flip = id >= 4;
  return t;
}

SpatialTransform compose(const SpatialTransform& first, const SpatialTransform& second) {
  const int r1 = normalize_rotation(first.az_rotation_deg);
  const int r2 = normalize_rotation(second.az_rotation_deg);
  SpatialTransform out;
  // second's reflection conjugates first's rotation into its inverse.
  out.az_rotation_deg = normalize_rotation((second.az_reflection ? -r1 : r1) + r2);
  out.elevation_flip = first.elevation_flip != second.elevation_flip;
  out.az_reflection = first.az_reflection != second.az_reflection;
  return out;
}

Direction transform_direction(const Direction& d, const SpatialTransform& t) {
  Direction out;
  double az = t.az_reflection ? -d.azimuth_deg : d.azimuth_deg;
  az += normalize_rotation(t.az_rotation_deg);
  out.azimuth_deg = wrap_azimuth_deg(az);
  out.elevation_deg = t.elevation_flip ? -d.elevation_deg : d.elevation_deg;
  return out;
}

FoaClip acs_audio(const FoaClip& clip, const SpatialTransform& t) {
  if (clip.samples.rank() != 2 || clip.samples.dim(0) != kFoaChannels) {
    throw ShapeMismatchError("acs_audio: clip samples must be {4, N}");
  }
  const std::size_t n = clip.num_samples();
  const int rot = normalize_rotation(t.az_rotation_deg);

  FoaClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = TensorD({kFoaChannels, n});

  const double* w = clip.samples.data() + kChanW * n;
  const double* y = clip.samples.data() + kChanY * n;
  const double* z = clip.samples.data() + kChanZ * n;
  const double* x = clip.samples.data() + kChanX * n;
  double* ow = out.samples.data() + kChanW * n;
  double* oy = out.samples.data() + kChanY * n;
  double* oz = out.samples.data() + kChanZ * n;
  double* ox = out.samples.data() + kChanX * n;

  std::copy(w, w + n, ow);

  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = t.az_reflection ? -y[i] : y[i];
    switch (rot) {
      case 0:
        ox[i] = xi;
        oy[i] = yi;
        break;
      case 90:
        ox[i] = -yi;
        oy[i] = xi;
        break;
      case 180:
        ox[i] = -xi;
        oy[i] = -yi;
        break;
      default:  // 270
        ox[i] = yi;
        oy[i] = -xi;
        break;
    }
  }
  if (t.elevation_flip) {
    for (std::size_t i = 0; i < n; ++i) oz[i] = -z[i];
  } else {
    std::copy(z, z + n, oz);
  }
  return out;
}

FrameEvents acs_labels(const FrameEvents& events, const SpatialTransform& t) {
  FrameEvents out;
  out.frame_index = events.frame_index;
  out.entries.reserve(events.entries.size());
  for (const LabeledEvent& e : events.entries) {
    out.entries.push_back({e.class_id, transform_direction(e.direction, t), e.distance_m});
  }
  return out;
}

LabelSequence acs_labels(const LabelSequence& labels, const SpatialTransform& t) {
  LabelSequence out;
  out.reserve(labels.size());
  for (const FrameEvents& frame : labels) out.push_back(acs_labels(frame, t));
  return out;
}

Image avps_frame(const Image& img, const SpatialTransform& t) {
  if (img.width != 2 * img.height || img.height <= 0) {
    throw BadAspectError("avps_frame: equirectangular frames need width = 2 * height");
  }
  const auto width = static_cast<std::size_t>(img.width);
  const std::size_t shift = rotation_shift(normalize_rotation(t.az_rotation_deg), width);

  Image out(img.width, img.height);
  for (int row = 0; row < img.height; ++row) {
    const int src_row = t.elevation_flip ? img.height - 1 - row : row;
    for (int col = 0; col < img.width; ++col) {
      std::size_t src_col = (static_cast<std::size_t>(col) + shift) % width;
      if (t.az_reflection) src_col = width - 1 - src_col;
      std::memcpy(out.at(col, row), img.at(static_cast<int>(src_col), src_row), 3);
    }
  }
  return out;
}

TensorD avps_visual_features(const TensorD& features, const SpatialTransform& t) {
  constexpr std::size_t kGrid = 7;
  const bool single = features.rank() == 1;
  if ((single && features.dim(0) != kGrid * kGrid) ||
      (!single && (features.rank() != 2 || features.dim(1) != kGrid * kGrid))) {
    throw ShapeMismatchError("avps_visual_features: expected {49} or {T, 49}");
  }
  const std::size_t frames = single ? 1 : features.dim(0);
  const std::size_t shift =
      rotation_shift(normalize_rotation(t.az_rotation_deg), kGrid);

  TensorD out(features.shape());
  for (std::size_t f = 0; f < frames; ++f) {
    const double* in_map = features.data() + f * kGrid * kGrid;
    double* out_map = out.data() + f * kGrid * kGrid;
    for (std::size_t row = 0; row < kGrid; ++row) {
      const std::size_t src_row = t.elevation_flip ? kGrid - 1 - row : row;
      for (std::size_t col = 0; col < kGrid; ++col) {
        std::size_t src_col = (col + shift) % kGrid;
        if (t.az_reflection) src_col = kGrid - 1 - src_col;
        out_map[row * kGrid + col] = in_map[src_row * kGrid + src_col];
      }
    }
  }
  return out;
}

}  // namespace seld3d
