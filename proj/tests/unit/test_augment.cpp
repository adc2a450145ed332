#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "seld3d/augment.hpp"
#include "seld3d/errors.hpp"
#include "seld3d/features.hpp"
#include "seld3d/geom.hpp"
#include "seld3d/image.hpp"
#include "seld3d/scenegen.hpp"

using namespace seld3d;

namespace {

FoaClip random_clip(std::uint64_t seed, std::size_t n = 256) {
  FoaClip clip;
  clip.samples = TensorD({kFoaChannels, n});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& s : clip.samples) s = u(rng);
  return clip;
}

}  // namespace

TEST_SUITE_BEGIN("augment");

TEST_CASE("canonical transforms enumerate rotations then flipped rotations") {
  CHECK(canonical_transform(0) == SpatialTransform{0, false, false});
  CHECK(canonical_transform(1) == SpatialTransform{90, false, false});
  CHECK(canonical_transform(2) == SpatialTransform{180, false, false});
  CHECK(canonical_transform(3) == SpatialTransform{270, false, false});
  CHECK(canonical_transform(4) == SpatialTransform{0, true, false});
  CHECK(canonical_transform(7) == SpatialTransform{270, true, false});
  CHECK_THROWS_AS(canonical_transform(-1), OutOfBoundsError);
  CHECK_THROWS_AS(canonical_transform(8), OutOfBoundsError);
}

TEST_CASE("quarter-turn channel ops are exact permutations with sign") {
  const FoaClip clip = random_clip(3);
  const std::size_t n = clip.samples.dim(1);

  const FoaClip r90 = acs_audio(clip, {90, false, false});
  const FoaClip r180 = acs_audio(clip, {180, false, false});
  const FoaClip r270 = acs_audio(clip, {270, false, false});
  const FoaClip flip = acs_audio(clip, {0, true, false});
  const FoaClip refl = acs_audio(clip, {0, false, true});

  for (std::size_t i = 0; i < n; ++i) {
    const double w = clip.samples(kChanW, i);
    const double x = clip.samples(kChanX, i);
    const double y = clip.samples(kChanY, i);
    const double z = clip.samples(kChanZ, i);

    CHECK(r90.samples(kChanW, i) == w);
    CHECK(r90.samples(kChanX, i) == -y);
    CHECK(r90.samples(kChanY, i) == x);
    CHECK(r90.samples(kChanZ, i) == z);

    CHECK(r180.samples(kChanX, i) == -x);
    CHECK(r180.samples(kChanY, i) == -y);

    CHECK(r270.samples(kChanX, i) == y);
    CHECK(r270.samples(kChanY, i) == -x);

    CHECK(flip.samples(kChanZ, i) == -z);
    CHECK(flip.samples(kChanX, i) == x);

    CHECK(refl.samples(kChanY, i) == -y);
    CHECK(refl.samples(kChanX, i) == x);
    CHECK(refl.samples(kChanW, i) == w);
  }
}

TEST_CASE("composed audio transforms are bitwise equal to the composition") {
  const FoaClip clip = random_clip(9);
  std::vector<SpatialTransform> pool;
  for (int id = 0; id < kNumCanonicalTransforms; ++id) {
    pool.push_back(canonical_transform(id));
  }
  pool.push_back({90, false, true});
  pool.push_back({180, true, true});

  for (const SpatialTransform& t1 : pool) {
    for (const SpatialTransform& t2 : pool) {
      const FoaClip seq = acs_audio(acs_audio(clip, t1), t2);
      const FoaClip once = acs_audio(clip, compose(t1, t2));
      CHECK(seq.samples.values() == once.samples.values());
    }
  }
}

TEST_CASE("compose identities") {
  const SpatialTransform id{0, false, false};
  const SpatialTransform r90{90, false, false};
  const SpatialTransform flip{0, true, false};
  const SpatialTransform refl{0, false, true};

  CHECK(compose(r90, r90) == SpatialTransform{180, false, false});
  CHECK(compose(flip, flip) == id);
  CHECK(compose(refl, refl) == id);
  CHECK(compose(id, r90) == r90);
  // Rotating then reflecting negates the earlier rotation.
  CHECK(compose(r90, refl) == SpatialTransform{270, false, true});
}

TEST_CASE("transform_direction composes like the transforms") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> az(-180.0, 180.0);
  std::uniform_real_distribution<double> el(-90.0, 90.0);

  for (int trial = 0; trial < 200; ++trial) {
    const Direction d{az(rng), el(rng)};
    const SpatialTransform t1 = canonical_transform(trial % 8);
    const SpatialTransform t2 = canonical_transform((trial / 8) % 8);
    const Direction seq = transform_direction(transform_direction(d, t1), t2);
    const Direction once = transform_direction(d, compose(t1, t2));
    const double gap =
        angular_distance_deg(sph_to_cart(seq), sph_to_cart(once));
    CHECK(gap <= 1e-9);
  }
}

TEST_CASE("transform_direction hand cases") {
  const Direction d{30.0, 20.0};
  CHECK(transform_direction(d, {90, false, false}).azimuth_deg == doctest::Approx(120.0));
  CHECK(transform_direction(d, {0, true, false}).elevation_deg == doctest::Approx(-20.0));
  CHECK(transform_direction(d, {0, false, true}).azimuth_deg == doctest::Approx(-30.0));
  // Reflection happens before the rotation.
  CHECK(transform_direction(d, {90, false, true}).azimuth_deg == doctest::Approx(60.0));
  CHECK(transform_direction({170.0, 0.0}, {90, false, false}).azimuth_deg ==
        doctest::Approx(-100.0));
}

TEST_CASE("audio transform moves the intensity direction with the labels") {
  SceneSpec spec;
  spec.n_classes = 1;
  spec.duration_s = 1.0;
  SceneEvent ev;
  ev.class_id = 0;
  ev.onset_frame = 0;
  ev.offset_frame = 10;
  ev.direction = {35.0, 25.0};
  ev.distance_m = 1.0;
  ev.kind = SignalKind::NoiseBand;
  ev.signal_seed = 77;
  spec.events.push_back(ev);

  const FoaClip clip = render_audio(spec);
  for (int id = 0; id < kNumCanonicalTransforms; ++id) {
    const SpatialTransform t = canonical_transform(id);
    const FoaClip moved = acs_audio(clip, t);
    const Vec3 doa = mean_intensity_direction(stft(moved), 5, 45, spec.sample_rate);
    const Direction want = transform_direction(ev.direction, t);
    CHECK(angular_distance_deg(doa, sph_to_cart(want)) < 2.0);
  }
}

TEST_CASE("label transform keeps classes, frames and distances") {
  FrameEvents fr;
  fr.frame_index = 5;
  fr.entries.push_back({2, {40.0, 10.0}, 3.25});
  fr.entries.push_back({0, {-120.0, -35.0}, 0.75});

  const FrameEvents out = acs_labels(fr, {180, true, false});
  CHECK(out.frame_index == 5);
  REQUIRE(out.entries.size() == 2);
  CHECK(out.entries[0].class_id == 2);
  CHECK(out.entries[0].distance_m == 3.25);
  CHECK(out.entries[0].direction.azimuth_deg == doctest::Approx(-140.0));
  CHECK(out.entries[0].direction.elevation_deg == doctest::Approx(-10.0));
  CHECK(out.entries[1].direction.azimuth_deg == doctest::Approx(60.0));
}

TEST_CASE("panorama pixels follow the direction transform") {
  Image img(1920, 960);
  img.at(100, 200)[0] = 255;

  for (int id = 0; id < kNumCanonicalTransforms; ++id) {
    const SpatialTransform t = canonical_transform(id);
    const Image out = avps_frame(img, t);
    REQUIRE(out.width == 1920);
    REQUIRE(out.height == 960);

    int found_col = -1, found_row = -1;
    for (int r = 0; r < out.height && found_row < 0; ++r)
      for (int c = 0; c < out.width; ++c)
        if (out.at(c, r)[0] == 255) {
          found_col = c;
          found_row = r;
          break;
        }
    REQUIRE(found_col >= 0);

    const Direction want = transform_direction(pixel_to_angle(100, 200), t);
    const Direction got = pixel_to_angle(found_col, found_row);
    CHECK(angular_distance_deg(sph_to_cart(got), sph_to_cart(want)) <= 1e-9);
  }
}

TEST_CASE("avps rejects non-equirectangular aspect ratios") {
  Image square(100, 100);
  CHECK_THROWS_AS(avps_frame(square, {90, false, false}), BadAspectError);
}

TEST_CASE("7x7 visual maps shift columns with rounding half up") {
  TensorD map({49});
  map[1 * 7 + 6] = 1.0;  // row 1, col 6

  // Column shifts for 90/180/270 degrees on 7 columns: 2, 4, 5.
  const TensorD r90 = avps_visual_features(map, {90, false, false});
  CHECK(r90[1 * 7 + 4] == 1.0);
  const TensorD r180 = avps_visual_features(map, {180, false, false});
  CHECK(r180[1 * 7 + 2] == 1.0);
  const TensorD r270 = avps_visual_features(map, {270, false, false});
  CHECK(r270[1 * 7 + 1] == 1.0);

  const TensorD flip = avps_visual_features(map, {0, true, false});
  CHECK(flip[5 * 7 + 6] == 1.0);

  double total = 0.0;
  for (double v : r270) total += v;
  CHECK(total == 1.0);
}

TEST_CASE("visual map sequences transform frame by frame") {
  TensorD seq({3, 49});
  seq(0, 3 * 7 + 0) = 1.0;
  seq(2, 0 * 7 + 3) = 1.0;
  const TensorD out = avps_visual_features(seq, {0, true, false});
  REQUIRE(out.shape() == std::vector<std::size_t>{3, 49});
  CHECK(out(0, 3 * 7 + 0) == 1.0);  // middle row is its own mirror
  CHECK(out(2, 6 * 7 + 3) == 1.0);
  CHECK_THROWS_AS(avps_visual_features(TensorD({48}), {0, true, false}),
                  ShapeMismatchError);
}

TEST_SUITE_END();
