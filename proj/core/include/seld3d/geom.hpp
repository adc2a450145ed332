#pragma once

#include <cmath>

namespace seld3d {

/// Cartesian triple with x = front, y = left, z = up.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// Spherical direction. Azimuth is canonical in (-180, 180] with 0 = front
/// and positive to the left; elevation in [-90, 90] with positive up.
struct Direction {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

/// A decoded Cartesian vector: direction plus Euclidean length.
struct Spherical {
  Direction direction;
  double length = 0.0;
};

/// Integer pixel position on an equirectangular grid.
struct Pixel {
  int col = 0;
  int row = 0;
};

/// Wraps an arbitrary azimuth into the canonical interval (-180, 180].
double wrap_azimuth_deg(double azimuth_deg);

/// Unit vector for a spherical direction.
Vec3 sph_to_cart(const Direction& d);

/// Inverse of sph_to_cart scaled by length. Azimuth of a pole is
/// canonicalized to 0. Throws ZeroVectorError when ||v|| < 1e-12.
Spherical cart_to_sph(const Vec3& v);

/// Great-circle angle between two non-zero vectors, in [0, 180] degrees.
/// Throws ZeroVectorError on (near-)zero input.
double angular_distance_deg(const Vec3& u, const Vec3& v);

inline constexpr int kPanoramaWidth = 1920;
inline constexpr int kPanoramaHeight = 960;

/// Direction of a pixel center. Column 0 sits just inside azimuth +180,
/// row 0 just below elevation +90; azimuth decreases left to right.
/// Throws OutOfBoundsError for pixels outside the grid.
Direction pixel_to_angle(int col, int row, int width = kPanoramaWidth,
                         int height = kPanoramaHeight);

/// Pixel whose center is nearest to the direction. Azimuth wraps around
/// the grid; elevation clamps at the poles.
Pixel angle_to_pixel(const Direction& d, int width = kPanoramaWidth,
                     int height = kPanoramaHeight);

}  // namespace seld3d
