#include "seld3d/geom.hpp"

#include <algorithm>
#include <numbers>

#include "seld3d/errors.hpp"

namespace seld3d {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kZeroNormEps = 1e-12;

}  // namespace

double wrap_azimuth_deg(double azimuth_deg) {
  double az = std::fmod(azimuth_deg, 360.0);
  if (az <= -180.0) {
    az += 360.0;
  } else if (az > 180.0) {
    az -= 360.0;
  }
  return az;
}

Vec3 sph_to_cart(const Direction& d) {
  const double az = d.azimuth_deg * kRadPerDeg;
  const double el = d.elevation_deg * kRadPerDeg;
  const double cos_el = std::cos(el);
  return {cos_el * std::cos(az), cos_el * std::sin(az), std::sin(el)};
}

Spherical cart_to_sph(const Vec3& v) {
  const double n = v.norm();
  if (n < kZeroNormEps) {
    throw ZeroVectorError("cart_to_sph: vector norm below 1e-12, no decodable direction");
  }
  // atan2(0, 0) == 0, which canonicalizes the azimuth at the poles.
  const double az = (v.x == 0.0 && v.y == 0.0) ? 0.0 : std::atan2(v.y, v.x) * kDegPerRad;
  // asin(z/n) amplifies rounding by tan(el) near the poles; atan2 against the
  // horizontal magnitude keeps the elevation well-conditioned everywhere.
  const double el = std::atan2(v.z, std::hypot(v.x, v.y)) * kDegPerRad;
  return {{wrap_azimuth_deg(az), el}, n};
}

double angular_distance_deg(const Vec3& u, const Vec3& v) {
  if (u.norm() < kZeroNormEps || v.norm() < kZeroNormEps) {
    throw ZeroVectorError("angular_distance_deg: zero-length input");
  }
  // atan2 of cross and dot stays well-conditioned near 0 and 180 degrees,
  // where the acos form loses half the significant digits.
  const Vec3 cross{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z,
                   u.x * v.y - u.y * v.x};
  return std::atan2(cross.norm(), u.dot(v)) * kDegPerRad;
}

Direction pixel_to_angle(int col, int row, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw OutOfBoundsError("pixel_to_angle: non-positive grid size");
  }
  if (col < 0 || col >= width || row < 0 || row >= height) {
    throw OutOfBoundsError("pixel_to_angle: pixel outside grid");
  }
  const double az = 180.0 - 360.0 * (col + 0.5) / width;
  const double el = 90.0 - 180.0 * (row + 0.5) / height;
  return {az, el};
}

Pixel angle_to_pixel(const Direction& d, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw OutOfBoundsError("angle_to_pixel: non-positive grid size");
  }
  const double col_f = (180.0 - wrap_azimuth_deg(d.azimuth_deg)) / 360.0 * width - 0.5;
  const double row_f = (90.0 - d.elevation_deg) / 180.0 * height - 0.5;
  long long col = std::llround(col_f) % width;
  if (col < 0) col += width;
  const long long row = std::clamp<long long>(std::llround(row_f), 0, height - 1);
  return {static_cast<int>(col), static_cast<int>(row)};
}

}  // namespace seld3d
